#include "wfem/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "wfem/analysis.hpp"
#include "wfem/errors.hpp"
#include "wfem/io.hpp"
#include "wfem/linear_solvers.hpp"
#include "wfem/parallel.hpp"
#include "wfem/registry.hpp"
#include "wfem/weight_diagnostics.hpp"

namespace wfem {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct Context {
  std::string command;
  json config;
  fs::path out_dir;
  std::uint64_t seed = kDefaultSeed;
  bool verbose = false;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  Provenance provenance() const { return {command, config_hash(config), seed}; }
};

// ---- config access -------------------------------------------------------

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object())
    throw ValidationError(where + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw ValidationError(where + ": unknown key '" + key + "'");
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    throw ValidationError(where + ": missing key '" + key + "'");
  return j.at(key);
}

double get_number(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key))
    return fallback;
  const json& v = j.at(key);
  if (!v.is_number() || !std::isfinite(v.get<double>()))
    throw ValidationError(where + ": '" + key + "' must be a finite number");
  return v.get<double>();
}

int get_int(const json& j, const char* key, int fallback, const std::string& where) {
  if (!j.contains(key))
    return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw ValidationError(where + ": '" + key + "' must be an integer");
  return v.get<int>();
}

bool get_bool(const json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key))
    return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean())
    throw ValidationError(where + ": '" + key + "' must be a boolean");
  return v.get<bool>();
}

json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError(path + ": cannot open config");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()) && i + 1 < e.byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << path << ":" << line << ":" << col << ": invalid JSON";
    throw ValidationError(msg.str());
  }
}

Mesh build_domain(const json& j) {
  const std::string where = "domain";
  if (j.contains("structured_square")) {
    allow_keys(j, where, {"structured_square"});
    const int n = get_int(j, "structured_square", 0, where);
    if (n < 1)
      throw ValidationError("domain: structured_square must be a positive integer");
    return structured_square(n);
  }
  allow_keys(j, where, {"polygon", "initial_h"});
  const json& poly = require(j, "polygon", where);
  const ConvexPolygon polygon =
      polygon_from_json(poly.is_array() ? json{{"vertices", poly}} : poly);
  const double h = get_number(j, "initial_h", 0.0, where);
  if (!(h > 0.0))
    throw ValidationError("domain: initial_h must be positive");
  return triangulate(polygon, h);
}

ConvexPolygon build_region(const json& cfg) {
  if (!cfg.contains("region"))
    return ConvexPolygon::unit_square();
  const json& r = cfg.at("region");
  return polygon_from_json(r.is_array() ? json{{"vertices", r}} : r);
}

WeightSpec build_weight(const json& cfg) {
  return cfg.contains("weight") ? WeightSpec::from_json(cfg.at("weight")) : WeightSpec::constant(1.0);
}

double build_p(const json& cfg) {
  const double p = get_number(cfg, "p", 2.0, "config");
  if (!(p > 1.0))
    throw ValidationError("config: 'p' must be greater than 1");
  return p;
}

SingularIntegrationPolicy build_policy(const json& cfg) {
  if (!cfg.contains("policy"))
    return {};
  return SingularIntegrationPolicy::from_json(cfg.at("policy"));
}

Model build_model(const json& cfg) {
  if (!cfg.contains("model"))
    return LinearCoefficient::identity();
  const json& m = cfg.at("model");
  if (m.contains("nonlinearity")) {
    allow_keys(m, "model", {"nonlinearity"});
    return make_registered_nonlinearity(m.at("nonlinearity"));
  }
  allow_keys(m, "model", {"coefficient"});
  return make_coefficient(require(m, "coefficient", "model"));
}

struct Data {
  ProblemData problem;
  std::optional<ScalarFunction> exact;
};

Data build_data(const json& cfg, const Model& model, double p, const WeightSpec& w) {
  Data d;
  d.problem.p = p;
  d.problem.omega = w;
  const json data = cfg.value("data", json::object());
  allow_keys(data, "data", {"f", "g", "exact"});
  d.problem.f = make_vector_function(data.value("f", json("zero")), &model);
  d.problem.g = make_source_function(data.value("g", json("zero")));
  if (data.contains("exact"))
    d.exact = make_scalar_function(data.at("exact"));
  return d;
}

QuasilinearOptions build_solver(const json& cfg, const SingularIntegrationPolicy& policy) {
  QuasilinearOptions opt;
  opt.policy = policy;
  if (!cfg.contains("solver"))
    return opt;
  const json& s = cfg.at("solver");
  allow_keys(s, "solver", {"method", "rel_tol", "sigma", "max_iterations", "continuation"});
  const std::string method = s.value("method", std::string("newton"));
  if (method == "newton")
    opt.method = QuasilinearMethod::newton;
  else if (method == "zarantonello")
    opt.method = QuasilinearMethod::zarantonello;
  else
    throw ValidationError("solver: unknown method '" + method + "'");
  opt.rel_tol = get_number(s, "rel_tol", opt.rel_tol, "solver");
  opt.sigma = get_number(s, "sigma", opt.sigma, "solver");
  opt.max_iterations = get_int(s, "max_iterations", 0, "solver");
  opt.continuation = get_bool(s, "continuation", false, "solver");
  if (!(opt.rel_tol > 0.0) || opt.max_iterations < 0)
    throw ValidationError("solver: rel_tol must be positive and max_iterations >= 0");
  return opt;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "-"; }

json deterministic(const SolveReport& r) {
  json j = r.to_json();
  j.erase("wall_time");
  return j;
}

// ---- subcommands ---------------------------------------------------------

int cmd_solve(Context& ctx) {
  const json& cfg = ctx.config;
  allow_keys(cfg, "config",
             {"domain", "p", "weight", "data", "model", "solver", "policy", "refinements", "seed",
              "export_matrix"});
  Mesh mesh = build_domain(require(cfg, "domain", "config"));
  for (int i = get_int(cfg, "refinements", 0, "config"); i > 0; --i)
    mesh = refine_uniform(mesh);
  const double p = build_p(cfg);
  const WeightSpec w = build_weight(cfg);
  const SingularIntegrationPolicy policy = build_policy(cfg);
  const Model model = build_model(cfg);
  const Data data = build_data(cfg, model, p, w);
  const QuasilinearOptions solver = build_solver(cfg, policy);

  validate_problem_data(mesh, data.problem, policy);
  const FemSpace space(mesh);
  const Solution sol =
      std::holds_alternative<LinearCoefficient>(model)
          ? solve_linear(space, std::get<LinearCoefficient>(model), data.problem, policy)
          : solve_quasilinear(space, std::get<NonlinearityPtr>(model), data.problem, solver);

  json result = {{"h", mesh.h()},
                 {"dofs", space.num_dofs()},
                 {"report", deterministic(sol.report)},
                 {"grad_norm",
                  weighted_norm(sol.field, p, w, NormKind::gradient, policy)}};
  std::vector<VtkScalar> fields{{"u_h", sol.field.vertex_values()}};
  std::optional<double> eg;
  if (data.exact) {
    eg = weighted_error_norm(*data.exact, sol.field, p, w, NormKind::gradient, policy);
    result["err_grad"] = *eg;
    result["err_val"] = weighted_error_norm(*data.exact, sol.field, p, w, NormKind::value, policy);
    Vector ex(static_cast<Eigen::Index>(mesh.num_vertices()));
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
      ex[static_cast<Eigen::Index>(v)] = data.exact->value(mesh.vertex(v));
    fields.push_back({"u_exact", ex});
  }
  const Provenance prov = ctx.provenance();
  write_json(ctx.out_dir / "solve.json", result, prov);
  write_vtk(ctx.out_dir / "solution.vtk", mesh, fields, prov);
  if (get_bool(cfg, "export_matrix", false, "config")) {
    const LinearCoefficient A = std::holds_alternative<LinearCoefficient>(model)
                                    ? std::get<LinearCoefficient>(model)
                                    : asymptotic_coefficient(std::get<NonlinearityPtr>(model));
    write_matrix_market(ctx.out_dir / "stiffness.mtx", assemble_stiffness(space, A), prov);
  }
  *ctx.out << "level 0 h=" << fmt(mesh.h()) << " dofs=" << space.num_dofs()
           << " iterations=" << sol.report.iterations << " err_grad=" << fmt(eg) << '\n';
  if (ctx.verbose)
    for (double r : sol.report.residual_history)
      *ctx.err << "residual " << r << '\n';
  return kExitOk;
}

int cmd_convergence(Context& ctx) {
  const json& cfg = ctx.config;
  allow_keys(cfg, "config",
             {"domain", "p", "weight", "data", "model", "solver", "policy", "levels", "seed"});
  const Mesh mesh = build_domain(require(cfg, "domain", "config"));
  const double p = build_p(cfg);
  const WeightSpec w = build_weight(cfg);
  const Model model = build_model(cfg);
  const Data data = build_data(cfg, model, p, w);
  StudyOptions opt;
  opt.policy = build_policy(cfg);
  opt.solver = build_solver(cfg, opt.policy);
  const int levels = get_int(cfg, "levels", 5, "config");
  if (levels < 3)
    throw ValidationError("config: 'levels' must be at least 3");
  opt.on_level = [&](const LevelResult& l) {
    *ctx.out << "level " << l.level << " h=" << fmt(l.h) << " dofs=" << l.dofs
             << " err_grad=" << fmt(l.err_grad) << " err_val=" << fmt(l.err_val)
             << " rate_grad=" << fmt(l.rate_grad) << " rate_val=" << fmt(l.rate_val)
             << " monitor=" << fmt(l.norm_monitor) << " iterations=" << l.iterations << '\n';
  };
  const fs::path csv = ctx.out_dir / "convergence.csv";
  const Provenance prov = ctx.provenance();
  try {
    const ConvergenceReport rep = convergence_study(mesh, data.problem, model, data.exact, levels, opt);
    write_text(csv, rep.to_csv(prov.lines()));
  } catch (const StudyFailure& e) {
    write_text(csv, e.partial().to_csv(prov.lines()));
    throw;
  }
  return kExitOk;
}

int cmd_infsup(Context& ctx) {
  const json& cfg = ctx.config;
  allow_keys(cfg, "config",
             {"domain", "p", "weight", "levels", "ritz_level", "probe_refinements", "sampled",
              "policy", "seed"});
  const Mesh mesh = build_domain(require(cfg, "domain", "config"));
  const double p = build_p(cfg);
  if (p != 2.0 && !get_bool(cfg, "sampled", false, "config"))
    throw ParameterError("infsup: exact constants need p = 2; set \"sampled\": true for "
                         "randomized lower bounds");
  ConstantsOptions opt;
  opt.levels = get_int(cfg, "levels", 3, "config");
  opt.ritz_level = get_int(cfg, "ritz_level", 0, "config");
  opt.probe_refinements = get_int(cfg, "probe_refinements", 2, "config");
  opt.seed = ctx.seed;
  opt.policy = build_policy(cfg);
  const ConstantsReport rep = constants_report(mesh, p, build_weight(cfg), opt);
  for (std::size_t i = 0; i < rep.beta_h.size(); ++i)
    *ctx.out << "level " << i << " h=" << fmt(rep.beta_h[i].h) << " dofs=" << rep.beta_h[i].dofs
             << " beta_h=" << fmt(rep.beta_h[i].beta) << '\n';
  *ctx.out << "C_delta=" << fmt(rep.C_delta_est) << " C_R=" << fmt(rep.C_R_est)
           << " C_P=" << fmt(rep.C_P_est) << '\n';
  write_json(ctx.out_dir / "constants.json", rep.to_json(), ctx.provenance());
  return kExitOk;
}

int cmd_ritz(Context& ctx) {
  const json& cfg = ctx.config;
  allow_keys(cfg, "config",
             {"domain", "p", "weight", "levels", "probe_refinements", "policy", "seed"});
  Mesh mesh = build_domain(require(cfg, "domain", "config"));
  const double p = build_p(cfg);
  const WeightSpec w = build_weight(cfg);
  const SingularIntegrationPolicy policy = build_policy(cfg);
  const int levels = get_int(cfg, "levels", 1, "config");
  const int probe = get_int(cfg, "probe_refinements", 2, "config");
  if (levels < 1)
    throw ValidationError("config: 'levels' must be positive");
  json rows = json::array();
  for (int level = 0; level < levels; ++level) {
    if (level > 0)
      mesh = refine_uniform(mesh);
    const FemSpace space(mesh);
    const ConstantEstimate c = ritz_stability_constant(space, p, w, probe, ctx.seed, policy);
    rows.push_back({{"level", level},
                    {"h", mesh.h()},
                    {"dofs", space.num_dofs()},
                    {"C_R", c.value},
                    {"exact", c.exact},
                    {"method", c.method}});
    *ctx.out << "level " << level << " h=" << fmt(mesh.h()) << " dofs=" << space.num_dofs()
             << " C_R=" << fmt(c.value) << (c.exact ? "" : " (lower bound)") << '\n';
  }
  write_json(ctx.out_dir / "ritz_stability.json",
             {{"p", p}, {"weight", w.to_json()}, {"probe_refinements", probe}, {"levels", rows}},
             ctx.provenance());
  return kExitOk;
}

int cmd_weight_check(Context& ctx) {
  const json& cfg = ctx.config;
  allow_keys(cfg, "config",
             {"weight", "p", "region", "num_balls", "radii", "eps_grid", "dual", "seed"});
  const WeightSpec w = WeightSpec::from_json(require(cfg, "weight", "config"));
  const double p = build_p(cfg);
  const ConvexPolygon region = build_region(cfg);
  const int balls = get_int(cfg, "num_balls", 256, "config");
  RadiusRange radii = default_radii(region);
  if (cfg.contains("radii")) {
    const json& r = cfg.at("radii");
    allow_keys(r, "radii", {"min", "max"});
    radii.min = get_number(r, "min", radii.min, "radii");
    radii.max = get_number(r, "max", radii.max, "radii");
  }
  const ApEstimate ap = ap_characteristic(w, p, region, balls, radii, ctx.seed);
  json result = {{"weight", w.to_json()}, {"ap", ap.to_json()}};
  *ctx.out << "A_p p=" << fmt(p) << " value=" << fmt(ap.value)
           << " diverging=" << (ap.diverging ? "true" : "false") << '\n';
  if (get_bool(cfg, "dual", true, "config")) {
    const double q = p / (p - 1.0);
    const ApEstimate dual = ap_characteristic(dual_weight(w, p), q, region, balls, radii, ctx.seed);
    const double rhs = std::pow(ap.value, 1.0 / (p - 1.0));
    const bool both_diverge = ap.diverging && dual.diverging;
    const double rel = std::abs(dual.value - rhs) / rhs;
    result["dual"] = dual.to_json();
    result["duality"] = {{"dual_value", dual.value},
                         {"primal_power", rhs},
                         {"rel_diff", rel},
                         {"holds", both_diverge || (!ap.diverging && !dual.diverging && rel <= 0.25)}};
    *ctx.out << "A_p' p'=" << fmt(q) << " value=" << fmt(dual.value)
             << " diverging=" << (dual.diverging ? "true" : "false") << '\n';
  }
  if (cfg.contains("eps_grid")) {
    const json& g = cfg.at("eps_grid");
    if (!g.is_array())
      throw ValidationError("config: 'eps_grid' must be an array of numbers");
    std::vector<double> eps;
    for (const auto& e : g) {
      if (!e.is_number() || !(e.get<double>() > 0.0))
        throw ValidationError("config: 'eps_grid' entries must be positive numbers");
      eps.push_back(e.get<double>());
    }
    const ReverseHolderResult rh = reverse_holder_probe(w, p, region, eps, ctx.seed);
    json rows = json::array();
    for (const auto& r : rh.rows)
      rows.push_back({{"eps", r.eps},
                      {"finite", r.finite},
                      {"saturated", r.saturated},
                      {"sup_ratio", r.sup_ratio},
                      {"level_sups", r.level_sups}});
    result["reverse_holder"] = {{"eps", rh.eps ? json(*rh.eps) : json()},
                                {"constant", rh.constant},
                                {"rows", rows}};
    *ctx.out << "reverse_holder eps=" << fmt(rh.eps) << " constant=" << fmt(rh.constant) << '\n';
  }
  write_json(ctx.out_dir / "weight_check.json", result, ctx.provenance());
  return kExitOk;
}

int cmd_structure_check(Context& ctx) {
  const json& cfg = ctx.config;
  allow_keys(cfg, "config", {"nonlinearity", "region", "sample_count", "radii", "seed"});
  const NonlinearityPtr a = make_registered_nonlinearity(require(cfg, "nonlinearity", "config"));
  const ConvexPolygon region = build_region(cfg);
  std::vector<double> radii{1.0, 2.0, 3.0, 5.0, 10.0};
  if (cfg.contains("radii")) {
    const json& r = cfg.at("radii");
    if (!r.is_array() || r.empty())
      throw ValidationError("config: 'radii' must be a non-empty array of numbers");
    radii.clear();
    for (const auto& v : r) {
      if (!v.is_number())
        throw ValidationError("config: 'radii' must be a non-empty array of numbers");
      radii.push_back(v.get<double>());
    }
  }
  const StructureReport rep =
      check_structure(*a, region, get_int(cfg, "sample_count", 4000, "config"), radii, ctx.seed);
  *ctx.out << a->name() << " coercivity=" << (rep.coercivity_ok ? "ok" : "violated")
           << " growth=" << (rep.growth_ok ? "ok" : "violated")
           << " monotonicity=" << (rep.monotonicity_ok ? "ok" : "violated") << '\n';
  for (std::size_t i = 0; i < rep.radii.size(); ++i)
    *ctx.out << "N=" << fmt(rep.radii[i]) << " eps=" << fmt(rep.uhlenbeck_profile[i]) << '\n';
  json result = rep.to_json();
  result["nonlinearity"] = {{"name", a->name()}, {"params", a->params()}};
  write_json(ctx.out_dir / "structure.json", result, ctx.provenance());
  return kExitOk;
}

int cmd_oscillation_check(Context& ctx) {
  const json& cfg = ctx.config;
  allow_keys(cfg, "config",
             {"coefficient", "alpha", "Lambda", "C_delta", "C_R", "estimate", "policy", "seed"});
  double alpha, Lambda;
  if (cfg.contains("coefficient")) {
    if (cfg.contains("alpha") || cfg.contains("Lambda"))
      throw ValidationError("config: give either 'coefficient' or 'alpha'/'Lambda'");
    const LinearCoefficient A = make_coefficient(cfg.at("coefficient"));
    alpha = A.alpha;
    Lambda = A.Lambda;
  } else {
    require(cfg, "alpha", "config");
    require(cfg, "Lambda", "config");
    alpha = get_number(cfg, "alpha", 0.0, "config");
    Lambda = get_number(cfg, "Lambda", 0.0, "config");
  }
  json result = {{"alpha", alpha}, {"Lambda", Lambda}};
  double C_delta = 0.0, C_R = 0.0;
  if (cfg.contains("estimate")) {
    if (cfg.contains("C_delta") || cfg.contains("C_R"))
      throw ValidationError("config: give either 'estimate' or 'C_delta'/'C_R'");
    const json& e = cfg.at("estimate");
    allow_keys(e, "estimate", {"domain", "weight", "levels", "probe_refinements"});
    ConstantsOptions opt;
    opt.levels = get_int(e, "levels", 3, "estimate");
    opt.probe_refinements = get_int(e, "probe_refinements", 2, "estimate");
    opt.seed = ctx.seed;
    opt.policy = build_policy(cfg);
    const ConstantsReport rep =
        constants_report(build_domain(require(e, "domain", "estimate")), 2.0, build_weight(e), opt);
    C_delta = rep.C_delta_est;
    C_R = rep.C_R_est;
    result["constants"] = rep.to_json();
  } else {
    C_delta = get_number(cfg, "C_delta", 0.0, "config");
    C_R = get_number(cfg, "C_R", 0.0, "config");
  }
  const OscillationReport rep = small_oscillation_check(alpha, Lambda, C_delta, C_R);
  result["C_delta"] = C_delta;
  result["C_R"] = C_R;
  result["lhs"] = rep.lhs;
  result["holds"] = rep.holds;
  *ctx.out << "lhs=" << fmt(rep.lhs) << " holds=" << (rep.holds ? "true" : "false") << '\n';
  write_json(ctx.out_dir / "oscillation.json", result, ctx.provenance());
  return kExitOk;
}

int thread_setting(int flag) {
  if (flag > 0)
    return flag;
  if (const char* env = std::getenv("WEIGHTED_FEM_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1)
      throw ValidationError("WEIGHTED_FEM_THREADS must be a positive integer");
    return static_cast<int>(n);
  }
  return 1;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted finite element experiments", "wfem"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool verbose = false;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for randomized diagnostics");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", verbose, "extra diagnostics on stderr");

  using Handler = int (*)(Context&);
  const std::vector<std::pair<std::string, Handler>> commands{
      {"solve", cmd_solve},
      {"convergence", cmd_convergence},
      {"infsup", cmd_infsup},
      {"ritz-stability", cmd_ritz},
      {"weight-check", cmd_weight_check},
      {"structure-check", cmd_structure_check},
      {"oscillation-check", cmd_oscillation_check},
  };
  for (const auto& [name, _] : commands)
    app.add_subcommand(name, name + " experiment");
  app.add_subcommand("registry", "list built-in functions, nonlinearities and weights");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub->get_name() == "registry") {
      out << registry_list().dump(2) << '\n';
      return kExitOk;
    }
    if (config_path.empty())
      throw ValidationError(sub->get_name() + ": --config is required");
    set_thread_count(thread_setting(threads));
    Context ctx;
    ctx.command = sub->get_name();
    ctx.config = load_config(config_path);
    if (!ctx.config.is_object())
      throw ValidationError(config_path + ":1:1: config must be a JSON object");
    if (ctx.config.contains("seed") && !ctx.config.at("seed").is_number_unsigned())
      throw ValidationError("config: 'seed' must be a non-negative integer");
    ctx.seed = seed ? *seed : ctx.config.value("seed", kDefaultSeed);
    ctx.out_dir = out_dir;
    ctx.verbose = verbose;
    ctx.out = &out;
    ctx.err = &err;
    for (const auto& [name, handler] : commands)
      if (name == ctx.command)
        return handler(ctx);
    return kExitValidation;
  } catch (const StudyFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const IntegrationError& e) {
    err << "error: divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const SolverError& e) {
    err << "error: solver: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: config: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

} // namespace wfem
