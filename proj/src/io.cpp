#include "wfem/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "wfem/errors.hpp"

namespace wfem {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const nlohmann::json& config) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config.dump());
  return out.str();
}

std::vector<std::string> Provenance::lines() const {
  return {"wfem " + command, "artifact_version " + artifact_version, "config_hash " + config_hash,
          "seed " + std::to_string(seed)};
}

nlohmann::json Provenance::to_json() const {
  return {{"command", command},
          {"artifact_version", artifact_version},
          {"config_hash", config_hash},
          {"seed", seed}};
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ValidationError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out)
    throw ValidationError("write failed: " + path.string());
}

std::string commented(const Provenance& prov, const std::string& comment) {
  std::string s;
  for (const auto& line : prov.lines())
    s += comment + " " + line + "\n";
  return s;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& body,
                const Provenance& prov) {
  nlohmann::ordered_json doc;
  doc["provenance"] = prov.to_json();
  doc["result"] = body;
  write_text(path, doc.dump(2) + "\n");
}

void write_vtk(const std::filesystem::path& path, const Mesh& mesh,
               const std::vector<VtkScalar>& scalars, const Provenance& prov) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\n";
  std::string title;
  for (const auto& line : prov.lines())
    title += (title.empty() ? "" : "; ") + line;
  out << title.substr(0, 255) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Point& v : mesh.vertices())
    out << v.x() << ' ' << v.y() << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& c : mesh.triangles())
    out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    out << "5\n";
  if (!scalars.empty())
    out << "POINT_DATA " << mesh.num_vertices() << '\n';
  for (const auto& s : scalars) {
    if (static_cast<std::size_t>(s.values.size()) != mesh.num_vertices())
      throw ParameterError("vtk scalar '" + s.name + "' has the wrong length");
    out << "SCALARS " << s.name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < s.values.size(); ++i)
      out << s.values[i] << '\n';
  }
  write_text(path, out.str());
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& A,
                         const Provenance& prov) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "%%MatrixMarket matrix coordinate real general\n" << commented(prov, "%");
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  write_text(path, out.str());
}

ConvexPolygon polygon_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("vertices") || j.size() != 1)
    throw ValidationError("polygon: expected {\"vertices\": [[x, y], ...]}");
  const auto& vs = j.at("vertices");
  if (!vs.is_array())
    throw ValidationError("polygon: vertices must be an array");
  std::vector<Point> pts;
  for (const auto& v : vs) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ValidationError("polygon: each vertex must be [x, y]");
    pts.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  return ConvexPolygon(std::move(pts));
}

nlohmann::json polygon_to_json(const ConvexPolygon& polygon) {
  nlohmann::json vs = nlohmann::json::array();
  for (const Point& v : polygon.vertices())
    vs.push_back({v.x(), v.y()});
  return {{"vertices", vs}};
}

} // namespace wfem
