#include "wfem/fem.hpp"

#include "wfem/linear_solvers.hpp"

namespace wfem {

DiscreteField ritz_project(const FemSpace& space, const ScalarFunction& w,
                           const SingularIntegrationPolicy& policy) {
  const SparseMatrix S = assemble_stiffness(space, LinearCoefficient::identity());
  return DiscreteField(space, solve_spd(S, ritz_rhs(space, w, policy)));
}

} // namespace wfem
