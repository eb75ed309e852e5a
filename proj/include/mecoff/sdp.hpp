#pragma once

#include <string>
#include <vector>

#include "mecoff/numerics.hpp"

namespace mecoff {

/// One trace constraint row: Tr(matrix * G) (= or <=) rhs.
struct TraceConstraint {
  RealMatrix matrix;
  double rhs = 0.0;
};

/// min Tr(W0 G)  s.t.  Tr(A_i G) = b_i,  Tr(C_j G) <= d_j,  G PSD.
struct SdpProblem {
  RealMatrix objective;
  std::vector<TraceConstraint> equalities;
  std::vector<TraceConstraint> inequalities;

  int dim() const { return static_cast<int>(objective.rows()); }
};

enum class SdpStatus { Optimal, Infeasible, MaxIter };

const char* to_string(SdpStatus status) noexcept;

struct SdpOptions {
  double tol = 1e-7;
  int max_iter = 200;
  double step_fraction = 0.99;
};

struct SdpIterate {
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double mu = 0.0;
};

struct SdpSolution {
  RealMatrix g;
  double objective_value = 0.0;
  double dual_objective = 0.0;
  SdpStatus status = SdpStatus::MaxIter;
  /// Relative gap |p - d| / (1 + |p| + |d|).
  double duality_gap = 0.0;
  /// Largest absolute violation over equality rows and positive part of
  /// inequality rows, measured on the (symmetrized) input problem.
  double max_constraint_violation = 0.0;
  int iterations = 0;
  RealVector equality_duals;
  RealVector inequality_duals;
  std::vector<SdpIterate> history;
  std::string detail;
};

/// Primal-dual path-following interior point method (HKM direction,
/// Mehrotra predictor-corrector). Inequalities get nonnegative slack
/// scalars adjoined as extra diagonal blocks.
///
/// Throws Error(InvalidArgument) on dimension mismatch or a data matrix
/// whose asymmetry exceeds 1e-12 relative.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

/// Residual diagnostics of a candidate G against the problem rows.
double max_constraint_violation(const SdpProblem& problem, const RealMatrix& g);

}  // namespace mecoff
