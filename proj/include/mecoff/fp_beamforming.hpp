#pragma once

#include <vector>

#include "mecoff/error.hpp"
#include "mecoff/system_model.hpp"

namespace mecoff {

/// Iterate of the alternating loop. It carries the same fields as the
/// final solution: Q, V, z, w, q and the f_qm history.
using FpState = BeamformingSolution;

struct FpOptions {
  double epsilon = 1e-3;
  /// Stop when |f^(n) - f^(n-1)| < epsilon * |f^(n-1)|; false gives the
  /// absolute test |f^(n) - f^(n-1)| < epsilon.
  bool relative_stop = true;
  int numiter = 100;
  double tol_inner = 1e-6;
  int max_inner_iter = 400;
  int barrier_rounds = 3;
  double barrier_mu0 = 1e-3;
  double barrier_shrink = 0.2;
  double armijo_c = 1e-4;
  double norm_smoothing = 1e-12;
  int phase1_rounds = 20;

  static FpOptions from_config(const ScenarioConfig& config);
};

/// Raised when no delay-feasible transmit design was found for the
/// offloading set. Carries the best point reached (flagged infeasible).
class InnerInfeasible : public Error {
 public:
  InnerInfeasible(const std::string& what, BeamformingSolution best_effort)
      : Error(ErrorCode::InnerInfeasible, what), best_effort_(std::move(best_effort)) {}

  const BeamformingSolution& best_effort() const noexcept { return best_effort_; }

 private:
  BeamformingSolution best_effort_;
};

/// Largest admissible transmission delay min_k (tau_k - T_c,k) over the set.
double delay_budget(const Scenario& scenario, const std::vector<int>& offload_set);

/// Q_k = sqrt(P_max/d) * top-d right singular vectors of H_k, V_k the
/// matching left singular vectors. q = max_k B_k / R_k on that design.
FpState init_beamformers(const Scenario& scenario, const std::vector<int>& offload_set);

/// z_{k,l} = v^H H_k q_{k,l} / I_{k,l}.
void update_z(const Scenario& scenario, FpState& state);

/// w_k = sqrt(lambda_e B_k ||Q_k||^2) / R_k. Throws Error(ZeroRate).
void update_w(const Scenario& scenario, FpState& state);

/// v_{k,l} = A_{k,l}^{-1} H_k q_{k,l} / z_{k,l}; streams with z = 0 keep v.
void update_v(const Scenario& scenario, FpState& state);

/// The per-stream bracket 1 + 2 Re{z^* v^H H_k q} - |z|^2 I_{k,l}.
double stream_bracket(const Scenario& scenario, const FpState& state, int k, int l);

/// R~_k = B_W sum_l log2(bracket). Throws Error(DomainViolation) if a bracket <= 0.
double surrogate_rate(const Scenario& scenario, const FpState& state, int k);

/// sum_k (2 w_k sqrt(lambda_e B_k ||Q_k||^2) + lambda_t q - w_k^2 R~_k).
/// Throws Error(DomainViolation) when a log argument is not positive.
double evaluate_fqm(const Scenario& scenario, const FpState& state);

/// sum_k (lambda_e B_k ||Q_k||^2 / R_k + lambda_t q) with the true rates
/// and q = max_k B_k / R_k.
double p6_objective(const Scenario& scenario, const FpState& state);

/// Transmit subproblem with z, w, V frozen. The variable is the stacked
/// real and imaginary parts of X_k = Q_k / s_k, where s_k is the norm of the
/// warm start Q_k (sqrt(P_max) if that is zero), so the feasible set is a
/// product of balls of radius sqrt(P_max)/s_k. When the delay weight is
/// nonzero q / q_cap is appended.
class QSubproblem {
 public:
  QSubproblem(const Scenario& scenario, const FpState& state, double q_cap,
              double norm_smoothing = 1e-12);

  int size() const { return size_; }
  bool has_q() const { return has_q_; }
  double q_cap() const { return q_cap_; }

  RealVector pack(const FpState& state) const;
  /// Writes Q (and q_delay when q is a variable) into state.
  void unpack(const RealVector& x, FpState& state) const;

  /// F(x) in cost units (q fixed at q_cap when it is not a variable).
  double objective(const RealVector& x) const;
  RealVector gradient(const RealVector& x) const;

  /// Surrogate rates R~_k(x) in bits/s, one per offloader (set order); and
  /// their gradients stacked as columns. Non-positive brackets give -inf.
  RealVector rates(const RealVector& x) const;
  RealMatrix rate_gradients(const RealVector& x) const;

  /// F, the surrogate rates and (optionally) both gradients in one pass.
  /// ok is false when a log argument is not positive.
  struct Evaluation {
    bool ok = true;
    double f = 0.0;
    RealVector rates;
    RealVector grad_f;
    RealMatrix grad_rates;
  };
  Evaluation evaluate(const RealVector& x, bool with_gradients) const;

  /// Delay value the rate floors refer to: q(x) (variable or q_cap).
  double q_of(const RealVector& x) const;

  /// Euclidean projection onto the feasible box/balls.
  RealVector project(const RealVector& x) const;

  const std::vector<int>& offload_set() const { return set_; }
  const std::vector<double>& task_bits() const { return bits_; }

 private:
  struct Eval {
    double f = 0.0;
    RealVector rate;   // R~ per offloader
    bool domain_ok = true;
  };
  Eval eval(const RealVector& x, RealVector* grad_f, RealMatrix* grad_rates) const;

  int n_ = 0;  // transmit antennas
  int d_ = 0;  // streams
  int size_ = 0;
  bool has_q_ = false;
  double q_cap_ = 0.0;
  double bandwidth_ = 0.0;
  double noise_ = 0.0;
  double lambda_t_sum_ = 0.0;
  double smoothing_ = 1e-12;
  bool intra_ = false;
  std::vector<int> set_;
  std::vector<double> amp_;     // block scale s_k per offloader
  std::vector<double> radius_;  // sqrt(P_max) / s_k
  std::vector<double> bits_;
  std::vector<double> wcoef_;  // 2 w_k sqrt(lambda_e B_k)
  std::vector<double> w2_;     // w_k^2
  std::vector<ComplexVector> z_;                 // per offloader, d
  std::vector<double> vnorm2_;                   // per stream, flattened (p*d + l)
  std::vector<std::vector<ComplexVector>> u_;    // [stream p*d+l][offloader i] = H_i^H v
};

struct QStepReport {
  int inner_iterations = 0;
  double f_before = 0.0;
  double f_after = 0.0;
  double stationarity = 0.0;
};

/// One transmit-side block update: barrier projected-gradient descent on
/// the subproblem, then a backtrack toward the warm start until the true
/// cost does not increase. Throws InnerInfeasible when the surrogate rate
/// floors cannot be met.
QStepReport update_q_matrices(const Scenario& scenario, FpState& state,
                              const FpOptions& options = {});

/// Runs the alternating loop on a fixed offloading set and returns the best
/// iterate. Throws InnerInfeasible when no delay-feasible design is found.
BeamformingSolution solve_beamforming(const Scenario& scenario, const std::vector<int>& offload_set,
                                      const FpOptions& options);
BeamformingSolution solve_beamforming(const Scenario& scenario, const std::vector<int>& offload_set);

struct RepairOutcome {
  OffloadDecision decision;
  BeamformingSolution solution;
  std::vector<int> moved_to_local;
  bool feasible = false;
};

/// Moves the offloader with the largest B_k / R^_k whose local mode meets
/// its deadline back to local and re-solves, until a delay-feasible design
/// exists or no movable device remains (then flagged infeasible).
RepairOutcome feasibility_repair(const Scenario& scenario, const OffloadDecision& decision,
                                 const InnerInfeasible& failure, const FpOptions& options);

}  // namespace mecoff
