#pragma once

#include <string>
#include <vector>

#include "mecoff/sdp.hpp"
#include "mecoff/system_model.hpp"

namespace mecoff {

/// Index map of the lifted decision vector
///   s = [c_1..c_K, R_1..R_K, pcom_1..pcom_K, pt_1..pt_K, t]   (length 4K+1)
/// and of the homogenized matrix G = [s;1][s;1]^T (dimension 4K+2). All
/// indices are zero-based.
struct SVectorLayout {
  int k = 0;

  int c(int i) const { return i; }
  int rate(int i) const { return k + i; }
  int pcom(int i) const { return 2 * k + i; }
  int pt(int i) const { return 3 * k + i; }
  int t() const { return 4 * k; }
  int one() const { return 4 * k + 1; }
  int size() const { return 4 * k + 1; }
  int lifted_dim() const { return 4 * k + 2; }
};

/// The quadratically constrained form of the decision problem.
struct QcqpInstance {
  SVectorLayout layout;
  RealMatrix m1;                // objective quadratic part
  RealVector c0;                // objective linear part, 0.5 * [delta, 0...]
  std::vector<RealMatrix> m2;   // s^T M2 s = -R_k pcom_k
  std::vector<RealMatrix> m3;   // s^T M3 s = -t R_k
  std::vector<RealMatrix> m4;   // s^T M4 s = c_k t
  std::vector<double> task_bits, t_loc, t_c, tau_max, p_max, rate_cap, lambda_e, lambda_t;
  std::vector<double> delta;
  double eta = 0.0;

  /// s^T M1 s + 2 c0^T s, i.e. the decision objective without eta.
  double objective(const RealVector& s) const;
};

/// Constraint rows of the relaxed problem, all in physical units.
struct LiftedSdp {
  int dim = 0;
  RealMatrix w0;
  std::vector<RealMatrix> w1, w2, w3, w4, w5;  // per device
  std::vector<RealMatrix> rate_caps;           // Tr(.) <= rate_cap_k
  RealMatrix corner;                            // Tr(.) = 1
  /// Redundant-for-rank-one rows that keep the relaxation bounded:
  /// nonnegative first moments and products, and x^2 <= U x caps.
  std::vector<TraceConstraint> bounds;
  QcqpInstance qcqp;

  /// Assembles the SdpProblem with every row (physical units).
  SdpProblem problem() const;
};

/// Builds the QCQP for a scenario given per-device rate caps R_hat.
QcqpInstance build_qcqp(const Scenario& scenario, const std::vector<double>& rate_bounds);

LiftedSdp lift_to_sdp(const QcqpInstance& qcqp);

/// The s vector of a concrete configuration: binary c, achieved rates and
/// transmit powers (entries of local devices are ignored and set to zero).
/// pcom_k = c_k B_k p_k / R_k and t = max_k c_k B_k / R_k.
RealVector embed_configuration(const QcqpInstance& qcqp, const std::vector<int>& c,
                               const std::vector<double>& rates,
                               const std::vector<double>& tx_power);

/// Thresholds the last row of G: d_k = clamp(G[end, k], 0, 1), c_k = d_k > gamma.
OffloadDecision extract_decisions(const RealMatrix& g, int num_devices, double gamma);
OffloadDecision extract_decisions(const SdpSolution& solution, int num_devices, double gamma);

/// Diagonal change of variables applied before solving so the SDP data is
/// O(1): rates in Mb/s, powers in units of the largest P_max, time in s.
struct SdpScaling {
  RealVector unit;  // physical value = unit * scaled value, per lifted index

  static SdpScaling for_qcqp(const QcqpInstance& qcqp);
  SdpProblem apply(const SdpProblem& physical) const;
  RealMatrix unscale(const RealMatrix& g_scaled) const;
};

struct DecisionOutcome {
  OffloadDecision decision;
  SdpSolution sdp;            // G reported in physical units
  std::vector<double> rate_bounds;
  bool sdp_failed = false;
  std::string diagnostic;
};

/// Rate caps -> QCQP -> lift -> scaled SDP solve -> threshold.
/// An infeasible relaxation falls back to the all-local decision and sets
/// sdp_failed with a diagnostic instead of throwing.
DecisionOutcome dm_mmco_decide(const Scenario& scenario, const SdpOptions& options = {});

}  // namespace mecoff
