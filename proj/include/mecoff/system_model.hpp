#pragma once

#include <vector>

#include "mecoff/scenario.hpp"

namespace mecoff {

/// Binary offloading choice per device plus the relaxed scores it came from.
struct OffloadDecision {
  std::vector<int> c;          // 1 = offload, 0 = local
  std::vector<double> scores;  // relaxed d_k in [0, 1]

  static OffloadDecision all_local(int num_devices);
  static OffloadDecision all_offload(int num_devices);
  static OffloadDecision from_set(int num_devices, const std::vector<int>& offload_set);

  std::vector<int> offload_set() const;
  int num_offloaders() const;
};

/// Transmit/receive beamformers for the offloading set, indexed by device.
/// Entries for local devices are empty. z, w and q_delay hold the
/// fractional-programming auxiliaries when produced by the FP solver.
struct BeamformingSolution {
  std::vector<int> offload_set;
  std::vector<ComplexMatrix> q;  // N x d, watts^(1/2)
  std::vector<ComplexMatrix> v;  // M x d
  std::vector<ComplexVector> z;  // d per offloader
  std::vector<double> w;
  double q_delay = 0.0;  // seconds

  // Diagnostics filled by solve_beamforming.
  std::vector<double> rates;
  std::vector<double> fqm_history;
  int iterations = 0;
  bool converged = false;
  bool delay_feasible = true;

  /// Empty solution sized for num_devices with the given offloaders.
  static BeamformingSolution empty(int num_devices, std::vector<int> offload_set);
  bool is_offloader(int k) const;
};

struct LocalCost {
  double energy = 0.0;  // J
  double delay = 0.0;   // s
};

struct OffloadCost {
  double energy = 0.0;  // J, transmission + idle circuit
  double delay = 0.0;   // s, shared transmission delay + edge execution
};

struct DeviceCost {
  bool offload = false;
  double energy = 0.0;
  double delay = 0.0;
  double e_loc = 0.0;
  double t_loc = 0.0;
  double e_c = 0.0;
  double t_c = 0.0;
  double e_tx = 0.0;    // B_k p_k / R_k for offloaders
  double t_tran = 0.0;  // transmission delay seen by the device
};

struct CostBreakdown {
  std::vector<DeviceCost> devices;
  double weighted_cost = 0.0;
  double total_energy = 0.0;
  double max_delay = 0.0;
  double mean_delay = 0.0;
  std::vector<double> delta;  // per-device offload-minus-local weighted gap
  double eta = 0.0;           // all-local weighted cost
  double zeta = 0.0;          // constant part given the offloading set
  std::vector<int> delay_violations;
  bool power_feasible = true;

  bool feasible() const { return delay_violations.empty() && power_feasible; }
};

/// |v^H H_k q|^2 / I_{k,l}; I_{k,l} sums inter-user interference over the
/// other offloaders plus sigma^2 ||v||^2, and intra-user streams j != l when
/// include_intra is set. Throws Error(ZeroReceiveVector) when v = 0.
double stream_sinr(const ChannelSet& channels, const BeamformingSolution& bf, int k, int l,
                   bool include_intra = false);

/// R_k = sum_l B_W log2(1 + SINR_{k,l}), bits/s.
double rate(const ChannelSet& channels, const BeamformingSolution& bf, int k, double bandwidth,
            bool include_intra = false);

/// Rates of every device (zero for local devices).
std::vector<double> all_rates(const Scenario& scenario, const BeamformingSolution& bf);

/// C_k = alpha B_k; returns (kappa C_k f_loc^2, C_k / f_loc).
LocalCost local_cost(const MobileDevice& device, double alpha, double kappa);

/// Edge execution delay C_k / f_c and idle energy p_idle * T_c.
LocalCost edge_cost(const MobileDevice& device, double alpha);

/// Offloading energy and delay of device k under the synchronous-start
/// model (transmission delay = max over offloaders of B_i / R_i).
/// Throws Error(ZeroRate) when some offloader has zero rate.
OffloadCost offload_cost(const Scenario& scenario, const OffloadDecision& decision,
                         const BeamformingSolution& bf, int k);

/// Single accounting path shared by every scheme: mixes local and offload
/// costs given per-device transmission energy and transmission delay.
CostBreakdown account_costs(const Scenario& scenario, const std::vector<int>& c,
                            const std::vector<double>& tx_energy,
                            const std::vector<double>& tran_delay);

/// Weighted energy/delay cost of a decision and its beamformers.
CostBreakdown total_cost(const Scenario& scenario, const OffloadDecision& decision,
                         const BeamformingSolution& bf);

/// Equal-power, interference-free rate over the top-d singular directions:
/// sum_l B_W log2(1 + (P_max/d) s_l^2 / sigma^2).
double rate_upper_bound(const ComplexMatrix& h, double p_max, int streams, double noise_power,
                        double bandwidth);
double rate_upper_bound(const Scenario& scenario, int k);

}  // namespace mecoff
