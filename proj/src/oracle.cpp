#include "mecoff/oracle.hpp"

#include "mecoff/error.hpp"

namespace mecoff {

OracleResult brute_force_optimal(const Scenario& s) {
  return brute_force_optimal(s, FpOptions::from_config(s.config));
}

OracleResult brute_force_optimal(const Scenario& s, const FpOptions& options) {
  const int kk = s.num_devices();
  if (kk > kOracleMaxDevices) {
    throw Error(ErrorCode::TooLarge, "brute_force_optimal: more than 12 devices");
  }

  OracleResult best;
  for (unsigned mask = 0; mask < (1u << kk); ++mask) {
    std::vector<int> set;
    bool admissible = true;
    for (int k = 0; k < kk && admissible; ++k) {
      const auto& dev = s.devices[k];
      if (mask & (1u << k)) {
        set.push_back(k);
        admissible = edge_cost(dev, s.config.alpha).delay < dev.tau_max;
      } else {
        admissible = local_cost(dev, s.config.alpha, s.config.kappa).delay <= dev.tau_max;
      }
    }
    if (!admissible) continue;

    BeamformingSolution bf;
    try {
      bf = solve_beamforming(s, set, options);
    } catch (const InnerInfeasible&) {
      continue;
    }
    const auto decision = OffloadDecision::from_set(kk, set);
    auto cost = total_cost(s, decision, bf);
    if (!cost.feasible()) continue;
    ++best.feasible_count;
    if (!best.feasible || cost.weighted_cost < best.cost.weighted_cost) {
      best.decision = decision;
      best.beamforming = std::move(bf);
      best.cost = std::move(cost);
      best.feasible = true;
    }
  }

  if (!best.feasible) {
    best.decision = OffloadDecision::all_local(kk);
    best.beamforming = BeamformingSolution::empty(kk, {});
    best.cost = total_cost(s, best.decision, best.beamforming);
  }
  return best;
}

}  // namespace mecoff
