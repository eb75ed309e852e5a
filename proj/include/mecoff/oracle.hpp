#pragma once

#include "mecoff/fp_beamforming.hpp"
#include "mecoff/system_model.hpp"

namespace mecoff {

struct OracleResult {
  OffloadDecision decision;
  BeamformingSolution beamforming;
  CostBreakdown cost;
  bool feasible = false;     // false: no decision vector was feasible, all-local returned
  int feasible_count = 0;    // decision vectors with a feasible completion
};

constexpr int kOracleMaxDevices = 12;

/// Exhaustive search over all 2^K decision vectors. Each candidate keeps its
/// local devices within their deadlines and solves the beamforming problem on
/// its offload set without repair. Throws Error(TooLarge) for K > 12.
OracleResult brute_force_optimal(const Scenario& scenario, const FpOptions& options);
OracleResult brute_force_optimal(const Scenario& scenario);

}  // namespace mecoff
