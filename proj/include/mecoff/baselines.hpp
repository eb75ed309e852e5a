#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mecoff/fp_beamforming.hpp"
#include "mecoff/sdp.hpp"
#include "mecoff/system_model.hpp"

namespace mecoff {

enum class Scheme { DmMmco, OpMmse, Fdma, Tdma, LocalOnly };

/// CLI/CSV identifiers: dm-mmco, op-mmse, fdma, tdma, local-only.
const char* scheme_id(Scheme scheme) noexcept;
std::optional<Scheme> parse_scheme(std::string_view id);
const std::vector<Scheme>& all_schemes();

struct SchemeResult {
  Scheme scheme = Scheme::LocalOnly;
  OffloadDecision decision;
  CostBreakdown cost;
  std::vector<double> rates;  // bits/s, zero for local devices
  int iterations = 0;         // FP iterations or greedy rounds
  bool feasible = false;
  // Pipeline diagnostics.
  bool sdp_failed = false;
  bool repaired = false;
  std::vector<int> forced_offload;  // local-infeasible devices switched to offload
  std::vector<int> moved_to_local;  // by feasibility repair
  bool used_local_fallback = false;
  /// Set for FDMA/TDMA: the offload set comes from an assumed greedy rule.
  bool assumed_decision_rule = false;
  std::string diagnostic;
};

struct PipelineOptions {
  SdpOptions sdp;
  FpOptions fp;

  static PipelineOptions from_config(const ScenarioConfig& config);
};

/// Relaxation decision, beamforming on the offload set, repair, and a final
/// comparison against the all-local decision when that one is feasible.
SchemeResult run_dm_mmco(const Scenario& scenario, const PipelineOptions& options);
SchemeResult run_dm_mmco(const Scenario& scenario);

/// The same pipeline on the single-antenna view of the scenario.
SchemeResult run_op_mmse(const Scenario& scenario);

/// Equal bandwidth split, matched filter, full power; greedy offload set.
SchemeResult run_fdma(const Scenario& scenario);

/// Sequential full-band slots, shortest first, full power; greedy offload set.
SchemeResult run_tdma(const Scenario& scenario);

SchemeResult run_local_only(const Scenario& scenario);

SchemeResult run_scheme(Scheme scheme, const Scenario& scenario);

/// N = d = 1, keeping column 0 of every H_k and all M receive antennas.
Scenario single_antenna_view(const Scenario& scenario);

/// Interference-free full-power rate of a single-antenna link on a band of
/// width bandwidth / shares, with noise scaled to that band.
double matched_filter_rate(const ComplexVector& h, double p_max, double noise_power_full_band,
                           double bandwidth, int shares);

}  // namespace mecoff
