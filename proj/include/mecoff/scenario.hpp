#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mecoff/numerics.hpp"

namespace mecoff {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Range&) const = default;
};

/// Cell-level simulation parameters. All quantities are SI units except
/// noise_density (dBm/Hz). Defaults follow the reference simulation setup;
/// cell geometry (radius, min_distance) is an assumption.
struct ScenarioConfig {
  int num_devices = 4;
  int bs_antennas = 16;
  int md_antennas = 2;
  int streams = 2;
  double bandwidth = 10e6;
  double noise_density = -175.0;
  double cell_radius = 200.0;
  double min_distance = 10.0;
  Range task_bits_range{6.4e6, 9.6e6};  // 0.8 MB .. 1.2 MB, 1 MB = 8e6 bits
  double tau_max = 3.0;
  double p_max = 0.1;
  double p_idle = 0.005;
  Range f_loc_range{0.2e9, 0.5e9};
  Range f_c_range{0.8e9, 1.0e9};
  double kappa = 1e-25;
  double alpha = 237.5;
  double lambda_e = 1.0;
  double lambda_t = 0.0;
  double gamma = 0.8;
  double epsilon = 1e-3;
  bool epsilon_relative = true;
  int numiter = 100;
  std::uint64_t seed = 1;
  bool intra_stream_interference = false;

  /// Throws Error(InvalidConfig) describing the first violated invariant.
  void validate() const;

  /// sigma^2 = 10^((N0 - 30)/10) * B_W, in watts.
  double noise_power() const;

  bool operator==(const ScenarioConfig&) const = default;
};

struct MobileDevice {
  int index = 0;
  double task_bits = 0.0;
  double tau_max = 0.0;
  double f_loc = 0.0;
  double f_c = 0.0;
  double p_idle = 0.0;
  double p_max = 0.0;
  double distance = 0.0;

  bool operator==(const MobileDevice&) const = default;
};

struct ChannelSet {
  std::vector<ComplexMatrix> h;  // per device, M x N
  double noise_power = 0.0;
};

struct Scenario {
  ScenarioConfig config;
  std::vector<MobileDevice> devices;
  ChannelSet channels;

  int num_devices() const { return static_cast<int>(devices.size()); }
};

/// Checks device/channel shapes and positivity. Throws Error(InvalidConfig).
void validate(const Scenario& scenario);

/// 3GPP macro pathloss 128.1 + 37.6 log10(d_km) as a linear power gain.
/// Throws Error(DistanceTooSmall) when distance < min_distance.
double pathloss_linear(double distance_m, double min_distance_m = 0.0);

/// Samples one cell instance. Device k draws from Philox stream (seed, k+1)
/// in this order: distance, angle, B_k, f_loc, f_c, then the M x N fading
/// matrix in column-major order.
Scenario generate_scenario(const ScenarioConfig& config);

/// Flat key=value config text; keys are the ScenarioConfig field names,
/// ranges are written "lo,hi". Lines starting with '#' are ignored.
ScenarioConfig parse_config(std::istream& in, ScenarioConfig base = {});
ScenarioConfig load_config(const std::string& path, ScenarioConfig base = {});
std::string format_config(const ScenarioConfig& config);

}  // namespace mecoff
