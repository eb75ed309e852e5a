#include "mecoff/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "mecoff/error.hpp"
#include "mecoff/rng.hpp"

namespace mecoff {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

bool valid_range(const Range& r) {
  return std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  require(ec == std::errc() && ptr == t.data() + t.size(), "bad number for '" + key + "': " + text);
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v = 0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  require(ec == std::errc() && ptr == t.data() + t.size(), "bad integer for '" + key + "': " + text);
  return v;
}

Range parse_range(const std::string& key, const std::string& text) {
  const auto comma = text.find(',');
  require(comma != std::string::npos, "range for '" + key + "' must be 'lo,hi'");
  return {parse_double(key, text.substr(0, comma)), parse_double(key, text.substr(comma + 1))};
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "on") return true;
  if (t == "false" || t == "0" || t == "off") return false;
  throw Error(ErrorCode::InvalidConfig, "bad flag for '" + key + "': " + text);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void ScenarioConfig::validate() const {
  require(num_devices >= 1, "num_devices must be >= 1");
  require(bs_antennas >= 1 && md_antennas >= 1 && streams >= 1, "antenna and stream counts must be >= 1");
  require(streams <= md_antennas, "streams must not exceed md_antennas (d <= N)");
  require(streams <= bs_antennas, "streams must not exceed bs_antennas");
  require(bandwidth > 0.0 && std::isfinite(bandwidth), "bandwidth must be positive");
  require(std::isfinite(noise_density), "noise_density must be finite");
  require(min_distance > 0.0 && cell_radius >= min_distance, "need 0 < min_distance <= cell_radius");
  require(valid_range(task_bits_range) && task_bits_range.lo > 0.0, "task_bits_range must be a positive range");
  require(valid_range(f_loc_range) && f_loc_range.lo > 0.0, "f_loc_range must be a positive range");
  require(valid_range(f_c_range) && f_c_range.lo > 0.0, "f_c_range must be a positive range");
  require(tau_max > 0.0 && p_max > 0.0 && p_idle >= 0.0, "tau_max, p_max must be positive and p_idle nonnegative");
  require(kappa >= 0.0 && alpha > 0.0, "kappa must be >= 0 and alpha > 0");
  require(lambda_e >= 0.0 && lambda_t >= 0.0, "weights must be nonnegative");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(epsilon > 0.0, "epsilon must be positive");
  require(numiter >= 1, "numiter must be >= 1");
}

double ScenarioConfig::noise_power() const {
  return std::pow(10.0, (noise_density - 30.0) / 10.0) * bandwidth;
}

void validate(const Scenario& s) {
  s.config.validate();
  const int m = s.config.bs_antennas;
  const int n = s.config.md_antennas;
  require(static_cast<int>(s.devices.size()) == s.config.num_devices, "device count must equal num_devices");
  require(static_cast<int>(s.channels.h.size()) == s.config.num_devices, "channel count must equal num_devices");
  require(s.channels.noise_power > 0.0, "noise power must be positive");
  for (std::size_t k = 0; k < s.devices.size(); ++k) {
    const auto& d = s.devices[k];
    require(d.task_bits > 0.0 && d.tau_max > 0.0 && d.f_loc > 0.0 && d.f_c > 0.0 && d.p_max > 0.0 &&
                d.p_idle >= 0.0 && d.distance > 0.0,
            "device fields must be positive");
    const auto& h = s.channels.h[k];
    require(h.rows() == m && h.cols() == n, "channel matrix must be M x N");
    require(all_finite(h), "channel matrix must be finite");
  }
}

double pathloss_linear(double distance_m, double min_distance_m) {
  if (!(distance_m >= min_distance_m) || !(distance_m > 0.0)) {
    throw Error(ErrorCode::DistanceTooSmall, "distance below minimum distance");
  }
  const double pl_db = 128.1 + 37.6 * std::log10(distance_m / 1000.0);
  return std::pow(10.0, -pl_db / 10.0);
}

Scenario generate_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario s;
  s.config = config;
  s.channels.noise_power = config.noise_power();
  const int m = config.bs_antennas;
  const int n = config.md_antennas;
  for (int k = 0; k < config.num_devices; ++k) {
    Philox4x64 rng(config.seed, static_cast<std::uint64_t>(k) + 1);
    MobileDevice d;
    d.index = k;
    d.distance = rng.uniform(config.min_distance, config.cell_radius);
    (void)rng.uniform(0.0, 2.0 * std::numbers::pi);  // angle; unused by the channel model
    d.task_bits = rng.uniform(config.task_bits_range.lo, config.task_bits_range.hi);
    d.f_loc = rng.uniform(config.f_loc_range.lo, config.f_loc_range.hi);
    d.f_c = rng.uniform(config.f_c_range.lo, config.f_c_range.hi);
    d.tau_max = config.tau_max;
    d.p_idle = config.p_idle;
    d.p_max = config.p_max;

    const double amp = std::sqrt(pathloss_linear(d.distance, config.min_distance));
    ComplexMatrix h(m, n);
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < m; ++r) {
        const auto g = rng.complex_normal();
        h(r, c) = amp * Complex(g[0], g[1]);
      }
    }
    s.devices.push_back(d);
    s.channels.h.push_back(std::move(h));
  }
  return s;
}

ScenarioConfig parse_config(std::istream& in, ScenarioConfig c) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"num_devices", [&](auto& k, auto& v) { c.num_devices = parse_int<int>(k, v); }},
      {"bs_antennas", [&](auto& k, auto& v) { c.bs_antennas = parse_int<int>(k, v); }},
      {"md_antennas", [&](auto& k, auto& v) { c.md_antennas = parse_int<int>(k, v); }},
      {"streams", [&](auto& k, auto& v) { c.streams = parse_int<int>(k, v); }},
      {"bandwidth", [&](auto& k, auto& v) { c.bandwidth = parse_double(k, v); }},
      {"noise_density", [&](auto& k, auto& v) { c.noise_density = parse_double(k, v); }},
      {"cell_radius", [&](auto& k, auto& v) { c.cell_radius = parse_double(k, v); }},
      {"min_distance", [&](auto& k, auto& v) { c.min_distance = parse_double(k, v); }},
      {"task_bits_range", [&](auto& k, auto& v) { c.task_bits_range = parse_range(k, v); }},
      {"tau_max", [&](auto& k, auto& v) { c.tau_max = parse_double(k, v); }},
      {"p_max", [&](auto& k, auto& v) { c.p_max = parse_double(k, v); }},
      {"p_idle", [&](auto& k, auto& v) { c.p_idle = parse_double(k, v); }},
      {"f_loc_range", [&](auto& k, auto& v) { c.f_loc_range = parse_range(k, v); }},
      {"f_c_range", [&](auto& k, auto& v) { c.f_c_range = parse_range(k, v); }},
      {"kappa", [&](auto& k, auto& v) { c.kappa = parse_double(k, v); }},
      {"alpha", [&](auto& k, auto& v) { c.alpha = parse_double(k, v); }},
      {"lambda_e", [&](auto& k, auto& v) { c.lambda_e = parse_double(k, v); }},
      {"lambda_t", [&](auto& k, auto& v) { c.lambda_t = parse_double(k, v); }},
      {"gamma", [&](auto& k, auto& v) { c.gamma = parse_double(k, v); }},
      {"epsilon", [&](auto& k, auto& v) { c.epsilon = parse_double(k, v); }},
      {"epsilon_relative", [&](auto& k, auto& v) { c.epsilon_relative = parse_bool(k, v); }},
      {"numiter", [&](auto& k, auto& v) { c.numiter = parse_int<int>(k, v); }},
      {"seed", [&](auto& k, auto& v) { c.seed = parse_int<std::uint64_t>(k, v); }},
      {"intra_stream_interference", [&](auto& k, auto& v) { c.intra_stream_interference = parse_bool(k, v); }},
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    require(eq != std::string::npos, "line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const auto it = setters.find(key);
    require(it != setters.end(), "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(key, t.substr(eq + 1));
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file: " + path);
  return parse_config(in, std::move(base));
}

std::string format_config(const ScenarioConfig& c) {
  std::ostringstream os;
  auto range = [](const Range& r) { return fmt_double(r.lo) + "," + fmt_double(r.hi); };
  os << "num_devices=" << c.num_devices << '\n'
     << "bs_antennas=" << c.bs_antennas << '\n'
     << "md_antennas=" << c.md_antennas << '\n'
     << "streams=" << c.streams << '\n'
     << "bandwidth=" << fmt_double(c.bandwidth) << '\n'
     << "noise_density=" << fmt_double(c.noise_density) << '\n'
     << "cell_radius=" << fmt_double(c.cell_radius) << '\n'
     << "min_distance=" << fmt_double(c.min_distance) << '\n'
     << "task_bits_range=" << range(c.task_bits_range) << '\n'
     << "tau_max=" << fmt_double(c.tau_max) << '\n'
     << "p_max=" << fmt_double(c.p_max) << '\n'
     << "p_idle=" << fmt_double(c.p_idle) << '\n'
     << "f_loc_range=" << range(c.f_loc_range) << '\n'
     << "f_c_range=" << range(c.f_c_range) << '\n'
     << "kappa=" << fmt_double(c.kappa) << '\n'
     << "alpha=" << fmt_double(c.alpha) << '\n'
     << "lambda_e=" << fmt_double(c.lambda_e) << '\n'
     << "lambda_t=" << fmt_double(c.lambda_t) << '\n'
     << "gamma=" << fmt_double(c.gamma) << '\n'
     << "epsilon=" << fmt_double(c.epsilon) << '\n'
     << "epsilon_relative=" << (c.epsilon_relative ? "true" : "false") << '\n'
     << "numiter=" << c.numiter << '\n'
     << "seed=" << c.seed << '\n'
     << "intra_stream_interference=" << (c.intra_stream_interference ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace mecoff
