#include "mecoff/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "mecoff/error.hpp"
#include "mecoff/rng.hpp"

namespace mecoff {

const char* const kCsvHeader =
    "sweep_param,sweep_value,scheme,trial,seed,energy_j,max_delay_s,mean_delay_s,weighted_cost,"
    "offloaders,feasible,walltime_ms,iterations";

const char* sweep_param_id(SweepParam param) noexcept {
  return param == SweepParam::NumDevices ? "num_devices" : "tau_max";
}

SweepParam parse_sweep_param(const std::string& id) {
  if (id == "num_devices") return SweepParam::NumDevices;
  if (id == "tau_max") return SweepParam::TauMax;
  throw Error(ErrorCode::InvalidArgument, "unknown sweep parameter '" + id + "'");
}

void SweepSpec::validate() const {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "sweep: empty value list");
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "sweep: trials must be >= 1");
  if (schemes.empty()) throw Error(ErrorCode::InvalidArgument, "sweep: no schemes");
  for (double v : values) {
    const bool ok = param == SweepParam::NumDevices ? (v >= 1.0 && v == std::floor(v)) : v > 0.0;
    if (!ok) throw Error(ErrorCode::InvalidArgument, fmt::format("sweep: bad {} value {}", sweep_param_id(param), v));
  }
}

std::uint64_t child_seed(std::uint64_t master_seed, double sweep_value, int trial) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(sweep_value));
  return splitmix64(h ^ static_cast<std::uint64_t>(trial));
}

ScenarioConfig cell_config(const SweepSpec& spec, double value, int trial) {
  ScenarioConfig c = spec.base;
  if (spec.param == SweepParam::NumDevices) {
    c.num_devices = static_cast<int>(value);
  } else {
    c.tau_max = value;
  }
  // The deadline does not enter sampling: every tau value of a trial reuses
  // that trial's devices and channels, so the sweep is paired along its axis.
  const double seed_value = spec.param == SweepParam::NumDevices ? value : 0.0;
  c.seed = child_seed(spec.master_seed, seed_value, trial);
  return c;
}

ResultRow make_row(const SchemeResult& r, const std::string& param, double value, int trial,
                   std::uint64_t seed) {
  ResultRow row;
  row.sweep_param = param;
  row.sweep_value = value;
  row.scheme = scheme_id(r.scheme);
  row.trial = trial;
  row.seed = seed;
  row.energy_j = r.cost.total_energy;
  row.max_delay_s = r.cost.max_delay;
  row.mean_delay_s = r.cost.mean_delay;
  row.weighted_cost = r.cost.weighted_cost;
  row.offloaders = r.decision.num_offloaders();
  row.feasible = r.feasible;
  row.iterations = r.iterations;
  return row;
}

namespace {

std::vector<ResultRow> run_cell(const SweepSpec& spec, double value, int trial) {
  const std::string param = sweep_param_id(spec.param);
  const auto config = cell_config(spec, value, trial);
  std::vector<ResultRow> rows;

  auto failed = [&](Scheme scheme, const std::string& what) {
    ResultRow row;
    row.sweep_param = param;
    row.sweep_value = value;
    row.scheme = scheme_id(scheme);
    row.trial = trial;
    row.seed = config.seed;
    row.error = what;
    return row;
  };

  Scenario scenario;
  try {
    scenario = generate_scenario(config);
  } catch (const std::exception& e) {
    for (Scheme scheme : spec.schemes) rows.push_back(failed(scheme, e.what()));
    return rows;
  }

  for (Scheme scheme : spec.schemes) {
    try {
      const auto start = std::chrono::steady_clock::now();
      const auto result = run_scheme(scheme, scenario);
      const auto stop = std::chrono::steady_clock::now();
      auto row = make_row(result, param, value, trial, config.seed);
      if (spec.record_walltime) {
        row.walltime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
      }
      rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      rows.push_back(failed(scheme, e.what()));
    }
  }
  return rows;
}

}  // namespace

std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const int nv = static_cast<int>(spec.values.size());
  const int cells = nv * spec.trials;
  std::vector<std::vector<ResultRow>> out(cells);

  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < cells; i = next++) {
      out[i] = run_cell(spec, spec.values[i / spec.trials], i % spec.trials);
    }
  };
  const int workers = std::clamp(spec.workers, 1, cells);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  // Merge by (value, scheme, trial).
  const int ns = static_cast<int>(spec.schemes.size());
  std::vector<ResultRow> rows;
  rows.reserve(static_cast<std::size_t>(cells) * ns);
  for (int v = 0; v < nv; ++v) {
    for (int s = 0; s < ns; ++s) {
      for (int t = 0; t < spec.trials; ++t) rows.push_back(out[v * spec.trials + t][s]);
    }
  }
  return rows;
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << fmt::format("{},{:.9g},{},{},{},{:.9g},{:.9g},{:.9g},{:.9g},{},{},{:.9g},{}\n", r.sweep_param,
                       r.sweep_value, r.scheme, r.trial, r.seed, r.energy_j, r.max_delay_s, r.mean_delay_s,
                       r.weighted_cost, r.offloaders, r.feasible ? 1 : 0, r.walltime_ms, r.iterations);
  }
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  write_csv(rows, f);
  f.flush();
  if (!f) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

namespace {

double to_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::IoError, fmt::format("csv line {}: bad number '{}'", line, s));
}

long long to_int(const std::string& s, int line) {
  const double v = to_double(s, line);
  if (v != std::floor(v)) throw Error(ErrorCode::IoError, fmt::format("csv line {}: bad integer '{}'", line, s));
  return std::stoll(s);
}

}  // namespace

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(ErrorCode::IoError, "csv: missing or unexpected header");
  }
  std::vector<ResultRow> rows;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 13) throw Error(ErrorCode::IoError, fmt::format("csv line {}: expected 13 fields", n));
    ResultRow r;
    r.sweep_param = f[0];
    r.sweep_value = to_double(f[1], n);
    r.scheme = f[2];
    r.trial = static_cast<int>(to_int(f[3], n));
    try {
      r.seed = std::stoull(f[4]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::IoError, fmt::format("csv line {}: bad seed '{}'", n, f[4]));
    }
    r.energy_j = to_double(f[5], n);
    r.max_delay_s = to_double(f[6], n);
    r.mean_delay_s = to_double(f[7], n);
    r.weighted_cost = to_double(f[8], n);
    r.offloaders = static_cast<int>(to_int(f[9], n));
    r.feasible = to_int(f[10], n) != 0;
    r.walltime_ms = to_double(f[11], n);
    r.iterations = static_cast<int>(to_int(f[12], n));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return read_csv(f);
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
  struct Acc {
    AggregateRow row;
    double sum2 = 0.0;
    int order = 0;
  };
  std::map<std::tuple<std::string, double, std::string>, Acc> acc;
  std::map<std::string, int> scheme_order;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    scheme_order.emplace(r.scheme, static_cast<int>(scheme_order.size()));
    auto& a = acc[{r.sweep_param, r.sweep_value, r.scheme}];
    a.row.sweep_param = r.sweep_param;
    a.row.sweep_value = r.sweep_value;
    a.row.scheme = r.scheme;
    a.order = scheme_order[r.scheme];
    ++a.row.trials;
    a.row.mean_energy_j += r.energy_j;
    a.sum2 += r.energy_j * r.energy_j;
    a.row.mean_max_delay_s += r.max_delay_s;
    a.row.mean_weighted_cost += r.weighted_cost;
    a.row.mean_offloaders += r.offloaders;
    a.row.feasible_fraction += r.feasible ? 1.0 : 0.0;
  }

  std::vector<std::pair<int, AggregateRow>> sorted;
  for (auto& [key, a] : acc) {
    auto& row = a.row;
    const double n = row.trials;
    const double mean = row.mean_energy_j / n;
    row.mean_energy_j = mean;
    if (row.trials > 1) {
      const double var = std::max(0.0, (a.sum2 - n * mean * mean) / (n - 1.0));
      row.ci95_energy_j = 1.96 * std::sqrt(var / n);
    }
    row.mean_max_delay_s /= n;
    row.mean_weighted_cost /= n;
    row.mean_offloaders /= n;
    row.feasible_fraction /= n;
    sorted.emplace_back(a.order, row);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    if (a.second.sweep_param != b.second.sweep_param) return a.second.sweep_param < b.second.sweep_param;
    return a.second.sweep_value < b.second.sweep_value;
  });
  std::vector<AggregateRow> out;
  for (auto& [order, row] : sorted) out.push_back(std::move(row));
  return out;
}

void write_gnuplot_table(const std::vector<AggregateRow>& table, std::ostream& out) {
  std::string current;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& r = table[i];
    if (i == 0 || r.scheme != current) {
      if (i != 0) out << "\n\n";
      current = r.scheme;
      out << "# scheme " << r.scheme << '\n';
      out << "# " << r.sweep_param
          << " trials mean_energy_j ci95_energy_j mean_max_delay_s mean_weighted_cost mean_offloaders "
             "feasible_fraction\n";
    }
    out << fmt::format("{:.9g} {} {:.9g} {:.9g} {:.9g} {:.9g} {:.9g} {:.9g}\n", r.sweep_value, r.trials,
                       r.mean_energy_j, r.ci95_energy_j, r.mean_max_delay_s, r.mean_weighted_cost,
                       r.mean_offloaders, r.feasible_fraction);
  }
}

}  // namespace mecoff
