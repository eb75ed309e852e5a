#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mecoff/baselines.hpp"
#include "mecoff/scenario.hpp"

namespace mecoff {

enum class SweepParam { NumDevices, TauMax };

const char* sweep_param_id(SweepParam param) noexcept;
/// "num_devices" or "tau_max"; throws Error(InvalidArgument) otherwise.
SweepParam parse_sweep_param(const std::string& id);

struct SweepSpec {
  SweepParam param = SweepParam::NumDevices;
  std::vector<double> values;
  int trials = 1;
  std::vector<Scheme> schemes = all_schemes();
  ScenarioConfig base;
  std::uint64_t master_seed = 1;
  int workers = 1;
  /// Wall-clock times vary run to run; rows carry 0 unless this is set.
  bool record_walltime = false;

  /// Throws Error(InvalidArgument) on an empty value list, trials < 1,
  /// no schemes, or a value that does not fit the swept parameter.
  void validate() const;
};

struct ResultRow {
  std::string sweep_param;
  double sweep_value = 0.0;
  std::string scheme;
  int trial = 0;
  std::uint64_t seed = 0;
  double energy_j = 0.0;
  double max_delay_s = 0.0;
  double mean_delay_s = 0.0;
  double weighted_cost = 0.0;
  int offloaders = 0;
  bool feasible = false;
  double walltime_ms = 0.0;
  int iterations = 0;
  std::string error;  // not written to CSV; non-empty marks a failed row

  bool operator==(const ResultRow&) const = default;
};

/// Child seed of one sweep cell, a pure function of its arguments.
std::uint64_t child_seed(std::uint64_t master_seed, double sweep_value, int trial);

/// Config of one sweep cell: base with the swept value and the child seed.
/// A tau_max sweep seeds from (master, trial) only, so all deadlines of a
/// trial share one scenario.
ScenarioConfig cell_config(const SweepSpec& spec, double sweep_value, int trial);

/// One row per (value, scheme, trial), sorted by value index, scheme order
/// in the spec, then trial. Scheme failures become rows with an error
/// message instead of aborting the sweep.
std::vector<ResultRow> run_sweep(const SweepSpec& spec);

ResultRow make_row(const SchemeResult& result, const std::string& sweep_param, double sweep_value,
                   int trial, std::uint64_t seed);

extern const char* const kCsvHeader;

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);
/// Throws Error(IoError) when the file cannot be written.
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);

/// Parses what write_csv produces. Throws Error(IoError) on malformed input.
std::vector<ResultRow> read_csv(std::istream& in);
std::vector<ResultRow> read_csv(const std::string& path);

struct AggregateRow {
  std::string sweep_param;
  double sweep_value = 0.0;
  std::string scheme;
  int trials = 0;
  double mean_energy_j = 0.0;
  double ci95_energy_j = 0.0;  // half-width, normal approximation
  double mean_max_delay_s = 0.0;
  double mean_weighted_cost = 0.0;
  double mean_offloaders = 0.0;
  double feasible_fraction = 0.0;
};

/// Per (value, scheme) statistics over the successful rows.
std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows);

/// Whitespace-separated table, one block per scheme separated by two blank
/// lines so gnuplot can address each scheme with `index`.
void write_gnuplot_table(const std::vector<AggregateRow>& table, std::ostream& out);

}  // namespace mecoff
