#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mecoff/baselines.hpp"
#include "mecoff/error.hpp"
#include "mecoff/harness.hpp"
#include "mecoff/oracle.hpp"

using namespace mecoff;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("mecoff");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("MECOFF_LOG");
  const std::string level = env ? env : "warn";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    if (level != "warn") spdlog::warn("MECOFF_LOG='{}' not recognised, using warn", level);
    spdlog::set_level(spdlog::level::warn);
  }
}

std::vector<std::string> split(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<Scheme> parse_schemes(const std::string& list) {
  std::vector<Scheme> out;
  for (const auto& id : split(list)) {
    const auto s = parse_scheme(id);
    if (!s) throw Error(ErrorCode::InvalidArgument, "unknown scheme '" + id + "'");
    out.push_back(*s);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no schemes given");
  return out;
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  for (const auto& v : split(list)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(v, &used));
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad sweep value '" + v + "'");
    }
  }
  return out;
}

struct Common {
  std::string config_path;
  std::uint64_t seed = 1;
  bool seed_set = false;

  ScenarioConfig load() const {
    ScenarioConfig c;
    if (!config_path.empty()) c = load_config(config_path);
    if (seed_set) c.seed = seed;
    c.validate();
    return c;
  }
};

void print_result(const SchemeResult& r) {
  std::cout << fmt::format("{:<10} energy={:.6g} J  cost={:.6g}  max_delay={:.4g} s  offloaders={}  feasible={}  iter={}",
                           scheme_id(r.scheme), r.cost.total_energy, r.cost.weighted_cost, r.cost.max_delay,
                           r.decision.num_offloaders(), r.feasible ? "yes" : "no", r.iterations);
  if (r.sdp_failed) std::cout << "  [relaxation failed]";
  if (r.repaired) std::cout << fmt::format("  [repaired: {} moved]", r.moved_to_local.size());
  if (!r.forced_offload.empty()) std::cout << fmt::format("  [forced offload: {}]", r.forced_offload.size());
  if (r.used_local_fallback) std::cout << "  [all-local fallback]";
  if (r.assumed_decision_rule) std::cout << "  [greedy set rule]";
  std::cout << '\n';
  if (!r.diagnostic.empty()) spdlog::info("{}: {}", scheme_id(r.scheme), r.diagnostic);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Offloading decision and MU-MIMO beamforming simulator"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { common.seed = s; common.seed_set = true; }, "master seed");
  };

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over devices or deadline, CSV output");
  add_common(sweep);
  int trials = 10;
  std::string sweep_param = "num_devices";
  std::string values = "2,4,6,8,10";
  std::string schemes = "dm-mmco,op-mmse,fdma,tdma,local-only";
  std::string out_path;
  int workers = 1;
  bool timing = false;
  sweep->add_option("--trials", trials, "trials per sweep value")->check(CLI::PositiveNumber);
  sweep->add_option("--sweep", sweep_param, "num_devices or tau_max");
  sweep->add_option("--values", values, "comma-separated sweep values");
  sweep->add_option("--schemes", schemes, "comma-separated scheme ids");
  sweep->add_option("--out", out_path, "CSV path (stdout when omitted)");
  sweep->add_option("--workers", workers, "parallel workers")->check(CLI::PositiveNumber);
  sweep->add_flag("--timing", timing, "record wall-clock time per row (output no longer reproducible)");

  // single
  auto* single = app.add_subcommand("single", "Run schemes on one sampled scenario");
  add_common(single);
  std::string single_schemes = schemes;
  int single_devices = 0;
  single->add_option("--schemes", single_schemes, "comma-separated scheme ids");
  single->add_option("--devices", single_devices, "override the number of devices");

  // oracle-check
  auto* oracle = app.add_subcommand("oracle-check", "Compare the pipeline with exhaustive search");
  add_common(oracle);
  int oracle_trials = 5;
  int oracle_devices = 0;
  double oracle_tol = 0.10;
  oracle->add_option("--trials", oracle_trials, "scenarios to check")->check(CLI::PositiveNumber);
  oracle->add_option("--devices", oracle_devices, "override the number of devices (<= 12)");
  oracle->add_option("--tolerance", oracle_tol, "relative cost gap counted as a match");

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "Means and 95% intervals from a sweep CSV (gnuplot table)");
  std::string agg_in;
  std::string agg_out;
  agg->add_option("input", agg_in, "sweep CSV")->required()->check(CLI::ExistingFile);
  agg->add_option("--out", agg_out, "output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      SweepSpec spec;
      spec.base = common.load();
      spec.master_seed = common.seed_set ? common.seed : spec.base.seed;
      spec.param = parse_sweep_param(sweep_param);
      spec.values = parse_values(values);
      spec.trials = trials;
      spec.schemes = parse_schemes(schemes);
      spec.workers = workers;
      spec.record_walltime = timing;
      spdlog::info("sweep {} over {} values, {} trials, {} schemes", sweep_param, spec.values.size(), trials,
                   spec.schemes.size());
      const auto rows = run_sweep(spec);
      int failed = 0;
      for (const auto& r : rows) {
        if (r.error.empty()) continue;
        ++failed;
        spdlog::warn("{}={} {} trial {}: {}", r.sweep_param, r.sweep_value, r.scheme, r.trial, r.error);
      }
      if (out_path.empty()) {
        write_csv(rows, std::cout);
      } else {
        write_csv(rows, out_path);
      }
      return failed > 0 ? 2 : 0;
    }

    if (*single) {
      auto config = common.load();
      if (single_devices > 0) config.num_devices = single_devices;
      config.validate();
      const auto scenario = generate_scenario(config);
      std::cout << fmt::format("K={} M={} N={} d={} seed={}\n", config.num_devices, config.bs_antennas,
                               config.md_antennas, config.streams, config.seed);
      for (Scheme s : parse_schemes(single_schemes)) print_result(run_scheme(s, scenario));
      return 0;
    }

    if (*oracle) {
      auto config = common.load();
      if (oracle_devices > 0) config.num_devices = oracle_devices;
      config.validate();
      int within = 0;
      int below = 0;
      for (int t = 0; t < oracle_trials; ++t) {
        auto c = config;
        c.seed = child_seed(config.seed, config.num_devices, t);
        const auto scenario = generate_scenario(c);
        const auto ref = brute_force_optimal(scenario);
        const auto dm = run_dm_mmco(scenario);
        const double gap = (dm.cost.weighted_cost - ref.cost.weighted_cost) / std::abs(ref.cost.weighted_cost);
        if (gap <= oracle_tol) ++within;
        if (gap < -1e-6) ++below;
        std::cout << fmt::format("trial {} seed {}: oracle={:.9g} dm-mmco={:.9g} gap={:+.3e}\n", t, c.seed,
                                 ref.cost.weighted_cost, dm.cost.weighted_cost, gap);
      }
      std::cout << fmt::format("within {:.0f}%: {}/{}; below oracle: {}\n", 100 * oracle_tol, within,
                               oracle_trials, below);
      return 0;
    }

    if (*agg) {
      const auto table = aggregate(read_csv(agg_in));
      if (agg_out.empty()) {
        write_gnuplot_table(table, std::cout);
      } else {
        std::ofstream f(agg_out);
        if (!f) throw Error(ErrorCode::IoError, "cannot open '" + agg_out + "'");
        write_gnuplot_table(table, f);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
