#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mecoff/error.hpp"
#include "mecoff/harness.hpp"
#include "support.hpp"

using namespace mecoff;

namespace {

std::string csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_csv(rows, out);
  return out.str();
}

std::string fmt_9g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("single local-only row equals eta") {
  SweepSpec spec;
  spec.values = {3};
  spec.schemes = {Scheme::LocalOnly};
  spec.master_seed = 5;
  const auto rows = run_sweep(spec);
  REQUIRE(rows.size() == 1);
  const auto s = generate_scenario(cell_config(spec, 3, 0));
  const auto cost = run_local_only(s).cost;
  CHECK(rows[0].energy_j == cost.eta);
  CHECK(rows[0].seed == child_seed(5, 3, 0));
  CHECK(rows[0].scheme == "local-only");
  CHECK(rows[0].error.empty());
}

TEST_CASE("child seeds differ across cells and are stable") {
  CHECK(child_seed(1, 2.0, 0) == child_seed(1, 2.0, 0));
  CHECK(child_seed(1, 2.0, 0) != child_seed(1, 2.0, 1));
  CHECK(child_seed(1, 2.0, 0) != child_seed(1, 4.0, 0));
  CHECK(child_seed(1, 2.0, 0) != child_seed(2, 2.0, 0));
}

TEST_CASE("sweeps are deterministic across runs and worker counts") {
  SweepSpec spec;
  spec.values = {2, 3};
  spec.trials = 3;
  spec.master_seed = 77;
  const auto a = csv(run_sweep(spec));
  spec.workers = 3;
  const auto b = csv(run_sweep(spec));
  CHECK(a == b);

  SweepSpec tau;
  tau.param = SweepParam::TauMax;
  tau.values = {2.5, 3.5};
  tau.trials = 2;
  tau.schemes = {Scheme::Fdma, Scheme::LocalOnly};
  tau.base.num_devices = 3;
  const auto rows = run_sweep(tau);
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].sweep_param == "tau_max");
  CHECK(rows[0].scheme == "fdma");
  CHECK(rows[2].scheme == "local-only");
  CHECK(rows[4].sweep_value == 3.5);
  // Paired along the deadline axis: same scenario, so local-only is unchanged.
  CHECK(rows[0].seed == rows[4].seed);
  CHECK(rows[2].energy_j == rows[6].energy_j);
  CHECK(rows[2].seed != rows[3].seed);
}

TEST_CASE("sweep rows are sorted by value, scheme, trial") {
  SweepSpec spec;
  spec.values = {4, 2};
  spec.trials = 2;
  spec.schemes = {Scheme::Tdma, Scheme::LocalOnly};
  const auto rows = run_sweep(spec);
  REQUIRE(rows.size() == 8);
  const char* schemes[] = {"tdma", "tdma", "local-only", "local-only"};
  for (int i = 0; i < 8; ++i) {
    CHECK(rows[i].sweep_value == (i < 4 ? 4.0 : 2.0));
    CHECK(rows[i].scheme == schemes[i % 4]);
    CHECK(rows[i].trial == i % 2);
  }
}

TEST_CASE("failures become flagged rows") {
  SweepSpec spec;
  spec.values = {2};
  spec.trials = 2;
  spec.schemes = {Scheme::LocalOnly, Scheme::Fdma};
  spec.base.md_antennas = 1;  // streams = 2 > N: every cell fails to generate
  const auto rows = run_sweep(spec);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK_FALSE(r.error.empty());
    CHECK_FALSE(r.feasible);
    CHECK(std::isfinite(r.energy_j));
  }
  SweepSpec bad;
  CHECK_THROWS_AS(run_sweep(bad), Error);
  bad.values = {1.5};
  CHECK_THROWS_AS(run_sweep(bad), Error);
  bad.values = {2};
  bad.trials = 0;
  CHECK_THROWS_AS(run_sweep(bad), Error);
}

TEST_CASE("CSV header, empty file, and round trip") {
  CHECK(csv({}) == std::string(kCsvHeader) + "\n");
  CHECK(std::string(kCsvHeader) ==
        "sweep_param,sweep_value,scheme,trial,seed,energy_j,max_delay_s,mean_delay_s,weighted_cost,offloaders,"
        "feasible,walltime_ms,iterations");

  SweepSpec spec;
  spec.values = {2};
  spec.trials = 2;
  spec.schemes = {Scheme::Fdma, Scheme::Tdma, Scheme::LocalOnly};
  const auto rows = run_sweep(spec);
  const std::string text = csv(rows);
  std::istringstream in(text);
  const auto back = read_csv(in);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].scheme == rows[i].scheme);
    CHECK(back[i].offloaders == rows[i].offloaders);
    CHECK(back[i].feasible == rows[i].feasible);
    CHECK(back[i].energy_j == std::stod(fmt_9g(rows[i].energy_j)));
  }
  CHECK(csv(back) == text);
  CHECK(text.find('\r') == std::string::npos);

  std::istringstream broken(std::string(kCsvHeader) + "\nnum_devices,2,fdma\n");
  CHECK_THROWS_AS(read_csv(broken), Error);
  std::istringstream no_header("a,b\n");
  CHECK_THROWS_AS(read_csv(no_header), Error);
}

TEST_CASE("write_csv to a bad path raises IoError") {
  try {
    write_csv({}, "/nonexistent-dir/out.csv");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}

TEST_CASE("golden mini-sweep matches the checked-in fixture") {
  SweepSpec spec;
  spec.values = {2};
  spec.trials = 2;
  spec.master_seed = 2024;
  const std::string path = "golden_k2_sweep.out.csv";
  write_csv(run_sweep(spec), path);
  CHECK(slurp(path) == slurp(std::string(MECOFF_FIXTURE_DIR) + "/golden_k2_sweep.csv"));
  std::remove(path.c_str());
}

TEST_CASE("aggregate: means and normal 95% intervals") {
  std::vector<ResultRow> rows;
  const double energies[] = {1.0, 2.0, 3.0, 4.0};
  for (int t = 0; t < 4; ++t) {
    ResultRow r;
    r.sweep_param = "num_devices";
    r.sweep_value = 2;
    r.scheme = "fdma";
    r.trial = t;
    r.energy_j = energies[t];
    r.feasible = t != 0;
    r.offloaders = 2;
    rows.push_back(r);
  }
  ResultRow failed = rows[0];
  failed.error = "boom";
  rows.push_back(failed);
  const auto table = aggregate(rows);
  REQUIRE(table.size() == 1);
  CHECK(table[0].trials == 4);
  CHECK(table[0].mean_energy_j == doctest::Approx(2.5));
  // sample sd = sqrt(5/3); half-width 1.96 sd / sqrt(4)
  CHECK(table[0].ci95_energy_j == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(table[0].feasible_fraction == doctest::Approx(0.75));

  std::ostringstream out;
  write_gnuplot_table(table, out);
  CHECK(out.str().find("# scheme fdma") == 0);
  CHECK(out.str().find("\n2 4 2.5 ") != std::string::npos);
}
