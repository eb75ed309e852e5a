#include <doctest.h>

#include "mecoff/baselines.hpp"
#include "support.hpp"

using namespace mecoff;

namespace {

/// Re-derives a result's cost from its rates and the per-scheme power rule
/// through the shared accounting path.
void check_accounting(const Scenario& s, const SchemeResult& r, bool full_power) {
  if (r.scheme == Scheme::DmMmco || r.scheme == Scheme::OpMmse) return;  // powers live in the beamformers
  const int kk = s.num_devices();
  std::vector<double> tx(kk, 0.0), tran(kk, 0.0);
  for (int k : r.decision.offload_set()) {
    tx[k] = (full_power ? s.devices[k].p_max : 0.0) * s.devices[k].task_bits / r.rates[k];
    tran[k] = r.cost.devices[k].t_tran;
  }
  const auto again = account_costs(s, r.decision.c, tx, tran);
  CHECK(again.weighted_cost == r.cost.weighted_cost);
  CHECK(again.total_energy == r.cost.total_energy);
}

}  // namespace

TEST_CASE("scheme ids") {
  for (Scheme s : all_schemes()) CHECK(parse_scheme(scheme_id(s)) == s);
  CHECK_FALSE(parse_scheme("cdma").has_value());
}

TEST_CASE("local-only") {
  const auto s = testing_support::scenario(3, 51);
  const auto r = run_local_only(s);
  double sum = 0.0;
  for (const auto& d : s.devices) sum += local_cost(d, s.config.alpha, s.config.kappa).energy;
  CHECK(testing_support::rel_err(r.cost.weighted_cost, sum) <= 1e-14);
  CHECK(r.cost.weighted_cost == r.cost.eta);
  CHECK(r.decision.num_offloaders() == 0);

  auto quiet = s;
  for (auto& h : quiet.channels.h) h *= 1e-3;
  CHECK(run_local_only(quiet).cost.weighted_cost == r.cost.weighted_cost);
}

TEST_CASE("single-antenna view keeps column 0 and all receive antennas") {
  const auto s = testing_support::scenario(2, 52);
  const auto v = single_antenna_view(s);
  CHECK(v.config.md_antennas == 1);
  CHECK(v.config.streams == 1);
  for (int k = 0; k < 2; ++k) {
    CHECK(v.channels.h[k].rows() == 16);
    CHECK(v.channels.h[k].cols() == 1);
    CHECK(v.channels.h[k].col(0) == s.channels.h[k].col(0));
  }
}

TEST_CASE("OP-MMSE: single device stays within power and the single-antenna bound") {
  const auto s = testing_support::scenario(1, 53);
  const auto r = run_op_mmse(s);
  REQUIRE(r.decision.c == std::vector<int>{1});
  const auto v = single_antenna_view(s);
  CHECK(r.rates[0] <= rate_upper_bound(v, 0) * (1.0 + 1e-9));
  const auto sol = solve_beamforming(v, {0});
  CHECK(sol.q[0].squaredNorm() <= s.devices[0].p_max + 1e-9);
}

TEST_CASE("OP-MMSE: scalar FP loop is monotone") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto v = single_antenna_view(testing_support::scenario(4, 540 + seed));
    const auto sol = solve_beamforming(v, {0, 1, 2, 3});
    for (std::size_t i = 1; i < sol.fqm_history.size(); ++i)
      CHECK(sol.fqm_history[i] <= sol.fqm_history[i - 1] + 1e-9);
  }
}

TEST_CASE("OP-MMSE: orthogonal channels decouple") {
  auto s = testing_support::scenario(3, 55);
  for (int k = 0; k < 3; ++k) {
    s.channels.h[k].setZero();
    s.channels.h[k](2 * k, 0) = Complex(3e-5, 1e-5);
    s.channels.h[k](2 * k + 1, 0) = Complex(-1e-5, 2e-5);
  }
  const auto v = single_antenna_view(s);
  const auto sol = solve_beamforming(v, {0, 1, 2});
  const auto rates = all_rates(v, sol);
  for (int k = 0; k < 3; ++k) {
    const double p = sol.q[k].squaredNorm();
    const double free = v.config.bandwidth * std::log2(1.0 + p * v.channels.h[k].squaredNorm() / v.channels.noise_power);
    CHECK(testing_support::rel_err(rates[k], free) <= 1e-9);
  }
}

TEST_CASE("matched-filter rate scaling") {
  ComplexVector h = ComplexVector::Constant(4, Complex(1e-5, 0.0));
  const double full = matched_filter_rate(h, 0.1, 3e-14, 1e7, 1);
  const double half = matched_filter_rate(h, 0.1, 3e-14, 1e7, 2);
  const double snr = 0.1 * h.squaredNorm() / 3e-14;
  CHECK(full == doctest::Approx(1e7 * std::log2(1.0 + snr)));
  CHECK(half == doctest::Approx(5e6 * std::log2(1.0 + 2.0 * snr)));
  // Going from 4 to 2 shares doubles the band per offloader.
  const double four = matched_filter_rate(h, 0.1, 3e-14, 1e7, 4);
  CHECK(half / four == doctest::Approx(2.0 * std::log2(1.0 + 2.0 * snr) / std::log2(1.0 + 4.0 * snr)));
}

TEST_CASE("FDMA and TDMA") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = testing_support::scenario(6, 560 + seed);
    const auto f = run_fdma(s);
    const auto t = run_tdma(s);
    CHECK(f.assumed_decision_rule);
    CHECK(t.assumed_decision_rule);
    CHECK(f.iterations <= 6);
    CHECK(t.iterations <= 6);
    check_accounting(s, f, true);
    check_accounting(s, t, true);
    const auto set = f.decision.offload_set();
    for (int k : set) {
      CHECK(f.rates[k] == doctest::Approx(matched_filter_rate(s.channels.h[k].col(0), s.devices[k].p_max,
                                                              s.channels.noise_power, s.config.bandwidth,
                                                              static_cast<int>(set.size()))));
    }
    // TDMA: everyone waits for the whole schedule.
    double total = 0.0;
    for (int k : t.decision.offload_set()) total += s.devices[k].task_bits / t.rates[k];
    for (int k : t.decision.offload_set()) CHECK(t.cost.devices[k].t_tran == doctest::Approx(total));
  }

  // One offloader: TDMA and FDMA coincide.
  ScenarioConfig c;
  const auto s1 = testing_support::scenario(1, 57, c);
  const auto f1 = run_fdma(s1);
  const auto t1 = run_tdma(s1);
  CHECK(f1.rates == t1.rates);
  CHECK(f1.cost.weighted_cost == t1.cost.weighted_cost);

  // Small cells: both rules keep the same number of offloaders.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = testing_support::scenario(2, 580 + seed);
    CHECK(run_fdma(s).decision.num_offloaders() == run_tdma(s).decision.num_offloaders());
  }
}

TEST_CASE("TDMA: adding an offloader never shortens anyone's wait") {
  const auto s = testing_support::scenario(5, 59);
  double prev = 0.0;
  for (int n = 1; n <= 5; ++n) {
    double total = 0.0;
    for (int k = 0; k < n; ++k)
      total += s.devices[k].task_bits / matched_filter_rate(s.channels.h[k].col(0), s.devices[k].p_max,
                                                             s.channels.noise_power, s.config.bandwidth, 1);
    CHECK(total >= prev);
    prev = total;
  }
}

TEST_CASE("DM-MMCO pipeline never loses to local-only when feasible") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    ScenarioConfig c;
    c.f_loc_range = {0.6e9, 1.0e9};  // some devices can compute locally
    c.tau_max = 3.5;
    const auto s = testing_support::scenario(3, 590 + seed, c);
    const auto dm = run_dm_mmco(s);
    const auto local = run_local_only(s);
    if (dm.feasible) CHECK(local.cost.weighted_cost >= dm.cost.weighted_cost);
    for (int k = 0; k < 3; ++k) {
      const auto loc = local_cost(s.devices[k], c.alpha, c.kappa);
      const auto edge = edge_cost(s.devices[k], c.alpha);
      if (loc.delay > s.devices[k].tau_max && edge.delay < s.devices[k].tau_max) CHECK(dm.decision.c[k] == 1);
    }
  }
}

TEST_CASE("run_scheme dispatches every scheme") {
  const auto s = testing_support::scenario(2, 60);
  for (Scheme id : all_schemes()) {
    const auto r = run_scheme(id, s);
    CHECK(r.scheme == id);
    CHECK(std::isfinite(r.cost.weighted_cost));
  }
}
