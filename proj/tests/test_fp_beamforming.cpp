#include <doctest.h>

#include <limits>

#include "mecoff/error.hpp"
#include "mecoff/fp_beamforming.hpp"
#include "support.hpp"

using namespace mecoff;
using testing_support::random_complex;

namespace {

Scenario scalar_cell(Complex gain, double noise, double bandwidth, double bits) {
  Scenario s;
  s.config.num_devices = 1;
  s.config.bs_antennas = 1;
  s.config.md_antennas = 1;
  s.config.streams = 1;
  s.config.bandwidth = bandwidth;
  s.channels.noise_power = noise;
  MobileDevice d;
  d.task_bits = bits;
  d.tau_max = 3.0;
  d.f_loc = 0.5e9;
  d.f_c = 1e9;
  d.p_idle = 0.005;
  d.p_max = 10.0;
  d.distance = 50.0;
  s.devices.push_back(d);
  s.channels.h.push_back(ComplexMatrix::Constant(1, 1, gain));
  return s;
}

/// Tight auxiliaries: true rates, q = max B/R, then z* and w*.
void tighten(const Scenario& s, FpState& st) {
  st.rates = all_rates(s, st);
  st.q_delay = 0.0;
  for (int k : st.offload_set) st.q_delay = std::max(st.q_delay, s.devices[k].task_bits / st.rates[k]);
  update_z(s, st);
  update_w(s, st);
}

/// Seeded state: SVD start, one V refinement, then random transmit
/// perturbations scaled into the power balls.
FpState seeded_state(const Scenario& s, std::mt19937_64& gen) {
  std::vector<int> all;
  for (int k = 0; k < s.num_devices(); ++k) all.push_back(k);
  FpState st = init_beamformers(s, all);
  for (int k : all) {
    st.q[k] += 0.3 * std::sqrt(s.devices[k].p_max) * random_complex(s.config.md_antennas, s.config.streams, gen) /
               std::sqrt(2.0 * s.config.md_antennas * s.config.streams);
    st.q[k] *= std::min(1.0, 0.9 * std::sqrt(s.devices[k].p_max) / st.q[k].norm());
  }
  tighten(s, st);
  update_v(s, st);
  tighten(s, st);
  return st;
}

}  // namespace

TEST_CASE("init_beamformers") {
  const auto s = testing_support::scenario(3, 9);
  auto st = init_beamformers(s, {1});
  CHECK(st.q[1].squaredNorm() == doctest::Approx(s.devices[1].p_max).epsilon(1e-12));
  CHECK(all_rates(s, st)[1] == doctest::Approx(rate_upper_bound(s, 1)).epsilon(1e-10));
  CHECK(st.q_delay == doctest::Approx(s.devices[1].task_bits / rate_upper_bound(s, 1)).epsilon(1e-10));

  st = init_beamformers(s, {0, 2});
  for (int k : {0, 2}) CHECK(st.q[k].squaredNorm() == doctest::Approx(s.devices[k].p_max).epsilon(1e-12));
  update_z(s, st);
  update_w(s, st);
  for (int k : {0, 2})
    for (int l = 0; l < 2; ++l) CHECK(stream_bracket(s, st, k, l) > 0.0);
  CHECK(std::isfinite(evaluate_fqm(s, st)));
}

TEST_CASE("update_z: closed form") {
  auto s = scalar_cell(1.0, 1.0, 1.0, 1.0);
  auto st = FpState::empty(1, {0});
  st.q[0] = ComplexMatrix::Constant(1, 1, 1.0);
  st.v[0] = ComplexMatrix::Constant(1, 1, 1.0);
  st.z[0] = ComplexVector::Zero(1);
  update_z(s, st);
  CHECK(std::abs(st.z[0](0) - Complex(1.0, 0.0)) < 1e-15);
  st.q[0].setZero();
  update_z(s, st);
  CHECK(st.z[0](0) == Complex(0.0, 0.0));
}

TEST_CASE("update_z: grid search around the closed form") {
  const auto s = testing_support::scenario(2, 14);
  std::mt19937_64 gen(14);
  auto st = seeded_state(s, gen);
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      const Complex zs = st.z[k](l);
      const double r = std::max(std::abs(zs), 1e-30);
      double best = -std::numeric_limits<double>::infinity();
      Complex arg = zs;
      for (int i = -50; i <= 50; ++i) {
        for (int j = -50; j <= 50; ++j) {
          FpState t = st;
          t.z[k](l) = zs + Complex(i, j) * (0.004 * r);
          const double b = stream_bracket(s, t, k, l);
          if (b > best) {
            best = b;
            arg = t.z[k](l);
          }
        }
      }
      CHECK(std::abs(arg - zs) <= 1e-6 * r);
      CHECK(best <= stream_bracket(s, st, k, l) + 1e-12);
    }
  }
}

TEST_CASE("update_w: closed form") {
  // lambda_e = 1, B = 1, ||Q||^2 = 4, R = 2 (B_W = 2, SNR = 1).
  auto s = scalar_cell(0.5, 1.0, 2.0, 1.0);
  auto st = FpState::empty(1, {0});
  st.q[0] = ComplexMatrix::Constant(1, 1, 2.0);
  st.v[0] = ComplexMatrix::Constant(1, 1, 1.0);
  update_w(s, st);
  CHECK(st.w[0] == doctest::Approx(1.0).epsilon(1e-14));

  s.devices[0].task_bits *= 4.0;
  update_w(s, st);
  CHECK(st.w[0] == doctest::Approx(2.0).epsilon(1e-14));

  st.q[0].setZero();
  CHECK_THROWS_AS(update_w(s, st), Error);
}

TEST_CASE("update_w: extremum of the per-device quadratic") {
  const auto s = testing_support::scenario(3, 15);
  std::mt19937_64 gen(15);
  const auto st = seeded_state(s, gen);
  for (int k = 0; k < 3; ++k) {
    const double a = std::sqrt(s.config.lambda_e * s.devices[k].task_bits * st.q[k].squaredNorm());
    const double r = st.rates[k];
    auto f = [&](double w) { return 2.0 * w * a - w * w * r; };
    const double w = st.w[k];
    // 2 w a - w^2 R is concave in w; the tight value is its maximiser.
    CHECK(f(w) >= f(w + 0.01 * w));
    CHECK(f(w) >= f(w - 0.01 * w));
    CHECK(2.0 * a - 2.0 * w * r == doctest::Approx(0.0).epsilon(1e-12).scale(2.0 * a));
  }
}

TEST_CASE("update_v: matched filter and perturbation optimality") {
  auto s = scalar_cell(Complex(0.3, -0.4), 1.0, 1.0, 1.0);
  s.config.bs_antennas = 1;
  auto st = FpState::empty(1, {0});
  st.q[0] = ComplexMatrix::Constant(1, 1, Complex(1.5, 0.5));
  st.v[0] = ComplexMatrix::Constant(1, 1, 7.0);
  st.z[0] = ComplexVector::Ones(1);
  update_v(s, st);
  CHECK(std::abs(st.v[0](0, 0) - s.channels.h[0](0, 0) * st.q[0](0, 0)) < 1e-14);

  const auto sc = testing_support::scenario(3, 16);
  std::mt19937_64 gen(16);
  auto base = seeded_state(sc, gen);
  update_v(sc, base);
  std::normal_distribution<double> n(0.0, 1.0);
  int beaten = 0;
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 2; ++l) {
      const double b0 = stream_bracket(sc, base, k, l);
      const double scale = base.v[k].col(l).norm();
      for (int t = 0; t < 100; ++t) {
        FpState p = base;
        p.v[k].col(l) += 1e-2 * scale * random_complex(16, 1, gen);
        if (stream_bracket(sc, p, k, l) > b0) ++beaten;
      }
    }
  }
  CHECK(beaten == 0);

  // Rescaling v changes the bracket (only v* maximises it) but not the rate.
  FpState r = base;
  r.v[0].col(0) *= 2.0;
  CHECK(stream_bracket(sc, r, 0, 0) < stream_bracket(sc, base, 0, 0));
  CHECK(testing_support::rel_err(all_rates(sc, r)[0], all_rates(sc, base)[0]) <= 1e-12);
}

TEST_CASE("update_v: zero z keeps the previous receiver") {
  const auto s = testing_support::scenario(2, 18);
  auto st = init_beamformers(s, {0, 1});
  update_z(s, st);
  st.z[1](0) = 0.0;
  const ComplexVector keep = st.v[1].col(0);
  update_v(s, st);
  CHECK(st.v[1].col(0) == keep);
}

TEST_CASE("evaluate_fqm: zero state, tightness, interference") {
  const auto s = testing_support::scenario(2, 19);
  auto st = FpState::empty(2, {0, 1});
  for (int k : {0, 1}) {
    st.q[k] = ComplexMatrix::Zero(2, 2);
    st.v[k] = ComplexMatrix::Identity(16, 2);
    st.z[k] = ComplexVector::Zero(2);
  }
  CHECK(evaluate_fqm(s, st) == 0.0);

  std::mt19937_64 gen(19);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sc = testing_support::scenario(2 + trial % 3, 100 + trial);
    const auto t = seeded_state(sc, gen);
    CHECK(testing_support::rel_err(evaluate_fqm(sc, t), p6_objective(sc, t)) <= 1e-8);
  }

  auto u = seeded_state(s, gen);
  u.w[1] = 0.0;  // drop device 1's own terms so only interference changes
  const double g0 = evaluate_fqm(s, u);
  u.q[1] *= 1.5;
  CHECK(evaluate_fqm(s, u) > g0);

  auto bad = seeded_state(s, gen);
  bad.z[0](0) *= 1e6;
  try {
    evaluate_fqm(s, bad);
    FAIL("expected DomainViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainViolation);
  }
}

TEST_CASE("QSubproblem: analytic gradient against central differences") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 6; ++trial) {
    ScenarioConfig c;
    c.lambda_t = trial % 2 == 0 ? 0.0 : 0.5;
    const auto s = testing_support::scenario(2 + trial % 3, 200 + trial, c);
    const auto st = seeded_state(s, gen);
    const QSubproblem sub(s, st, delay_budget(s, st.offload_set));
    const RealVector x = sub.pack(st);
    const RealVector g = sub.gradient(x);
    RealVector fd(x.size());
    const double h = 1e-6;
    for (int i = 0; i < x.size(); ++i) {
      RealVector a = x, b = x;
      a(i) += h;
      b(i) -= h;
      fd(i) = (sub.objective(a) - sub.objective(b)) / (2.0 * h);
    }
    CHECK((g - fd).norm() <= 1e-5 * g.norm());

    const RealMatrix gr = sub.rate_gradients(x);
    for (int p = 0; p < gr.cols(); ++p) {
      RealVector fr(x.size());
      for (int i = 0; i < x.size(); ++i) {
        RealVector a = x, b = x;
        a(i) += h;
        b(i) -= h;
        fr(i) = (sub.rates(a)(p) - sub.rates(b)(p)) / (2.0 * h);
      }
      CHECK((gr.col(p) - fr).norm() <= 1e-5 * gr.col(p).norm());
    }
  }
}

TEST_CASE("update_q_matrices: power feasibility and descent") {
  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = testing_support::scenario(1 + trial, 300 + trial);
    auto st = seeded_state(s, gen);
    const double before = p6_objective(s, st);
    const auto rep = update_q_matrices(s, st);
    for (int k : st.offload_set) CHECK(st.q[k].squaredNorm() <= s.devices[k].p_max + 1e-9);
    CHECK(rep.f_after <= rep.f_before);
    st.rates = all_rates(s, st);
    CHECK(p6_objective(s, st) <= before * (1.0 + 1e-12));
    if (trial == 0) CHECK(p6_objective(s, st) < before);  // single offloader strictly improves
  }
}

TEST_CASE("solve_beamforming: monotone history, stop rule, delay floor") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto s = testing_support::scenario(3, 400 + seed);
    const auto sol = solve_beamforming(s, {0, 1, 2});
    REQUIRE(sol.fqm_history.size() >= 2);
    for (std::size_t i = 1; i < sol.fqm_history.size(); ++i)
      CHECK(sol.fqm_history[i] <= sol.fqm_history[i - 1] + 1e-9);
    CHECK(sol.converged);
    CHECK(sol.delay_feasible);
    for (int k : sol.offload_set) CHECK(sol.q[k].squaredNorm() <= s.devices[k].p_max + 1e-9);

    // Transmit energy at convergence does not exceed the SVD start.
    const auto init = init_beamformers(s, {0, 1, 2});
    const auto r0 = all_rates(s, init);
    const auto r1 = all_rates(s, sol);
    double e0 = 0.0, e1 = 0.0;
    for (int k = 0; k < 3; ++k) {
      e0 += s.devices[k].task_bits * init.q[k].squaredNorm() / r0[k];
      e1 += s.devices[k].task_bits * sol.q[k].squaredNorm() / r1[k];
    }
    CHECK(e1 <= e0);
  }

  const auto s = testing_support::scenario(2, 77);
  FpOptions o;
  o.epsilon = std::numeric_limits<double>::infinity();
  CHECK(solve_beamforming(s, {0, 1}, o).iterations == 1);
  o.relative_stop = false;
  CHECK(solve_beamforming(s, {0, 1}, o).iterations == 1);

  const auto empty = solve_beamforming(s, {});
  CHECK(empty.offload_set.empty());
  CHECK(empty.converged);
}

TEST_CASE("solve_beamforming: single interference-free offloader") {
  // Energy per bit falls with power, so the optimum sits on the delay floor
  // R = B / (tau - T_c), below the equal-power bound.
  const auto s = testing_support::scenario(1, 501);
  const auto sol = solve_beamforming(s, {0});
  const double budget = delay_budget(s, {0});
  const double r = all_rates(s, sol)[0];
  CHECK(r <= rate_upper_bound(s, 0) * (1.0 + 1e-9));
  CHECK(r >= s.devices[0].task_bits / budget * (1.0 - 1e-9));
  CHECK(s.devices[0].task_bits / r == doctest::Approx(budget).epsilon(1e-2));
}

TEST_CASE("feasibility_repair") {
  ScenarioConfig c;
  c.f_loc_range = {0.9e9, 1.0e9};  // local mode meets the 3 s deadline
  auto s = testing_support::scenario(2, 601, c);
  s.channels.h[1] *= 1e-6;
  const auto decision = OffloadDecision::all_offload(2);
  try {
    solve_beamforming(s, {0, 1});
    FAIL("expected InnerInfeasible");
  } catch (const InnerInfeasible& e) {
    CHECK(e.code() == ErrorCode::InnerInfeasible);
    const auto out = feasibility_repair(s, decision, e, FpOptions{});
    CHECK(out.feasible);
    CHECK(out.moved_to_local == std::vector<int>{1});
    CHECK(out.decision.c == std::vector<int>{1, 0});
  }

  // Locally infeasible devices are never moved.
  auto t = testing_support::scenario(2, 601);
  t.channels.h[1] *= 1e-6;
  try {
    solve_beamforming(t, {0, 1});
    FAIL("expected InnerInfeasible");
  } catch (const InnerInfeasible& e) {
    const auto out = feasibility_repair(t, decision, e, FpOptions{});
    CHECK_FALSE(out.feasible);
    CHECK(out.moved_to_local.empty());
    CHECK(out.decision.c == std::vector<int>{1, 1});
  }
}

TEST_CASE("feasibility_repair lowers the cost on a contrived instance") {
  ScenarioConfig c;
  c.kappa = 1e-29;  // cheap local mode
  c.f_loc_range = {0.9e9, 1.0e9};
  auto s = testing_support::scenario(3, 602, c);
  s.channels.h[2] *= 3e-3;
  const auto decision = OffloadDecision::all_offload(3);
  try {
    solve_beamforming(s, {0, 1, 2});
    FAIL("expected InnerInfeasible");
  } catch (const InnerInfeasible& e) {
    const auto flagged = total_cost(s, decision, e.best_effort());
    CHECK_FALSE(flagged.feasible());
    const auto out = feasibility_repair(s, decision, e, FpOptions{});
    REQUIRE(out.feasible);
    const auto repaired = total_cost(s, out.decision, out.solution);
    CHECK(repaired.feasible());
    CHECK(repaired.weighted_cost <= flagged.weighted_cost);
  }
}
