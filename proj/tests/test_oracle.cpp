#include <doctest.h>

#include "mecoff/baselines.hpp"
#include "mecoff/error.hpp"
#include "mecoff/oracle.hpp"
#include "support.hpp"

using namespace mecoff;

TEST_CASE("oracle: unreachable BS leaves the device local") {
  ScenarioConfig c;
  c.f_loc_range = {0.9e9, 1.0e9};
  auto s = testing_support::scenario(1, 61, c);
  s.channels.h[0] *= 1e-7;
  const auto r = brute_force_optimal(s);
  CHECK(r.feasible);
  CHECK(r.decision.c == std::vector<int>{0});
  CHECK(r.feasible_count == 1);
}

TEST_CASE("oracle: never worse than the pipeline or all-local") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    ScenarioConfig c;
    c.f_loc_range = {0.5e9, 1.0e9};
    c.tau_max = 3.5;
    const auto s = testing_support::scenario(2, 620 + seed, c);
    const auto ref = brute_force_optimal(s);
    REQUIRE(ref.feasible);
    const auto dm = run_dm_mmco(s);
    CHECK(ref.cost.weighted_cost <= dm.cost.weighted_cost * (1.0 + 1e-9));
    const auto local = run_local_only(s);
    if (local.feasible) CHECK(ref.cost.weighted_cost <= local.cost.eta);
  }
}

TEST_CASE("oracle: deterministic and size-limited") {
  const auto s = testing_support::scenario(3, 63);
  const auto a = brute_force_optimal(s);
  const auto b = brute_force_optimal(s);
  CHECK(a.decision.c == b.decision.c);
  CHECK(a.cost.weighted_cost == b.cost.weighted_cost);

  ScenarioConfig c;
  c.num_devices = 13;
  try {
    brute_force_optimal(generate_scenario(c));
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLarge);
  }
}
