#include "mecoff/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mecoff/sdr_decision.hpp"

namespace mecoff {

namespace {

struct LinkPlan {
  std::vector<double> rates;  // per device, zero when not offloading
  std::vector<double> tran;   // transmission delay seen by each offloader
};

using LinkModel = std::function<LinkPlan(const std::vector<int>& offload)>;

/// Shared offload-set rule of the orthogonal-access baselines: start from
/// every device whose edge execution fits its deadline, then per round drop
/// the device whose offloading costs most over its local mode, or failing
/// that the slowest delay violator, until nothing changes.
SchemeResult greedy_orthogonal(const Scenario& s, Scheme scheme, const LinkModel& model) {
  const int kk = s.num_devices();
  const double le = s.config.lambda_e;
  const double lt = s.config.lambda_t;
  std::vector<int> set;
  for (int k = 0; k < kk; ++k) {
    if (edge_cost(s.devices[k], s.config.alpha).delay < s.devices[k].tau_max) set.push_back(k);
  }

  SchemeResult r;
  r.scheme = scheme;
  r.assumed_decision_rule = true;
  LinkPlan plan{std::vector<double>(kk, 0.0), std::vector<double>(kk, 0.0)};
  while (!set.empty()) {
    ++r.iterations;
    plan = model(set);
    int worst_cost = -1;
    double worst_gap = 0.0;
    int worst_delay = -1;
    double slowest = -1.0;
    for (int k : set) {
      const auto& dev = s.devices[k];
      const auto loc = local_cost(dev, s.config.alpha, s.config.kappa);
      const auto edge = edge_cost(dev, s.config.alpha);
      const double tx_time = dev.task_bits / plan.rates[k];
      const double off = le * (dev.p_max * tx_time + edge.energy) + lt * (plan.tran[k] + edge.delay);
      const double gap = off - (le * loc.energy + lt * loc.delay);
      if (gap > worst_gap) {
        worst_gap = gap;
        worst_cost = k;
      }
      if (plan.tran[k] + edge.delay > dev.tau_max && tx_time > slowest) {
        slowest = tx_time;
        worst_delay = k;
      }
    }
    const int drop = worst_cost >= 0 ? worst_cost : worst_delay;
    if (drop < 0) break;
    set.erase(std::find(set.begin(), set.end(), drop));
  }
  if (set.empty()) plan = {std::vector<double>(kk, 0.0), std::vector<double>(kk, 0.0)};

  std::vector<double> tx(kk, 0.0);
  for (int k : set) tx[k] = s.devices[k].p_max * s.devices[k].task_bits / plan.rates[k];
  r.decision = OffloadDecision::from_set(kk, set);
  r.rates = plan.rates;
  r.cost = account_costs(s, r.decision.c, tx, plan.tran);
  r.feasible = r.cost.feasible();
  return r;
}

}  // namespace

const char* scheme_id(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::DmMmco: return "dm-mmco";
    case Scheme::OpMmse: return "op-mmse";
    case Scheme::Fdma: return "fdma";
    case Scheme::Tdma: return "tdma";
    case Scheme::LocalOnly: return "local-only";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view id) {
  for (Scheme s : all_schemes()) {
    if (id == scheme_id(s)) return s;
  }
  return std::nullopt;
}

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> kAll = {Scheme::DmMmco, Scheme::OpMmse, Scheme::Fdma, Scheme::Tdma,
                                           Scheme::LocalOnly};
  return kAll;
}

PipelineOptions PipelineOptions::from_config(const ScenarioConfig& config) {
  PipelineOptions o;
  o.fp = FpOptions::from_config(config);
  return o;
}

SchemeResult run_dm_mmco(const Scenario& s) {
  return run_dm_mmco(s, PipelineOptions::from_config(s.config));
}

SchemeResult run_dm_mmco(const Scenario& s, const PipelineOptions& o) {
  const int kk = s.num_devices();
  SchemeResult r;
  r.scheme = Scheme::DmMmco;

  const auto decided = dm_mmco_decide(s, o.sdp);
  r.sdp_failed = decided.sdp_failed;
  r.diagnostic = decided.diagnostic;
  OffloadDecision decision = decided.decision;
  for (int k = 0; k < kk; ++k) {
    const auto& dev = s.devices[k];
    if (decision.c[k] != 0) continue;
    const auto loc = local_cost(dev, s.config.alpha, s.config.kappa);
    const auto edge = edge_cost(dev, s.config.alpha);
    if (loc.delay > dev.tau_max && edge.delay < dev.tau_max) {
      decision.c[k] = 1;
      r.forced_offload.push_back(k);
    }
  }

  BeamformingSolution bf;
  try {
    bf = solve_beamforming(s, decision.offload_set(), o.fp);
  } catch (const InnerInfeasible& failure) {
    auto repaired = feasibility_repair(s, decision, failure, o.fp);
    r.repaired = true;
    r.moved_to_local = repaired.moved_to_local;
    decision = std::move(repaired.decision);
    bf = std::move(repaired.solution);
  }
  r.decision = decision;
  r.cost = total_cost(s, decision, bf);
  r.rates = all_rates(s, bf);
  r.iterations = bf.iterations;
  r.feasible = r.cost.feasible();

  const auto local = account_costs(s, std::vector<int>(kk, 0), std::vector<double>(kk, 0.0),
                                   std::vector<double>(kk, 0.0));
  if (local.feasible() && (!r.feasible || local.weighted_cost < r.cost.weighted_cost)) {
    r.used_local_fallback = true;
    r.decision = OffloadDecision::all_local(kk);
    r.cost = local;
    r.rates.assign(kk, 0.0);
    r.feasible = true;
  }
  return r;
}

Scenario single_antenna_view(const Scenario& s) {
  Scenario out = s;
  out.config.md_antennas = 1;
  out.config.streams = 1;
  for (auto& h : out.channels.h) h = ComplexMatrix(h.leftCols(1));
  return out;
}

SchemeResult run_op_mmse(const Scenario& s) {
  auto r = run_dm_mmco(single_antenna_view(s));
  r.scheme = Scheme::OpMmse;
  return r;
}

double matched_filter_rate(const ComplexVector& h, double p_max, double noise_power_full_band,
                           double bandwidth, int shares) {
  const double band = bandwidth / shares;
  const double noise = noise_power_full_band / shares;
  return band * std::log2(1.0 + p_max * h.squaredNorm() / noise);
}

SchemeResult run_fdma(const Scenario& s) {
  const int kk = s.num_devices();
  return greedy_orthogonal(s, Scheme::Fdma, [&](const std::vector<int>& set) {
    LinkPlan plan{std::vector<double>(kk, 0.0), std::vector<double>(kk, 0.0)};
    const int shares = static_cast<int>(set.size());
    double t = 0.0;
    for (int k : set) {
      plan.rates[k] = matched_filter_rate(s.channels.h[k].col(0), s.devices[k].p_max, s.channels.noise_power,
                                          s.config.bandwidth, shares);
      t = std::max(t, s.devices[k].task_bits / plan.rates[k]);
    }
    for (int k : set) plan.tran[k] = t;
    return plan;
  });
}

SchemeResult run_tdma(const Scenario& s) {
  const int kk = s.num_devices();
  return greedy_orthogonal(s, Scheme::Tdma, [&](const std::vector<int>& set) {
    LinkPlan plan{std::vector<double>(kk, 0.0), std::vector<double>(kk, 0.0)};
    double total = 0.0;
    for (int k : set) {
      plan.rates[k] = matched_filter_rate(s.channels.h[k].col(0), s.devices[k].p_max, s.channels.noise_power,
                                          s.config.bandwidth, 1);
      total += s.devices[k].task_bits / plan.rates[k];
    }
    // Every slot precedes edge execution, so each offloader waits for the
    // whole schedule; the shortest-first order only decides who is dropped.
    for (int k : set) plan.tran[k] = total;
    return plan;
  });
}

SchemeResult run_local_only(const Scenario& s) {
  const int kk = s.num_devices();
  SchemeResult r;
  r.scheme = Scheme::LocalOnly;
  r.decision = OffloadDecision::all_local(kk);
  r.rates.assign(kk, 0.0);
  r.cost = account_costs(s, r.decision.c, std::vector<double>(kk, 0.0), std::vector<double>(kk, 0.0));
  r.feasible = r.cost.feasible();
  return r;
}

SchemeResult run_scheme(Scheme scheme, const Scenario& s) {
  switch (scheme) {
    case Scheme::DmMmco: return run_dm_mmco(s);
    case Scheme::OpMmse: return run_op_mmse(s);
    case Scheme::Fdma: return run_fdma(s);
    case Scheme::Tdma: return run_tdma(s);
    case Scheme::LocalOnly: return run_local_only(s);
  }
  throw Error(ErrorCode::InvalidArgument, "run_scheme: unknown scheme");
}

}  // namespace mecoff
