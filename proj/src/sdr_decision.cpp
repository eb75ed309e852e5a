#include "mecoff/sdr_decision.hpp"

#include <algorithm>
#include <cmath>

#include "mecoff/error.hpp"

namespace mecoff {

namespace {

void set_pair(RealMatrix& m, int i, int j, double coef) {
  // Symmetric placement so that x^T m x picks up coef * x_i * x_j.
  if (i == j) {
    m(i, i) += coef;
  } else {
    m(i, j) += 0.5 * coef;
    m(j, i) += 0.5 * coef;
  }
}

/// [[block, border/2], [border/2^T, corner]] so Tr(W [s;1][s;1]^T) = s^T block s + border^T s + corner.
RealMatrix homogenize(const RealMatrix& block, const RealVector& border, double corner = 0.0) {
  const int n = static_cast<int>(block.rows());
  RealMatrix w = RealMatrix::Zero(n + 1, n + 1);
  w.topLeftCorner(n, n) = block;
  w.block(0, n, n, 1) = 0.5 * border;
  w.block(n, 0, 1, n) = 0.5 * border.transpose();
  w(n, n) = corner;
  return w;
}

RealVector unit(int n, int i, double coef = 1.0) {
  RealVector e = RealVector::Zero(n);
  e(i) = coef;
  return e;
}

}  // namespace

double QcqpInstance::objective(const RealVector& s) const {
  return s.dot(m1 * s) + 2.0 * c0.dot(s);
}

QcqpInstance build_qcqp(const Scenario& s, const std::vector<double>& rate_bounds) {
  const int kk = s.num_devices();
  if (static_cast<int>(rate_bounds.size()) != kk) {
    throw Error(ErrorCode::InvalidArgument, "build_qcqp: one rate bound per device required");
  }
  QcqpInstance q;
  q.layout.k = kk;
  const auto& lay = q.layout;
  const int n = lay.size();
  q.m1 = RealMatrix::Zero(n, n);
  q.c0 = RealVector::Zero(n);

  const double le = s.config.lambda_e;
  const double lt = s.config.lambda_t;
  for (int k = 0; k < kk; ++k) {
    if (!(rate_bounds[k] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "build_qcqp: rate bounds must be positive");
    }
    const auto& dev = s.devices[k];
    const auto loc = local_cost(dev, s.config.alpha, s.config.kappa);
    const auto edge = edge_cost(dev, s.config.alpha);
    const double local_weighted = le * loc.energy + lt * loc.delay;
    const double delta = le * edge.energy + lt * edge.delay - local_weighted;

    q.task_bits.push_back(dev.task_bits);
    q.t_loc.push_back(loc.delay);
    q.t_c.push_back(edge.delay);
    q.tau_max.push_back(dev.tau_max);
    q.p_max.push_back(dev.p_max);
    q.rate_cap.push_back(rate_bounds[k]);
    q.lambda_e.push_back(le);
    q.lambda_t.push_back(lt);
    q.delta.push_back(delta);
    q.eta += local_weighted;

    set_pair(q.m1, lay.c(k), lay.pcom(k), le);
    set_pair(q.m1, lay.c(k), lay.t(), lt);
    q.c0(lay.c(k)) = 0.5 * delta;

    RealMatrix m2 = RealMatrix::Zero(n, n);
    set_pair(m2, lay.rate(k), lay.pcom(k), -1.0);
    q.m2.push_back(std::move(m2));

    RealMatrix m3 = RealMatrix::Zero(n, n);
    set_pair(m3, lay.rate(k), lay.t(), -1.0);
    q.m3.push_back(std::move(m3));

    RealMatrix m4 = RealMatrix::Zero(n, n);
    set_pair(m4, lay.c(k), lay.t(), 1.0);
    q.m4.push_back(std::move(m4));
  }
  return q;
}

LiftedSdp lift_to_sdp(const QcqpInstance& q) {
  const auto& lay = q.layout;
  const int n = lay.size();
  const int kk = lay.k;
  LiftedSdp out;
  out.dim = lay.lifted_dim();
  out.qcqp = q;
  out.w0 = homogenize(q.m1, 2.0 * q.c0);

  const RealMatrix zero = RealMatrix::Zero(n, n);
  for (int k = 0; k < kk; ++k) {
    RealMatrix sq = RealMatrix::Zero(n, n);
    sq(lay.c(k), lay.c(k)) = 1.0;
    out.w1.push_back(homogenize(sq, unit(n, lay.c(k), -1.0)));
    out.w2.push_back(homogenize(q.m2[k], unit(n, lay.pt(k), q.task_bits[k])));
    out.w3.push_back(homogenize(q.m3[k], unit(n, lay.c(k), q.task_bits[k])));
    // c_k (t + T_c) + (1 - c_k) T_loc <= tau, with the constant T_loc moved to the rhs.
    out.w4.push_back(homogenize(q.m4[k], unit(n, lay.c(k), q.t_c[k] - q.t_loc[k])));
    out.w5.push_back(homogenize(zero, unit(n, lay.pt(k))));
    out.rate_caps.push_back(homogenize(zero, unit(n, lay.rate(k))));
  }
  out.corner = RealMatrix::Zero(n + 1, n + 1);
  out.corner(n, n) = 1.0;

  auto nonneg = [&](int i) {
    out.bounds.push_back({homogenize(zero, unit(n, i, -1.0)), 0.0});
  };
  auto nonneg_product = [&](int i, int j) {
    RealMatrix m = RealMatrix::Zero(n, n);
    set_pair(m, i, j, -1.0);
    out.bounds.push_back({homogenize(m, RealVector::Zero(n)), 0.0});
  };
  auto square_cap = [&](int i, double upper) {
    RealMatrix m = RealMatrix::Zero(n, n);
    m(i, i) = 1.0;
    out.bounds.push_back({homogenize(m, unit(n, i, -upper)), 0.0});
  };
  double tau_hi = 0.0;
  for (int k = 0; k < kk; ++k) {
    nonneg(lay.rate(k));
    nonneg(lay.pcom(k));
    nonneg(lay.pt(k));
    nonneg_product(lay.c(k), lay.pcom(k));
    nonneg_product(lay.c(k), lay.t());
    square_cap(lay.rate(k), q.rate_cap[k]);
    square_cap(lay.pt(k), q.p_max[k]);
    square_cap(lay.pcom(k), q.p_max[k] * q.tau_max[k]);
    tau_hi = std::max(tau_hi, q.tau_max[k]);
  }
  nonneg(lay.t());
  square_cap(lay.t(), tau_hi);
  return out;
}

RealVector embed_configuration(const QcqpInstance& q, const std::vector<int>& c,
                               const std::vector<double>& rates,
                               const std::vector<double>& tx_power) {
  const auto& lay = q.layout;
  RealVector s = RealVector::Zero(lay.size());
  double t = 0.0;
  for (int k = 0; k < lay.k; ++k) {
    if (c.at(k) == 0) continue;
    if (!(rates.at(k) > 0.0)) throw Error(ErrorCode::ZeroRate, "embed_configuration: offloader with zero rate");
    s(lay.c(k)) = 1.0;
    s(lay.rate(k)) = rates[k];
    s(lay.pt(k)) = tx_power.at(k);
    s(lay.pcom(k)) = q.task_bits[k] * tx_power[k] / rates[k];
    t = std::max(t, q.task_bits[k] / rates[k]);
  }
  s(lay.t()) = t;
  return s;
}

SdpProblem LiftedSdp::problem() const {
  SdpProblem p;
  p.objective = w0;
  const int kk = qcqp.layout.k;
  for (int k = 0; k < kk; ++k) p.equalities.push_back({w1[k], 0.0});
  p.equalities.push_back({corner, 1.0});
  for (int k = 0; k < kk; ++k) {
    p.inequalities.push_back({w2[k], 0.0});
    p.inequalities.push_back({w3[k], 0.0});
    p.inequalities.push_back({w4[k], qcqp.tau_max[k] - qcqp.t_loc[k]});
    p.inequalities.push_back({w5[k], qcqp.p_max[k]});
    p.inequalities.push_back({rate_caps[k], qcqp.rate_cap[k]});
  }
  for (const auto& b : bounds) p.inequalities.push_back(b);
  return p;
}

OffloadDecision extract_decisions(const RealMatrix& g, int num_devices, double gamma) {
  const int last = static_cast<int>(g.rows()) - 1;
  if (g.rows() != g.cols() || last < num_devices) {
    throw Error(ErrorCode::InvalidArgument, "extract_decisions: G too small for the device count");
  }
  OffloadDecision d = OffloadDecision::all_local(num_devices);
  for (int k = 0; k < num_devices; ++k) {
    const double score = std::clamp(g(last, k), 0.0, 1.0);
    d.scores[k] = score;
    d.c[k] = score > gamma ? 1 : 0;
  }
  return d;
}

OffloadDecision extract_decisions(const SdpSolution& solution, int num_devices, double gamma) {
  return extract_decisions(solution.g, num_devices, gamma);
}

SdpScaling SdpScaling::for_qcqp(const QcqpInstance& q) {
  const auto& lay = q.layout;
  double p_ref = 0.0;
  for (double p : q.p_max) p_ref = std::max(p_ref, p);
  SdpScaling sc;
  sc.unit = RealVector::Ones(lay.lifted_dim());
  for (int k = 0; k < lay.k; ++k) {
    sc.unit(lay.rate(k)) = 1e6;
    sc.unit(lay.pcom(k)) = p_ref;
    sc.unit(lay.pt(k)) = p_ref;
  }
  return sc;
}

SdpProblem SdpScaling::apply(const SdpProblem& physical) const {
  auto conj = [&](const RealMatrix& w) -> RealMatrix {
    return unit.asDiagonal() * w * unit.asDiagonal();
  };
  SdpProblem out;
  out.objective = conj(physical.objective);
  for (const auto& r : physical.equalities) out.equalities.push_back({conj(r.matrix), r.rhs});
  for (const auto& r : physical.inequalities) out.inequalities.push_back({conj(r.matrix), r.rhs});
  return out;
}

RealMatrix SdpScaling::unscale(const RealMatrix& g_scaled) const {
  return unit.asDiagonal() * g_scaled * unit.asDiagonal();
}

DecisionOutcome dm_mmco_decide(const Scenario& s, const SdpOptions& options) {
  validate(s);
  const int kk = s.num_devices();
  DecisionOutcome out;
  for (int k = 0; k < kk; ++k) out.rate_bounds.push_back(rate_upper_bound(s, k));

  const auto qcqp = build_qcqp(s, out.rate_bounds);
  const auto lifted = lift_to_sdp(qcqp);
  const auto scaling = SdpScaling::for_qcqp(qcqp);
  out.sdp = solve_sdp(scaling.apply(lifted.problem()), options);
  out.sdp.g = scaling.unscale(out.sdp.g);

  if (out.sdp.status == SdpStatus::Infeasible) {
    out.sdp_failed = true;
    out.diagnostic = "relaxation infeasible (" + out.sdp.detail + "); falling back to all-local";
    out.decision = OffloadDecision::all_local(kk);
    return out;
  }
  if (out.sdp.status == SdpStatus::MaxIter) {
    out.diagnostic = "relaxation hit the iteration cap; rounding the last iterate";
  }
  out.decision = extract_decisions(out.sdp.g, kk, s.config.gamma);
  return out;
}

}  // namespace mecoff
