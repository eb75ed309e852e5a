#include "mecoff/fp_beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

namespace mecoff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSoftMinBeta = 50.0;
constexpr double kRestoreMargin = 1e-4;

int streams_of(const Scenario& s) { return s.config.streams; }

/// sigma^2 ||v||^2 + inter-user terms (+ intra-user terms when enabled).
double interference_power(const Scenario& s, const FpState& st, int k, int l) {
  const ComplexVector v = st.v[k].col(l);
  double total = s.channels.noise_power * v.squaredNorm();
  for (int i : st.offload_set) {
    if (i == k && !s.config.intra_stream_interference) continue;
    const ComplexVector u = s.channels.h[i].adjoint() * v;
    for (int j = 0; j < st.q[i].cols(); ++j) {
      if (i == k && j == l) continue;
      total += std::norm(u.dot(st.q[i].col(j)));
    }
  }
  return total;
}

double max_transmission_delay(const Scenario& s, const FpState& st, const std::vector<double>& rates) {
  double t = 0.0;
  for (int k : st.offload_set) {
    t = std::max(t, rates[k] > 0.0 ? s.devices[k].task_bits / rates[k] : kInf);
  }
  return t;
}

/// Recomputes true rates and q = max B/R, then the tight z and w.
void refresh(const Scenario& s, FpState& st) {
  st.rates = all_rates(s, st);
  st.q_delay = max_transmission_delay(s, st, st.rates);
  update_z(s, st);
  update_w(s, st);
}

RealVector margins(const QSubproblem& sub, const RealVector& x, const RealVector& rates) {
  const double q = sub.q_of(x);
  RealVector m(rates.size());
  for (int p = 0; p < rates.size(); ++p) m(p) = rates(p) * q / sub.task_bits()[p] - 1.0;
  return m;
}

/// Projected gradient ascent on the soft minimum of the rate-floor margins
/// (q held at its cap). Returns true once every margin reaches target.
bool raise_margins(const QSubproblem& sub, RealVector& x, double target, int max_iter) {
  if (sub.has_q()) x(sub.size() - 1) = 1.0;
  auto value = [&](const RealVector& y, RealVector* grad) {
    const auto ev = sub.evaluate(y, grad != nullptr);
    if (!ev.ok) return -kInf;
    const RealVector& r = ev.rates;
    const RealVector m = margins(sub, y, r);
    const double mmin = m.minCoeff();
    RealVector wts = (-kSoftMinBeta * (m.array() - mmin)).exp().matrix();
    const double total = wts.sum();
    if (grad != nullptr) {
      wts /= total;
      const RealMatrix& gr = ev.grad_rates;
      *grad = RealVector::Zero(y.size());
      for (int p = 0; p < m.size(); ++p) {
        *grad += wts(p) * (sub.q_of(y) / sub.task_bits()[p]) * gr.col(p);
      }
    }
    return mmin - std::log(total) / kSoftMinBeta;
  };
  auto min_margin = [&](const RealVector& y) {
    const RealVector r = sub.rates(y);
    return r.allFinite() ? margins(sub, y, r).minCoeff() : -kInf;
  };

  RealVector g;
  double val = value(x, &g);
  double alpha = 0.1 / std::max(g.norm(), 1e-300);
  for (int it = 0; it < max_iter; ++it) {
    if (min_margin(x) >= target) return true;
    bool ok = false;
    RealVector xn;
    double vn = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      xn = sub.project(x + alpha * g);
      if (sub.has_q()) xn(sub.size() - 1) = 1.0;
      vn = value(xn, nullptr);
      if (vn >= val + 1e-4 * g.dot(xn - x) && vn > val) {
        ok = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!ok) break;
    RealVector gn;
    vn = value(xn, &gn);
    const RealVector sx = xn - x;
    const RealVector sy = g - gn;  // ascent: curvature of -value
    const double sty = sx.dot(sy);
    alpha = sty > 0.0 ? std::clamp(sx.squaredNorm() / sty, 1e-12, 1e12) : std::min(alpha * 2.0, 1e12);
    x = xn;
    g = gn;
    val = vn;
  }
  return min_margin(x) >= target;
}

BeamformingSolution flagged(FpState st) {
  st.delay_feasible = false;
  st.converged = false;
  return st;
}

}  // namespace

FpOptions FpOptions::from_config(const ScenarioConfig& config) {
  FpOptions o;
  o.epsilon = config.epsilon;
  o.relative_stop = config.epsilon_relative;
  o.numiter = config.numiter;
  return o;
}

double delay_budget(const Scenario& s, const std::vector<int>& offload_set) {
  double budget = kInf;
  for (int k : offload_set) {
    const auto edge = edge_cost(s.devices.at(k), s.config.alpha);
    budget = std::min(budget, s.devices[k].tau_max - edge.delay);
  }
  return budget;
}

FpState init_beamformers(const Scenario& s, const std::vector<int>& offload_set) {
  const int d = streams_of(s);
  FpState st = BeamformingSolution::empty(s.num_devices(), offload_set);
  for (int k : st.offload_set) {
    Eigen::JacobiSVD<ComplexMatrix> svd(s.channels.h.at(k), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double amp = std::sqrt(s.devices[k].p_max / d);
    st.q[k] = amp * svd.matrixV().leftCols(d);
    st.v[k] = svd.matrixU().leftCols(d);
    st.z[k] = ComplexVector::Zero(d);
  }
  st.rates = all_rates(s, st);
  st.q_delay = max_transmission_delay(s, st, st.rates);
  return st;
}

void update_z(const Scenario& s, FpState& st) {
  for (int k : st.offload_set) {
    const int d = static_cast<int>(st.q[k].cols());
    st.z[k].resize(d);
    for (int l = 0; l < d; ++l) {
      const Complex signal = st.v[k].col(l).dot(s.channels.h[k] * st.q[k].col(l));
      st.z[k](l) = signal / interference_power(s, st, k, l);
    }
  }
}

void update_w(const Scenario& s, FpState& st) {
  for (int k : st.offload_set) {
    const double r = rate(s.channels, st, k, s.config.bandwidth, s.config.intra_stream_interference);
    if (!(r > 0.0)) throw Error(ErrorCode::ZeroRate, "update_w: offloader with zero rate");
    st.w[k] = std::sqrt(s.config.lambda_e * s.devices[k].task_bits * st.q[k].squaredNorm()) / r;
  }
}

void update_v(const Scenario& s, FpState& st) {
  const int m = s.config.bs_antennas;
  for (int k : st.offload_set) {
    ComplexMatrix a = s.channels.noise_power * ComplexMatrix::Identity(m, m);
    for (int i : st.offload_set) {
      if (i == k) continue;
      const ComplexMatrix hq = s.channels.h[i] * st.q[i];
      a += hq * hq.adjoint();
    }
    const ComplexMatrix own = s.channels.h[k] * st.q[k];
    for (int l = 0; l < own.cols(); ++l) {
      const Complex z = st.z[k](l);
      if (z == Complex(0.0, 0.0)) continue;
      ComplexMatrix al = a;
      if (s.config.intra_stream_interference) {
        for (int j = 0; j < own.cols(); ++j) {
          if (j != l) al += own.col(j) * own.col(j).adjoint();
        }
      }
      st.v[k].col(l) = solve_hpd_system(al, own.col(l)) / z;
    }
  }
}

double stream_bracket(const Scenario& s, const FpState& st, int k, int l) {
  const Complex z = st.z.at(k)(l);
  const Complex signal = st.v[k].col(l).dot(s.channels.h[k] * st.q[k].col(l));
  return 1.0 + 2.0 * std::real(std::conj(z) * signal) - std::norm(z) * interference_power(s, st, k, l);
}

double surrogate_rate(const Scenario& s, const FpState& st, int k) {
  double r = 0.0;
  for (int l = 0; l < st.q.at(k).cols(); ++l) {
    const double arg = stream_bracket(s, st, k, l);
    if (!(arg > 0.0)) throw Error(ErrorCode::DomainViolation, "surrogate log argument is not positive");
    r += s.config.bandwidth * std::log2(arg);
  }
  return r;
}

double evaluate_fqm(const Scenario& s, const FpState& st) {
  double f = 0.0;
  for (int k : st.offload_set) {
    const double w = st.w.at(k);
    const double energy_term = std::sqrt(s.config.lambda_e * s.devices[k].task_bits * st.q[k].squaredNorm());
    f += 2.0 * w * energy_term + s.config.lambda_t * st.q_delay - w * w * surrogate_rate(s, st, k);
  }
  return f;
}

double p6_objective(const Scenario& s, const FpState& st) {
  const auto rates = all_rates(s, st);
  const double q = max_transmission_delay(s, st, rates);
  double f = 0.0;
  for (int k : st.offload_set) {
    if (!(rates[k] > 0.0)) return kInf;
    f += s.config.lambda_e * s.devices[k].task_bits * st.q[k].squaredNorm() / rates[k] + s.config.lambda_t * q;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Transmit subproblem

QSubproblem::QSubproblem(const Scenario& s, const FpState& st, double q_cap, double norm_smoothing)
    : n_(s.config.md_antennas),
      d_(s.config.streams),
      q_cap_(q_cap),
      bandwidth_(s.config.bandwidth),
      noise_(s.channels.noise_power),
      smoothing_(norm_smoothing),
      intra_(s.config.intra_stream_interference),
      set_(st.offload_set) {
  const int no = static_cast<int>(set_.size());
  has_q_ = s.config.lambda_t > 0.0;
  lambda_t_sum_ = s.config.lambda_t * no;
  size_ = 2 * no * n_ * d_ + (has_q_ ? 1 : 0);
  u_.resize(static_cast<std::size_t>(no) * d_);
  for (int p = 0; p < no; ++p) {
    const int k = set_[p];
    const auto& dev = s.devices[k];
    const double cap = std::sqrt(dev.p_max);
    const double warm = st.q.at(k).norm();
    amp_.push_back(warm > 1e-9 * cap ? warm : cap);
    radius_.push_back(cap / amp_.back());
    bits_.push_back(dev.task_bits);
    wcoef_.push_back(2.0 * st.w.at(k) * std::sqrt(s.config.lambda_e * dev.task_bits));
    w2_.push_back(st.w[k] * st.w[k]);
    z_.push_back(st.z.at(k));
    for (int l = 0; l < d_; ++l) {
      const ComplexVector v = st.v.at(k).col(l);
      vnorm2_.push_back(v.squaredNorm());
      auto& row = u_[p * d_ + l];
      for (int i = 0; i < no; ++i) row.push_back(s.channels.h[set_[i]].adjoint() * v);
    }
  }
}

RealVector QSubproblem::pack(const FpState& st) const {
  RealVector x = RealVector::Zero(size_);
  for (int p = 0; p < static_cast<int>(set_.size()); ++p) {
    const ComplexMatrix& q = st.q.at(set_[p]);
    for (int l = 0; l < d_; ++l) {
      for (int r = 0; r < n_; ++r) {
        const int idx = 2 * ((p * d_ + l) * n_ + r);
        x(idx) = q(r, l).real() / amp_[p];
        x(idx + 1) = q(r, l).imag() / amp_[p];
      }
    }
  }
  if (has_q_) x(size_ - 1) = std::clamp(st.q_delay / q_cap_, 1e-9, 1.0);
  return x;
}

void QSubproblem::unpack(const RealVector& x, FpState& st) const {
  for (int p = 0; p < static_cast<int>(set_.size()); ++p) {
    ComplexMatrix& q = st.q.at(set_[p]);
    q.resize(n_, d_);
    for (int l = 0; l < d_; ++l) {
      for (int r = 0; r < n_; ++r) {
        const int idx = 2 * ((p * d_ + l) * n_ + r);
        q(r, l) = amp_[p] * Complex(x(idx), x(idx + 1));
      }
    }
  }
  if (has_q_) st.q_delay = x(size_ - 1) * q_cap_;
}

double QSubproblem::q_of(const RealVector& x) const {
  return has_q_ ? x(size_ - 1) * q_cap_ : q_cap_;
}

RealVector QSubproblem::project(const RealVector& x) const {
  RealVector y = x;
  const int block = 2 * n_ * d_;
  for (int p = 0; p < static_cast<int>(set_.size()); ++p) {
    auto seg = y.segment(p * block, block);
    const double nrm = seg.norm();
    if (nrm > radius_[p]) seg *= radius_[p] / nrm;
  }
  if (has_q_) y(size_ - 1) = std::clamp(y(size_ - 1), 1e-9, 1.0);
  return y;
}

QSubproblem::Eval QSubproblem::eval(const RealVector& x, RealVector* grad_f, RealMatrix* grad_rates) const {
  const int no = static_cast<int>(set_.size());
  std::vector<ComplexMatrix> q(no, ComplexMatrix(n_, d_));
  for (int p = 0; p < no; ++p) {
    for (int l = 0; l < d_; ++l) {
      for (int r = 0; r < n_; ++r) {
        const int idx = 2 * ((p * d_ + l) * n_ + r);
        q[p](r, l) = amp_[p] * Complex(x(idx), x(idx + 1));
      }
    }
  }
  const bool want_grad = grad_f != nullptr || grad_rates != nullptr;
  std::vector<ComplexMatrix> gf;        // d F / d Q_i (real-gradient convention)
  std::vector<ComplexMatrix> gr;        // [p * no + i]: d R~_p / d Q_i
  if (grad_f != nullptr) gf.assign(no, ComplexMatrix::Zero(n_, d_));
  if (grad_rates != nullptr) gr.assign(static_cast<std::size_t>(no) * no, ComplexMatrix::Zero(n_, d_));
  auto add = [&](int p, int i, int col, const ComplexVector& term) {
    if (grad_rates != nullptr) gr[p * no + i].col(col) += term;
    if (grad_f != nullptr) gf[i].col(col) -= w2_[p] * term;
  };

  Eval e;
  e.rate = RealVector::Zero(no);
  std::vector<Complex> inner(static_cast<std::size_t>(no) * d_);
  for (int p = 0; p < no; ++p) {
    for (int l = 0; l < d_; ++l) {
      const auto& us = u_[p * d_ + l];
      const Complex z = z_[p](l);
      const double z2 = std::norm(z);
      const Complex a = us[p].dot(q[p].col(l));
      double interference = noise_ * vnorm2_[p * d_ + l];
      for (int i = 0; i < no; ++i) {
        if (i == p && !intra_) continue;
        for (int j = 0; j < d_; ++j) {
          if (i == p && j == l) continue;
          inner[i * d_ + j] = us[i].dot(q[i].col(j));
          interference += std::norm(inner[i * d_ + j]);
        }
      }
      const double arg = 1.0 + 2.0 * std::real(std::conj(z) * a) - z2 * interference;
      if (!(arg > 0.0)) {
        e.domain_ok = false;
        e.f = kInf;
        e.rate.setConstant(-kInf);
        return e;
      }
      e.rate(p) += bandwidth_ * std::log2(arg);
      if (!want_grad) continue;
      const double coef = bandwidth_ / (std::numbers::ln2 * arg);
      add(p, p, l, (coef * 2.0 * z) * us[p]);
      for (int i = 0; i < no; ++i) {
        if (i == p && !intra_) continue;
        for (int j = 0; j < d_; ++j) {
          if (i == p && j == l) continue;
          add(p, i, j, (-coef * z2 * 2.0 * inner[i * d_ + j]) * us[i]);
        }
      }
    }
  }

  const double qv = q_of(x);
  e.f = lambda_t_sum_ * qv;
  for (int p = 0; p < no; ++p) {
    const double nrm = std::sqrt(q[p].squaredNorm() + smoothing_);
    e.f += wcoef_[p] * nrm - w2_[p] * e.rate(p);
    if (grad_f != nullptr) gf[p] += (wcoef_[p] / nrm) * q[p];
  }

  auto scatter = [&](const ComplexMatrix& g, int p, RealVector& out) {
    for (int l = 0; l < d_; ++l) {
      for (int r = 0; r < n_; ++r) {
        const int idx = 2 * ((p * d_ + l) * n_ + r);
        out(idx) += amp_[p] * g(r, l).real();
        out(idx + 1) += amp_[p] * g(r, l).imag();
      }
    }
  };
  if (grad_f != nullptr) {
    *grad_f = RealVector::Zero(size_);
    for (int p = 0; p < no; ++p) scatter(gf[p], p, *grad_f);
    if (has_q_) (*grad_f)(size_ - 1) = lambda_t_sum_ * q_cap_;
  }
  if (grad_rates != nullptr) {
    *grad_rates = RealMatrix::Zero(size_, no);
    for (int p = 0; p < no; ++p) {
      RealVector col = RealVector::Zero(size_);
      for (int i = 0; i < no; ++i) scatter(gr[p * no + i], i, col);
      grad_rates->col(p) = col;
    }
  }
  return e;
}

QSubproblem::Evaluation QSubproblem::evaluate(const RealVector& x, bool with_gradients) const {
  Evaluation out;
  const Eval e = with_gradients ? eval(x, &out.grad_f, &out.grad_rates) : eval(x, nullptr, nullptr);
  out.ok = e.domain_ok;
  out.f = e.f;
  out.rates = e.rate;
  return out;
}

double QSubproblem::objective(const RealVector& x) const { return eval(x, nullptr, nullptr).f; }

RealVector QSubproblem::gradient(const RealVector& x) const {
  RealVector g;
  eval(x, &g, nullptr);
  return g;
}

RealVector QSubproblem::rates(const RealVector& x) const { return eval(x, nullptr, nullptr).rate; }

RealMatrix QSubproblem::rate_gradients(const RealVector& x) const {
  RealMatrix g;
  eval(x, nullptr, &g);
  return g;
}

// ---------------------------------------------------------------------------

QStepReport update_q_matrices(const Scenario& s, FpState& st, const FpOptions& o) {
  const double qcap = delay_budget(s, st.offload_set);
  if (!(qcap > 0.0)) throw InnerInfeasible("edge execution alone exceeds a deadline", flagged(st));
  const QSubproblem sub(s, st, qcap, o.norm_smoothing);
  const int no = static_cast<int>(st.offload_set.size());

  RealVector x0 = sub.pack(st);
  {
    RealVector probe = x0;
    if (sub.has_q()) probe(sub.size() - 1) = 1.0;
    const RealVector r = sub.rates(probe);
    if (!r.allFinite() || margins(sub, probe, r).minCoeff() <= 0.0) {
      if (!raise_margins(sub, probe, kRestoreMargin, o.max_inner_iter)) {
        FpState best = st;
        sub.unpack(probe, best);
        best.rates = all_rates(s, best);
        best.q_delay = max_transmission_delay(s, best, best.rates);
        throw InnerInfeasible("surrogate rate floors cannot be met", flagged(best));
      }
      x0 = probe;
    }
  }
  if (sub.has_q()) {
    const RealVector r = sub.rates(x0);
    double need = 0.0;
    for (int p = 0; p < no; ++p) need = std::max(need, sub.task_bits()[p] / r(p));
    x0(sub.size() - 1) = std::clamp(need / qcap * (1.0 + 1e-3), 1e-9, 1.0);
  }

  QStepReport rep;
  const double f0 = sub.objective(x0);
  const double fscale = std::abs(f0) > 0.0 ? std::abs(f0) : 1.0;

  double mu = o.barrier_mu0;
  auto phi = [&](const RealVector& x, RealVector* grad) {
    const auto ev = sub.evaluate(x, grad != nullptr);
    if (!ev.ok || !std::isfinite(ev.f)) return kInf;
    const RealVector m = margins(sub, x, ev.rates);
    if (m.minCoeff() <= 0.0) return kInf;
    double val = ev.f / fscale;
    for (int p = 0; p < no; ++p) val -= mu * std::log(m(p));
    if (grad != nullptr) {
      *grad = ev.grad_f / fscale;
      const double q = sub.q_of(x);
      for (int p = 0; p < no; ++p) {
        const double wgt = mu / m(p);
        *grad -= (wgt * q / sub.task_bits()[p]) * ev.grad_rates.col(p);
        if (sub.has_q()) (*grad)(sub.size() - 1) -= wgt * ev.rates(p) / sub.task_bits()[p] * sub.q_cap();
      }
    }
    return val;
  };

  RealVector x = x0;
  for (int round = 0; round < o.barrier_rounds; ++round) {
    // Early rounds only need a rough center; the last one runs to tol_inner.
    const double tol = o.tol_inner * std::pow(100.0, o.barrier_rounds - 1 - round);
    RealVector g;
    double val = phi(x, &g);
    std::deque<double> recent{val};
    double alpha = std::clamp(1.0 / std::max(g.lpNorm<Eigen::Infinity>(), 1e-300), 1e-12, 1e12);
    for (int it = 0; it < o.max_inner_iter; ++it) {
      rep.stationarity = (x - sub.project(x - g)).norm();
      if (rep.stationarity <= tol) break;
      // Spectral step, then halving along the projected direction against
      // the largest of the recent values.
      const RealVector dir = sub.project(x - alpha * g) - x;
      const double slope = g.dot(dir);
      const double ref = *std::max_element(recent.begin(), recent.end());
      double lambda = 1.0;
      bool ok = false;
      RealVector xn;
      double vn = kInf;
      for (int ls = 0; ls < 60; ++ls, lambda *= 0.5) {
        xn = x + lambda * dir;
        vn = phi(xn, nullptr);
        if (vn <= ref + o.armijo_c * lambda * slope) {
          ok = true;
          break;
        }
      }
      if (!ok) break;
      RealVector gn;
      vn = phi(xn, &gn);
      const RealVector sx = xn - x;
      const RealVector sy = gn - g;
      const double sty = sx.dot(sy);
      alpha = sty > 0.0 ? std::clamp(sx.squaredNorm() / sty, 1e-12, 1e12) : 1e12;
      x = xn;
      g = gn;
      val = vn;
      recent.push_back(val);
      if (recent.size() > 10) recent.pop_front();
      ++rep.inner_iterations;
    }
    mu *= o.barrier_shrink;
  }

  // Accept only if the true cost (V fixed) does not increase; otherwise
  // backtrack toward the warm start along the segment.
  FpState base = st;
  sub.unpack(x0, base);
  const double cost0 = p6_objective(s, base);
  rep.f_before = cost0;
  rep.f_after = cost0;
  double theta = 1.0;
  for (int tries = 0; tries < 40; ++tries, theta *= 0.5) {
    FpState cand = st;
    sub.unpack(x0 + theta * (x - x0), cand);
    const auto r = all_rates(s, cand);
    if (max_transmission_delay(s, cand, r) > qcap) continue;
    const double c = p6_objective(s, cand);
    if (c <= cost0) {
      st = std::move(cand);
      rep.f_after = c;
      return rep;
    }
  }
  st = std::move(base);
  return rep;
}

BeamformingSolution solve_beamforming(const Scenario& s, const std::vector<int>& offload_set) {
  return solve_beamforming(s, offload_set, FpOptions::from_config(s.config));
}

BeamformingSolution solve_beamforming(const Scenario& s, const std::vector<int>& offload_set,
                                      const FpOptions& o) {
  FpState st = init_beamformers(s, offload_set);
  if (st.offload_set.empty()) {
    st.converged = true;
    return st;
  }
  const double qcap = delay_budget(s, st.offload_set);
  if (!(qcap > 0.0)) throw InnerInfeasible("edge execution alone exceeds a deadline", flagged(st));

  // Restore strict delay feasibility of the starting point if needed.
  auto true_margin = [&](const FpState& x) {
    return qcap / x.q_delay - 1.0;
  };
  for (int round = 0; round < o.phase1_rounds && !(true_margin(st) > kRestoreMargin); ++round) {
    update_z(s, st);
    std::fill(st.w.begin(), st.w.end(), 0.0);
    const QSubproblem sub(s, st, qcap, o.norm_smoothing);
    RealVector x = sub.pack(st);
    raise_margins(sub, x, 2.0 * kRestoreMargin, o.max_inner_iter);
    sub.unpack(x, st);
    update_z(s, st);
    update_v(s, st);
    st.rates = all_rates(s, st);
    st.q_delay = max_transmission_delay(s, st, st.rates);
  }
  if (!(true_margin(st) > 0.0)) {
    throw InnerInfeasible("no delay-feasible transmit design found", flagged(st));
  }

  refresh(s, st);
  st.fqm_history.assign(1, evaluate_fqm(s, st));
  FpState best = st;
  double best_f = kInf;
  double prev = 0.0;  // f_qm^(0) = 0 for the stop test
  int n = 0;
  bool converged = false;
  while (n < o.numiter) {
    ++n;
    try {
      update_q_matrices(s, st, o);
    } catch (const InnerInfeasible&) {
      break;  // keep the best accepted iterate
    }
    refresh(s, st);
    update_v(s, st);
    refresh(s, st);
    const double f = evaluate_fqm(s, st);
    st.fqm_history.push_back(f);
    if (f < best_f) {
      best_f = f;
      best = st;
    }
    const double scale = o.relative_stop ? std::max(std::abs(prev), 1e-300) : 1.0;
    if (std::abs(f - prev) < o.epsilon * scale) {
      converged = true;
      break;
    }
    prev = f;
  }
  best.fqm_history = st.fqm_history;
  best.iterations = n;
  best.converged = converged;
  best.delay_feasible = best.q_delay <= qcap * (1.0 + 1e-12);
  return best;
}

RepairOutcome feasibility_repair(const Scenario& s, const OffloadDecision& decision,
                                 const InnerInfeasible& failure, const FpOptions& o) {
  RepairOutcome out;
  out.decision = decision;
  out.solution = failure.best_effort();
  out.feasible = false;
  for (;;) {
    int pick = -1;
    double worst = -1.0;
    for (int k : out.decision.offload_set()) {
      const auto loc = local_cost(s.devices[k], s.config.alpha, s.config.kappa);
      if (loc.delay > s.devices[k].tau_max) continue;
      const double rhat = rate_upper_bound(s, k);
      const double ratio = rhat > 0.0 ? s.devices[k].task_bits / rhat : kInf;
      if (ratio > worst) {
        worst = ratio;
        pick = k;
      }
    }
    if (pick < 0) return out;
    out.decision.c[pick] = 0;
    out.decision.scores[pick] = 0.0;
    out.moved_to_local.push_back(pick);
    const auto set = out.decision.offload_set();
    try {
      out.solution = solve_beamforming(s, set, o);
      out.feasible = true;
      return out;
    } catch (const InnerInfeasible& e) {
      out.solution = e.best_effort();
    }
  }
}

}  // namespace mecoff
