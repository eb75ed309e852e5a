#include "mecoff/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mecoff/error.hpp"

namespace mecoff {

const char* to_string(SdpStatus status) noexcept {
  switch (status) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::MaxIter: return "MaxIter";
  }
  return "Unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Entry {
  int r;
  int c;
  double v;
};

/// A constraint row in standard form: Tr(A X) + slack = b.
struct Row {
  std::vector<Entry> entries;
  int slack = -1;
  double rhs = 0.0;
  double scale = 1.0;
};

RealMatrix symmetrized(const RealMatrix& m, int n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    throw Error(ErrorCode::InvalidArgument, std::string("solve_sdp: dimension mismatch in ") + what);
  }
  const double mag = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(mag, 1e-300) && asym > 0.0) {
    throw Error(ErrorCode::InvalidArgument, std::string("solve_sdp: asymmetric data matrix in ") + what);
  }
  return 0.5 * (m + m.transpose());
}

Row make_row(const RealMatrix& a, double rhs, int slack) {
  Row row;
  row.slack = slack;
  const double norm = std::sqrt(a.squaredNorm() + (slack >= 0 ? 1.0 : 0.0));
  row.scale = norm > 0.0 ? 1.0 / norm : 1.0;
  for (int c = 0; c < a.cols(); ++c) {
    for (int r = 0; r < a.rows(); ++r) {
      if (a(r, c) != 0.0) row.entries.push_back({r, c, a(r, c) * row.scale});
    }
  }
  row.rhs = rhs * row.scale;
  return row;
}

/// Largest alpha with M + alpha*D PSD, given the Cholesky factor of M.
double max_step_psd(const Eigen::LLT<RealMatrix>& chol_m, const RealMatrix& d) {
  const auto& l = chol_m.matrixL();
  RealMatrix w = l.solve(d);
  w = l.solve(w.transpose()).eval();
  w = 0.5 * (w + w.transpose());
  const double lmin = min_eigenvalue(w);
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

double max_step_lp(const RealVector& x, const RealVector& dx) {
  double alpha = kInf;
  for (int i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) alpha = std::min(alpha, -x(i) / dx(i));
  }
  return alpha;
}

class InteriorPoint {
 public:
  InteriorPoint(RealMatrix c, std::vector<Row> rows, int num_slacks, const SdpOptions& options,
                double rho_primal)
      : c_(std::move(c)), rows_(std::move(rows)), n_(static_cast<int>(c_.rows())),
        l_(num_slacks), m_(static_cast<int>(rows_.size())), opt_(options) {
    b_.resize(m_);
    for (int i = 0; i < m_; ++i) b_(i) = rows_[i].rhs;
    double rho_dual = 1.0 + c_.norm();
    for (const auto& row : rows_) {
      double nrm = 0.0;
      for (const auto& e : row.entries) nrm += e.v * e.v;
      rho_dual = std::max(rho_dual, 1.0 + std::sqrt(nrm));
    }
    x_ = rho_primal * RealMatrix::Identity(n_, n_);
    xl_ = RealVector::Constant(l_, rho_primal);
    z_ = rho_dual * RealMatrix::Identity(n_, n_);
    zl_ = RealVector::Constant(l_, rho_dual);
    y_ = RealVector::Zero(m_);
  }

  SdpSolution run() {
    SdpSolution out;
    const double norm_b = b_.norm();
    const double norm_c = c_.norm();
    const double nu = static_cast<double>(n_ + l_);
    for (int it = 0; it <= opt_.max_iter; ++it) {
      const RealVector rp = b_ - apply_a(x_, xl_);
      RealMatrix rd;
      RealVector rdl;
      apply_at(y_, rd, rdl);
      rd = c_ - rd - z_;
      rdl = -rdl - zl_;
      const double pobj = (c_.cwiseProduct(x_)).sum();
      const double dobj = b_.dot(y_);
      const double mu = ((x_.cwiseProduct(z_)).sum() + xl_.dot(zl_)) / nu;
      const double pinf = rp.norm() / (1.0 + norm_b);
      const double rd_norm = std::sqrt(rd.squaredNorm() + rdl.squaredNorm());
      const double dinf = rd_norm / (1.0 + norm_c);
      const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      out.history.push_back({pobj, dobj, pinf, dinf, mu});
      out.iterations = it;

      if (pinf <= opt_.tol && dinf <= opt_.tol && gap <= opt_.tol) {
        out.status = SdpStatus::Optimal;
        break;
      }
      if (dobj * opt_.tol > 1.0 + norm_c + rd_norm) {
        out.status = SdpStatus::Infeasible;
        out.detail = "primal infeasible: dual objective diverged";
        break;
      }
      if (-pobj * opt_.tol > 1.0 + norm_b + rp.norm()) {
        out.status = SdpStatus::Infeasible;
        out.detail = "dual infeasible: primal objective diverged";
        break;
      }
      if (it == opt_.max_iter) {
        out.status = SdpStatus::MaxIter;
        out.detail = "iteration limit reached";
        break;
      }
      if (!step(rp, rd, rdl, mu)) {
        out.status = SdpStatus::MaxIter;
        out.detail = "numerical breakdown in Newton system";
        break;
      }
    }
    out.g = x_;
    out.objective_value = (c_.cwiseProduct(x_)).sum();
    out.dual_objective = b_.dot(y_);
    out.duality_gap = std::abs(out.objective_value - out.dual_objective) /
                      (1.0 + std::abs(out.objective_value) + std::abs(out.dual_objective));
    out.equality_duals = y_;
    return out;
  }

  const std::vector<Row>& rows() const { return rows_; }
  const RealVector& duals() const { return y_; }

 private:
  RealVector apply_a(const RealMatrix& x, const RealVector& xl) const {
    RealVector out(m_);
    for (int i = 0; i < m_; ++i) {
      double acc = 0.0;
      for (const auto& e : rows_[i].entries) acc += e.v * x(e.c, e.r);
      if (rows_[i].slack >= 0) acc += xl(rows_[i].slack) * rows_[i].scale;
      out(i) = acc;
    }
    return out;
  }

  void apply_at(const RealVector& y, RealMatrix& s, RealVector& sl) const {
    s = RealMatrix::Zero(n_, n_);
    sl = RealVector::Zero(l_);
    for (int i = 0; i < m_; ++i) {
      for (const auto& e : rows_[i].entries) s(e.r, e.c) += y(i) * e.v;
      if (rows_[i].slack >= 0) sl(rows_[i].slack) += y(i) * rows_[i].scale;
    }
  }

  RealMatrix schur(const RealMatrix& zinv) const {
    RealMatrix mm = RealMatrix::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      for (int j = i; j < m_; ++j) {
        double acc = 0.0;
        for (const auto& p : rows_[i].entries) {
          for (const auto& q : rows_[j].entries) {
            acc += p.v * q.v * x_(p.c, q.r) * zinv(q.c, p.r);
          }
        }
        const int si = rows_[i].slack;
        if (si >= 0 && si == rows_[j].slack) {
          acc += rows_[i].scale * rows_[j].scale * xl_(si) / zl_(si);
        }
        mm(i, j) = acc;
        mm(j, i) = acc;
      }
    }
    return mm;
  }

  struct Direction {
    RealMatrix dx, dz;
    RealVector dxl, dzl, dy;
  };

  // Solves the HKM Newton system for complementarity residual given as
  // t1 = Rc * Z^{-1} (SDP block) and rcl (LP block).
  bool solve_direction(const Eigen::LDLT<RealMatrix>& fac, const RealMatrix& zinv,
                       const RealVector& rp, const RealMatrix& rd, const RealVector& rdl,
                       const RealMatrix& t1, const RealVector& rcl, Direction& d) const {
    const RealMatrix t2 = x_ * rd * zinv;
    RealVector rhs = rp - apply_a(t1, rcl.cwiseQuotient(zl_)) +
                     apply_a(t2, xl_.cwiseProduct(rdl).cwiseQuotient(zl_));
    d.dy = fac.solve(rhs);
    if (!d.dy.allFinite()) return false;
    RealMatrix aty;
    RealVector atyl;
    apply_at(d.dy, aty, atyl);
    d.dz = rd - aty;
    d.dzl = rdl - atyl;
    RealMatrix dx = t1 - x_ * d.dz * zinv;
    d.dx = 0.5 * (dx + dx.transpose());
    d.dxl = (rcl - xl_.cwiseProduct(d.dzl)).cwiseQuotient(zl_);
    return true;
  }

  std::pair<double, double> step_lengths(const Eigen::LLT<RealMatrix>& cx,
                                         const Eigen::LLT<RealMatrix>& cz,
                                         const Direction& d) const {
    double ap = std::min(max_step_psd(cx, d.dx), max_step_lp(xl_, d.dxl));
    double ad = std::min(max_step_psd(cz, d.dz), max_step_lp(zl_, d.dzl));
    return {ap, ad};
  }

  bool step(const RealVector& rp, const RealMatrix& rd, const RealVector& rdl, double mu) {
    Eigen::LLT<RealMatrix> cx(x_);
    Eigen::LLT<RealMatrix> cz(z_);
    if (cx.info() != Eigen::Success || cz.info() != Eigen::Success) return false;
    const RealMatrix zinv = cz.solve(RealMatrix::Identity(n_, n_));
    RealMatrix mm = schur(zinv);
    Eigen::LDLT<RealMatrix> fac(mm);
    if (fac.info() != Eigen::Success) {
      mm.diagonal().array() += 1e-14 * (1.0 + mm.diagonal().cwiseAbs().maxCoeff());
      fac.compute(mm);
      if (fac.info() != Eigen::Success) return false;
    }
    const double nu = static_cast<double>(n_ + l_);

    // Predictor (affine scaling).
    Direction aff;
    const RealVector rcl_aff = -xl_.cwiseProduct(zl_);
    if (!solve_direction(fac, zinv, rp, rd, rdl, -x_, rcl_aff, aff)) return false;
    auto [ap_aff, ad_aff] = step_lengths(cx, cz, aff);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    const double mu_aff =
        (((x_ + ap_aff * aff.dx).cwiseProduct(z_ + ad_aff * aff.dz)).sum() +
         (xl_ + ap_aff * aff.dxl).dot(zl_ + ad_aff * aff.dzl)) / nu;
    double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    Direction cor;
    const RealMatrix t1 = sigma * mu * zinv - x_ - aff.dx * aff.dz * zinv;
    const RealVector rcl = RealVector::Constant(l_, sigma * mu) - xl_.cwiseProduct(zl_) -
                           aff.dxl.cwiseProduct(aff.dzl);
    if (!solve_direction(fac, zinv, rp, rd, rdl, t1, rcl, cor)) return false;
    auto [ap, ad] = step_lengths(cx, cz, cor);
    ap = std::min(1.0, opt_.step_fraction * ap);
    ad = std::min(1.0, opt_.step_fraction * ad);

    x_ += ap * cor.dx;
    xl_ += ap * cor.dxl;
    y_ += ad * cor.dy;
    z_ += ad * cor.dz;
    zl_ += ad * cor.dzl;
    x_ = 0.5 * (x_ + x_.transpose()).eval();
    z_ = 0.5 * (z_ + z_.transpose()).eval();
    return true;
  }

  RealMatrix c_;
  std::vector<Row> rows_;
  int n_;
  int l_;
  int m_;
  SdpOptions opt_;
  RealVector b_;
  RealMatrix x_, z_;
  RealVector xl_, zl_, y_;
};

}  // namespace

double max_constraint_violation(const SdpProblem& problem, const RealMatrix& g) {
  double worst = 0.0;
  for (const auto& eq : problem.equalities) {
    worst = std::max(worst, std::abs((eq.matrix.cwiseProduct(g)).sum() - eq.rhs));
  }
  for (const auto& in : problem.inequalities) {
    worst = std::max(worst, (in.matrix.cwiseProduct(g)).sum() - in.rhs);
  }
  return worst;
}

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
  const int n = problem.dim();
  if (n <= 0 || problem.objective.cols() != n) {
    throw Error(ErrorCode::InvalidArgument, "solve_sdp: empty or non-square objective");
  }
  SdpProblem sym;
  sym.objective = symmetrized(problem.objective, n, "objective");
  double max_b = 0.0;
  double max_d = 0.0;
  std::vector<Row> rows;
  for (const auto& eq : problem.equalities) {
    sym.equalities.push_back({symmetrized(eq.matrix, n, "equality"), eq.rhs});
    rows.push_back(make_row(sym.equalities.back().matrix, eq.rhs, -1));
    max_b = std::max(max_b, std::abs(eq.rhs));
  }
  int slack = 0;
  for (const auto& in : problem.inequalities) {
    sym.inequalities.push_back({symmetrized(in.matrix, n, "inequality"), in.rhs});
    rows.push_back(make_row(sym.inequalities.back().matrix, in.rhs, slack++));
    max_d = std::max(max_d, std::abs(in.rhs));
  }
  const double rho = 1.0 + max_b + max_d;

  InteriorPoint ipm(sym.objective, rows, slack, options, rho);
  SdpSolution sol = ipm.run();

  // Undo the row normalization on the multipliers.
  const auto& r = ipm.rows();
  const RealVector& y = ipm.duals();
  const int ne = static_cast<int>(problem.equalities.size());
  sol.equality_duals.resize(ne);
  sol.inequality_duals.resize(static_cast<int>(problem.inequalities.size()));
  for (int i = 0; i < static_cast<int>(r.size()); ++i) {
    const double v = y(i) * r[i].scale;
    if (i < ne) {
      sol.equality_duals(i) = v;
    } else {
      sol.inequality_duals(i - ne) = v;
    }
  }
  sol.max_constraint_violation = max_constraint_violation(sym, sol.g);
  return sol;
}

}  // namespace mecoff
