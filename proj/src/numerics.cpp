#include "mecoff/numerics.hpp"

#include <cmath>

#include "mecoff/error.hpp"

namespace mecoff {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DistanceTooSmall: return "DistanceTooSmall";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ZeroReceiveVector: return "ZeroReceiveVector";
    case ErrorCode::ZeroRate: return "ZeroRate";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::InnerInfeasible: return "InnerInfeasible";
    case ErrorCode::SdpFailed: return "SdpFailed";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ComplexVector solve_hpd_system(const ComplexMatrix& a, const ComplexVector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw Error(ErrorCode::InvalidArgument, "solve_hpd_system: shape mismatch");
  }
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorCode::InvalidArgument, "solve_hpd_system: matrix is not Hermitian");
  }
  Eigen::LLT<ComplexMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "solve_hpd_system: non-positive pivot");
  }
  return llt.solve(b);
}

double min_eigenvalue(const RealMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace mecoff
