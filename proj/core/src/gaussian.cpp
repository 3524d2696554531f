#include "mixboot/gaussian.hpp"

#include "mixboot/error.hpp"

#include <cmath>
#include <numbers>

namespace mixboot {

CholeskyFactor::CholeskyFactor(const Matrix& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0)
    throw Error(ErrorCode::InvalidArgument, "covariance must be square");
  if (!cov.allFinite())
    throw Error(ErrorCode::DegenerateCovariance, "covariance has non-finite entries");
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::DegenerateCovariance, "covariance is not positive definite");
  lower_ = llt.matrixL();
  const auto diag = lower_.diagonal().array();
  if ((diag <= 0.0).any() || !diag.isFinite().all())
    throw Error(ErrorCode::DegenerateCovariance, "covariance is not positive definite");
  log_det_ = 2.0 * diag.log().sum();
}

Vector CholeskyFactor::mahalanobis_sq(const Matrix& rows, const Vector& mean) const {
  Matrix centered = (rows.rowwise() - mean.transpose()).transpose();
  lower_.triangularView<Eigen::Lower>().solveInPlace(centered);
  return centered.colwise().squaredNorm().transpose();
}

Vector log_density_rows(const Matrix& rows, const Vector& mean, const CholeskyFactor& chol) {
  const double p = static_cast<double>(mean.size());
  const double constant = -0.5 * (p * std::log(2.0 * std::numbers::pi) + chol.log_det());
  return (constant - 0.5 * chol.mahalanobis_sq(rows, mean).array()).matrix();
}

double log_density(const Vector& x, const Vector& mean, const Matrix& cov) {
  if (x.size() != mean.size() || cov.rows() != mean.size())
    throw Error(ErrorCode::InvalidArgument, "dimension mismatch in log_density");
  const CholeskyFactor chol(cov);
  return log_density_rows(x.transpose(), mean, chol)[0];
}

double reciprocal_condition(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return 0.0;
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || !std::isfinite(hi)) return 0.0;
  return lo / hi;
}

}  // namespace mixboot
