#pragma once

#include "mixboot/types.hpp"

namespace mixboot {

/// Lower Cholesky factor of a covariance matrix. Construction throws
/// DegenerateCovariance for matrices that are not symmetric positive definite.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const Matrix& cov);

  const Matrix& lower() const noexcept { return lower_; }
  double log_det() const noexcept { return log_det_; }

  /// Squared Mahalanobis distance of every row of `rows` from `mean`.
  Vector mahalanobis_sq(const Matrix& rows, const Vector& mean) const;

 private:
  Matrix lower_;
  double log_det_ = 0.0;
};

/// log N(x | mean, cov), evaluated through the Cholesky factor of cov.
double log_density(const Vector& x, const Vector& mean, const Matrix& cov);

/// log N(row_i | mean, cov) for every row.
Vector log_density_rows(const Matrix& rows, const Vector& mean, const CholeskyFactor& chol);

/// Smallest over largest eigenvalue; 0 for matrices that are not PD.
double reciprocal_condition(const Matrix& cov);

}  // namespace mixboot
