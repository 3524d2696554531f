#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixboot {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Observations in rows, variables in columns. Never empty, always finite.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix values);

  Index n() const noexcept { return values_.rows(); }
  Index p() const noexcept { return values_.cols(); }
  const Matrix& values() const noexcept { return values_; }
  auto row(Index i) const { return values_.row(i); }

  /// Rows gathered in the given order; duplicates allowed.
  DataMatrix gather(std::span<const Index> rows) const;
  /// Every row except `omitted`.
  DataMatrix without_row(Index omitted) const;

 private:
  Matrix values_;
};

/// Covariance constraint patterns, named after their mclust counterparts.
enum class CovarianceFamily {
  SphericalEqual,    // EII: sigma^2 I shared by every component
  SphericalVarying,  // VII: sigma_g^2 I
  FullEqual,         // EEE: one unrestricted Sigma shared by every component
  FullVarying,       // VVV: unrestricted Sigma_g
};

inline constexpr std::array<CovarianceFamily, 4> kAllFamilies = {
    CovarianceFamily::SphericalEqual, CovarianceFamily::SphericalVarying,
    CovarianceFamily::FullEqual, CovarianceFamily::FullVarying};

std::string_view mclust_name(CovarianceFamily family) noexcept;
std::optional<CovarianceFamily> parse_family(std::string_view name) noexcept;

constexpr bool is_spherical(CovarianceFamily f) noexcept {
  return f == CovarianceFamily::SphericalEqual ||
         f == CovarianceFamily::SphericalVarying;
}

constexpr bool shares_covariance(CovarianceFamily f) noexcept {
  return f == CovarianceFamily::SphericalEqual || f == CovarianceFamily::FullEqual;
}

/// Free covariance parameters for G components in p dimensions.
Index covariance_parameter_count(CovarianceFamily family, Index G, Index p) noexcept;

/// Mixing weights, component means (row g of `means`) and covariances.
struct MixtureModel {
  CovarianceFamily family = CovarianceFamily::FullVarying;
  Vector weights;
  Matrix means;  // G x p
  std::vector<Matrix> covariances;

  Index components() const noexcept { return weights.size(); }
  Index dimension() const noexcept { return means.cols(); }

  /// Throws InvalidArgument or DegenerateCovariance when an invariant fails.
  void validate() const;

  /// Component `g` of the result is component `order[g]` of this model.
  MixtureModel permuted(std::span<const Index> order) const;
};

/// Posterior membership probabilities, one row per observation.
class ResponsibilityMatrix {
 public:
  ResponsibilityMatrix() = default;
  explicit ResponsibilityMatrix(Matrix z);

  /// 0/1 memberships from labels in [0, G).
  static ResponsibilityMatrix from_labels(std::span<const Index> labels, Index G);

  const Matrix& z() const noexcept { return z_; }
  Index n() const noexcept { return z_.rows(); }
  Index components() const noexcept { return z_.cols(); }
  bool empty() const noexcept { return z_.size() == 0; }

  ResponsibilityMatrix gather(std::span<const Index> rows) const;
  ResponsibilityMatrix without_row(Index omitted) const;
  ResponsibilityMatrix permuted_columns(std::span<const Index> order) const;

 private:
  Matrix z_;
};

/// Nonnegative observation weights normalised to sum to n.
class WeightVector {
 public:
  explicit WeightVector(Vector w);

  static WeightVector ones(Index n);
  /// Rescales arbitrary positive-sum weights to mean one.
  static WeightVector normalized(Vector raw);

  const Vector& w() const noexcept { return w_; }
  Index size() const noexcept { return w_.size(); }
  double operator[](Index i) const { return w_[i]; }
  bool all_ones() const noexcept;

 private:
  Vector w_;
};

enum class FitStatus { Converged, MaxIterReached, Degenerate };

std::string_view to_string(FitStatus status) noexcept;

struct EmConfig {
  /// Stop when |l_k - l_{k-1}| <= tol * (1 + |l_k|).
  double tol = 1e-8;
  int max_iter = 1000;
  /// Effective component mass below which the M-step reports EmptyCluster.
  /// Unset means p + 1.
  std::optional<double> min_cluster_mass;
  /// Smallest accepted eigenvalue ratio of a fitted covariance.
  double min_rcond = 1e-10;

  double cluster_mass_floor(Index p) const noexcept {
    return min_cluster_mass.value_or(static_cast<double>(p + 1));
  }
};

struct FitResult {
  MixtureModel model;
  ResponsibilityMatrix responsibilities;
  /// Observed-data log-likelihood; the weighted objective for weighted fits.
  double loglik = 0.0;
  double bic = 0.0;
  int iterations = 0;
  FitStatus status = FitStatus::Degenerate;
  /// Objective value after every E-step, in order.
  std::vector<double> loglik_trace;
  /// Reason for a Degenerate status.
  std::string message;

  bool ok() const noexcept { return status != FitStatus::Degenerate; }
};

}  // namespace mixboot
