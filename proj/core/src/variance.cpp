#include "mixboot/variance.hpp"

#include "mixboot/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mixboot {

namespace {

Matrix fitted_params(const ReplicateSet& replicates) {
  const auto rows = replicates.fitted_rows();
  if (rows.size() < 2)
    throw Error(ErrorCode::InsufficientReplicates,
                "need at least two fitted replicates, have " + std::to_string(rows.size()));
  Matrix out(static_cast<Index>(rows.size()), replicates.params.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = replicates.params.row(rows[r]);
  return out;
}

// Scale turning a sum of squared deviations into the method's variance.
double deviation_scale(const ReplicateSet& replicates, Index fitted) {
  if (replicates.method == ResamplingMethod::Jackknife) {
    const auto n = static_cast<double>(replicates.n);
    return (n - 1.0) / n;
  }
  return 1.0 / static_cast<double>(fitted - 1);
}

// Deviations from the column means. Values are shifted by the first replicate
// before averaging, so identical replicates give exact zeros.
Matrix centered(const Matrix& psi) {
  const Matrix shifted = psi.rowwise() - psi.row(0);
  return shifted.rowwise() - shifted.colwise().mean();
}

Vector variance_for(const ReplicateSet& replicates) {
  const Matrix psi = fitted_params(replicates);
  return centered(psi).colwise().squaredNorm().transpose() * deviation_scale(replicates, psi.rows());
}

}  // namespace

Vector jk_variance(const ReplicateSet& replicates) {
  if (replicates.method != ResamplingMethod::Jackknife)
    throw Error(ErrorCode::InvalidArgument, "jk_variance needs jackknife replicates");
  return variance_for(replicates);
}

Vector bs_variance(const ReplicateSet& replicates) {
  if (replicates.method == ResamplingMethod::Jackknife)
    throw Error(ErrorCode::InvalidArgument, "bs_variance needs bootstrap or WLBS replicates");
  return variance_for(replicates);
}

Vector replicate_variance(const ReplicateSet& replicates) { return variance_for(replicates); }

double param_covariance(const ReplicateSet& replicates, Index slot_a, Index slot_b) {
  const Index d = replicates.params.cols();
  if (slot_a < 0 || slot_a >= d || slot_b < 0 || slot_b >= d)
    throw Error(ErrorCode::UnknownSlot, "parameter slot out of range");
  const Matrix psi = fitted_params(replicates);
  const Matrix dev = centered(psi);
  return dev.col(slot_a).dot(dev.col(slot_b)) * deviation_scale(replicates, psi.rows());
}

Vector replicate_mean(const ReplicateSet& replicates) {
  const auto rows = replicates.fitted_rows();
  Vector mean = Vector::Zero(replicates.params.cols());
  if (rows.empty()) return mean;
  for (Index r : rows) mean += replicates.params.row(r).transpose();
  return mean / static_cast<double>(rows.size());
}

std::vector<double> slot_values(const ReplicateSet& replicates, Index slot) {
  if (slot < 0 || slot >= replicates.params.cols())
    throw Error(ErrorCode::UnknownSlot, "parameter slot out of range");
  std::vector<double> out;
  for (Index r : replicates.fitted_rows()) out.push_back(replicates.params(r, slot));
  return out;
}

SeReport confidence_intervals(ResamplingMethod method, const ParamVector& estimates,
                              const Vector& std_errors, const Vector& replicate_mean,
                              Index k_fitted, Index k_total) {
  const Index d = estimates.values.size();
  if (std_errors.size() != d || replicate_mean.size() != d)
    throw Error(ErrorCode::InvalidArgument, "standard errors do not match the estimates");
  if ((std_errors.array() < 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "negative standard error");
  SeReport report;
  report.method = method;
  report.estimates = estimates;
  report.std_errors = std_errors;
  report.replicate_mean = replicate_mean;
  report.ci_lower = estimates.values - kIntervalHalfWidth * std_errors;
  report.ci_upper = estimates.values + kIntervalHalfWidth * std_errors;
  report.k_fitted = k_fitted;
  report.k_total = k_total;
  return report;
}

SeReport confidence_intervals(const ParamVector& estimates, const ReplicateSet& replicates) {
  if (!(estimates.layout == replicates.layout))
    throw Error(ErrorCode::InvalidArgument, "estimates and replicates use different layouts");
  const Vector se = replicate_variance(replicates).cwiseSqrt();
  return confidence_intervals(replicates.method, estimates, se, replicate_mean(replicates),
                              replicates.fitted(), replicates.K());
}

namespace {

// Type-7 (linear interpolation) sample quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2)
    throw Error(ErrorCode::InsufficientReplicates, "bandwidth needs at least two values");
  const auto K = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= K;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (K - 1.0));

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr_scale = (quantile(sorted, 0.75) - quantile(sorted, 0.25)) / 1.34;

  double spread = std::min(sd, iqr_scale);
  if (!(spread > 0.0)) spread = std::max(sd, iqr_scale);
  if (!(spread > 0.0)) spread = 1e-3 * std::max(1.0, std::abs(mean));
  return 0.9 * spread * std::pow(K, -0.2);
}

std::vector<KdePoint> kde_curve(std::span<const double> values, Index grid) {
  if (grid < 2) throw Error(ErrorCode::InvalidArgument, "KDE grid needs at least two points");
  const double h = silverman_bandwidth(values);
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it - 4.0 * h;
  const double hi = *hi_it + 4.0 * h;
  const double step = (hi - lo) / static_cast<double>(grid - 1);
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));

  std::vector<KdePoint> curve(static_cast<std::size_t>(grid));
  for (Index k = 0; k < grid; ++k) {
    const double x = k + 1 == grid ? hi : lo + static_cast<double>(k) * step;
    double sum = 0.0;
    for (double v : values) {
      const double u = (x - v) / h;
      sum += std::exp(-0.5 * u * u);
    }
    curve[static_cast<std::size_t>(k)] = {x, norm * sum};
  }
  return curve;
}

std::vector<KdePoint> kde_curves(const ReplicateSet& replicates, Index slot, Index grid) {
  const auto values = slot_values(replicates, slot);
  if (values.size() < 2)
    throw Error(ErrorCode::InsufficientReplicates, "KDE needs at least two fitted replicates");
  return kde_curve(values, grid);
}

double trapezoid_integral(std::span<const KdePoint> curve) noexcept {
  double total = 0.0;
  for (std::size_t k = 1; k < curve.size(); ++k)
    total += 0.5 * (curve[k].density + curve[k - 1].density) * (curve[k].x - curve[k - 1].x);
  return total;
}

}  // namespace mixboot
