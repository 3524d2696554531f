#pragma once

#include "mixboot/params.hpp"
#include "mixboot/resampling.hpp"

#include <span>
#include <vector>

namespace mixboot {

/// Intervals are estimate +/- kIntervalHalfWidth * SE.
inline constexpr double kIntervalHalfWidth = 2.0;

/// ((n - 1) / n) * sum_m (psi_m - mean)^2 over the fitted jackknife
/// replicates, per slot. n is the original sample size.
Vector jk_variance(const ReplicateSet& replicates);

/// Sample variance (K_fitted - 1 denominator) over the fitted replicates.
/// Serves both the bootstrap and the weighted likelihood bootstrap.
Vector bs_variance(const ReplicateSet& replicates);

/// jk_variance or bs_variance according to the set's method.
Vector replicate_variance(const ReplicateSet& replicates);

/// Cross-moment analogue of replicate_variance for two slots.
double param_covariance(const ReplicateSet& replicates, Index slot_a, Index slot_b);

/// Mean of each slot over the fitted replicates.
Vector replicate_mean(const ReplicateSet& replicates);

/// Fitted replicate values of one slot.
std::vector<double> slot_values(const ReplicateSet& replicates, Index slot);

struct SeReport {
  ResamplingMethod method = ResamplingMethod::Jackknife;
  /// Full-data MLEs; intervals are centred here.
  ParamVector estimates;
  Vector std_errors;
  Vector replicate_mean;
  Vector ci_lower;
  Vector ci_upper;
  Index k_fitted = 0;
  Index k_total = 0;
};

SeReport confidence_intervals(ResamplingMethod method, const ParamVector& estimates,
                              const Vector& std_errors, const Vector& replicate_mean,
                              Index k_fitted, Index k_total);

/// Standard errors from the replicates, then MLE +/- 2 SE.
SeReport confidence_intervals(const ParamVector& estimates, const ReplicateSet& replicates);

/// Closed-interval containment.
inline bool covers(const SeReport& report, Index slot, double truth) noexcept {
  return report.ci_lower[slot] <= truth && truth <= report.ci_upper[slot];
}

struct KdePoint {
  double x = 0.0;
  double density = 0.0;
};

/// Silverman's rule of thumb, 0.9 min(sd, IQR / 1.34) K^(-1/5). Falls back to
/// the non-zero spread measure, then to a small multiple of the location when
/// the values are all equal.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian-kernel density on `grid` equally spaced points covering
/// [min - 4h, max + 4h].
std::vector<KdePoint> kde_curve(std::span<const double> values, Index grid);

/// KDE of the fitted replicate values of one slot.
std::vector<KdePoint> kde_curves(const ReplicateSet& replicates, Index slot, Index grid);

/// Trapezoid-rule integral of a curve.
double trapezoid_integral(std::span<const KdePoint> curve) noexcept;

}  // namespace mixboot
