#pragma once

#include "mixboot/types.hpp"

#include <span>

namespace mixboot {

struct EStepResult {
  ResponsibilityMatrix responsibilities;
  /// log sum_g tau_g f(x_i | mu_g, Sigma_g) for every observation.
  Vector row_loglik;
  /// Sum of row_loglik.
  double loglik = 0.0;
};

/// Posterior memberships and observed-data log-likelihood under `model`.
/// Throws DegenerateCovariance when a component covariance cannot be factored.
EStepResult e_step(const DataMatrix& data, const MixtureModel& model);

/// Maximiser of the expected weighted complete-data log-likelihood, where
/// observation i enters with exponent z_ig * w_i. Unit weights give the
/// ordinary M-step.
///
/// Throws EmptyCluster when a component's weighted mass falls below
/// `config.cluster_mass_floor(p)`, and DegenerateCovariance when a resulting
/// covariance is not safely positive definite.
MixtureModel weighted_m_step(const DataMatrix& data, const ResponsibilityMatrix& resp,
                             const WeightVector& weights, CovarianceFamily family,
                             const EmConfig& config = {});

/// EM starting with an M-step from `init`. Failures during the run are
/// reported through FitStatus::Degenerate rather than thrown.
FitResult em_fit(const DataMatrix& data, const ResponsibilityMatrix& init,
                 CovarianceFamily family, const WeightVector& weights,
                 const EmConfig& config = {});

FitResult em_fit(const DataMatrix& data, const ResponsibilityMatrix& init,
                 CovarianceFamily family, const EmConfig& config = {});

/// (G - 1) + G p + covariance parameters.
Index free_parameter_count(Index G, Index p, CovarianceFamily family) noexcept;

/// mclust convention, larger is better: 2 loglik - k log n.
double bic(double loglik, Index n, Index G, Index p, CovarianceFamily family) noexcept;
double bic(const FitResult& fit, Index n);

/// Largest drop between consecutive entries of an objective trace; 0 for a
/// non-decreasing trace.
double largest_decrease(std::span<const double> trace) noexcept;

}  // namespace mixboot
