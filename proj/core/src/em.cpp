#include "mixboot/em.hpp"

#include "mixboot/error.hpp"
#include "mixboot/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace mixboot {

EStepResult e_step(const DataMatrix& data, const MixtureModel& model) {
  const Index n = data.n();
  const Index G = model.components();
  if (model.dimension() != data.p())
    throw Error(ErrorCode::InvalidArgument, "model and data dimensions differ");

  Matrix log_joint(n, G);
  std::optional<CholeskyFactor> shared;
  if (shares_covariance(model.family)) shared.emplace(model.covariances.front());
  for (Index g = 0; g < G; ++g) {
    const Vector mean = model.means.row(g).transpose();
    const double log_tau = std::log(model.weights[g]);
    if (shared) {
      log_joint.col(g) = log_density_rows(data.values(), mean, *shared).array() + log_tau;
    } else {
      const CholeskyFactor chol(model.covariances[static_cast<std::size_t>(g)]);
      log_joint.col(g) = log_density_rows(data.values(), mean, chol).array() + log_tau;
    }
  }

  EStepResult out;
  out.row_loglik.resize(n);
  Matrix z(n, G);
  for (Index i = 0; i < n; ++i) {
    const double shift = log_joint.row(i).maxCoeff();
    const auto scaled = (log_joint.row(i).array() - shift).exp();
    const double total = scaled.sum();
    out.row_loglik[i] = shift + std::log(total);
    z.row(i) = scaled / total;
  }
  out.loglik = out.row_loglik.sum();
  if (!std::isfinite(out.loglik))
    throw Error(ErrorCode::DegenerateCovariance, "log-likelihood is not finite");
  out.responsibilities = ResponsibilityMatrix(std::move(z));
  return out;
}

MixtureModel weighted_m_step(const DataMatrix& data, const ResponsibilityMatrix& resp,
                             const WeightVector& weights, CovarianceFamily family,
                             const EmConfig& config) {
  const Index n = data.n();
  const Index p = data.p();
  const Index G = resp.components();
  if (resp.n() != n || weights.size() != n)
    throw Error(ErrorCode::InvalidArgument, "responsibilities, weights and data disagree on n");

  const Matrix& X = data.values();
  const Matrix wz = resp.z().array().colwise() * weights.w().array();
  const Vector mass = wz.colwise().sum().transpose();
  const double floor = config.cluster_mass_floor(p);
  for (Index g = 0; g < G; ++g) {
    if (!(mass[g] >= floor))
      throw Error(ErrorCode::EmptyCluster, "component " + std::to_string(g + 1) +
                                               " has effective mass " + std::to_string(mass[g]));
  }

  MixtureModel model;
  model.family = family;
  model.weights = mass / mass.sum();
  model.means = (wz.transpose() * X).array().colwise() / mass.array();

  std::vector<Matrix> scatter(static_cast<std::size_t>(G));
  for (Index g = 0; g < G; ++g) {
    const Matrix centered = X.rowwise() - model.means.row(g);
    scatter[static_cast<std::size_t>(g)] =
        centered.transpose() * (centered.array().colwise() * wz.col(g).array()).matrix();
  }

  const double total_mass = mass.sum();
  model.covariances.resize(static_cast<std::size_t>(G));
  switch (family) {
    case CovarianceFamily::FullVarying:
      for (Index g = 0; g < G; ++g)
        model.covariances[static_cast<std::size_t>(g)] = scatter[static_cast<std::size_t>(g)] / mass[g];
      break;
    case CovarianceFamily::FullEqual: {
      Matrix pooled = Matrix::Zero(p, p);
      for (const auto& w : scatter) pooled += w;
      pooled /= total_mass;
      for (auto& c : model.covariances) c = pooled;
      break;
    }
    case CovarianceFamily::SphericalVarying:
      for (Index g = 0; g < G; ++g) {
        const double var = scatter[static_cast<std::size_t>(g)].trace() / (static_cast<double>(p) * mass[g]);
        model.covariances[static_cast<std::size_t>(g)] = var * Matrix::Identity(p, p);
      }
      break;
    case CovarianceFamily::SphericalEqual: {
      double trace = 0.0;
      for (const auto& w : scatter) trace += w.trace();
      const double var = trace / (static_cast<double>(p) * total_mass);
      for (auto& c : model.covariances) c = var * Matrix::Identity(p, p);
      break;
    }
  }

  for (auto& c : model.covariances) {
    c = 0.5 * (c + c.transpose()).eval();
    if (!(reciprocal_condition(c) >= config.min_rcond))
      throw Error(ErrorCode::DegenerateCovariance, "fitted covariance is singular or ill-conditioned");
  }
  return model;
}

namespace {

bool is_fit_failure(const Error& e) {
  return e.code() == ErrorCode::DegenerateCovariance || e.code() == ErrorCode::EmptyCluster;
}

FitResult degenerate(FitResult partial, const Error& e) {
  partial.status = FitStatus::Degenerate;
  partial.message = std::string(to_string(e.code())) + ": " + e.what();
  partial.loglik = std::numeric_limits<double>::quiet_NaN();
  partial.bic = std::numeric_limits<double>::quiet_NaN();
  return partial;
}

}  // namespace

FitResult em_fit(const DataMatrix& data, const ResponsibilityMatrix& init,
                 CovarianceFamily family, const WeightVector& weights,
                 const EmConfig& config) {
  if (init.n() != data.n())
    throw Error(ErrorCode::InvalidArgument, "initial responsibilities do not match the data");

  FitResult fit;
  const bool unit = weights.all_ones();
  double previous = -std::numeric_limits<double>::infinity();
  try {
    fit.model = weighted_m_step(data, init, weights, family, config);
    for (int iter = 1; iter <= config.max_iter; ++iter) {
      EStepResult e = e_step(data, fit.model);
      const double objective = unit ? e.loglik : weights.w().dot(e.row_loglik);
      if (!std::isfinite(objective))
        throw Error(ErrorCode::DegenerateCovariance, "objective is not finite");
      fit.loglik_trace.push_back(objective);
      fit.responsibilities = std::move(e.responsibilities);
      fit.loglik = objective;
      fit.iterations = iter;
      if (iter > 1 && std::abs(objective - previous) <= config.tol * (1.0 + std::abs(objective))) {
        fit.status = FitStatus::Converged;
        break;
      }
      previous = objective;
      if (iter == config.max_iter) {
        fit.status = FitStatus::MaxIterReached;
        break;
      }
      fit.model = weighted_m_step(data, fit.responsibilities, weights, family, config);
    }
  } catch (const Error& e) {
    if (!is_fit_failure(e)) throw;
    return degenerate(std::move(fit), e);
  }
  fit.bic = bic(fit, data.n());
  return fit;
}

FitResult em_fit(const DataMatrix& data, const ResponsibilityMatrix& init,
                 CovarianceFamily family, const EmConfig& config) {
  return em_fit(data, init, family, WeightVector::ones(data.n()), config);
}

Index free_parameter_count(Index G, Index p, CovarianceFamily family) noexcept {
  return (G - 1) + G * p + covariance_parameter_count(family, G, p);
}

double bic(double loglik, Index n, Index G, Index p, CovarianceFamily family) noexcept {
  const auto k = static_cast<double>(free_parameter_count(G, p, family));
  return 2.0 * loglik - k * std::log(static_cast<double>(n));
}

double bic(const FitResult& fit, Index n) {
  return bic(fit.loglik, n, fit.model.components(), fit.model.dimension(), fit.model.family);
}

double largest_decrease(std::span<const double> trace) noexcept {
  double worst = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i) worst = std::max(worst, trace[i - 1] - trace[i]);
  return worst;
}

}  // namespace mixboot
