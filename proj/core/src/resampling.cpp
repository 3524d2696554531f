#include "mixboot/resampling.hpp"

#include "mixboot/em.hpp"
#include "mixboot/error.hpp"
#include "mixboot/parallel.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace mixboot {

std::string_view to_string(ResamplingMethod method) noexcept {
  switch (method) {
    case ResamplingMethod::Jackknife: return "jk";
    case ResamplingMethod::Bootstrap: return "bs";
    case ResamplingMethod::WeightedBootstrap: return "wlbs";
  }
  return "?";
}

std::optional<ResamplingMethod> parse_method(std::string_view name) noexcept {
  for (auto m : kAllMethods)
    if (to_string(m) == name) return m;
  return std::nullopt;
}

std::vector<ReplicateSpec> jackknife_replicates(Index n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "the jackknife needs at least two observations");
  std::vector<ReplicateSpec> specs(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    auto& s = specs[static_cast<std::size_t>(j)];
    s.method = ResamplingMethod::Jackknife;
    s.index = j;
    s.rows = {j};
  }
  return specs;
}

std::vector<ReplicateSpec> bootstrap_replicates(Index n, Index K, std::uint64_t seed) {
  if (n < 1 || K < 0) throw Error(ErrorCode::InvalidArgument, "bootstrap needs n >= 1 and K >= 0");
  std::vector<ReplicateSpec> specs(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(k));
    std::uniform_int_distribution<Index> pick(0, n - 1);
    auto& s = specs[static_cast<std::size_t>(k)];
    s.method = ResamplingMethod::Bootstrap;
    s.index = k;
    s.rows.resize(static_cast<std::size_t>(n));
    for (auto& r : s.rows) r = pick(rng);
  }
  return specs;
}

std::vector<ReplicateSpec> wlbs_replicates(Index n, Index K, std::uint64_t seed) {
  if (n < 1 || K < 0) throw Error(ErrorCode::InvalidArgument, "WLBS needs n >= 1 and K >= 0");
  std::vector<ReplicateSpec> specs(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(k));
    std::exponential_distribution<double> draw(1.0);
    Vector raw(n);
    for (Index i = 0; i < n; ++i) raw[i] = draw(rng);
    auto& s = specs[static_cast<std::size_t>(k)];
    s.method = ResamplingMethod::WeightedBootstrap;
    s.index = k;
    s.weights = WeightVector::normalized(std::move(raw));
  }
  return specs;
}

std::vector<ReplicateSpec> make_replicates(ResamplingMethod method, Index n, Index K,
                                           std::uint64_t seed) {
  switch (method) {
    case ResamplingMethod::Jackknife: return jackknife_replicates(n);
    case ResamplingMethod::Bootstrap: return bootstrap_replicates(n, K, seed);
    case ResamplingMethod::WeightedBootstrap: return wlbs_replicates(n, K, seed);
  }
  return {};
}

DataMatrix replicate_data(const DataMatrix& data, const ReplicateSpec& spec) {
  switch (spec.method) {
    case ResamplingMethod::Jackknife: return data.without_row(spec.rows.at(0));
    case ResamplingMethod::Bootstrap: return data.gather(spec.rows);
    case ResamplingMethod::WeightedBootstrap: return data;
  }
  return data;
}

ResponsibilityMatrix replicate_init(const ResponsibilityMatrix& full_resp, const ReplicateSpec& spec) {
  switch (spec.method) {
    case ResamplingMethod::Jackknife: return full_resp.without_row(spec.rows.at(0));
    case ResamplingMethod::Bootstrap: return full_resp.gather(spec.rows);
    case ResamplingMethod::WeightedBootstrap: return full_resp;
  }
  return full_resp;
}

std::vector<Index> align_components(const Matrix& means, const Matrix& reference) {
  const Index G = reference.rows();
  if (means.rows() != G || means.cols() != reference.cols())
    throw Error(ErrorCode::InvalidArgument, "cannot align mixtures of different shapes");
  if (G > 10) throw Error(ErrorCode::InvalidArgument, "component alignment supports at most 10 components");

  Matrix cost(G, G);
  for (Index g = 0; g < G; ++g)
    for (Index h = 0; h < G; ++h) cost(g, h) = (reference.row(g) - means.row(h)).norm();

  std::vector<Index> order(static_cast<std::size_t>(G));
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<Index> best = order;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (Index g = 0; g < G; ++g) c += cost(g, order[static_cast<std::size_t>(g)]);
    // The identity is visited first, so it wins every tie.
    if (c < best_cost) {
      best_cost = c;
      best = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

std::vector<Index> align_components(const Matrix& means, const Matrix& reference, const Matrix& metric) {
  const Eigen::LLT<Matrix> llt(metric);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::InvalidArgument, "alignment metric must be positive definite");
  const Matrix whitened_means = llt.matrixL().solve(means.transpose()).transpose();
  const Matrix whitened_reference = llt.matrixL().solve(reference.transpose()).transpose();
  return align_components(whitened_means, whitened_reference);
}

Matrix pooled_covariance(const MixtureModel& model) {
  Matrix pooled = Matrix::Zero(model.dimension(), model.dimension());
  for (Index g = 0; g < model.components(); ++g)
    pooled += model.weights[g] * model.covariances[static_cast<std::size_t>(g)];
  return pooled;
}

ReplicateOutcome fit_replicate(const DataMatrix& data, const FitResult& full_fit,
                               const ReplicateSpec& spec, const EmConfig& config) {
  const DataMatrix view = replicate_data(data, spec);
  const ResponsibilityMatrix init = replicate_init(full_fit.responsibilities, spec);
  const WeightVector weights = spec.weights ? *spec.weights : WeightVector::ones(view.n());

  const FitResult fit = em_fit(view, init, full_fit.model.family, weights, config);
  ReplicateOutcome out;
  out.iterations = fit.iterations;
  out.worst_decrease = largest_decrease(fit.loglik_trace);
  if (!fit.ok() || !std::isfinite(fit.loglik)) return out;

  const auto order = align_components(fit.model.means, full_fit.model.means, pooled_covariance(full_fit.model));
  const bool identity = std::is_sorted(order.begin(), order.end());
  const MixtureModel aligned = identity ? fit.model : fit.model.permuted(order);
  out.status = ReplicateStatus::Fitted;
  out.relabeled = !identity;
  out.params = flatten(aligned).values;
  return out;
}

Index ReplicateSet::fitted() const noexcept {
  return static_cast<Index>(std::count(statuses.begin(), statuses.end(), ReplicateStatus::Fitted));
}

std::vector<Index> ReplicateSet::fitted_rows() const {
  std::vector<Index> rows;
  for (std::size_t k = 0; k < statuses.size(); ++k)
    if (statuses[k] == ReplicateStatus::Fitted) rows.push_back(static_cast<Index>(k));
  return rows;
}

ReplicateSet run_replicates(const DataMatrix& data, const FitResult& full_fit,
                            ResamplingMethod method, const std::vector<ReplicateSpec>& specs,
                            const ResamplingOptions& options) {
  if (!full_fit.ok()) throw Error(ErrorCode::InvalidArgument, "full-data fit is degenerate");
  if (full_fit.responsibilities.n() != data.n())
    throw Error(ErrorCode::InvalidArgument, "full-data fit does not match the data");

  ReplicateSet set;
  set.method = method;
  set.n = data.n();
  set.layout = layout_of(full_fit.model);
  const auto K = static_cast<Index>(specs.size());
  set.params = Matrix::Constant(K, set.layout.size(), std::numeric_limits<double>::quiet_NaN());
  set.statuses.assign(specs.size(), ReplicateStatus::NotFitted);

  std::vector<ReplicateOutcome> outcomes(specs.size());
  parallel_for(specs.size(), options.threads, [&](std::size_t k) {
    if (specs[k].method != method)
      throw Error(ErrorCode::InvalidArgument, "replicate spec has the wrong method");
    outcomes[k] = fit_replicate(data, full_fit, specs[k], options.em);
  });

  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto& o = outcomes[k];
    set.worst_decrease = std::max(set.worst_decrease, o.worst_decrease);
    if (o.status != ReplicateStatus::Fitted) continue;
    set.statuses[k] = ReplicateStatus::Fitted;
    set.params.row(static_cast<Index>(k)) = o.params.transpose();
    if (o.relabeled) ++set.relabeled;
  }
  if (set.fitted() == 0)
    throw Error(ErrorCode::AllReplicatesFailed,
                "none of the " + std::to_string(K) + " " + std::string(to_string(method)) +
                    " replicates could be fitted");
  return set;
}

ReplicateSet run_resampling(const DataMatrix& data, const FitResult& full_fit,
                            ResamplingMethod method, Index K, std::uint64_t seed,
                            const ResamplingOptions& options) {
  return run_replicates(data, full_fit, method, make_replicates(method, data.n(), K, seed), options);
}

}  // namespace mixboot
