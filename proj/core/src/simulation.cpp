#include "mixboot/simulation.hpp"

#include "mixboot/em.hpp"
#include "mixboot/error.hpp"
#include "mixboot/hclust.hpp"
#include "mixboot/model_selection.hpp"
#include "mixboot/parallel.hpp"
#include "mixboot/variance.hpp"

#include <cmath>
#include <optional>
#include <random>

namespace mixboot {

void SimulationModelSpec::validate() const {
  if (G() < 1 || p() < 1 || means.rows() != G() || static_cast<Index>(sigma.size()) != G())
    throw Error(ErrorCode::InvalidArgument, "simulation model '" + name + "' has inconsistent shapes");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "simulation model needs n >= 1");
  if ((tau.array() <= 0.0).any() || std::abs(tau.sum() - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "simulation weights must be positive and sum to one");
  true_model().validate();
}

MixtureModel SimulationModelSpec::true_model() const {
  MixtureModel m;
  m.family = CovarianceFamily::FullVarying;
  m.weights = tau;
  m.means = means;
  m.covariances = sigma;
  return m;
}

SimulationModelSpec SimulationModelSpec::with_separation(double factor) const {
  SimulationModelSpec out = *this;
  for (Index g = 1; g < G(); ++g) out.means.row(g) = means.row(0) + factor * (means.row(g) - means.row(0));
  return out;
}

namespace {

Matrix mat2(double a, double b, double c) {
  Matrix m(2, 2);
  m << a, b, b, c;
  return m;
}

SimulationModelSpec make_spec(std::string name, std::initializer_list<double> tau,
                              std::initializer_list<std::pair<double, double>> means,
                              std::vector<Matrix> sigma) {
  SimulationModelSpec s;
  s.name = std::move(name);
  s.tau = Eigen::Map<const Vector>(tau.begin(), static_cast<Index>(tau.size()));
  s.means.resize(static_cast<Index>(means.size()), 2);
  Index g = 0;
  for (const auto& [x, y] : means) {
    s.means(g, 0) = x;
    s.means(g, 1) = y;
    ++g;
  }
  s.sigma = std::move(sigma);
  return s;
}

}  // namespace

std::map<std::string, SimulationModelSpec> builtin_specs() {
  const std::vector<Matrix> sigma2 = {mat2(0.12, 0.09, 0.12), mat2(0.47, 0.13, 0.11)};
  const std::vector<Matrix> sigma3 = {mat2(0.12, 0.09, 0.12), mat2(0.39, 0.15, 0.10),
                                      mat2(0.53, 0.20, 0.09)};
  std::map<std::string, SimulationModelSpec> specs;
  auto add = [&](SimulationModelSpec s) { specs.emplace(s.name, std::move(s)); };
  add(make_spec("M1", {0.05, 0.95}, {{0, 0}, {3, 3}}, sigma2));
  add(make_spec("M2", {0.05, 0.95}, {{0, 0}, {1.5, 1.5}}, sigma2));
  add(make_spec("M3", {0.4, 0.6}, {{0, 0}, {3, 3}}, sigma2));
  add(make_spec("M4", {0.4, 0.6}, {{0, 0}, {1.5, 1.5}}, sigma2));
  add(make_spec("M5", {0.05, 0.05, 0.9}, {{0, 0}, {3, 3}, {-3, 3}}, sigma3));
  add(make_spec("M6", {0.05, 0.05, 0.9}, {{0, 0}, {1.5, 1.5}, {-1.5, 1.5}}, sigma3));
  add(make_spec("M7", {0.3, 0.3, 0.4}, {{0, 0}, {3, 3}, {-3, 3}}, sigma3));
  add(make_spec("M8", {0.3, 0.3, 0.4}, {{0, 0}, {1.5, 1.5}, {-1.5, 1.5}}, sigma3));
  return specs;
}

SimulationModelSpec builtin_spec(const std::string& name) {
  auto specs = builtin_specs();
  const auto it = specs.find(name);
  if (it == specs.end())
    throw Error(ErrorCode::InvalidArgument, "unknown simulation model '" + name + "' (expected M1..M8)");
  return it->second;
}

LabeledSample sample_labeled(const SimulationModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  auto rng = make_stream(seed, 0);
  std::discrete_distribution<Index> component(spec.tau.data(), spec.tau.data() + spec.tau.size());
  std::normal_distribution<double> normal;

  std::vector<Matrix> factors;
  for (const auto& s : spec.sigma) factors.emplace_back(Eigen::LLT<Matrix>(s).matrixL());

  Matrix values(spec.n, spec.p());
  std::vector<Index> labels(static_cast<std::size_t>(spec.n));
  Vector z(spec.p());
  for (Index i = 0; i < spec.n; ++i) {
    const Index g = component(rng);
    for (Index j = 0; j < spec.p(); ++j) z[j] = normal(rng);
    values.row(i) = spec.means.row(g) + (factors[static_cast<std::size_t>(g)] * z).transpose();
    labels[static_cast<std::size_t>(i)] = g;
  }
  return {DataMatrix(std::move(values)), std::move(labels)};
}

DataMatrix sample_dataset(const SimulationModelSpec& spec, std::uint64_t seed) {
  return sample_labeled(spec, seed).data;
}

namespace {

struct DatasetOutcome {
  std::vector<bool> fitted;               // per method
  std::vector<std::vector<bool>> covered;  // per method, per slot
};

std::optional<FitResult> full_data_fit(const DataMatrix& data, const SimulationModelSpec& spec,
                                       const CoverageConfig& config) {
  if (config.select_model) {
    SelectionConfig sel;
    sel.g_max = config.select_g_max;
    sel.em = config.em;
    try {
      FitResult best = select_model(data, sel).best;
      if (best.model.components() != spec.G() || best.model.family != CovarianceFamily::FullVarying)
        return std::nullopt;
      return best;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoModelFits) return std::nullopt;
      throw;
    }
  }
  if (data.n() < spec.G()) return std::nullopt;
  const WardDendrogram tree(data.values());
  FitResult fit = em_fit(data, ward_initialization(tree, spec.G()), CovarianceFamily::FullVarying, config.em);
  if (!fit.ok()) return std::nullopt;
  return fit;
}

bool counts_as_fitted(const ReplicateSet& set, FittedPolicy policy) {
  if (set.fitted() < 2) return false;
  return policy == FittedPolicy::AtLeastTwo || set.fitted() == set.K();
}

DatasetOutcome evaluate_dataset(const SimulationModelSpec& spec, const std::vector<ResamplingMethod>& methods,
                                const CoverageConfig& config, const ParamVector& truth, std::size_t index) {
  const std::size_t m_count = methods.size();
  DatasetOutcome out{std::vector<bool>(m_count, false),
                     std::vector<std::vector<bool>>(m_count, std::vector<bool>(static_cast<std::size_t>(truth.values.size()), false))};

  // Zero replicates is a vacuous run: nothing can be fitted.
  if (config.replicates == 0) return out;

  const std::uint64_t dataset_seed = stream_seed(config.seed, index);
  const DataMatrix data = sample_dataset(spec, dataset_seed);
  std::optional<FitResult> fit = full_data_fit(data, spec, config);
  if (!fit) return out;

  const auto order = align_components(fit->model.means, spec.means, pooled_covariance(spec.true_model()));
  fit->model = fit->model.permuted(order);
  fit->responsibilities = fit->responsibilities.permuted_columns(order);
  const ParamVector estimates = flatten(fit->model);

  ResamplingOptions options;
  options.em = config.em;
  options.threads = 1;
  for (std::size_t m = 0; m < m_count; ++m) {
    const std::uint64_t seed = stream_seed(dataset_seed, 1 + static_cast<std::uint64_t>(methods[m]));
    try {
      const ReplicateSet set = run_resampling(data, *fit, methods[m], config.replicates, seed, options);
      if (!counts_as_fitted(set, config.policy)) continue;
      const SeReport report = confidence_intervals(estimates, set);
      out.fitted[m] = true;
      for (Index s = 0; s < truth.values.size(); ++s)
        out.covered[m][static_cast<std::size_t>(s)] = covers(report, s, truth.values[s]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllReplicatesFailed && e.code() != ErrorCode::InsufficientReplicates) throw;
    }
  }
  return out;
}

}  // namespace

std::vector<CoverageResult> run_coverage(const SimulationModelSpec& spec,
                                         const std::vector<ResamplingMethod>& methods,
                                         const CoverageConfig& config) {
  spec.validate();
  if (config.datasets < 0) throw Error(ErrorCode::InvalidArgument, "negative data set count");
  if (config.replicates < 0) throw Error(ErrorCode::InvalidArgument, "negative replicate count");

  const ParamVector truth = flatten(spec.true_model());
  std::vector<DatasetOutcome> outcomes(static_cast<std::size_t>(config.datasets));
  parallel_for(outcomes.size(), config.threads, [&](std::size_t d) {
    outcomes[d] = evaluate_dataset(spec, methods, config, truth, d);
  });

  std::vector<CoverageResult> results;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    CoverageResult r;
    r.model = spec.name;
    r.method = methods[m];
    r.layout = truth.layout;
    r.datasets_total = config.datasets;
    r.covered.assign(static_cast<std::size_t>(truth.values.size()), 0);
    for (const auto& o : outcomes) {
      if (!o.fitted[m]) continue;
      ++r.datasets_fitted;
      for (std::size_t s = 0; s < r.covered.size(); ++s)
        if (o.covered[m][s]) ++r.covered[s];
    }
    results.push_back(std::move(r));
  }
  return results;
}

CoverageResult run_coverage(const SimulationModelSpec& spec, ResamplingMethod method,
                            const CoverageConfig& config) {
  return run_coverage(spec, std::vector<ResamplingMethod>{method}, config).front();
}

}  // namespace mixboot
