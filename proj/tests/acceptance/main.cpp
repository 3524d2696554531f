// End-to-end acceptance checks. Each check prints one PASS/FAIL line with
// the measured values next to the pinned tolerance.

#include "cli.hpp"
#include "mixboot/dataset.hpp"
#include "mixboot/em.hpp"
#include "mixboot/hclust.hpp"
#include "mixboot/model_selection.hpp"
#include "mixboot/resampling.hpp"
#include "mixboot/serialize.hpp"
#include "mixboot/simulation.hpp"
#include "mixboot/variance.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace mixboot;

namespace {

// Old Faithful reference values (three components, common covariance).
constexpr double kTau[3] = {0.46, 0.36, 0.18};
constexpr double kMuEruption[3] = {4.47, 2.04, 3.81};
constexpr double kMuWaiting[3] = {80.89, 54.49, 77.62};
constexpr double kSigma[3] = {0.08, 0.47, 33.73};
constexpr double kSigmaTol[3] = {0.01, 0.05, 0.5};
constexpr double kTauTol = 0.02;
constexpr double kMuTol[2] = {0.05, 0.5};

struct SeReference {
  ResamplingMethod method;
  double tau[3];
  double tau_tol;
  double sigma[3];
};
constexpr SeReference kSeReference[3] = {
    {ResamplingMethod::Jackknife, {0.04, 0.03, 0.04}, 0.02, {0.01, 0.12, 2.77}},
    {ResamplingMethod::Bootstrap, {0.05, 0.03, 0.04}, 0.03, {0.01, 0.14, 2.65}},
    {ResamplingMethod::WeightedBootstrap, {0.06, 0.03, 0.05}, 0.03, {0.01, 0.14, 2.76}},
};
constexpr double kSigmaSeRelTol = 0.5;
constexpr double kSelectionBudget = 10.0;
constexpr double kSeBudget = 60.0;
constexpr double kCoverageBudget = 30.0 * 60.0;
constexpr double kOracleRelTol = 1e-10;
constexpr double kUnitWeightTol = 1e-6;
constexpr double kMonotoneSlack = 1e-8;
constexpr double kDirichletVarRelTol = 0.05;
constexpr double kSimilarTimeRatio = 2.0;

struct Check {
  std::string id;
  std::string title;
  std::function<bool(std::ostream&)> body;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const Dataset& faithful() {
  static const Dataset d = old_faithful();
  return d;
}

SelectionConfig faithful_selection() {
  SelectionConfig cfg;
  cfg.g_min = 1;
  cfg.g_max = 5;
  return cfg;
}

const FitResult& faithful_fit() {
  static const FitResult fit = select_model(faithful().data, faithful_selection()).best;
  return fit;
}

// Component order is arbitrary; match fitted components to the reference by
// their eruption means.
std::vector<Index> reference_order(const MixtureModel& m) {
  Matrix ref(3, 2);
  for (int g = 0; g < 3; ++g) ref.row(g) << kMuEruption[g], kMuWaiting[g];
  return align_components(m.means, ref, pooled_covariance(m));
}

bool within(double got, double want, double tol) { return std::abs(got - want) <= tol; }

// 1
bool check_selection(std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelSelection sel = select_model(faithful().data, faithful_selection());
  const double secs = seconds_since(t0);
  const auto& m = sel.best.model;
  log << "G=" << m.components() << " family=" << mclust_name(m.family) << " time=" << fmt(secs, 3) << "s";
  return m.components() == 3 && m.family == CovarianceFamily::FullEqual && secs < kSelectionBudget;
}

// 2
bool check_mles(std::ostream& log) {
  const MixtureModel m = faithful_fit().model.permuted(reference_order(faithful_fit().model));
  bool ok = true;
  log << "tau=(";
  for (int g = 0; g < 3; ++g) {
    ok &= within(m.weights[g], kTau[g], kTauTol);
    log << fmt(m.weights[g], 3) << (g < 2 ? "," : ")");
  }
  log << " mu=(";
  for (int g = 0; g < 3; ++g) {
    ok &= within(m.means(g, 0), kMuEruption[g], kMuTol[0]);
    ok &= within(m.means(g, 1), kMuWaiting[g], kMuTol[1]);
    log << fmt(m.means(g, 0), 3) << "/" << fmt(m.means(g, 1), 4) << (g < 2 ? "," : ")");
  }
  const Matrix& s = m.covariances[0];
  const double sig[3] = {s(0, 0), s(0, 1), s(1, 1)};
  log << " sigma=(";
  for (int k = 0; k < 3; ++k) {
    ok &= within(sig[k], kSigma[k], kSigmaTol[k]);
    log << fmt(sig[k], 4) << (k < 2 ? "," : ")");
  }
  return ok;
}

// 3
bool check_standard_errors(std::ostream& log) {
  const FitResult& fit = faithful_fit();
  const auto order = reference_order(fit.model);
  const ParamLayout layout = layout_of(fit.model);
  bool ok = true;
  for (const auto& ref : kSeReference) {
    const auto t0 = std::chrono::steady_clock::now();
    const ReplicateSet set = run_resampling(faithful().data, fit, ref.method, kDefaultReplicates, 2019);
    const double secs = seconds_since(t0);
    const Vector se = replicate_variance(set).cwiseSqrt();
    log << to_string(ref.method) << ": tau se=(";
    for (int g = 0; g < 3; ++g) {
      const double v = se[layout.index_of("tau[" + std::to_string(order[g] + 1) + "]")];
      ok &= within(v, ref.tau[g], ref.tau_tol);
      log << fmt(v, 3) << (g < 2 ? "," : ")");
    }
    const char* names[3] = {"sigma[1,1]", "sigma[1,2]", "sigma[2,2]"};
    log << " sigma se=(";
    for (int k = 0; k < 3; ++k) {
      const double v = se[layout.index_of(names[k])];
      ok &= std::abs(v - ref.sigma[k]) <= kSigmaSeRelTol * ref.sigma[k];
      log << fmt(v, 3) << (k < 2 ? "," : ")");
    }
    ok &= secs < kSeBudget;
    log << " time=" << fmt(secs, 3) << "s; ";
  }
  return ok;
}

std::vector<ResamplingMethod> all_methods() { return {kAllMethods.begin(), kAllMethods.end()}; }

CoverageConfig coverage_config(Index datasets, std::uint64_t seed) {
  CoverageConfig cfg;
  cfg.datasets = datasets;
  cfg.replicates = kDefaultReplicates;
  cfg.seed = seed;
  cfg.threads = 0;
  return cfg;
}

// 4
bool check_equal_cluster_coverage(std::ostream& log) {
  bool ok = true;
  auto t0 = std::chrono::steady_clock::now();
  const auto m3 = run_coverage(builtin_spec("M3"), ResamplingMethod::Jackknife, coverage_config(500, 31));
  const double m3_secs = seconds_since(t0);
  const double m3_rate = double(m3.covered_of("tau[1]")) / 500.0;
  ok &= m3_rate >= 0.88 && m3_rate <= 0.98 && m3_secs <= kCoverageBudget;
  log << "M3 jk tau[1] " << m3.covered_of("tau[1]") << "/500 (" << fmt(100 * m3_rate, 3) << "%, " << fmt(m3_secs, 3)
      << "s); M7";

  t0 = std::chrono::steady_clock::now();
  const auto m7 = run_coverage(builtin_spec("M7"), all_methods(), coverage_config(300, 37));
  const double m7_secs = seconds_since(t0);
  for (const auto& r : m7) {
    const double rate = double(r.covered_of("tau[1]")) / 300.0;
    ok &= rate >= 0.88 && rate <= 0.99;
    log << " " << to_string(r.method) << "=" << r.covered_of("tau[1]") << "/300";
  }
  ok &= m7_secs <= kCoverageBudget;
  log << " (" << fmt(m7_secs, 3) << "s)";
  return ok;
}

// 5
bool check_small_cluster_ordering(std::ostream& log) {
  const auto r = run_coverage(builtin_spec("M1"), all_methods(), coverage_config(300, 41));
  const auto& jk = r[0];
  const auto& bs = r[1];
  const auto& wl = r[2];
  log << "fitted jk/bs/wlbs=" << jk.datasets_fitted << "/" << bs.datasets_fitted << "/" << wl.datasets_fitted
      << " tau[1] coverage jk/bs/wlbs=" << jk.covered_of("tau[1]") << "/" << bs.covered_of("tau[1]") << "/"
      << wl.covered_of("tau[1]");
  return jk.datasets_fitted > wl.datasets_fitted && wl.datasets_fitted > bs.datasets_fitted &&
         2 * bs.covered_of("tau[1]") < jk.covered_of("tau[1]");
}

// Brute-force cross moment: explicit loops, compensated sums, two passes.
double oracle_moment(const ReplicateSet& s, Index a, Index b) {
  auto kahan = [](const std::vector<double>& v) {
    double sum = 0, c = 0;
    for (double x : v) {
      const double y = x - c, t = sum + y;
      c = (t - sum) - y;
      sum = t;
    }
    return sum;
  };
  std::vector<double> xa, xb;
  for (Index k = 0; k < s.K(); ++k)
    if (s.statuses[static_cast<std::size_t>(k)] == ReplicateStatus::Fitted) {
      xa.push_back(s.params(k, a));
      xb.push_back(s.params(k, b));
    }
  const double m = double(xa.size());
  const double ma = kahan(xa) / m, mb = kahan(xb) / m;
  std::vector<double> prod;
  for (std::size_t i = 0; i < xa.size(); ++i) prod.push_back((xa[i] - ma) * (xb[i] - mb));
  const double scale = s.method == ResamplingMethod::Jackknife ? (double(s.n) - 1) / double(s.n) : 1.0 / (m - 1);
  return kahan(prod) * scale;
}

// 6
bool check_formula_oracles(std::ostream& log) {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> kdist(2, 250);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  double worst = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    ReplicateSet s;
    s.method = kAllMethods[static_cast<std::size_t>(rep % 3)];
    s.layout = ParamLayout(3, 2, CovarianceFamily::FullEqual);
    const Index K = kdist(rng);
    s.n = s.method == ResamplingMethod::Jackknife ? K : 272;
    s.params.resize(K, s.layout.size());
    const double offset = 100 * normal(rng), scale = std::exp(3 * normal(rng));
    for (Index k = 0; k < K; ++k)
      for (Index i = 0; i < s.layout.size(); ++i) s.params(k, i) = offset + scale * normal(rng);
    s.statuses.assign(static_cast<std::size_t>(K), ReplicateStatus::Fitted);
    for (Index k = 2; k < K; ++k)
      if (unif(rng) < 0.05) {
        s.statuses[static_cast<std::size_t>(k)] = ReplicateStatus::NotFitted;
        s.params.row(k).setConstant(std::numeric_limits<double>::quiet_NaN());
      }
    const Vector v = s.method == ResamplingMethod::Jackknife ? jk_variance(s) : bs_variance(s);
    for (Index a = 0; a < s.layout.size(); ++a) {
      const double want = oracle_moment(s, a, a);
      worst = std::max(worst, std::abs(v[a] - want) / std::abs(want));
      const Index b = (a + 1 + rep) % s.layout.size();
      if (b == a) continue;
      const double cw = oracle_moment(s, a, b);
      const double denom = std::sqrt(oracle_moment(s, a, a) * oracle_moment(s, b, b));
      worst = std::max(worst, std::abs(param_covariance(s, a, b) - cw) / denom);
    }
  }
  log << "worst relative error " << fmt(worst, 3) << " over 1000 sets";
  return worst <= kOracleRelTol;
}

// 7
bool check_unit_weight_identity(std::ostream& log) {
  // Both fits must sit at the maximiser itself. With the default stopping
  // rule a flat likelihood leaves parameters movable by more than 1e-6.
  ResamplingOptions options;
  options.em.tol = 1e-14;
  options.em.max_iter = 20000;
  const auto specs = builtin_specs();
  double worst = 0;
  int compared = 0;
  int skipped = 0;
  for (std::uint64_t d = 0; compared < 100 && d < 1000; ++d) {
    const auto& spec = std::next(specs.begin(), static_cast<std::ptrdiff_t>(d % specs.size()))->second;
    const DataMatrix data = sample_dataset(spec, 7000 + d);
    const FitResult fit = em_fit(data, ward_initialization(WardDendrogram(data.values()), spec.G()),
                                 CovarianceFamily::FullVarying, options.em);
    if (!fit.ok()) {
      ++skipped;  // no MLE to reproduce
      continue;
    }
    std::vector<ReplicateSpec> unit;
    for (Index k = 0; k < 3; ++k)
      unit.push_back({ResamplingMethod::WeightedBootstrap, k, {}, WeightVector::ones(data.n())});
    const ReplicateSet set = run_replicates(data, fit, ResamplingMethod::WeightedBootstrap, unit, options);
    const Vector mle = flatten(fit.model).values;
    for (Index k = 0; k < set.K(); ++k) worst = std::max(worst, (set.params.row(k).transpose() - mle).cwiseAbs().maxCoeff());
    ++compared;
  }
  log << compared << " data sets (" << skipped << " without a fit skipped), worst parameter difference "
      << fmt(worst, 3);
  return compared == 100 && worst <= kUnitWeightTol;
}

// 8
bool check_monotonicity(std::ostream& log) {
  double worst = 0;
  std::size_t fits = 0;
  auto record = [&](const FitResult& f) {
    worst = std::max(worst, largest_decrease(f.loglik_trace));
    ++fits;
  };
  auto sweep = [&](const DataMatrix& data, Index g_max) {
    const WardDendrogram tree(data.values());
    for (Index G = 1; G <= g_max; ++G)
      for (auto family : kAllFamilies) record(em_fit(data, ward_initialization(tree, G), family));
  };
  sweep(faithful().data, 9);
  for (const auto& [name, spec] : builtin_specs())
    for (std::uint64_t s = 0; s < 10; ++s) sweep(sample_dataset(spec, 500 + s), 4);

  // Unweighted replicate refits.
  for (auto m : {ResamplingMethod::Jackknife, ResamplingMethod::Bootstrap}) {
    const ReplicateSet set = run_resampling(faithful().data, faithful_fit(), m, kDefaultReplicates, 8);
    worst = std::max(worst, set.worst_decrease);
    fits += static_cast<std::size_t>(set.K());
  }
  log << fits << " fits, largest log-likelihood decrease " << fmt(worst, 3);
  return worst <= kMonotoneSlack;
}

std::string run_cli(const std::vector<std::string>& args, int& status) {
  std::ostringstream out, err;
  status = cli::run(args, out, err);
  return out.str();
}

// 9
bool check_determinism(std::ostream& log) {
  const std::vector<std::vector<std::string>> invocations = {
      {"fit", "--g-max", "5", "--omit-timing"},
      {"se", "--method", "all", "--seed", "99", "--omit-timing"},
      {"se", "--method", "all", "--seed", "99", "--omit-timing", "--format", "csv"},
      {"density", "--method", "bs,wlbs", "--slots", "all", "--seed", "5", "--omit-timing", "--format", "csv"},
      {"simulate", "--model", "M1,M7", "--datasets", "8", "--replicates", "40", "--seed", "3", "--omit-timing"},
  };
  bool ok = true;
  int compared = 0;
  for (const auto& base : invocations) {
    std::map<std::string, std::string> by_threads;
    for (std::string threads : {"1", "4"}) {
      auto args = base;
      args.insert(args.end(), {"--threads", threads});
      if (base.front() == "fit") args.resize(args.size() - 2);
      int s1 = 0, s2 = 0;
      const std::string a = run_cli(args, s1);
      const std::string b = run_cli(args, s2);
      ok &= s1 == 0 && s2 == 0 && a == b && !a.empty();
      by_threads[threads] = a;
      ++compared;
    }
    // Outputs differ only in the echoed thread count.
    std::string one = by_threads["1"];
    for (const auto& [from, to] : {std::pair<std::string, std::string>{"threads=1", "threads=4"},
                                   {"\"threads\": 1", "\"threads\": 4"}})
      if (auto pos = one.find(from); pos != std::string::npos) one.replace(pos, from.size(), to);
    const std::string& four = by_threads["4"];
    ok &= one == four;
  }
  log << compared << " repeated invocations bit-identical, 1 vs 4 threads identical apart from the echoed count: "
      << (ok ? "yes" : "no");
  return ok;
}

// 10
bool check_dirichlet_law(std::ostream& log) {
  const Index n = 50, K = 10000;
  const auto specs = wlbs_replicates(n, K, 1010);
  double sum1 = 0;
  double pooled_sum = 0, pooled_sq = 0;
  double sq1 = 0;
  for (const auto& s : specs) {
    const Vector& w = s.weights->w();
    sum1 += w[0];
    sq1 += w[0] * w[0];
    pooled_sum += w.sum();
    pooled_sq += w.squaredNorm();
  }
  const double target_var = (n - 1.0) / (n + 1.0);
  const double mean1 = sum1 / K;
  const double sigma_mean = std::sqrt(target_var / K);
  const double var1 = sq1 / K - mean1 * mean1;
  const double pooled_mean = pooled_sum / double(n * K);
  const double pooled_var = pooled_sq / double(n * K) - pooled_mean * pooled_mean;
  log << "mean(w_1)=" << fmt(mean1, 5) << " (3 sigma=" << fmt(3 * sigma_mean, 3) << ") var(w_1)=" << fmt(var1, 4)
      << " pooled var=" << fmt(pooled_var, 4) << " target=" << fmt(target_var, 4);
  return std::abs(mean1 - 1.0) <= 3 * sigma_mean &&
         std::abs(pooled_var - target_var) <= kDirichletVarRelTol * target_var &&
         std::abs(var1 - target_var) <= kDirichletVarRelTol * target_var;
}

// Timing ordering on Old Faithful: WLBS slower than BS, BS comparable to JK.
bool check_timing_order(std::ostream& log) {
  std::map<ResamplingMethod, double> secs;
  for (auto m : kAllMethods) {
    std::vector<double> runs;
    for (int r = 0; r < 3; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      run_resampling(faithful().data, faithful_fit(), m, kDefaultReplicates, 100 + r);
      runs.push_back(seconds_since(t0));
    }
    std::sort(runs.begin(), runs.end());
    secs[m] = runs[1];
  }
  const double jk = secs[ResamplingMethod::Jackknife], bs = secs[ResamplingMethod::Bootstrap],
               wl = secs[ResamplingMethod::WeightedBootstrap];
  log << "median seconds jk=" << fmt(jk, 3) << " bs=" << fmt(bs, 3) << " wlbs=" << fmt(wl, 3);
  return wl > bs && bs / jk <= kSimilarTimeRatio && jk / bs <= kSimilarTimeRatio;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Check> checks = {
      {"C1", "Old Faithful model selection", check_selection},
      {"C2", "Old Faithful MLEs", check_mles},
      {"C3", "Old Faithful standard errors", check_standard_errors},
      {"C4", "coverage with equal clusters (M3, M7)", check_equal_cluster_coverage},
      {"C5", "small-cluster fitted-count ordering (M1)", check_small_cluster_ordering},
      {"C6", "variance formula oracles", check_formula_oracles},
      {"C7", "unit-weight WLBS reproduces the MLE", check_unit_weight_identity},
      {"C8", "EM monotonicity", check_monotonicity},
      {"C9", "determinism across runs and thread counts", check_determinism},
      {"C10", "Dirichlet weight law", check_dirichlet_law},
      {"T", "resampling timing order", check_timing_order},
  };

  CLI::App app{"mixboot acceptance checks"};
  std::vector<std::string> only;
  app.add_option("--only", only, "Check ids to run (default: all)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  for (const auto& c : checks) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    std::ostringstream detail;
    bool ok = false;
    try {
      ok = c.body(detail);
    } catch (const std::exception& e) {
      detail << " exception: " << e.what();
    }
    if (!ok) ++failed;
    std::cout << (ok ? "PASS " : "FAIL ") << c.id << " " << c.title << ": " << detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
