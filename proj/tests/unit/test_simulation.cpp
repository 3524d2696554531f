#include "helpers.hpp"

#include "mixboot/error.hpp"
#include "mixboot/simulation.hpp"

#include <doctest.h>

#include <cmath>

using namespace mixboot;
using testing::mat2;

TEST_CASE("builtin specs carry the published weights and covariances") {
  const auto specs = builtin_specs();
  CHECK(specs.size() == 8);
  const auto& m1 = specs.at("M1");
  CHECK(m1.tau[0] == 0.05);
  CHECK(m1.tau[1] == 0.95);
  CHECK(specs.at("M5").sigma[2] == mat2(0.53, 0.20, 0.09));
  CHECK(specs.at("M3").sigma[0] == mat2(0.12, 0.09, 0.12));
  CHECK(specs.at("M7").tau[2] == 0.4);
  CHECK(specs.at("M6").G() == 3);
  for (const auto& [name, s] : specs) {
    CHECK(s.n == 150);
    CHECK(s.p() == 2);
    CHECK_NOTHROW(s.validate());
  }
  CHECK_THROWS_AS(builtin_spec("M9"), Error);
}

TEST_CASE("with_separation scales distances from the first mean") {
  const auto s = builtin_spec("M3").with_separation(2.0);
  CHECK(s.means(1, 0) == 6.0);
  CHECK(s.means(0, 0) == 0.0);
}

TEST_CASE("sample_dataset has the right shape and is deterministic") {
  const auto spec = builtin_spec("M7");
  const DataMatrix a = sample_dataset(spec, 42);
  CHECK(a.n() == 150);
  CHECK(a.p() == 2);
  CHECK(a.values() == sample_dataset(spec, 42).values());
  CHECK(a.values() != sample_dataset(spec, 43).values());
}

TEST_CASE("large samples reproduce the true proportions and covariances") {
  auto spec = builtin_spec("M7");
  spec.n = 100000;
  const LabeledSample s = sample_labeled(spec, 9);
  for (Index g = 0; g < spec.G(); ++g) {
    std::vector<Index> rows;
    for (Index i = 0; i < spec.n; ++i)
      if (s.labels[static_cast<std::size_t>(i)] == g) rows.push_back(i);
    const double tau = spec.tau[g];
    const double sd = std::sqrt(tau * (1 - tau) / double(spec.n));
    CHECK(std::abs(double(rows.size()) / double(spec.n) - tau) < 3 * sd);

    const Matrix X = s.data.gather(rows).values();
    const Matrix centered = X.rowwise() - X.colwise().mean();
    const Matrix cov = centered.transpose() * centered / double(X.rows() - 1);
    const Matrix& truth = spec.sigma[static_cast<std::size_t>(g)];
    for (Index j = 0; j < 2; ++j)
      for (Index k = 0; k < 2; ++k) CHECK(std::abs(cov(j, k) - truth(j, k)) <= 0.05 * std::abs(truth(j, k)));
  }
}

TEST_CASE("coverage results are deterministic and respect the count invariants") {
  CoverageConfig cfg;
  cfg.datasets = 12;
  cfg.replicates = 30;
  cfg.seed = 5;
  cfg.threads = 1;
  const std::vector<ResamplingMethod> methods(kAllMethods.begin(), kAllMethods.end());
  const auto a = run_coverage(builtin_spec("M1"), methods, cfg);
  cfg.threads = 4;
  const auto b = run_coverage(builtin_spec("M1"), methods, cfg);
  REQUIRE(a.size() == 3);
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(a[m].covered == b[m].covered);
    CHECK(a[m].datasets_fitted == b[m].datasets_fitted);
    CHECK(a[m].datasets_total == 12);
    CHECK(a[m].datasets_fitted <= a[m].datasets_total);
    for (Index c : a[m].covered) CHECK(c <= a[m].datasets_fitted);
  }
}

TEST_CASE("zero replicates or zero data sets give empty results") {
  CoverageConfig cfg;
  cfg.datasets = 5;
  cfg.replicates = 0;
  const auto r = run_coverage(builtin_spec("M3"), ResamplingMethod::Jackknife, cfg);
  CHECK(r.datasets_fitted == 0);
  for (Index c : r.covered) CHECK(c == 0);

  cfg.datasets = 0;
  cfg.replicates = 10;
  const auto empty = run_coverage(builtin_spec("M3"), ResamplingMethod::Bootstrap, cfg);
  CHECK(empty.datasets_total == 0);
  CHECK(empty.datasets_fitted == 0);
}

TEST_CASE("well separated equal clusters give near-nominal jackknife coverage") {
  CoverageConfig cfg;
  cfg.datasets = 500;
  cfg.seed = 77;
  cfg.threads = 0;
  const auto r = run_coverage(builtin_spec("M3").with_separation(2.0), ResamplingMethod::Jackknife, cfg);
  CHECK(r.datasets_fitted == 500);
  CHECK(r.covered_of("tau[1]") >= 450);
}

TEST_CASE("M7 coverage agrees across methods") {
  CoverageConfig cfg;
  cfg.datasets = 100;
  cfg.seed = 3;
  cfg.threads = 0;
  const std::vector<ResamplingMethod> methods(kAllMethods.begin(), kAllMethods.end());
  const auto r = run_coverage(builtin_spec("M7"), methods, cfg);
  const Index a = r[0].covered_of("tau[1]"), b = r[1].covered_of("tau[1]"), c = r[2].covered_of("tau[1]");
  CHECK(std::max({a, b, c}) - std::min({a, b, c}) <= 10);
}

TEST_CASE("small clusters are fitted more often by the jackknife than by the bootstrap") {
  CoverageConfig cfg;
  cfg.datasets = 500;
  cfg.replicates = 200;
  cfg.seed = 11;
  cfg.threads = 0;
  const auto jk = run_coverage(builtin_spec("M1"), ResamplingMethod::Jackknife, cfg);
  const auto bs = run_coverage(builtin_spec("M1"), ResamplingMethod::Bootstrap, cfg);
  CHECK(jk.datasets_fitted >= bs.datasets_fitted);
}

TEST_CASE("select-model mode only counts data sets whose structure matches") {
  CoverageConfig cfg;
  cfg.datasets = 6;
  cfg.replicates = 20;
  cfg.select_model = true;
  cfg.select_g_max = 3;
  const auto r = run_coverage(builtin_spec("M3"), ResamplingMethod::Bootstrap, cfg);
  CHECK(r.datasets_fitted <= 6);
  for (Index c : r.covered) CHECK(c <= r.datasets_fitted);
}
