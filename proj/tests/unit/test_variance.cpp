#include "helpers.hpp"

#include "mixboot/error.hpp"
#include "mixboot/variance.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace mixboot;

namespace {

ReplicateSet scalar_set(ResamplingMethod method, Index n, const std::vector<double>& values) {
  ReplicateSet s;
  s.method = method;
  s.n = n;
  s.layout = ParamLayout(1, 1, CovarianceFamily::SphericalEqual);  // tau, mu, sigma
  s.params = Matrix::Zero(static_cast<Index>(values.size()), 3);
  for (std::size_t k = 0; k < values.size(); ++k) {
    s.params(static_cast<Index>(k), 0) = values[k];
    s.params(static_cast<Index>(k), 1) = -values[k];
  }
  s.statuses.assign(values.size(), ReplicateStatus::Fitted);
  return s;
}

double kahan_sum(const std::vector<double>& v) {
  double sum = 0.0, c = 0.0;
  for (double x : v) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

// Two-pass covariance with compensated sums, written independently of the
// library code.
double oracle_cov(const ReplicateSet& s, Index a, Index b) {
  std::vector<double> xa, xb;
  for (Index k = 0; k < s.K(); ++k) {
    if (s.statuses[static_cast<std::size_t>(k)] != ReplicateStatus::Fitted) continue;
    xa.push_back(s.params(k, a));
    xb.push_back(s.params(k, b));
  }
  const double m = double(xa.size());
  const double ma = kahan_sum(xa) / m, mb = kahan_sum(xb) / m;
  std::vector<double> prod;
  for (std::size_t i = 0; i < xa.size(); ++i) prod.push_back((xa[i] - ma) * (xb[i] - mb));
  const double ss = kahan_sum(prod);
  if (s.method == ResamplingMethod::Jackknife) return (double(s.n) - 1.0) / double(s.n) * ss;
  return ss / (m - 1.0);
}

}  // namespace

TEST_CASE("jackknife variance of (1, 2, 3) is 4/3") {
  const auto s = scalar_set(ResamplingMethod::Jackknife, 3, {1, 2, 3});
  CHECK(jk_variance(s)[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(replicate_variance(s)[0] == jk_variance(s)[0]);
}

TEST_CASE("bootstrap variance of (1, 3) is 2") {
  const auto s = scalar_set(ResamplingMethod::Bootstrap, 10, {1, 3});
  CHECK(bs_variance(s)[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(replicate_mean(s)[0] == doctest::Approx(2.0));
}

TEST_CASE("identical replicates have zero variance") {
  const auto s = scalar_set(ResamplingMethod::WeightedBootstrap, 10, {0.7, 0.7, 0.7});
  CHECK(bs_variance(s)[0] == 0.0);
}

TEST_CASE("the jackknife constant uses the sample size, not the fitted count") {
  auto s = scalar_set(ResamplingMethod::Jackknife, 4, {1, 2, 3, 100});
  s.statuses[3] = ReplicateStatus::NotFitted;
  s.params.row(3).setConstant(std::numeric_limits<double>::quiet_NaN());
  CHECK(jk_variance(s)[0] == doctest::Approx(0.75 * 2.0).epsilon(1e-15));
}

TEST_CASE("fewer than two fitted replicates is an error") {
  auto s = scalar_set(ResamplingMethod::Bootstrap, 5, {1, 2});
  s.statuses[1] = ReplicateStatus::NotFitted;
  try {
    bs_variance(s);
    FAIL("expected InsufficientReplicates");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientReplicates);
  }
  CHECK_THROWS_AS(param_covariance(s, 0, 1), Error);
}

TEST_CASE("param_covariance: diagonal and anticorrelated slots") {
  const auto s = scalar_set(ResamplingMethod::Bootstrap, 10, {0.2, 0.5, 0.35, 0.4});
  CHECK(param_covariance(s, 0, 0) == bs_variance(s)[0]);
  CHECK(param_covariance(s, 0, 1) == doctest::Approx(-bs_variance(s)[0]).epsilon(1e-14));
}

TEST_CASE("variance formulas agree with a brute-force oracle on random sets") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> kdist(3, 40);
  std::uniform_int_distribution<int> mdist(0, 2);
  std::bernoulli_distribution fail(0.1);
  for (int rep = 0; rep < 200; ++rep) {
    ReplicateSet s;
    s.method = kAllMethods[static_cast<std::size_t>(mdist(rng))];
    s.layout = ParamLayout(2, 2, CovarianceFamily::FullVarying);
    const Index K = kdist(rng);
    s.n = s.method == ResamplingMethod::Jackknife ? K : 150;
    s.params = testing::random_matrix(rng, K, s.layout.size(), 3.0);
    s.params.array() += 100.0;
    s.statuses.assign(static_cast<std::size_t>(K), ReplicateStatus::Fitted);
    for (Index k = 2; k < K; ++k)
      if (fail(rng)) {
        s.statuses[static_cast<std::size_t>(k)] = ReplicateStatus::NotFitted;
        s.params.row(k).setConstant(std::numeric_limits<double>::quiet_NaN());
      }
    const Vector v = replicate_variance(s);
    for (Index a = 0; a < s.layout.size(); ++a) {
      const double want = oracle_cov(s, a, a);
      CHECK(std::abs(v[a] - want) <= 1e-10 * std::abs(want));
      const Index b = (a + 3) % s.layout.size();
      const double cw = oracle_cov(s, a, b);
      CHECK(std::abs(param_covariance(s, a, b) - cw) <= 1e-10 * std::max(std::abs(cw), 1e-300));
    }
  }
}

TEST_CASE("scaling replicate values scales the standard error") {
  auto s = scalar_set(ResamplingMethod::Bootstrap, 10, {1.0, 1.7, 2.2, 0.4});
  const double se = std::sqrt(bs_variance(s)[0]);
  s.params.col(0) *= -3.0;
  CHECK(std::sqrt(bs_variance(s)[0]) == doctest::Approx(3.0 * se).epsilon(1e-14));
  CHECK(bs_variance(s)[0] == doctest::Approx(9.0 * se * se).epsilon(1e-14));
}

TEST_CASE("intervals are centred on the estimate with half-width 2 SE") {
  ParamVector est{ParamLayout(1, 1, CovarianceFamily::SphericalEqual), Vector(3)};
  est.values << 0.38, 0.13, 1.0;
  Vector se(3);
  se << 0.04, 0.04, 0.0;
  const SeReport r = confidence_intervals(ResamplingMethod::Jackknife, est, se, est.values, 10, 10);
  CHECK(r.ci_lower[0] == doctest::Approx(0.30));
  CHECK(r.ci_upper[0] == doctest::Approx(0.46));
  CHECK(covers(r, 0, 0.4));
  CHECK(r.ci_lower[1] == doctest::Approx(0.05));
  // Closed interval: the boundary counts as covered.
  const SeReport exact = confidence_intervals(ResamplingMethod::Jackknife, est, se, est.values, 10, 10);
  CHECK(covers(exact, 1, exact.ci_lower[1]));
  CHECK(r.ci_lower[2] == 1.0);
  CHECK(r.ci_upper[2] == 1.0);
  for (Index i = 0; i < 3; ++i) CHECK(r.ci_upper[i] - r.estimates.values[i] == doctest::Approx(2 * se[i]));
}

TEST_CASE("SeReport from replicates") {
  auto s = scalar_set(ResamplingMethod::Bootstrap, 10, {1, 3});
  ParamVector est{s.layout, Vector::Zero(3)};
  est.values[0] = 2.5;
  const SeReport r = confidence_intervals(est, s);
  CHECK(r.std_errors[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(r.replicate_mean[0] == doctest::Approx(2.0));
  CHECK(r.ci_lower[0] == doctest::Approx(2.5 - 2 * std::sqrt(2.0)));
  CHECK(r.k_fitted == 2);
  CHECK(r.k_total == 2);
}

TEST_CASE("Silverman bandwidth") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  // sd = 3.02765, IQR (type 7) = 4.5, IQR/1.34 = 3.3582
  const double sd = std::sqrt(110.0 / 12.0);
  CHECK(silverman_bandwidth(v) == doctest::Approx(0.9 * sd * std::pow(10.0, -0.2)).epsilon(1e-12));
  const std::vector<double> same{2.0, 2.0, 2.0};
  CHECK(silverman_bandwidth(same) > 0.0);
  const std::vector<double> spiky{0, 0, 0, 0, 0, 0, 0, 0, 1, 50};
  CHECK(silverman_bandwidth(spiky) > 0.0);
}

TEST_CASE("KDE curves are symmetric, nonnegative and normalised") {
  const std::vector<double> pm{-1.0, 1.0};
  const auto curve = kde_curve(pm, 1001);
  REQUIRE(curve.size() == 1001);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    CHECK(curve[i].density >= 0.0);
    CHECK(std::abs(curve[i].density - curve[curve.size() - 1 - i].density) < 1e-10);
    CHECK(std::abs(curve[i].x + curve[curve.size() - 1 - i].x) < 1e-10);
  }
  CHECK(trapezoid_integral(curve) == doctest::Approx(1.0).epsilon(1e-3));

  const std::vector<double> point{3.0, 3.0, 3.0, 3.0};
  CHECK(trapezoid_integral(kde_curve(point, 512)) == doctest::Approx(1.0).epsilon(1e-3));

  std::mt19937_64 rng(8);
  std::gamma_distribution<double> skew(0.7, 2.0);
  std::vector<double> g;
  for (int i = 0; i < 300; ++i) g.push_back(skew(rng));
  CHECK(std::abs(trapezoid_integral(kde_curve(g, 512)) - 1.0) < 1e-3);
}

TEST_CASE("kde_curves uses the fitted replicates of one slot") {
  auto s = scalar_set(ResamplingMethod::Bootstrap, 10, {1, 2, 4, 8});
  s.statuses[3] = ReplicateStatus::NotFitted;
  s.params.row(3).setConstant(std::numeric_limits<double>::quiet_NaN());
  CHECK(slot_values(s, 0) == std::vector<double>{1, 2, 4});
  const auto c = kde_curves(s, 0, 64);
  CHECK(c.size() == 64);
  const double h = silverman_bandwidth(slot_values(s, 0));
  CHECK(c.front().x == doctest::Approx(1.0 - 4 * h));
  CHECK(c.back().x == doctest::Approx(4.0 + 4 * h));
  s.statuses[2] = s.statuses[1] = ReplicateStatus::NotFitted;
  CHECK_THROWS_AS(kde_curves(s, 0, 64), Error);
}
