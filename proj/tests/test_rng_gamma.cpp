#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "cbm/gamma.hpp"
#include "cbm/rng.hpp"

namespace {

const cbm::GammaProcess kDefaultProcess{10.0 / 9.0, 100.0 / 9.0};

std::vector<double> draw_many(double shape, double rate, std::size_t n, std::uint64_t seed) {
  cbm::RngStream rng = cbm::derive_stream(seed, 7, 3);
  std::vector<double> xs(n);
  for (double& x : xs) x = cbm::sample_gamma(shape, rate, rng);
  return xs;
}

void moments(const std::vector<double>& xs, double& mean, double& var) {
  mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
}

}  // namespace

TEST(GammaPdf, ShapeOneIsExponential) {
  EXPECT_NEAR(cbm::gamma_pdf(0.5, 1.0, 2.0), 2.0 * std::exp(-1.0), 1e-12);
  EXPECT_NEAR(cbm::gamma_pdf(0.5, 1.0, 2.0), 0.735759, 1e-6);
}

TEST(GammaPdf, VanishesAtZeroForShapeAboveOne) {
  EXPECT_EQ(cbm::gamma_pdf(0.0, 2.0, 1.0), 0.0);
}

TEST(GammaPdf, IntegratesToOne) {
  using boost::math::quadrature::gauss_kronrod;
  const double shapes[] = {kDefaultProcess.a * 20, 0.5, 1.0, 3.7, 60.0};
  const double rates[] = {kDefaultProcess.b, 2.0, 0.7, 4.0, 11.0};
  for (std::size_t i = 0; i < std::size(shapes); ++i) {
    auto f = [&](double x) { return cbm::gamma_pdf(x, shapes[i], rates[i]); };
    // x = u^2 on [0, 1] removes the shape-0.5 pole at the origin.
    auto g = [&](double u) { return 2 * u * f(u * u); };
    const double total = gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, 15, 1e-13) +
                         gauss_kronrod<double, 61>::integrate(f, 1.0, 50.0, 15, 1e-13);
    EXPECT_NEAR(total, 1.0, 1e-6) << "shape " << shapes[i] << " rate " << rates[i];
  }
}

TEST(GammaPdf, RejectsBadParameters) {
  EXPECT_THROW(cbm::gamma_pdf(1.0, 0.0, 1.0), cbm::ParameterError);
  EXPECT_THROW(cbm::gamma_pdf(1.0, 1.0, -1.0), cbm::ParameterError);
  EXPECT_THROW(cbm::gamma_pdf(-1.0, 1.0, 1.0), cbm::ParameterError);
}

TEST(GammaMoments, DefaultParameters) {
  const auto m10 = cbm::gamma_moments(kDefaultProcess, 10.0);
  EXPECT_NEAR(m10.mean, 1.0, 1e-12);
  const auto m0 = cbm::gamma_moments(kDefaultProcess, 0.0);
  EXPECT_EQ(m0.mean, 0.0);
  EXPECT_EQ(m0.variance, 0.0);
  EXPECT_NEAR(cbm::gamma_moments(kDefaultProcess, 30.0).variance, 0.27, 1e-12);
  EXPECT_THROW(cbm::gamma_moments(kDefaultProcess, -1.0), cbm::ParameterError);
}

TEST(SampleDegradation, ZeroElapsedTimeIsZero) {
  cbm::RngStream rng(1, 0, 0);
  EXPECT_EQ(cbm::sample_degradation(kDefaultProcess, 0.0, rng), 0.0);
  EXPECT_EQ(rng.draws(), 0u);
  EXPECT_THROW(cbm::sample_degradation(kDefaultProcess, -0.1, rng), cbm::ParameterError);
}

TEST(SampleDegradation, MonteCarloMoments) {
  cbm::RngStream rng = cbm::derive_stream(11, 0, 0);
  std::vector<double> at20(100000), at30(100000);
  for (double& x : at20) x = cbm::sample_degradation(kDefaultProcess, 20.0, rng);
  for (double& x : at30) x = cbm::sample_degradation(kDefaultProcess, 30.0, rng);
  double mean = 0, var = 0;
  moments(at20, mean, var);
  EXPECT_NEAR(mean, 2.0, 0.02);
  moments(at30, mean, var);
  EXPECT_NEAR(var, 0.27, 0.027);
}

// Empirical mean within 5 standard errors, variance within 10%, across
// shapes on both sides of one.
TEST(SampleGamma, MomentsAcrossShapes) {
  const double shapes[] = {0.05, 0.278, 0.9, 1.0, 2.5, 22.2, 150.0};
  const double rates[] = {1.0, 11.1, 0.5, 3.0, 11.1, 11.1, 40.0};
  for (std::size_t i = 0; i < std::size(shapes); ++i) {
    const double s = shapes[i], r = rates[i];
    const auto xs = draw_many(s, r, 100000, 100 + i);
    double mean = 0, var = 0;
    moments(xs, mean, var);
    const double se = std::sqrt(s / (r * r) / 100000.0);
    EXPECT_NEAR(mean, s / r, 5 * se) << "shape " << s;
    EXPECT_NEAR(var, s / (r * r), 0.1 * s / (r * r)) << "shape " << s;
    EXPECT_TRUE(std::all_of(xs.begin(), xs.end(), [](double x) { return x >= 0; }));
  }
}

// Kolmogorov-Smirnov distance to the regularized incomplete gamma CDF for the
// small shape hit by half-year mid-interval checks.
TEST(SampleGamma, SmallShapeMatchesCdf) {
  const double shape = kDefaultProcess.a * 0.25;
  auto xs = draw_many(shape, kDefaultProcess.b, 10000, 5);
  std::sort(xs.begin(), xs.end());
  double d = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double cdf = boost::math::gamma_p(shape, kDefaultProcess.b * xs[i]);
    d = std::max({d, std::abs(cdf - i / n), std::abs((i + 1) / n - cdf)});
  }
  EXPECT_LT(d, 0.02);
}

TEST(RngStream, SameKeySameSequence) {
  auto a = cbm::derive_stream(42, 3, 9);
  auto b = cbm::derive_stream(42, 3, 9);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
}

TEST(RngStream, DistinctKeysDiffer) {
  auto a = cbm::derive_stream(42, 0, 0);
  auto b = cbm::derive_stream(42, 0, 1);
  auto c = cbm::derive_stream(42, 1, 0);
  auto d = cbm::derive_stream(43, 0, 0);
  int same_ab = 0, same_ac = 0, same_ad = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    same_ab += x == b();
    same_ac += x == c();
    same_ad += x == d();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
  EXPECT_EQ(same_ad, 0);
}

TEST(RngStream, CopyForksIdenticalSequence) {
  auto a = cbm::derive_stream(1, 2, 3);
  a();
  auto b = a;
  EXPECT_EQ(a(), b());
  auto lane_a = a.lane(1), lane_b = a.lane(1), other = a.lane(2);
  EXPECT_EQ(lane_a(), lane_b());
  EXPECT_NE(lane_a(), other());
}

TEST(RngStream, UniformStaysInOpenInterval) {
  auto rng = cbm::derive_stream(9, 9, 9);
  double lo = 1, hi = 0, sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

// Adjacent streams should not be correlated.
TEST(RngStream, NeighbouringStreamsUncorrelated) {
  const int n = 20000;
  double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
  for (int r = 0; r < n; ++r) {
    auto a = cbm::derive_stream(5, 0, r);
    auto b = cbm::derive_stream(5, 0, r + 1);
    const double x = a.uniform(), y = b.uniform();
    sx += x, sy += y, sxy += x * y, sxx += x * x, syy += y * y;
  }
  const double cov = sxy / n - sx / n * sy / n;
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(corr), 5.0 / std::sqrt(n));
}
