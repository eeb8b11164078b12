#include "cle/learn/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace cle::learn {
namespace {

double brute_force_r(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<long double>(a.size());
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n, mb /= n;
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

double boost_p(double r, std::size_t n) {
  const double df = static_cast<double>(n) - 2.0;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

TEST(Pearson, PerfectCorrelation) {
  const std::vector<double> a = {1, 2, 3};
  const std::vector<double> b = {3, 2, 1};
  EXPECT_EQ(pearson(a, a).r, 1.0);
  EXPECT_EQ(pearson(a, a).p_value, 0.0);
  EXPECT_EQ(pearson(a, b).r, -1.0);
}

TEST(Pearson, HandCase) {
  // Covariance sum 4, variance sums 5 and 5.
  const std::vector<double> a = {1, 2, 3, 4};
  const std::vector<double> b = {1, 3, 2, 4};
  EXPECT_EQ(pearson(a, b).r, 0.8);
}

TEST(Pearson, RandomPairsMatchBruteForceAndBoost) {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + rng() % 200;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = n01(rng);
      b[i] = 0.3 * a[i] + n01(rng);
    }
    const auto res = pearson(a, b);
    EXPECT_NEAR(res.r, brute_force_r(a, b), 1e-12);
    const double expected_p = boost_p(res.r, n);
    EXPECT_NEAR(res.p_value, expected_p, 1e-10 + 1e-8 * expected_p) << "n=" << n << " r=" << res.r;
  }
}

TEST(Pearson, AffineInvariance) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> n01;
  std::vector<double> a(50), b(50), a2(50), b2(50);
  for (int i = 0; i < 50; ++i) {
    a[i] = n01(rng);
    b[i] = a[i] + n01(rng);
    a2[i] = -2.5 * a[i] + 10;
    b2[i] = 4 * b[i] - 1;
  }
  EXPECT_NEAR(pearson(a2, b2).r, -pearson(a, b).r, 1e-12);
}

TEST(Pearson, Errors) {
  const std::vector<double> two = {1, 2};
  const std::vector<double> three = {1, 2, 3};
  const std::vector<double> constant = {5, 5, 5};
  const std::vector<double> four = {1, 2, 3, 4};
  auto kind_of = [](auto&& f) -> std::optional<StatsError::Kind> {
    try {
      f();
    } catch (const StatsError& e) {
      return e.kind();
    }
    return std::nullopt;
  };
  EXPECT_EQ(kind_of([&] { pearson(two, two); }), StatsError::Kind::TooFewPoints);
  EXPECT_EQ(kind_of([&] { pearson(three, four); }), StatsError::Kind::LengthMismatch);
  EXPECT_EQ(kind_of([&] { pearson(three, constant); }), StatsError::Kind::ConstantInput);
}

TEST(StudentT, MatchesBoost) {
  for (double df : {1.0, 2.0, 5.0, 30.0, 1000.0}) {
    for (double t : {0.0, 0.5, 1.96, 3.0, 10.0}) {
      boost::math::students_t dist(df);
      const double expected = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
      EXPECT_NEAR(student_t_two_sided_p(t, df), expected, 1e-12 + 1e-9 * expected) << df << " " << t;
      EXPECT_DOUBLE_EQ(student_t_two_sided_p(-t, df), student_t_two_sided_p(t, df));
    }
  }
}

TEST(IncompleteBeta, KnownValues) {
  EXPECT_DOUBLE_EQ(regularized_incomplete_beta(1, 1, 0.3), 0.3);
  EXPECT_NEAR(regularized_incomplete_beta(2, 3, 0.4), 0.5248, 1e-12);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 1.0), 1.0);
  EXPECT_THROW(regularized_incomplete_beta(2, 3, 1.5), StatsError);
}

}  // namespace
}  // namespace cle::learn
