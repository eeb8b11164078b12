#include "cle/learn/gbt.hpp"
#include "cle/learn/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <limits>
#include <random>

namespace cle::learn {
namespace {

// Exhaustive search over every feature and midpoint threshold.
struct Split {
  int feature = -1;
  double threshold = 0;
  double sse = std::numeric_limits<double>::infinity();
};

Split brute_force_split(const Matrix& x, std::span<const double> y) {
  Split best;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> v;
    for (std::size_t i = 0; i < x.rows(); ++i) v.push_back(x(i, f));
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      const double thr = (v[k] + v[k + 1]) / 2;
      double sl = 0, sr = 0, nl = 0, nr = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        if (x(i, f) <= thr) sl += y[i], ++nl;
        else sr += y[i], ++nr;
      }
      double sse = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        const double d = y[i] - (x(i, f) <= thr ? sl / nl : sr / nr);
        sse += d * d;
      }
      if (sse < best.sse - 1e-12) best = {static_cast<int>(f), thr, sse};
    }
  }
  return best;
}

double walk(const RegressionTree& tree, std::span<const double> x) {
  int n = 0;
  while (tree.nodes[n].feature >= 0) {
    const auto& node = tree.nodes[n];
    n = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return tree.nodes[n].value;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Matrix x(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) x(r, c) = n01(rng);
  }
  return x;
}

TEST(RegressionTree, StumpMatchesBruteForceOnSixPoints) {
  const Matrix x{{1, 10}, {2, 9}, {3, 30}, {4, 31}, {5, 8}, {6, 29}};
  const std::vector<double> y = {1, 1, 5, 5, 1, 5};
  const auto tree = fit_regression_tree(x, y, 1);
  const auto oracle = brute_force_split(x, y);
  EXPECT_EQ(tree.nodes[0].feature, oracle.feature);
  EXPECT_EQ(tree.nodes[0].threshold, oracle.threshold);
  EXPECT_EQ(tree.depth(), 1);
}

TEST(RegressionTree, StumpMatchesBruteForceOnRandomData) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = random_matrix(30, 4, seed);
    std::vector<double> y(30);
    std::mt19937_64 rng(seed + 100);
    std::normal_distribution<double> n01;
    for (auto& v : y) v = n01(rng);
    const auto tree = fit_regression_tree(x, y, 1);
    const auto oracle = brute_force_split(x, y);
    EXPECT_EQ(tree.nodes[0].feature, oracle.feature) << seed;
    EXPECT_EQ(tree.nodes[0].threshold, oracle.threshold) << seed;
  }
}

TEST(RegressionTree, LeavesHoldMeans) {
  const Matrix x{{0}, {0}, {1}, {1}};
  const std::vector<double> y = {1, 3, 10, 20};
  const auto tree = fit_regression_tree(x, y, 3);
  const std::vector<double> lo = {0}, hi = {1};
  EXPECT_EQ(tree.predict(lo), 2.0);
  EXPECT_EQ(tree.predict(hi), 15.0);
}

TEST(RegressionTree, MinSamplesLeafIsRespected) {
  const auto x = random_matrix(40, 3, 9);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = x(i, 0) * 3 + x(i, 1);
  const auto tree = fit_regression_tree(x, y, 6, 7);
  std::vector<int> counts(tree.nodes.size(), 0);
  for (std::size_t i = 0; i < 40; ++i) {
    int n = 0;
    while (tree.nodes[n].feature >= 0) n = x(i, tree.nodes[n].feature) <= tree.nodes[n].threshold ? tree.nodes[n].left : tree.nodes[n].right;
    ++counts[n];
  }
  for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
    if (tree.nodes[n].is_leaf()) EXPECT_GE(counts[n], 7);
  }
}

TEST(RegressionTree, DepthLimit) {
  const auto x = random_matrix(200, 5, 3);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = std::sin(x(i, 0) * 3) + x(i, 1) * x(i, 2);
  for (int d : {1, 2, 4, 7}) EXPECT_LE(fit_regression_tree(x, y, d).depth(), d);
}

TEST(FitGbt, ConstantTarget) {
  const auto x = random_matrix(50, 3, 1);
  const std::vector<double> y(50, 3.7);
  const auto model = fit_gbt(x, y, GbtParams{});
  for (double p : predict_gbt(model, x)) EXPECT_NEAR(p, 3.7, 1e-9);
  for (const auto& t : model.trees) EXPECT_EQ(t.nodes.size(), 1u);
}

TEST(FitGbt, LinearSignal) {
  const auto x = random_matrix(200, 3, 2);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = 2 * x(i, 0);
  const auto model = fit_gbt(x, y, GbtParams{100, 0.1, 3, 1});
  EXPECT_GE(pearson(predict_gbt(model, x), y).r, 0.99);
}

TEST(FitGbt, TrainingLossNonIncreasing) {
  const auto x = random_matrix(120, 4, 5);
  std::vector<double> y(120);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  for (auto& v : y) v = n01(rng);
  const auto model = fit_gbt(x, y, GbtParams{200, 0.1, 3, 1});
  double previous = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= 200; ++m) {
    const auto pred = predict_gbt(truncate_model(model, m), x);
    double mse = 0;
    for (std::size_t i = 0; i < y.size(); ++i) mse += (pred[i] - y[i]) * (pred[i] - y[i]);
    EXPECT_LE(mse, previous + 1e-12) << m;
    previous = mse;
  }
}

TEST(FitGbt, Deterministic) {
  const auto x = random_matrix(60, 4, 7);
  std::vector<double> y(60);
  for (std::size_t i = 0; i < 60; ++i) y[i] = x(i, 1) - x(i, 3);
  EXPECT_EQ(fit_gbt(x, y, GbtParams{30, 0.2, 3, 1}, 1), fit_gbt(x, y, GbtParams{30, 0.2, 3, 1}, 1));
}

TEST(FitGbt, TruncationEqualsShorterFit) {
  const auto x = random_matrix(80, 3, 8);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < 80; ++i) y[i] = x(i, 0) * x(i, 1);
  const auto full = fit_gbt(x, y, GbtParams{60, 0.1, 3, 1});
  const auto shorter = fit_gbt(x, y, GbtParams{25, 0.1, 3, 1});
  const auto cut = truncate_model(full, 25);
  EXPECT_EQ(cut.trees, shorter.trees);
  EXPECT_EQ(cut.params, shorter.params);
}

TEST(PredictGbt, ZeroTreesIsBase) {
  GbtModel m;
  m.base_prediction = 2.5;
  m.n_features = 2;
  const std::vector<double> row = {1, 2};
  EXPECT_EQ(predict_gbt(m, row), 2.5);
}

TEST(PredictGbt, MatchesTreeWalkOracle) {
  const auto x = random_matrix(100, 6, 10);
  std::vector<double> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = x(i, 0) > 0 ? x(i, 2) : -x(i, 4);
  const auto model = fit_gbt(x, y, GbtParams{40, 0.15, 4, 2});
  const auto probes = random_matrix(5, 6, 11);
  for (std::size_t r = 0; r < 5; ++r) {
    double sum = 0;
    for (const auto& t : model.trees) sum += walk(t, probes.row(r));
    EXPECT_NEAR(predict_gbt(model, probes.row(r)), model.base_prediction + model.params.learning_rate * sum, 1e-12);
  }
}

TEST(FitGbt, Errors) {
  const auto x = random_matrix(10, 2, 1);
  const std::vector<double> y(10, 1.0);
  const std::vector<double> short_y(9, 1.0);
  auto kind_of = [](auto&& f) -> std::optional<GbtError::Kind> {
    try {
      f();
    } catch (const GbtError& e) {
      return e.kind();
    }
    return std::nullopt;
  };
  EXPECT_EQ(kind_of([&] { fit_gbt(x, short_y, GbtParams{}); }), GbtError::Kind::DimensionMismatch);
  EXPECT_EQ(kind_of([&] { fit_gbt(x, y, GbtParams{-1, 0.1, 3, 1}); }), GbtError::Kind::InvalidParams);
  EXPECT_EQ(kind_of([&] { fit_gbt(x, y, GbtParams{10, 0.0, 3, 1}); }), GbtError::Kind::InvalidParams);
  EXPECT_EQ(kind_of([&] { fit_gbt(x, y, GbtParams{10, 0.1, 0, 1}); }), GbtError::Kind::InvalidParams);
  EXPECT_EQ(kind_of([&] { fit_gbt(Matrix(0, 2), {}, GbtParams{}); }), GbtError::Kind::TooFewRows);
  auto bad = x;
  bad(3, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(kind_of([&] { fit_gbt(bad, y, GbtParams{}); }), GbtError::Kind::NonFiniteInput);
  GbtModel m = fit_gbt(x, y, GbtParams{5, 0.1, 2, 1});
  const std::vector<double> wrong = {1, 2, 3};
  EXPECT_EQ(kind_of([&] { predict_gbt(m, wrong); }), GbtError::Kind::DimensionMismatch);
}

TEST(GbtParams, Describe) {
  EXPECT_EQ(GbtParams{}.describe(), "n_estimators=200 learning_rate=0.1 max_depth=5 min_samples_leaf=1");
}

}  // namespace
}  // namespace cle::learn
