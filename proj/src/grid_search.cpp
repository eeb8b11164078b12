#include "cle/learn/grid_search.hpp"
#include "cle/learn/split.hpp"
#include "cle/learn/stats.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace cle::learn {

namespace {

struct Fold {
  Matrix train_x;
  std::vector<double> train_y;
  Matrix test_x;
  std::vector<double> test_y;
};

std::vector<Fold> make_folds(const Dataset& data, std::span<const int> fold_of_row, int k) {
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < fold_of_row.size(); ++i) (fold_of_row[i] == f ? test_rows : train_rows).push_back(i);
    auto& fold = folds[static_cast<std::size_t>(f)];
    fold.train_x = data.x.select_rows(train_rows);
    fold.test_x = data.x.select_rows(test_rows);
    for (auto i : train_rows) fold.train_y.push_back(data.y[i]);
    for (auto i : test_rows) fold.test_y.push_back(data.y[i]);
  }
  return folds;
}

void check_dataset(const Dataset& data) {
  if (data.x.rows() != data.y.size() || data.y.size() != data.groups.size()) {
    throw GbtError(GbtError::Kind::DimensionMismatch, "dataset rows, targets and groups differ in length");
  }
}

}  // namespace

std::vector<GbtParams> default_grid() {
  std::vector<GbtParams> grid;
  for (int n : {50, 100, 200}) {
    for (double lr : {0.01, 0.1, 0.2}) {
      for (int depth : {3, 5, 7}) grid.push_back(GbtParams{n, lr, depth, 1});
    }
  }
  return grid;
}

GbtParams default_best_params() { return GbtParams{200, 0.1, 5, 1}; }

std::optional<double> GridSearchResult::score_of(const GbtParams& p) const {
  for (const auto& s : cv_scores) {
    if (s.params == p) return s.mean_r;
  }
  return std::nullopt;
}

double fold_score(std::span<const double> predictions, std::span<const double> targets) {
  try {
    return pearson(predictions, targets).r;
  } catch (const StatsError&) {
    return 0.0;
  }
}

double cross_validate(const Dataset& data, std::span<const int> fold_of_row, int k, const GbtParams& params,
                      std::uint64_t seed) {
  check_dataset(data);
  double total = 0.0;
  for (const auto& fold : make_folds(data, fold_of_row, k)) {
    const auto model = fit_gbt(fold.train_x, fold.train_y, params, seed);
    total += fold_score(predict_gbt(model, fold.test_x), fold.test_y);
  }
  return total / k;
}

bool preferred_on_tie(const GbtParams& a, const GbtParams& b) {
  return std::tie(a.n_estimators, a.max_depth, a.learning_rate, a.min_samples_leaf) <
         std::tie(b.n_estimators, b.max_depth, b.learning_rate, b.min_samples_leaf);
}

GridSearchResult grid_search(const Dataset& data, std::span<const GbtParams> grid, int k_folds, std::uint64_t seed) {
  if (grid.empty()) throw GbtError(GbtError::Kind::InvalidParams, "empty parameter grid");
  for (const auto& p : grid) p.validate();
  check_dataset(data);
  const auto fold_of_row = group_kfold(data.groups, k_folds, seed);
  const auto folds = make_folds(data, fold_of_row, k_folds);

  // Boosting is deterministic, so the first m trees of a longer run are exactly
  // an m-tree model. Fit each (learning rate, depth, leaf size) once at the
  // largest requested size and score every requested prefix.
  using Shape = std::tuple<double, int, int>;
  std::map<Shape, int> longest;
  for (const auto& p : grid) {
    auto& n = longest[{p.learning_rate, p.max_depth, p.min_samples_leaf}];
    n = std::max(n, p.n_estimators);
  }
  std::vector<double> totals(grid.size(), 0.0);
  for (const auto& fold : folds) {
    for (const auto& [shape, n_max] : longest) {
      const auto& [lr, depth, msl] = shape;
      const auto full = fit_gbt(fold.train_x, fold.train_y, GbtParams{n_max, lr, depth, msl}, seed);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto& p = grid[g];
        if (Shape{p.learning_rate, p.max_depth, p.min_samples_leaf} != shape) continue;
        const auto model = truncate_model(full, p.n_estimators);
        totals[g] += fold_score(predict_gbt(model, fold.test_x), fold.test_y);
      }
    }
  }

  GridSearchResult result;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double mean = totals[g] / k_folds;
    result.cv_scores.push_back({grid[g], mean});
    if (g == 0 || mean > result.best_score || (mean == result.best_score && preferred_on_tie(grid[g], result.best))) {
      result.best = grid[g];
      result.best_score = mean;
    }
  }
  return result;
}

}  // namespace cle::learn
