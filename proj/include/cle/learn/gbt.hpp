#pragma once

#include "cle/matrix.hpp"

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cle::learn {

class GbtError : public std::invalid_argument {
 public:
  enum class Kind { TooFewRows, NonFiniteInput, DimensionMismatch, InvalidParams };
  GbtError(Kind kind, const std::string& message) : std::invalid_argument(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Boosting hyperparameters. The loss is always squared error.
struct GbtParams {
  int n_estimators = 200;
  double learning_rate = 0.1;
  int max_depth = 5;
  int min_samples_leaf = 1;

  /// Throws GbtError(InvalidParams).
  void validate() const;
  std::string describe() const;

  friend auto operator<=>(const GbtParams&, const GbtParams&) = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary axis-aligned regression tree; rows with x[feature] <= threshold go left.
/// Node 0 is the root.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  /// Number of split levels; a single leaf has depth 0.
  int depth() const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct GbtModel {
  double base_prediction = 0.0;
  std::vector<RegressionTree> trees;
  GbtParams params;
  std::size_t n_features = 0;

  friend bool operator==(const GbtModel&, const GbtModel&) = default;
};

/// Greedy variance-reduction tree fitted to `target`. Candidate thresholds are
/// midpoints between consecutive distinct values; leaves hold the mean target.
/// Equal gains go to the lowest feature index, then the lowest threshold.
RegressionTree fit_regression_tree(const Matrix& x, std::span<const double> target, int max_depth,
                                   int min_samples_leaf = 1);

/// Plain gradient boosting on squared error: start from mean(y), then fit each
/// tree to the current residuals and add learning_rate times its output.
/// `seed` is recorded for reproducibility; the procedure itself is deterministic.
GbtModel fit_gbt(const Matrix& x, std::span<const double> y, const GbtParams& params, std::uint64_t seed = 0);

/// base_prediction + learning_rate * sum of tree outputs.
double predict_gbt(const GbtModel& model, std::span<const double> x);
std::vector<double> predict_gbt(const GbtModel& model, const Matrix& x);

/// The same model keeping only its first `n_estimators` trees.
GbtModel truncate_model(const GbtModel& model, int n_estimators);

}  // namespace cle::learn
