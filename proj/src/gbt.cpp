#include "cle/learn/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cle::learn {

namespace {

// A split must reduce the node's squared error by more than this fraction of
// its sum of squared targets; anything smaller is rounding noise.
constexpr double kRelativeMinGain = 1e-12;

void check_inputs(const Matrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) {
    throw GbtError(GbtError::Kind::DimensionMismatch,
                   "feature rows (" + std::to_string(x.rows()) + ") != targets (" + std::to_string(y.size()) + ")");
  }
  if (x.rows() < 2) throw GbtError(GbtError::Kind::TooFewRows, "need at least two training rows");
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (double v : x.row(i)) {
      if (!std::isfinite(v)) throw GbtError(GbtError::Kind::NonFiniteInput, "non-finite feature value");
    }
    if (!std::isfinite(y[i])) throw GbtError(GbtError::Kind::NonFiniteInput, "non-finite target value");
  }
}

// Feature orderings shared by every tree of one boosting run.
class SortedFeatures {
 public:
  explicit SortedFeatures(const Matrix& x) {
    const auto n = x.rows();
    std::vector<std::uint32_t> base(n);
    std::iota(base.begin(), base.end(), 0u);
    for (std::size_t f = 0; f < x.cols(); ++f) {
      auto order = base;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
      if (x(order.front(), f) == x(order.back(), f)) continue;  // constant column, never splits
      features_.push_back(static_cast<int>(f));
      orders_.push_back(std::move(order));
    }
  }

  std::size_t size() const { return features_.size(); }
  int feature(std::size_t k) const { return features_[k]; }
  const std::vector<std::uint32_t>& order(std::size_t k) const { return orders_[k]; }

 private:
  std::vector<int> features_;
  std::vector<std::vector<std::uint32_t>> orders_;
};

struct NodeStats {
  std::size_t count = 0;
  double sum = 0.0;
  double sumsq = 0.0;
};

struct Candidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct ScanState {
  std::size_t left_count = 0;
  double left_sum = 0.0;
  double last_value = 0.0;
};

// Level-wise builder. `leaf_of` receives each row's final leaf index.
RegressionTree build_tree(const Matrix& x, const SortedFeatures& sorted, std::span<const double> target,
                          int max_depth, int min_samples_leaf, std::vector<int>& leaf_of) {
  const auto n = x.rows();
  const auto msl = static_cast<std::size_t>(std::max(min_samples_leaf, 1));
  RegressionTree tree;
  tree.nodes.emplace_back();
  std::vector<NodeStats> stats(1);
  leaf_of.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    stats[0].count++;
    stats[0].sum += target[i];
    stats[0].sumsq += target[i] * target[i];
  }

  std::vector<int> frontier = {0};
  std::vector<int> slot_of;
  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    slot_of.assign(tree.nodes.size(), -1);
    std::vector<int> open;
    for (int node : frontier) {
      if (stats[node].count >= 2 * msl) {
        slot_of[node] = static_cast<int>(open.size());
        open.push_back(node);
      }
    }
    if (open.empty()) break;

    std::vector<Candidate> best(open.size());
    std::vector<ScanState> scan(open.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      const int f = sorted.feature(k);
      std::fill(scan.begin(), scan.end(), ScanState{});
      for (const auto row : sorted.order(k)) {
        const int slot = slot_of[leaf_of[row]];
        if (slot < 0) continue;
        auto& st = scan[slot];
        const double v = x(row, f);
        if (st.left_count > 0 && v > st.last_value) {
          const auto& total = stats[open[slot]];
          const std::size_t nl = st.left_count;
          const std::size_t nr = total.count - nl;
          if (nl >= msl && nr >= msl) {
            const double sl = st.left_sum;
            const double sr = total.sum - sl;
            const double gain = sl * sl / static_cast<double>(nl) + sr * sr / static_cast<double>(nr) -
                                total.sum * total.sum / static_cast<double>(total.count);
            if (gain > best[slot].gain) {
              double thr = 0.5 * (st.last_value + v);
              if (thr >= v) thr = st.last_value;
              best[slot] = {gain, f, thr};
            }
          }
        }
        st.left_count++;
        st.left_sum += target[row];
        st.last_value = v;
      }
    }

    std::vector<int> next;
    for (std::size_t s = 0; s < open.size(); ++s) {
      const int node = open[s];
      if (best[s].feature < 0 || best[s].gain <= kRelativeMinGain * stats[node].sumsq) {
        slot_of[node] = -1;
        continue;
      }
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stats.resize(tree.nodes.size());
      tree.nodes[node].feature = best[s].feature;
      tree.nodes[node].threshold = best[s].threshold;
      tree.nodes[node].left = left;
      tree.nodes[node].right = left + 1;
      next.push_back(left);
      next.push_back(left + 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int node = leaf_of[i];
      if (node >= static_cast<int>(slot_of.size()) || slot_of[node] < 0) continue;
      const auto& split = tree.nodes[node];
      const int child = x(i, split.feature) <= split.threshold ? split.left : split.right;
      leaf_of[i] = child;
      stats[child].count++;
      stats[child].sum += target[i];
      stats[child].sumsq += target[i] * target[i];
    }
    frontier = std::move(next);
  }

  for (std::size_t node = 0; node < tree.nodes.size(); ++node) {
    auto& tn = tree.nodes[node];
    if (tn.is_leaf()) tn.value = stats[node].count ? stats[node].sum / static_cast<double>(stats[node].count) : 0.0;
  }
  return tree;
}

}  // namespace

void GbtParams::validate() const {
  if (n_estimators < 0) throw GbtError(GbtError::Kind::InvalidParams, "n_estimators must be non-negative");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw GbtError(GbtError::Kind::InvalidParams, "learning_rate must be positive");
  }
  if (max_depth < 1) throw GbtError(GbtError::Kind::InvalidParams, "max_depth must be at least 1");
  if (min_samples_leaf < 1) throw GbtError(GbtError::Kind::InvalidParams, "min_samples_leaf must be at least 1");
}

std::string GbtParams::describe() const {
  std::ostringstream out;
  out << "n_estimators=" << n_estimators << " learning_rate=" << learning_rate << " max_depth=" << max_depth
      << " min_samples_leaf=" << min_samples_leaf;
  return out.str();
}

double RegressionTree::predict(std::span<const double> x) const {
  int node = 0;
  while (!nodes[node].is_leaf()) {
    const auto& n = nodes[node];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[node].value;
}

int RegressionTree::depth() const {
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[nodes[i].left] = level[i] + 1;
      level[nodes[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

RegressionTree fit_regression_tree(const Matrix& x, std::span<const double> target, int max_depth,
                                   int min_samples_leaf) {
  check_inputs(x, target);
  if (max_depth < 1) throw GbtError(GbtError::Kind::InvalidParams, "max_depth must be at least 1");
  const SortedFeatures sorted(x);
  std::vector<int> leaf_of;
  return build_tree(x, sorted, target, max_depth, min_samples_leaf, leaf_of);
}

GbtModel fit_gbt(const Matrix& x, std::span<const double> y, const GbtParams& params, std::uint64_t /*seed*/) {
  params.validate();
  check_inputs(x, y);
  const auto n = x.rows();

  GbtModel model;
  model.params = params;
  model.n_features = x.cols();
  model.base_prediction = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  model.trees.reserve(static_cast<std::size_t>(params.n_estimators));

  const SortedFeatures sorted(x);
  std::vector<double> prediction(n, model.base_prediction);
  std::vector<double> residual(n);
  std::vector<int> leaf_of;
  for (int m = 0; m < params.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - prediction[i];
    auto tree = build_tree(x, sorted, residual, params.max_depth, params.min_samples_leaf, leaf_of);
    for (std::size_t i = 0; i < n; ++i) prediction[i] += params.learning_rate * tree.nodes[leaf_of[i]].value;
    model.trees.push_back(std::move(tree));
  }
  return model;
}

double predict_gbt(const GbtModel& model, std::span<const double> x) {
  if (x.size() != model.n_features) {
    throw GbtError(GbtError::Kind::DimensionMismatch, "model expects " + std::to_string(model.n_features) +
                                                          " features, got " + std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += tree.predict(x);
  return model.base_prediction + model.params.learning_rate * sum;
}

std::vector<double> predict_gbt(const GbtModel& model, const Matrix& x) {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_gbt(model, x.row(i));
  return out;
}

GbtModel truncate_model(const GbtModel& model, int n_estimators) {
  if (n_estimators < 0 || static_cast<std::size_t>(n_estimators) > model.trees.size()) {
    throw GbtError(GbtError::Kind::InvalidParams, "cannot truncate to " + std::to_string(n_estimators) + " trees");
  }
  GbtModel out = model;
  out.trees.resize(static_cast<std::size_t>(n_estimators));
  out.params.n_estimators = n_estimators;
  return out;
}

}  // namespace cle::learn
