#pragma once

#include "cle/learn/gbt.hpp"
#include "cle/matrix.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cle::learn {

/// Rows, targets and the participant of each row.
struct Dataset {
  Matrix x;
  std::vector<double> y;
  std::vector<std::string> groups;
};

/// 3 x 3 x 3 grid: n_estimators {50, 100, 200} x learning_rate {0.01, 0.1, 0.2} x max_depth {3, 5, 7}.
std::vector<GbtParams> default_grid();

/// Parameters used when the grid search is skipped: 200 trees, learning rate 0.1, depth 5.
GbtParams default_best_params();

struct CvScore {
  GbtParams params;
  double mean_r = 0.0;
};

struct GridSearchResult {
  GbtParams best;
  double best_score = 0.0;
  std::vector<CvScore> cv_scores;  // grid order

  std::optional<double> score_of(const GbtParams& p) const;
};

/// Held-out Pearson r for one fold. Folds where r is undefined (fewer than 3
/// rows, or constant predictions or targets) score 0.
double fold_score(std::span<const double> predictions, std::span<const double> targets);

/// Mean held-out r of `params` over participant-grouped folds.
double cross_validate(const Dataset& data, std::span<const int> fold_of_row, int k, const GbtParams& params,
                      std::uint64_t seed);

/// Exhaustive search. Best is the highest mean r; ties prefer fewer estimators,
/// then lower depth, then lower learning rate.
GridSearchResult grid_search(const Dataset& data, std::span<const GbtParams> grid, int k_folds, std::uint64_t seed);

/// True when `a` wins the tie-break against `b` at equal score.
bool preferred_on_tie(const GbtParams& a, const GbtParams& b);

}  // namespace cle::learn
