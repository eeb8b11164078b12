#pragma once

#include "cle/clock.hpp"
#include "cle/embed.hpp"
#include "cle/extract.hpp"
#include "cle/learn/bundle.hpp"
#include "cle/learn/grid_search.hpp"
#include "cle/learn/ratings.hpp"
#include "cle/learn/split.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cle::learn {

/// Looks up the extracted text of a rated page. nullopt means unavailable.
using PageSource = std::function<std::optional<extract::ExtractedDocument>(const std::string& url)>;

struct TrainOptions {
  std::uint64_t split_seed = 42;
  double train_fraction = 0.8;
  int folds = 5;
  /// Skip the grid search and use fast_params for every dimension.
  bool fast = false;
  std::vector<GbtParams> grid = default_grid();
  GbtParams fast_params = default_best_params();
  Clock clock = now_utc;
};

class TrainError : public std::runtime_error {
 public:
  enum class Kind { MissingDimension, InsufficientData };
  TrainError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Rated pages turned into feature rows: every distinct URL is embedded once.
struct FeatureTable {
  Matrix features;                          // one row per usable page
  std::map<std::string, std::size_t> row_of;  // url -> row
  std::vector<std::string> unusable_urls;   // missing or not Valid
};

FeatureTable build_feature_table(const std::vector<RatingRecord>& ratings, const PageSource& pages,
                                 const embed::EmbeddingProvider& provider);

/// Training examples for one dimension over the records whose page has features.
std::vector<TrainingExample> build_examples(const std::vector<RatingRecord>& ratings, const FeatureTable& table,
                                            Dimension dim, std::string_view provider_id,
                                            std::string_view provider_version);

/// Group split, standardizer fit on training rows only, per-dimension grid
/// search (or fast params), refit on the full training split and held-out
/// Pearson evaluation.
ModelBundle train_all(const std::vector<RatingRecord>& ratings, const PageSource& pages,
                      const embed::EmbeddingProviderSpec& provider_spec, const TrainOptions& options = {});

/// Pearson r / p of a bundle's predictions against every usable rating.
std::map<Dimension, DimensionReport> evaluate_bundle(const ModelBundle& bundle,
                                                     const std::vector<RatingRecord>& ratings,
                                                     const PageSource& pages);

}  // namespace cle::learn
