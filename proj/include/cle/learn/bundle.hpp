#pragma once

#include "cle/clock.hpp"
#include "cle/dimension.hpp"
#include "cle/embed.hpp"
#include "cle/learn/gbt.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace cle::learn {

inline constexpr int kBundleSchemaVersion = 1;

struct DimensionReport {
  double pearson_r = 0.0;
  double p_value = 1.0;
  std::size_t n_test = 0;
  std::size_t n_train = 0;
  double cv_score = 0.0;  // mean fold r of the chosen params; 0 in fast mode

  friend bool operator==(const DimensionReport&, const DimensionReport&) = default;
};

struct EvaluationReport {
  std::map<Dimension, DimensionReport> dimensions;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.8;
  int cv_folds = 0;  // 0 when the grid search was skipped
  std::string selection_metric = "pearson_r";

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

/// Everything needed to score a page: standardizer, one model per dimension,
/// the embedding provider they were trained with, and how they were chosen.
struct ModelBundle {
  embed::Standardizer standardizer;
  std::map<Dimension, GbtModel> models;
  embed::EmbeddingProviderSpec provider_spec;
  std::map<Dimension, GbtParams> best_params;
  EvaluationReport report;
  std::string version;
  Timestamp trained_at{};

  /// Throws BundleError when a dimension is missing or widths disagree.
  void validate() const;

  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

class BundleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const nlohmann::json& doc);

/// Deterministic version tag derived from the bundle's trained content
/// (everything except version and trained_at).
std::string content_version(const ModelBundle& bundle);

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace cle::learn
