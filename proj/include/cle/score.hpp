#pragma once

#include "cle/clock.hpp"
#include "cle/dimension.hpp"
#include "cle/embed.hpp"
#include "cle/extract.hpp"
#include "cle/fetch.hpp"
#include "cle/hash.hpp"
#include "cle/learn/bundle.hpp"

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace cle::score {

class ScoreError : public std::invalid_argument {
 public:
  enum class Kind { OutOfRange, ProviderMismatch };
  ScoreError(Kind kind, const std::string& message) : std::invalid_argument(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

enum class LabelStatus { Scored, Invalid, Error };

std::string_view to_string(LabelStatus status);

/// Error reason used when the embedding provider cannot be reached.
inline constexpr std::string_view kProviderUnavailable = "ProviderUnavailable";

struct DimensionScore {
  double raw = 0.0;
  double display = 0.0;

  friend bool operator==(const DimensionScore&, const DimensionScore&) = default;
};

/// Scores for one URL. `scores` holds all three dimensions when status is
/// Scored and is empty otherwise. `reason` names the InvalidReason or error
/// kind; `detail` carries the error message.
struct ContentLabels {
  std::string url;
  LabelStatus status = LabelStatus::Error;
  std::string reason;
  std::string detail;
  std::map<Dimension, DimensionScore> scores;
  std::optional<ContentHash> content_hash;
  std::string model_version;
  Timestamp scored_at{};

  std::optional<double> raw(Dimension d) const;
  std::optional<double> display(Dimension d) const;

  friend bool operator==(const ContentLabels&, const ContentLabels&) = default;
};

/// Scored labels carry every dimension, others none. Throws std::invalid_argument.
void check_labels(const ContentLabels& labels);

nlohmann::json to_json(const ContentLabels& labels);
/// Throws std::invalid_argument on malformed input.
ContentLabels labels_from_json(const nlohmann::json& j);

/// 0-100 display value: (raw - 1) / 5 * 100 for Actionability and Knowledge,
/// (raw + 5) / 10 * 100 for Emotion, rounded half-up to one decimal.
/// Throws ScoreError(OutOfRange) outside the dimension's raw range.
double to_display(double raw, Dimension dim);

/// Same map without rounding.
double to_display_exact(double raw, Dimension dim);

/// Clamps a prediction into the dimension's raw range.
double clamp_raw(double raw, Dimension dim);

/// Holds a bundle and the embedding provider it was trained with.
class Scorer {
 public:
  explicit Scorer(std::shared_ptr<const learn::ModelBundle> bundle);
  /// Throws ScoreError(ProviderMismatch) if `provider` differs from the bundle's spec.
  Scorer(std::shared_ptr<const learn::ModelBundle> bundle, std::unique_ptr<embed::EmbeddingProvider> provider);

  /// Invalid documents keep their reason and get no scores. Throws
  /// embed::EmbedError when the provider fails.
  ContentLabels score_document(const extract::ExtractedDocument& doc, Timestamp scored_at) const;

  const learn::ModelBundle& bundle() const { return *bundle_; }

 private:
  std::shared_ptr<const learn::ModelBundle> bundle_;
  std::unique_ptr<embed::EmbeddingProvider> provider_;
};

ContentLabels score_document(const extract::ExtractedDocument& doc, const learn::ModelBundle& bundle,
                             Timestamp scored_at = now_utc());

/// Fetch and extraction settings shared by every scored URL.
struct ScoreContext {
  fetch::FetchConfig fetch = fetch::default_fetch_config();
  extract::MarkerList markers = extract::MarkerList::defaults();
  extract::StopList stoplist = extract::default_stoplist();
};

/// fetch -> extract -> score. Never throws for network or content problems;
/// they come back as Error or Invalid status.
ContentLabels score_url(std::string_view url, const ScoreContext& context, const Scorer& scorer,
                        const Clock& clock = now_utc);

}  // namespace cle::score
