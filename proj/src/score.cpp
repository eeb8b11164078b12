#include "cle/score.hpp"
#include "cle/learn/gbt.hpp"

#include <algorithm>
#include <cmath>

namespace cle::score {

using nlohmann::json;

std::string_view to_string(LabelStatus status) {
  switch (status) {
    case LabelStatus::Scored: return "scored";
    case LabelStatus::Invalid: return "invalid";
    case LabelStatus::Error: return "error";
  }
  return "error";
}

std::optional<double> ContentLabels::raw(Dimension d) const {
  if (auto it = scores.find(d); it != scores.end()) return it->second.raw;
  return std::nullopt;
}

std::optional<double> ContentLabels::display(Dimension d) const {
  if (auto it = scores.find(d); it != scores.end()) return it->second.display;
  return std::nullopt;
}

double to_display_exact(double raw, Dimension dim) {
  const auto range = raw_range(dim);
  if (!(raw >= range.lo && raw <= range.hi)) {
    throw ScoreError(ScoreError::Kind::OutOfRange, std::to_string(raw) + " is outside the " +
                                                       std::string(cle::to_string(dim)) + " range");
  }
  return (raw - range.lo) / (range.hi - range.lo) * 100.0;
}

double to_display(double raw, Dimension dim) { return std::floor(to_display_exact(raw, dim) * 10.0 + 0.5) / 10.0; }

double clamp_raw(double raw, Dimension dim) {
  const auto range = raw_range(dim);
  return std::clamp(raw, range.lo, range.hi);
}

Scorer::Scorer(std::shared_ptr<const learn::ModelBundle> bundle)
    : bundle_(std::move(bundle)), provider_(embed::make_provider(bundle_->provider_spec)) {}

Scorer::Scorer(std::shared_ptr<const learn::ModelBundle> bundle, std::unique_ptr<embed::EmbeddingProvider> provider)
    : bundle_(std::move(bundle)), provider_(std::move(provider)) {
  if (provider_->id() != bundle_->provider_spec.provider_id || provider_->dim() != bundle_->provider_spec.dim) {
    throw ScoreError(ScoreError::Kind::ProviderMismatch,
                     "provider " + std::string(provider_->id()) + " does not match the bundle's " +
                         bundle_->provider_spec.provider_id);
  }
}

ContentLabels Scorer::score_document(const extract::ExtractedDocument& doc, Timestamp scored_at) const {
  ContentLabels labels;
  labels.url = doc.url;
  labels.content_hash = doc.content_hash;
  labels.model_version = bundle_->version;
  labels.scored_at = scored_at;
  if (!doc.validity.is_valid()) {
    labels.status = LabelStatus::Invalid;
    labels.reason = std::string(extract::to_string(doc.validity.reason()));
    return labels;
  }
  const auto features = embed::transform_row(provider_->embed(doc.cleaned_tokens).values, bundle_->standardizer);
  for (auto dim : kAllDimensions) {
    double raw = learn::predict_gbt(bundle_->models.at(dim), features);
    raw = std::isfinite(raw) ? clamp_raw(raw, dim) : raw_range(dim).lo;
    labels.scores[dim] = DimensionScore{raw, to_display(raw, dim)};
  }
  labels.status = LabelStatus::Scored;
  return labels;
}

ContentLabels score_document(const extract::ExtractedDocument& doc, const learn::ModelBundle& bundle,
                             Timestamp scored_at) {
  const Scorer scorer(std::make_shared<const learn::ModelBundle>(bundle));
  return scorer.score_document(doc, scored_at);
}

ContentLabels score_url(std::string_view url, const ScoreContext& context, const Scorer& scorer, const Clock& clock) {
  ContentLabels failed;
  failed.url = std::string(url);
  failed.status = LabelStatus::Error;
  failed.model_version = scorer.bundle().version;
  try {
    const auto raw = fetch::fetch_page(url, context.fetch);
    const auto doc = extract::extract_document(url, raw, context.markers, context.stoplist);
    return scorer.score_document(doc, clock());
  } catch (const fetch::FetchError& e) {
    failed.reason = std::string(fetch::to_string(e.kind()));
    failed.detail = e.what();
  } catch (const embed::EmbedError& e) {
    failed.reason = std::string(kProviderUnavailable);
    failed.detail = e.what();
  } catch (const std::exception& e) {
    failed.reason = "Internal";
    failed.detail = e.what();
  }
  failed.scored_at = clock();
  return failed;
}

json to_json(const ContentLabels& labels) {
  json j = {{"url", labels.url},
            {"status", std::string(to_string(labels.status))},
            {"model_version", labels.model_version},
            {"scored_at_ms", to_epoch_ms(labels.scored_at)}};
  if (!labels.reason.empty()) j["reason"] = labels.reason;
  if (!labels.detail.empty()) j["detail"] = labels.detail;
  if (labels.content_hash) j["content_hash"] = labels.content_hash->hex();
  if (!labels.scores.empty()) {
    json scores = json::object();
    for (const auto& [d, s] : labels.scores) scores[std::string(cle::to_string(d))] = {{"raw", s.raw}, {"display", s.display}};
    j["labels"] = std::move(scores);
  }
  return j;
}

void check_labels(const ContentLabels& labels) {
  const bool complete = labels.scores.size() == kAllDimensions.size();
  if (labels.status == LabelStatus::Scored ? !complete : !labels.scores.empty()) {
    throw std::invalid_argument("scores must be present exactly when status is scored");
  }
}

ContentLabels labels_from_json(const json& j) {
  try {
    ContentLabels out;
    out.url = j.at("url").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    if (status == "scored") {
      out.status = LabelStatus::Scored;
    } else if (status == "invalid") {
      out.status = LabelStatus::Invalid;
    } else if (status == "error") {
      out.status = LabelStatus::Error;
    } else {
      throw std::invalid_argument("unknown label status " + status);
    }
    out.model_version = j.value("model_version", std::string());
    out.scored_at = from_epoch_ms(j.at("scored_at_ms").get<std::int64_t>());
    out.reason = j.value("reason", std::string());
    out.detail = j.value("detail", std::string());
    if (j.contains("content_hash")) out.content_hash = ContentHash::from_hex(j.at("content_hash").get<std::string>());
    if (j.contains("labels")) {
      for (const auto& [name, s] : j.at("labels").items()) {
        const auto d = dimension_from_string(name);
        if (!d) throw std::invalid_argument("unknown dimension " + name);
        out.scores[*d] = DimensionScore{s.at("raw").get<double>(), s.at("display").get<double>()};
      }
    }
    check_labels(out);
    return out;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed labels: ") + e.what());
  }
}

}  // namespace cle::score
