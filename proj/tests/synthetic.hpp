#pragma once

#include "cle/extract.hpp"
#include "cle/learn/ratings.hpp"
#include "cle/learn/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace cle::testing {

/// Rating corpus whose targets are planted functions of marker-word frequency.
///
/// Every page is one paragraph of `page_tokens` words. The words "stepwise",
/// "findings", "delightful" and "grieving" occur 0..max_marker times each; the
/// rest is filler. A rating is 1 + 5 * count / max_marker plus Gaussian noise,
/// rounded and clamped to 1..6, for actionability, knowledge, positive and
/// negative emotion respectively.
struct SyntheticCorpus {
  std::vector<learn::RatingRecord> ratings;
  std::map<std::string, std::string> html;

  learn::PageSource source() const {
    auto pages = std::make_shared<std::map<std::string, std::string>>(html);
    return [pages](const std::string& url) -> std::optional<extract::ExtractedDocument> {
      auto it = pages->find(url);
      if (it == pages->end()) return std::nullopt;
      return extract::extract_html(url, it->second, extract::MarkerList::defaults(), extract::default_stoplist());
    };
  }
};

struct SyntheticOptions {
  int participants = 120;
  int pages_per_participant = 5;
  int page_pool = 300;
  int page_tokens = 80;
  int max_marker = 16;
  double noise_sigma = 0.5;
  std::uint64_t seed = 7;
};

inline const std::vector<std::string>& marker_words() {
  static const std::vector<std::string> words = {"stepwise", "findings", "delightful", "grieving"};
  return words;
}

inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {
      "river",  "window", "garden", "pencil", "orange",  "bridge", "castle", "ladder", "mirror", "pepper",
      "rocket", "saddle", "tunnel", "violin", "walnut",  "yellow", "anchor", "basket", "candle", "dragon",
      "engine", "forest", "guitar", "harbor", "island",  "jacket", "kettle", "lantern", "meadow", "needle"};
  return words;
}

inline std::string page_url(int page) { return "https://synthetic.test/page/" + std::to_string(page); }

inline SyntheticCorpus make_synthetic(const SyntheticOptions& o = {}) {
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<int> marker_count(0, o.max_marker);
  std::uniform_int_distribution<std::size_t> filler(0, filler_words().size() - 1);
  std::normal_distribution<double> noise(0.0, o.noise_sigma);

  SyntheticCorpus corpus;
  std::vector<std::array<int, 4>> counts(o.page_pool);
  for (int page = 0; page < o.page_pool; ++page) {
    std::vector<std::string> words;
    for (int m = 0; m < 4; ++m) {
      counts[page][m] = marker_count(rng);
      for (int i = 0; i < counts[page][m]; ++i) words.push_back(marker_words()[m]);
    }
    while (static_cast<int>(words.size()) < o.page_tokens) words.push_back(filler_words()[filler(rng)]);
    std::shuffle(words.begin(), words.end(), rng);
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    corpus.html[page_url(page)] = "<html><body><p>" + text + "</p></body></html>";
  }

  auto rate = [&](int count) {
    const double v = 1.0 + 5.0 * count / o.max_marker + noise(rng);
    return std::clamp(static_cast<int>(std::lround(v)), 1, 6);
  };
  std::uniform_int_distribution<int> pick(0, o.page_pool - 1);
  for (int p = 0; p < o.participants; ++p) {
    const std::string pid = "participant-" + std::to_string(p);
    std::vector<int> seen;
    while (static_cast<int>(seen.size()) < o.pages_per_participant) {
      const int page = pick(rng);
      if (std::find(seen.begin(), seen.end(), page) != seen.end()) continue;
      seen.push_back(page);
      learn::RatingRecord r;
      r.participant_id = pid;
      r.url = page_url(page);
      r.actionability = rate(counts[page][0]);
      r.knowledge = rate(counts[page][1]);
      r.positive_emotion = rate(counts[page][2]);
      r.negative_emotion = rate(counts[page][3]);
      corpus.ratings.push_back(r);
    }
  }
  return corpus;
}

}  // namespace cle::testing
