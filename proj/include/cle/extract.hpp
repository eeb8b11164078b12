#pragma once

#include "cle/fetch.hpp"
#include "cle/hash.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cle::extract {

/// Documents with fewer tokens than this (after stop-word removal) are not scored.
inline constexpr std::size_t kMinTokens = 10;
/// Only this many leading tokens are passed on to the embedder.
inline constexpr std::size_t kMaxTokens = 200;
/// Error markers are only searched for among the first tokens of the raw text.
inline constexpr std::size_t kErrorWindowTokens = 30;
/// Popup text wins when there is at least one popup marker per this many tokens.
inline constexpr std::size_t kTokensPerPopupMarker = 50;

enum class InvalidReason { EmptyDocument, ErrorPage, AntiScraping, PopupText, TooFewWords };

std::string_view to_string(InvalidReason reason);
std::optional<InvalidReason> invalid_reason_from_string(std::string_view s);

class ValidityStatus {
 public:
  static ValidityStatus valid() { return ValidityStatus(); }
  static ValidityStatus invalid(InvalidReason reason) { return ValidityStatus(reason); }

  bool is_valid() const noexcept { return !reason_.has_value(); }
  /// Only meaningful when !is_valid().
  InvalidReason reason() const { return reason_.value(); }
  std::string describe() const { return is_valid() ? "Valid" : std::string(to_string(*reason_)); }

  friend bool operator==(const ValidityStatus&, const ValidityStatus&) = default;

 private:
  ValidityStatus() = default;
  explicit ValidityStatus(InvalidReason reason) : reason_(reason) {}
  std::optional<InvalidReason> reason_;
};

struct MarkerList {
  std::vector<std::string> popup_markers;
  std::vector<std::string> error_markers;
  std::vector<std::string> antiscrape_markers;

  static MarkerList defaults();
  /// Throws std::invalid_argument for empty or non-lowercase entries.
  void validate() const;
};

using StopList = std::unordered_set<std::string>;

/// Fixed English stop-word list, version 1. data/stopwords_en_v1.txt holds the same entries.
const StopList& default_stoplist();

/// Reads a UTF-8 list with one entry per line. Blank lines and lines starting
/// with '#' are skipped; entries are trimmed. Throws std::runtime_error if unreadable.
std::vector<std::string> load_word_list(const std::filesystem::path& path);
StopList load_stoplist(const std::filesystem::path& path);

/// Marker file: one entry per line under "[popup]", "[error]" and "[antiscrape]"
/// section lines. Sections that are absent keep their defaults.
MarkerList load_markers(const std::filesystem::path& path);

struct ParsedHtml {
  std::vector<std::string> headers;
  std::vector<std::string> paragraphs;
};

/// Collects the text of h1-h6 and p elements in document order. Script, style,
/// noscript, template and comment content is dropped; nested markup is flattened;
/// character references are decoded; whitespace runs collapse to one space and
/// empty fragments are omitted. Never throws.
ParsedHtml parse_html(std::string_view html);

/// Keeps letters, digits, whitespace and . , ! ? ' - ; collapses whitespace and trims.
std::string clean_text(std::string_view raw);

/// Splits on whitespace, trims non-alphanumeric characters from token edges and
/// drops tokens whose ASCII-lowercase form is in the stop list.
std::vector<std::string> tokenize_and_remove_stop_words(std::string_view cleaned, const StopList& stoplist);

/// First matching reason in the order EmptyDocument, ErrorPage, AntiScraping,
/// PopupText, TooFewWords; Valid otherwise.
ValidityStatus assess_validity(std::span<const std::string> headers, std::span<const std::string> paragraphs,
                               std::span<const std::string> tokens, const MarkerList& markers);

/// Truncates to the first kMaxTokens tokens.
std::vector<std::string> gate_tokens(std::vector<std::string> tokens);

struct ExtractedDocument {
  std::string url;
  std::vector<std::string> headers;
  std::vector<std::string> paragraphs;
  std::vector<std::string> cleaned_tokens;
  ContentHash content_hash;
  ValidityStatus validity = ValidityStatus::valid();

  friend bool operator==(const ExtractedDocument&, const ExtractedDocument&) = default;
};

/// Headers then paragraphs joined with '\n'; this is what content_hash digests.
std::string raw_extracted_text(std::span<const std::string> headers, std::span<const std::string> paragraphs);

/// Full pipeline over an HTML string.
ExtractedDocument extract_html(std::string_view url, std::string_view html, const MarkerList& markers,
                               const StopList& stoplist);

/// Full pipeline over a fetched page. Requires a 2xx status (std::invalid_argument otherwise).
ExtractedDocument extract_document(std::string_view url, const fetch::RawFetchResult& raw,
                                   const MarkerList& markers, const StopList& stoplist);

}  // namespace cle::extract
