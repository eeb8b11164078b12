#include "cle/extract.hpp"
#include "utf8.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace cle::extract {

namespace {

// Generated at configure time from data/stopwords_en_v1.txt.
constexpr std::string_view kDefaultStopWords[] = {
#include "stopwords_en_v1.inc"
};

bool is_letter(char32_t cp) {
  if (cp < 0x80) return std::isalpha(static_cast<int>(cp)) != 0;
  // Latin-1 letters, Latin Extended, Greek, Cyrillic, Hebrew, Arabic and other
  // alphabetic blocks up to General Punctuation; then kana, CJK and Hangul.
  if (cp >= 0xC0 && cp < 0x2000) return cp != 0xD7 && cp != 0xF7 && !(cp >= 0x2B0 && cp < 0x370);
  return (cp >= 0x3040 && cp < 0xA000) || (cp >= 0xAC00 && cp < 0xD7B0);
}

bool is_kept_punct(char32_t cp) {
  return cp == '.' || cp == ',' || cp == '!' || cp == '?' || cp == '\'' || cp == '-';
}

bool is_space(char32_t cp) { return cp == ' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0xA0; }

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string join(std::span<const std::string_view> parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ' ';
    out += parts[i];
  }
  return out;
}

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

std::string_view to_string(InvalidReason reason) {
  switch (reason) {
    case InvalidReason::EmptyDocument: return "EmptyDocument";
    case InvalidReason::ErrorPage: return "ErrorPage";
    case InvalidReason::AntiScraping: return "AntiScraping";
    case InvalidReason::PopupText: return "PopupText";
    case InvalidReason::TooFewWords: return "TooFewWords";
  }
  return "Unknown";
}

std::optional<InvalidReason> invalid_reason_from_string(std::string_view s) {
  for (auto r : {InvalidReason::EmptyDocument, InvalidReason::ErrorPage, InvalidReason::AntiScraping,
                 InvalidReason::PopupText, InvalidReason::TooFewWords}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

MarkerList MarkerList::defaults() {
  return MarkerList{
      .popup_markers = {"cookies", "blocked"},
      .error_markers = {"403", "404", "error"},
      .antiscrape_markers = {"using a security service to protect itself", "triggered the security solution"},
  };
}

void MarkerList::validate() const {
  for (const auto* list : {&popup_markers, &error_markers, &antiscrape_markers}) {
    for (const auto& m : *list) {
      if (m.empty()) throw std::invalid_argument("empty marker");
      if (m != ascii_lower(m)) throw std::invalid_argument("marker must be lowercase: " + m);
    }
  }
}

const StopList& default_stoplist() {
  static const StopList list = [] {
    StopList s;
    for (auto w : kDefaultStopWords) s.emplace(w);
    return s;
  }();
  return list;
}

std::vector<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read word list " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto entry = trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    out.push_back(std::move(entry));
  }
  return out;
}

StopList load_stoplist(const std::filesystem::path& path) {
  StopList out;
  for (auto& w : load_word_list(path)) out.insert(ascii_lower(w));
  return out;
}

MarkerList load_markers(const std::filesystem::path& path) {
  MarkerList out = MarkerList::defaults();
  std::vector<std::string>* section = nullptr;
  bool seen[3] = {false, false, false};
  std::vector<std::string>* lists[3] = {&out.popup_markers, &out.error_markers, &out.antiscrape_markers};
  for (auto& entry : load_word_list(path)) {
    if (entry == "[popup]" || entry == "[error]" || entry == "[antiscrape]") {
      const int idx = entry == "[popup]" ? 0 : entry == "[error]" ? 1 : 2;
      section = lists[idx];
      if (!seen[idx]) section->clear();
      seen[idx] = true;
      continue;
    }
    if (section == nullptr) throw std::runtime_error("marker entry outside a section in " + path.string());
    section->push_back(std::move(entry));
  }
  out.validate();
  return out;
}

std::string clean_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < raw.size();) {
    const char32_t cp = utf8::next(raw, i);
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    const bool keep = is_letter(cp) || (cp < 0x80 && std::isdigit(static_cast<int>(cp))) || is_kept_punct(cp);
    if (!keep) continue;
    if (pending_space) out += ' ';
    pending_space = false;
    utf8::append(out, cp);
  }
  return out;
}

std::vector<std::string> tokenize_and_remove_stop_words(std::string_view cleaned, const StopList& stoplist) {
  // After clean_text every ASCII byte is alnum, whitespace or kept punctuation,
  // and every non-ASCII byte belongs to a letter.
  const auto is_edge_junk = [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && !std::isalnum(u);
  };
  std::vector<std::string> out;
  for (auto tok : split_ws(cleaned)) {
    while (!tok.empty() && is_edge_junk(tok.front())) tok.remove_prefix(1);
    while (!tok.empty() && is_edge_junk(tok.back())) tok.remove_suffix(1);
    if (tok.empty() || stoplist.contains(ascii_lower(tok))) continue;
    out.emplace_back(tok);
  }
  return out;
}

ValidityStatus assess_validity(std::span<const std::string> headers, std::span<const std::string> paragraphs,
                               std::span<const std::string> tokens, const MarkerList& markers) {
  if (headers.empty() && paragraphs.empty()) return ValidityStatus::invalid(InvalidReason::EmptyDocument);

  std::string raw;
  for (const auto& frag : headers) raw.append(frag).push_back(' ');
  for (const auto& frag : paragraphs) raw.append(frag).push_back(' ');
  const std::string lowered = ascii_lower(raw);
  const auto raw_tokens = split_ws(lowered);

  const auto window_len = std::min(raw_tokens.size(), kErrorWindowTokens);
  const std::string window = join(std::span(raw_tokens).first(window_len));
  for (const auto& m : markers.error_markers) {
    if (window.find(m) != std::string::npos) return ValidityStatus::invalid(InvalidReason::ErrorPage);
  }

  const std::string collapsed = join(raw_tokens);
  for (const auto& m : markers.antiscrape_markers) {
    if (collapsed.find(m) != std::string::npos) return ValidityStatus::invalid(InvalidReason::AntiScraping);
  }

  std::size_t popup_hits = 0;
  for (const auto& m : markers.popup_markers) popup_hits += count_occurrences(collapsed, m);
  if (popup_hits > 0 && popup_hits * kTokensPerPopupMarker >= tokens.size()) {
    return ValidityStatus::invalid(InvalidReason::PopupText);
  }

  if (tokens.size() < kMinTokens) return ValidityStatus::invalid(InvalidReason::TooFewWords);
  return ValidityStatus::valid();
}

std::vector<std::string> gate_tokens(std::vector<std::string> tokens) {
  if (tokens.size() > kMaxTokens) tokens.resize(kMaxTokens);
  return tokens;
}

std::string raw_extracted_text(std::span<const std::string> headers, std::span<const std::string> paragraphs) {
  std::string out;
  bool first = true;
  for (auto list : {headers, paragraphs}) {
    for (const auto& frag : list) {
      if (!first) out += '\n';
      out += frag;
      first = false;
    }
  }
  return out;
}

ExtractedDocument extract_html(std::string_view url, std::string_view html, const MarkerList& markers,
                               const StopList& stoplist) {
  auto parsed = parse_html(html);
  ExtractedDocument doc;
  doc.url = std::string(url);
  doc.content_hash = ContentHash::of(raw_extracted_text(parsed.headers, parsed.paragraphs));

  std::string joined;
  for (auto list : {&parsed.headers, &parsed.paragraphs}) {
    for (const auto& frag : *list) {
      auto cleaned = clean_text(frag);
      if (cleaned.empty()) continue;
      if (!joined.empty()) joined += ' ';
      joined += cleaned;
    }
  }
  auto tokens = tokenize_and_remove_stop_words(joined, stoplist);
  doc.validity = assess_validity(parsed.headers, parsed.paragraphs, tokens, markers);
  doc.cleaned_tokens = doc.validity.is_valid() ? gate_tokens(std::move(tokens)) : std::move(tokens);
  doc.headers = std::move(parsed.headers);
  doc.paragraphs = std::move(parsed.paragraphs);
  return doc;
}

ExtractedDocument extract_document(std::string_view url, const fetch::RawFetchResult& raw,
                                   const MarkerList& markers, const StopList& stoplist) {
  if (raw.status_code < 200 || raw.status_code >= 300) {
    throw std::invalid_argument("extract_document needs a 2xx response, got " + std::to_string(raw.status_code));
  }
  return extract_html(url, raw.body, markers, stoplist);
}

}  // namespace cle::extract
