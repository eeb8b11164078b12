// Tolerant HTML scanner that pulls header and paragraph text out of a page.

#include "cle/extract.hpp"
#include "utf8.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <optional>

namespace cle::extract {

namespace {

constexpr std::array<std::string_view, 6> kRawTextElements = {"script", "style", "noscript", "template",
                                                              "textarea", "title"};

// Start (or end) tags that implicitly close an open <p>.
constexpr std::array<std::string_view, 26> kParagraphClosers = {
    "address", "article", "aside",  "blockquote", "body",   "details", "div",   "dl",    "fieldset",
    "figcaption", "figure", "footer", "form",     "header", "hr",      "html",  "li",    "main",
    "menu",    "nav",     "ol",     "pre",        "section", "table",  "td",    "ul"};

struct EntityEntry {
  std::string_view name;
  char32_t code;
};

constexpr std::array<EntityEntry, 22> kNamedEntities = {{
    {"amp", U'&'},      {"lt", U'<'},       {"gt", U'>'},       {"quot", U'"'},     {"apos", U'\''},
    {"nbsp", U' '},     {"ndash", 0x2013},  {"mdash", 0x2014},  {"lsquo", 0x2018},  {"rsquo", 0x2019},
    {"ldquo", 0x201C},  {"rdquo", 0x201D},  {"hellip", 0x2026}, {"copy", 0x00A9},   {"reg", 0x00AE},
    {"trade", 0x2122},  {"eacute", 0x00E9}, {"egrave", 0x00E8}, {"aacute", 0x00E1}, {"uuml", 0x00FC},
    {"ouml", 0x00F6},   {"auml", 0x00E4},
}};

bool contains(auto const& list, std::string_view name) {
  return std::find(list.begin(), list.end(), name) != list.end();
}

bool is_header_tag(std::string_view name) {
  return name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6';
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Case-insensitive search for `needle` (already lowercase) from `from`.
std::size_t ifind(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.empty() || hay.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(hay[i + j])) != needle[j]) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out += text[i++];
      continue;
    }
    const auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out += text[i++];
      continue;
    }
    const std::string_view ref = text.substr(i + 1, semi - i - 1);
    std::optional<char32_t> code;
    if (ref.size() >= 2 && ref[0] == '#') {
      const bool hex = ref[1] == 'x' || ref[1] == 'X';
      const std::string_view digits = ref.substr(hex ? 2 : 1);
      std::uint32_t v = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, hex ? 16 : 10);
      if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) code = v;
    } else {
      for (const auto& e : kNamedEntities) {
        if (e.name == ref) code = e.code;
      }
    }
    if (!code) {
      out += text[i++];
      continue;
    }
    utf8::append(out, *code);
    i = semi + 1;
  }
  return out;
}

std::string normalize_fragment(std::string_view text) {
  const std::string decoded = utf8::sanitize(decode_entities(text));
  std::string out;
  out.reserve(decoded.size());
  bool pending_space = false;
  for (unsigned char c : decoded) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(c);
  }
  return out;
}

class Collector {
 public:
  void open(std::string_view tag) {
    flush();
    tag_ = std::string(tag);
  }
  void close() { flush(); }
  bool collecting() const { return !tag_.empty(); }
  bool in_paragraph() const { return tag_ == "p"; }
  bool in_header() const { return is_header_tag(tag_); }
  void text(std::string_view t) {
    if (collecting()) buffer_.append(t);
  }

  ParsedHtml take() {
    flush();
    return std::move(out_);
  }

 private:
  void flush() {
    if (!tag_.empty()) {
      std::string frag = normalize_fragment(buffer_);
      if (!frag.empty()) (tag_ == "p" ? out_.paragraphs : out_.headers).push_back(std::move(frag));
    }
    tag_.clear();
    buffer_.clear();
  }

  std::string tag_;
  std::string buffer_;
  ParsedHtml out_;
};

// Returns the index just past the closing '>' of a tag starting at `i`, honoring quoted attributes.
std::size_t skip_tag(std::string_view html, std::size_t i, bool& self_closing) {
  char quote = 0;
  self_closing = false;
  for (; i < html.size(); ++i) {
    const char c = html[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      self_closing = i > 0 && html[i - 1] == '/';
      return i + 1;
    }
  }
  return html.size();
}

}  // namespace

ParsedHtml parse_html(std::string_view html) {
  Collector collector;
  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      const auto next = html.find('<', i);
      const auto end = next == std::string_view::npos ? html.size() : next;
      collector.text(html.substr(i, end - i));
      i = end;
      continue;
    }
    if (html.substr(i, 4) == "<!--") {
      const auto end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
      const auto end = html.find('>', i);
      i = end == std::string_view::npos ? html.size() : end + 1;
      continue;
    }
    const bool closing = i + 1 < html.size() && html[i + 1] == '/';
    std::size_t name_start = i + (closing ? 2 : 1);
    std::size_t name_end = name_start;
    while (name_end < html.size() && std::isalnum(static_cast<unsigned char>(html[name_end]))) ++name_end;
    if (name_end == name_start || !std::isalpha(static_cast<unsigned char>(html[name_start]))) {
      // Not a tag; a bare '<' in text.
      collector.text(html.substr(i, 1));
      ++i;
      continue;
    }
    const std::string name = lower(html.substr(name_start, name_end - name_start));
    bool self_closing = false;
    i = skip_tag(html, name_end, self_closing);

    if (closing) {
      if ((name == "p" && collector.in_paragraph()) || (is_header_tag(name) && collector.in_header()) ||
          (collector.in_paragraph() && contains(kParagraphClosers, name))) {
        collector.close();
      }
      continue;
    }

    if (contains(kRawTextElements, name)) {
      if (self_closing) continue;
      const auto end = ifind(html, "</" + name, i);
      if (end == std::string_view::npos) {
        i = html.size();
      } else {
        bool ignored = false;
        i = skip_tag(html, end + 2 + name.size(), ignored);
      }
      continue;
    }
    if (name == "p" || is_header_tag(name)) {
      collector.open(name);
      if (self_closing) collector.close();
      continue;
    }
    if (collector.in_paragraph() && contains(kParagraphClosers, name)) {
      collector.close();
      continue;
    }
    if (name == "br") collector.text(" ");
  }
  return collector.take();
}

}  // namespace cle::extract
