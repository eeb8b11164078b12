#include "cle/clock.hpp"
#include "cle/hash.hpp"
#include "cle/url.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace cle {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

ContentHash ContentHash::from_hex(std::string_view hex) {
  std::uint64_t v = 0;
  if (hex.size() != 16) throw std::invalid_argument("content hash must be 16 hex digits");
  auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
  if (ec != std::errc() || ptr != hex.data() + hex.size()) {
    throw std::invalid_argument("malformed content hash: " + std::string(hex));
  }
  return ContentHash(v);
}

std::string ContentHash::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value_));
  return std::string(buf, 16);
}

std::string to_iso8601(Timestamp t) {
  const auto secs = std::chrono::floor<std::chrono::seconds>(t);
  const auto ms = (t - secs).count();
  const std::time_t tt = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

std::string ParsedUrl::origin() const {
  std::string out = scheme + "://" + host;
  if (port && *port != (scheme == "https" ? 443 : 80)) out += ":" + std::to_string(*port);
  return out;
}

std::string ParsedUrl::target() const { return query.empty() ? path : path + "?" + query; }

std::optional<ParsedUrl> parse_http_url(std::string_view url) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  ParsedUrl out;
  out.scheme = to_lower(url.substr(0, sep));
  if (out.scheme != "http" && out.scheme != "https") return std::nullopt;

  std::string_view rest = url.substr(sep + 3);
  const auto auth_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, auth_end);
  rest = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  std::string_view host = authority;
  if (!authority.empty() && authority.front() == '[') {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = authority.substr(0, close + 1);
    authority = authority.substr(close + 1);
    if (!authority.empty() && authority.front() != ':') return std::nullopt;
  } else if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    authority = authority.substr(colon);
  } else {
    authority = {};
  }
  if (!authority.empty()) {
    std::string_view digits = authority.substr(1);
    if (!digits.empty()) {
      int port = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
      if (ec != std::errc() || ptr != digits.data() + digits.size() || port <= 0 || port > 65535) {
        return std::nullopt;
      }
      out.port = port;
    }
  }
  if (host.empty()) return std::nullopt;
  for (char c : host) {
    if (std::isspace(static_cast<unsigned char>(c))) return std::nullopt;
  }
  out.host = to_lower(host);

  if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
    out.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  if (const auto q = rest.find('?'); q != std::string_view::npos) {
    out.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  out.path = rest.empty() ? "/" : std::string(rest);
  return out;
}

std::string canonicalize_url(std::string_view url) {
  auto parsed = parse_http_url(url);
  if (!parsed) return std::string(url);
  std::string out = parsed->origin() + parsed->path;
  if (!parsed->query.empty()) out += "?" + parsed->query;
  return out;
}

std::optional<std::string> resolve_location(const ParsedUrl& base, std::string_view location) {
  if (location.empty()) return std::nullopt;
  if (location.find("://") != std::string_view::npos) {
    if (!parse_http_url(location)) return std::nullopt;
    return std::string(location);
  }
  if (location.substr(0, 2) == "//") return base.scheme + ":" + std::string(location);
  if (location.front() == '/') return base.origin() + std::string(location);
  if (location.front() == '?') return base.origin() + base.path + std::string(location);
  const auto slash = base.path.rfind('/');
  return base.origin() + base.path.substr(0, slash + 1) + std::string(location);
}

}  // namespace cle
