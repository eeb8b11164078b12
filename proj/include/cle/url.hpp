#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace cle {

struct ParsedUrl {
  std::string scheme;  // lowercase, "http" or "https"
  std::string host;    // lowercase
  std::optional<int> port;
  std::string path;    // begins with '/', never empty
  std::string query;   // without the leading '?'
  std::string fragment;

  int effective_port() const { return port.value_or(scheme == "https" ? 443 : 80); }
  /// "scheme://host[:port]" with default ports omitted.
  std::string origin() const;
  /// Path plus "?query" when a query is present.
  std::string target() const;
};

/// Parses an absolute http(s) URL. Returns nullopt for anything else.
std::optional<ParsedUrl> parse_http_url(std::string_view url);

/// Lowercases scheme and host, strips default ports and the fragment.
/// Path and query are left untouched. Unparseable input is returned as-is.
std::string canonicalize_url(std::string_view url);

/// Resolves a redirect Location header against the URL that produced it.
std::optional<std::string> resolve_location(const ParsedUrl& base, std::string_view location);

}  // namespace cle
