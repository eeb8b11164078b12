#pragma once

#include "cle/clock.hpp"

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cle::fetch {

/// Outbound request policy. The user agent and extra headers make requests look
/// like they come from a desktop browser, which gets past naive scraper filters.
struct FetchConfig {
  std::string user_agent;
  std::vector<std::pair<std::string, std::string>> extra_headers;
  std::chrono::milliseconds timeout{15000};
  std::size_t max_body_bytes = 2 * 1024 * 1024;
  int max_redirects = 5;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;

  friend bool operator==(const FetchConfig&, const FetchConfig&) = default;
};

/// Version tag of the user agent shipped in default_fetch_config().
inline constexpr std::string_view kDefaultUserAgentVersion = "cle-ua-1";

inline constexpr std::string_view kDefaultUserAgent =
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) "
    "Chrome/124.0.0.0 Safari/537.36";

/// Desktop Chrome user agent, 15 s timeout, 2 MiB body cap, 5 redirects.
FetchConfig default_fetch_config();

struct RawFetchResult {
  std::string url;
  std::string final_url;
  int status_code = 0;
  std::string content_type;
  std::string body;
  Timestamp fetched_at{};
  bool truncated = false;
};

enum class FetchErrorKind { InvalidUrl, Network, HttpStatus, NotHtml, TooManyRedirects };

std::string_view to_string(FetchErrorKind kind);

class FetchError : public std::runtime_error {
 public:
  FetchError(FetchErrorKind kind, const std::string& message, int status_code = 0)
      : std::runtime_error(message), kind_(kind), status_code_(status_code) {}

  FetchErrorKind kind() const noexcept { return kind_; }
  /// HTTP status for HttpStatus errors, 0 otherwise.
  int status_code() const noexcept { return status_code_; }

 private:
  FetchErrorKind kind_;
  int status_code_;
};

/// True for text/html and application/xhtml+xml, ignoring parameters and case.
bool is_html_content_type(std::string_view content_type);

/// GETs `url`, following up to config.max_redirects redirects, and returns at
/// most config.max_body_bytes of the body. Honors HTTP_PROXY / http_proxy.
/// Throws FetchError.
RawFetchResult fetch_page(std::string_view url, const FetchConfig& config);

}  // namespace cle::fetch
