#include <httplib.h>

#include "cle/fetch.hpp"
#include "cle/url.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace cle::fetch {

namespace {

bool is_redirect(int status) {
  return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

std::string lower_trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void apply_proxy(httplib::Client& client) {
  const char* proxy = std::getenv("HTTP_PROXY");
  if (proxy == nullptr || *proxy == '\0') proxy = std::getenv("http_proxy");
  if (proxy == nullptr || *proxy == '\0') return;
  std::string spec = proxy;
  if (spec.find("://") == std::string::npos) spec = "http://" + spec;
  if (auto parsed = parse_http_url(spec)) {
    client.set_proxy(parsed->host, parsed->effective_port());
  }
}

}  // namespace

void FetchConfig::validate() const {
  if (timeout.count() <= 0) throw std::invalid_argument("fetch timeout must be positive");
  if (max_body_bytes < 1024) throw std::invalid_argument("max_body_bytes must be at least 1024");
  if (max_redirects < 0) throw std::invalid_argument("max_redirects must be non-negative");
}

FetchConfig default_fetch_config() {
  FetchConfig config;
  config.user_agent = std::string(kDefaultUserAgent);
  config.extra_headers = {
      {"Accept", "text/html,application/xhtml+xml,application/xml;q=0.9,*/*;q=0.8"},
      {"Accept-Language", "en-US,en;q=0.9"},
  };
  config.timeout = std::chrono::seconds(15);
  config.max_body_bytes = 2 * 1024 * 1024;
  config.max_redirects = 5;
  return config;
}

std::string_view to_string(FetchErrorKind kind) {
  switch (kind) {
    case FetchErrorKind::InvalidUrl: return "InvalidUrl";
    case FetchErrorKind::Network: return "Network";
    case FetchErrorKind::HttpStatus: return "HttpStatus";
    case FetchErrorKind::NotHtml: return "NotHtml";
    case FetchErrorKind::TooManyRedirects: return "TooManyRedirects";
  }
  return "Unknown";
}

bool is_html_content_type(std::string_view content_type) {
  const auto media = lower_trim(content_type.substr(0, content_type.find(';')));
  return media == "text/html" || media == "application/xhtml+xml";
}

RawFetchResult fetch_page(std::string_view url, const FetchConfig& config) {
  config.validate();
  RawFetchResult result;
  result.url = canonicalize_url(url);
  std::string current(url);

  httplib::Headers headers;
  headers.emplace("User-Agent", config.user_agent);
  for (const auto& [name, value] : config.extra_headers) headers.emplace(name, value);

  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);

  for (int hop = 0;; ++hop) {
    const auto parsed = parse_http_url(current);
    if (!parsed) throw FetchError(FetchErrorKind::InvalidUrl, "not an absolute http(s) URL: " + current);

    httplib::Client client(parsed->scheme + "://" + parsed->host + ":" + std::to_string(parsed->effective_port()));
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_follow_location(false);
    apply_proxy(client);

    int status = 0;
    std::string content_type;
    std::string location;
    std::string body;
    bool truncated = false;
    bool aborted = false;

    auto res = client.Get(
        parsed->target(), headers,
        [&](const httplib::Response& response) {
          status = response.status;
          content_type = response.get_header_value("Content-Type");
          location = response.get_header_value("Location");
          const bool keep_reading = status < 300 && (content_type.empty() || is_html_content_type(content_type));
          aborted = !keep_reading;
          return keep_reading;
        },
        [&](const char* data, std::size_t len) {
          const std::size_t room = config.max_body_bytes - body.size();
          if (len > room) {
            body.append(data, room);
            truncated = true;
            aborted = true;
            return false;
          }
          body.append(data, len);
          return true;
        });

    if (!res && !(aborted && res.error() == httplib::Error::Canceled)) {
      throw FetchError(FetchErrorKind::Network, current + ": " + httplib::to_string(res.error()));
    }

    if (is_redirect(status) && !location.empty()) {
      if (hop >= config.max_redirects) {
        throw FetchError(FetchErrorKind::TooManyRedirects,
                         "more than " + std::to_string(config.max_redirects) + " redirects from " + result.url);
      }
      auto next = resolve_location(*parsed, location);
      if (!next) throw FetchError(FetchErrorKind::InvalidUrl, "bad redirect target: " + location);
      current = *next;
      continue;
    }
    if (status >= 400) {
      throw FetchError(FetchErrorKind::HttpStatus, "HTTP " + std::to_string(status) + " from " + current, status);
    }
    if (!content_type.empty() && !is_html_content_type(content_type)) {
      throw FetchError(FetchErrorKind::NotHtml, "unsupported content type '" + content_type + "' from " + current);
    }

    result.final_url = current;
    result.status_code = status;
    result.content_type = content_type;
    result.body = std::move(body);
    result.truncated = truncated;
    result.fetched_at = now_utc();
    return result;
  }
}

}  // namespace cle::fetch
