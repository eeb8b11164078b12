#pragma once

#include "cle/clock.hpp"
#include "cle/learn/bundle.hpp"
#include "cle/score.hpp"
#include "cle/store.hpp"

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace httplib {
class Server;
}

namespace cle::serve {

/// Largest batch accepted by POST /v1/scores (about two result pages).
inline constexpr std::size_t kMaxBatch = 20;

enum class Mode { Sync, Async };

struct ServiceConfig {
  Mode mode = Mode::Sync;
  /// Upper bound on origin fetches in flight across all requests.
  std::size_t max_concurrent_fetches = 8;
  /// Fetch timeout cap for one URL scored inline.
  std::chrono::milliseconds per_url_budget{10000};
  std::size_t async_workers = 2;
  score::ScoreContext context;
};

/// Error that maps onto an HTTP status.
class ServeError : public std::runtime_error {
 public:
  ServeError(int http_status, const std::string& message) : std::runtime_error(message), http_status_(http_status) {}
  int http_status() const noexcept { return http_status_; }

 private:
  int http_status_;
};

struct ScoreQuery {
  std::vector<std::string> urls;

  /// Parses {"urls": [...]} with 1 to kMaxBatch strings; ServeError(400) otherwise.
  static ScoreQuery parse(std::string_view body);
};

enum class ResultStatus { Scored, Invalid, Error, Pending };

std::string_view to_string(ResultStatus status);

struct ScoreResult {
  std::string url;
  ResultStatus status = ResultStatus::Pending;
  std::string reason;
  std::string detail;
  std::map<Dimension, score::DimensionScore> scores;
};

struct ScoreResponse {
  std::vector<ScoreResult> results;  // one per queried URL, same order
  std::string model_version;

  nlohmann::json to_json() const;
};

ScoreResult to_result(const score::ContentLabels& labels);
nlohmann::json to_json(const ScoreResult& result);

/// Caps concurrent origin fetches.
class FetchLimiter {
 public:
  explicit FetchLimiter(std::size_t slots);
  class Slot {
   public:
    explicit Slot(FetchLimiter& owner) : owner_(owner) { owner_.sem_.acquire(); }
    ~Slot() { owner_.sem_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    FetchLimiter& owner_;
  };

 private:
  std::counting_semaphore<4096> sem_;
};

/// Cache-first scoring service behind the HTTP API.
class ScoreService {
 public:
  ScoreService(std::shared_ptr<store::LabelStore> store, ServiceConfig config, Clock clock = now_utc);
  ~ScoreService();
  ScoreService(const ScoreService&) = delete;
  ScoreService& operator=(const ScoreService&) = delete;

  void load_bundle(std::shared_ptr<const learn::ModelBundle> bundle);
  bool has_bundle() const;
  std::string model_version() const;

  /// Fresh cache hits are returned as stored. Misses and stale entries are
  /// scored inline (Sync) or queued and reported "pending" (Async).
  /// ServeError(503) without a bundle.
  ScoreResponse handle_scores(const ScoreQuery& query);
  nlohmann::json handle_health() const;

  /// Scores one URL now and stores the result.
  score::ContentLabels score_and_store(const std::string& url);

  /// Blocks until the async queue is empty and idle (tests, shutdown).
  void drain();

  const store::LabelStore& store() const { return *store_; }

 private:
  std::shared_ptr<const score::Scorer> scorer() const;
  void enqueue(const std::string& url);
  void worker_loop(std::stop_token stop);

  std::shared_ptr<store::LabelStore> store_;
  ServiceConfig config_;
  Clock clock_;
  FetchLimiter limiter_;
  Timestamp started_at_;

  mutable std::mutex scorer_mutex_;
  std::shared_ptr<const score::Scorer> scorer_;

  std::mutex queue_mutex_;
  std::condition_variable_any queue_cv_;
  std::condition_variable idle_cv_;
  std::deque<std::string> queue_;
  std::set<std::string> queued_;
  std::size_t busy_ = 0;
  std::vector<std::jthread> workers_;
};

/// HTTP/1.1 JSON front-end: POST /v1/scores, GET /v1/health, CORS enabled.
class HttpServer {
 public:
  explicit HttpServer(ScoreService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port. Throws std::runtime_error.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks.
  void listen();
  /// bind + listen on a background thread.
  int start(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

/// Operator command line: serve, score, train, eval, refresh, export.
/// Returns 0 on success, 1 on operational error, 2 on usage error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cle::serve
