#include <httplib.h>

#include "cle/serve.hpp"

#include <algorithm>
#include <future>
#include <map>

namespace cle::serve {

using nlohmann::json;

ScoreQuery ScoreQuery::parse(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception&) {
    throw ServeError(400, "request body is not JSON");
  }
  if (!doc.is_object() || !doc.contains("urls") || !doc["urls"].is_array()) {
    throw ServeError(400, "expected {\"urls\": [...]}");
  }
  const auto& urls = doc["urls"];
  if (urls.empty()) throw ServeError(400, "urls must not be empty");
  if (urls.size() > kMaxBatch) {
    throw ServeError(400, "at most " + std::to_string(kMaxBatch) + " urls per request, got " +
                              std::to_string(urls.size()));
  }
  ScoreQuery q;
  for (const auto& u : urls) {
    if (!u.is_string()) throw ServeError(400, "urls must be strings");
    q.urls.push_back(u.get<std::string>());
  }
  return q;
}

std::string_view to_string(ResultStatus status) {
  switch (status) {
    case ResultStatus::Scored: return "scored";
    case ResultStatus::Invalid: return "invalid";
    case ResultStatus::Error: return "error";
    case ResultStatus::Pending: return "pending";
  }
  return "error";
}

ScoreResult to_result(const score::ContentLabels& labels) {
  ScoreResult r;
  r.url = labels.url;
  switch (labels.status) {
    case score::LabelStatus::Scored: r.status = ResultStatus::Scored; break;
    case score::LabelStatus::Invalid: r.status = ResultStatus::Invalid; break;
    case score::LabelStatus::Error: r.status = ResultStatus::Error; break;
  }
  r.reason = labels.reason;
  r.detail = labels.detail;
  r.scores = labels.scores;
  return r;
}

json to_json(const ScoreResult& result) {
  json j = {{"url", result.url}, {"status", std::string(to_string(result.status))}};
  if (result.status == ResultStatus::Scored) {
    json labels = json::object();
    for (const auto& [d, s] : result.scores) labels[std::string(to_string(d))] = {{"raw", s.raw}, {"display", s.display}};
    j["labels"] = std::move(labels);
  }
  if (!result.reason.empty()) j["reason"] = result.reason;
  if (!result.detail.empty()) j["detail"] = result.detail;
  return j;
}

json ScoreResponse::to_json() const {
  json items = json::array();
  for (const auto& r : results) items.push_back(serve::to_json(r));
  return {{"model_version", model_version}, {"results", std::move(items)}};
}

FetchLimiter::FetchLimiter(std::size_t slots) : sem_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(slots, 1, 4096))) {}

ScoreService::ScoreService(std::shared_ptr<store::LabelStore> store, ServiceConfig config, Clock clock)
    : store_(std::move(store)),
      config_(std::move(config)),
      clock_(std::move(clock)),
      limiter_(config_.max_concurrent_fetches),
      started_at_(clock_()) {
  config_.context.fetch.timeout = std::min(config_.context.fetch.timeout, config_.per_url_budget);
  if (config_.mode == Mode::Async) {
    for (std::size_t i = 0; i < std::max<std::size_t>(config_.async_workers, 1); ++i) {
      workers_.emplace_back([this](std::stop_token st) { worker_loop(st); });
    }
  }
}

ScoreService::~ScoreService() {
  for (auto& w : workers_) w.request_stop();
  queue_cv_.notify_all();
  workers_.clear();
}

void ScoreService::load_bundle(std::shared_ptr<const learn::ModelBundle> bundle) {
  auto scorer = bundle ? std::make_shared<const score::Scorer>(std::move(bundle)) : nullptr;
  std::lock_guard lock(scorer_mutex_);
  scorer_ = std::move(scorer);
}

std::shared_ptr<const score::Scorer> ScoreService::scorer() const {
  std::lock_guard lock(scorer_mutex_);
  return scorer_;
}

bool ScoreService::has_bundle() const { return scorer() != nullptr; }

std::string ScoreService::model_version() const {
  const auto s = scorer();
  return s ? s->bundle().version : std::string();
}

score::ContentLabels ScoreService::score_and_store(const std::string& url) {
  const auto s = scorer();
  if (!s) throw ServeError(503, "no model bundle loaded");
  score::ContentLabels labels;
  {
    FetchLimiter::Slot slot(limiter_);
    labels = score::score_url(url, config_.context, *s, clock_);
  }
  store_->put(labels);
  return labels;
}

ScoreResponse ScoreService::handle_scores(const ScoreQuery& query) {
  const auto s = scorer();
  if (!s) throw ServeError(503, "no model bundle loaded");
  if (query.urls.empty() || query.urls.size() > kMaxBatch) throw ServeError(400, "batch must hold 1 to 20 urls");

  ScoreResponse response;
  response.model_version = s->bundle().version;
  response.results.resize(query.urls.size());
  const auto now = clock_();

  std::map<std::string, std::shared_future<score::ContentLabels>> inline_jobs;
  std::vector<std::size_t> waiting;
  for (std::size_t i = 0; i < query.urls.size(); ++i) {
    const auto& url = query.urls[i];
    response.results[i].url = url;
    std::optional<store::StoreEntry> entry;
    try {
      entry = store_->get(url);
    } catch (const store::StorageUnavailable& e) {
      response.results[i].status = ResultStatus::Error;
      response.results[i].reason = "StorageUnavailable";
      response.results[i].detail = e.what();
      continue;
    }
    if (entry && !store::needs_refresh(*entry, now) && entry->labels.model_version == response.model_version) {
      response.results[i] = to_result(entry->labels);
      response.results[i].url = url;
      continue;
    }
    if (config_.mode == Mode::Async) {
      enqueue(url);
      response.results[i].status = ResultStatus::Pending;
      continue;
    }
    if (!inline_jobs.contains(url)) {
      inline_jobs[url] = std::async(std::launch::async, [this, url] { return score_and_store(url); }).share();
    }
    waiting.push_back(i);
  }
  for (auto i : waiting) {
    auto& result = response.results[i];
    try {
      result = to_result(inline_jobs.at(result.url).get());
      result.url = query.urls[i];
    } catch (const std::exception& e) {
      result.status = ResultStatus::Error;
      result.reason = "Internal";
      result.detail = e.what();
    }
  }
  return response;
}

json ScoreService::handle_health() const {
  const auto s = scorer();
  json doc = {{"status", s ? "ok" : "degraded"},
              {"model_version", s ? json(s->bundle().version) : json(nullptr)},
              {"mode", config_.mode == Mode::Sync ? "sync" : "async"},
              {"uptime_seconds", std::chrono::duration<double>(clock_() - started_at_).count()}};
  try {
    doc["store_entries"] = store_->count();
  } catch (const store::StorageUnavailable& e) {
    doc["status"] = "degraded";
    doc["store_error"] = e.what();
  }
  return doc;
}

void ScoreService::enqueue(const std::string& url) {
  {
    std::lock_guard lock(queue_mutex_);
    if (!queued_.insert(url).second) return;
    queue_.push_back(url);
  }
  queue_cv_.notify_one();
}

void ScoreService::worker_loop(std::stop_token stop) {
  while (true) {
    std::string url;
    {
      std::unique_lock lock(queue_mutex_);
      if (!queue_cv_.wait(lock, stop, [this] { return !queue_.empty(); })) return;
      url = std::move(queue_.front());
      queue_.pop_front();
      ++busy_;
    }
    try {
      score_and_store(url);
    } catch (const std::exception&) {
      // No bundle or storage failure; the URL is retried on its next query.
    }
    {
      std::lock_guard lock(queue_mutex_);
      queued_.erase(url);
      --busy_;
    }
    idle_cv_.notify_all();
  }
}

void ScoreService::drain() {
  std::unique_lock lock(queue_mutex_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && busy_ == 0; });
}

HttpServer::HttpServer(ScoreService& service) : server_(std::make_unique<httplib::Server>()) {
  auto& svr = *server_;
  svr.set_payload_max_length(1 << 20);
  svr.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  svr.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  svr.Post("/v1/scores", [&service](const httplib::Request& req, httplib::Response& res) {
    try {
      const auto response = service.handle_scores(ScoreQuery::parse(req.body));
      res.set_content(response.to_json().dump(), "application/json");
    } catch (const ServeError& e) {
      res.status = e.http_status();
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });
  svr.Get("/v1/health", [&service](const httplib::Request&, httplib::Response& res) {
    res.set_content(service.handle_health().dump(), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return port_;
}

void HttpServer::listen() { server_->listen_after_bind(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  thread_ = std::thread([this] { listen(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace cle::serve
