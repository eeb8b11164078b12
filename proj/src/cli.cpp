#include <CLI11.hpp>

#include "cle/learn/trainer.hpp"
#include "cle/serve.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <ostream>
#include <pthread.h>

namespace cle::serve {

namespace {

using nlohmann::json;

struct Paths {
  std::string bundle;
  std::string db;
  std::string ratings;
  std::string out;
  std::string pages;
  std::string stopwords;
  std::string markers;
};

score::ScoreContext make_context(const Paths& p) {
  score::ScoreContext ctx;
  if (!p.stopwords.empty()) ctx.stoplist = extract::load_stoplist(p.stopwords);
  if (!p.markers.empty()) ctx.markers = extract::load_markers(p.markers);
  return ctx;
}

// Pages come from a JSON-lines file of {"url": ..., "html": ...} when given,
// otherwise they are fetched live.
learn::PageSource make_page_source(const Paths& p, const score::ScoreContext& ctx, std::ostream& err) {
  if (!p.pages.empty()) {
    std::ifstream in(p.pages);
    if (!in) throw std::runtime_error("cannot open pages file " + p.pages);
    auto html = std::make_shared<std::map<std::string, std::string>>();
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      (*html)[j.at("url").get<std::string>()] = j.at("html").get<std::string>();
    }
    return [html, ctx](const std::string& url) -> std::optional<extract::ExtractedDocument> {
      auto it = html->find(url);
      if (it == html->end()) return std::nullopt;
      return extract::extract_html(url, it->second, ctx.markers, ctx.stoplist);
    };
  }
  return [ctx, &err](const std::string& url) -> std::optional<extract::ExtractedDocument> {
    try {
      const auto raw = fetch::fetch_page(url, ctx.fetch);
      return extract::extract_document(url, raw, ctx.markers, ctx.stoplist);
    } catch (const std::exception& e) {
      err << "skipping " << url << ": " << e.what() << '\n';
      return std::nullopt;
    }
  };
}

json report_json(const std::map<Dimension, learn::DimensionReport>& reports) {
  json out = json::object();
  for (const auto& [d, r] : reports) {
    out[std::string(to_string(d))] = {{"pearson_r", r.pearson_r}, {"p_value", r.p_value}, {"n", r.n_test}};
  }
  return out;
}

std::vector<learn::RatingRecord> read_ratings(const std::string& path, std::ostream& err) {
  auto result = learn::ingest_ratings(path);
  for (const auto& d : result.diagnostics) {
    err << path << ": row " << d.row << ": "
        << (d.kind == learn::DiagnosticKind::ParseError ? "parse error" : "invalid") << ": " << d.message << '\n';
  }
  return std::move(result.records);
}

int run_serve(const Paths& p, int port, bool async, std::ostream& out, std::ostream& err) {
  // Handle SIGINT/SIGTERM on a dedicated thread so the server can stop cleanly.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::shared_ptr<store::LabelStore> db;
  if (p.db.empty()) {
    db = std::make_shared<store::InMemoryStore>();
  } else {
    db = std::make_shared<store::SqliteStore>(p.db);
  }
  ServiceConfig config;
  config.mode = async ? Mode::Async : Mode::Sync;
  config.context = make_context(p);
  ScoreService service(db, config);
  if (!p.bundle.empty()) {
    service.load_bundle(std::make_shared<const learn::ModelBundle>(learn::load_bundle(p.bundle)));
  } else {
    err << "no bundle given; serving in degraded mode\n";
  }
  HttpServer server(service);
  const int bound = server.bind("0.0.0.0", port);
  out << json{{"listening", bound}, {"model_version", service.model_version()}}.dump() << std::endl;

  std::thread waiter([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen();
  // listen() returned on its own (error or stop); wake the waiter if needed.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Content labels: score webpages for actionability, knowledge and emotion", "cle"};
  app.require_subcommand(1);
  Paths p;

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP scoring service");
  int port = 8080;
  bool async = false;
  serve_cmd->add_option("--bundle", p.bundle, "Model bundle file")->envname("CLE_BUNDLE_PATH");
  serve_cmd->add_option("--db", p.db, "SQLite store path (in-memory when omitted)")->envname("CLE_DB_PATH");
  serve_cmd->add_option("--port", port, "Listen port (0 picks a free one)")->envname("CLE_PORT");
  auto* sync_flag = serve_cmd->add_flag("--sync", "Score cache misses inline (default)");
  serve_cmd->add_flag("--async", async, "Queue cache misses and answer \"pending\"")->excludes(sync_flag);

  auto* score_cmd = app.add_subcommand("score", "Score URLs and print one JSON line each");
  std::vector<std::string> urls;
  score_cmd->add_option("urls", urls, "URLs to score")->required();
  score_cmd->add_option("--bundle", p.bundle, "Model bundle file")->envname("CLE_BUNDLE_PATH")->required();

  auto* train_cmd = app.add_subcommand("train", "Train a model bundle from ratings");
  bool fast = false;
  std::uint64_t seed = 42;
  int folds = 5;
  std::size_t dim = embed::kFallbackDefaultDim;
  train_cmd->add_option("--ratings", p.ratings, "Ratings CSV")->required();
  train_cmd->add_option("--out", p.out, "Bundle output path")->required();
  train_cmd->add_option("--pages", p.pages, "JSON lines of {url, html}; pages are fetched when omitted");
  train_cmd->add_flag("--fast", fast, "Skip the grid search (200 trees, learning rate 0.1, depth 5)");
  train_cmd->add_option("--seed", seed, "Split seed");
  train_cmd->add_option("--folds", folds, "Cross-validation folds")->check(CLI::Range(2, 100));
  train_cmd->add_option("--dim", dim, "Hashed embedding width")->check(CLI::Range(1, 1 << 20));

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a bundle against ratings");
  eval_cmd->add_option("--ratings", p.ratings, "Ratings CSV")->required();
  eval_cmd->add_option("--bundle", p.bundle, "Model bundle file")->envname("CLE_BUNDLE_PATH")->required();
  eval_cmd->add_option("--pages", p.pages, "JSON lines of {url, html}; pages are fetched when omitted");

  auto* refresh_cmd = app.add_subcommand("refresh", "Re-score stale store entries");
  refresh_cmd->add_option("--db", p.db, "SQLite store path")->envname("CLE_DB_PATH")->required();
  refresh_cmd->add_option("--bundle", p.bundle, "Model bundle file")->envname("CLE_BUNDLE_PATH")->required();

  auto* export_cmd = app.add_subcommand("export", "Dump the store");
  bool as_json = false;
  export_cmd->add_option("--db", p.db, "SQLite store path")->envname("CLE_DB_PATH")->required();
  export_cmd->add_flag("--json", as_json, "One JSON object per line")->required();

  for (auto* cmd : {serve_cmd, score_cmd, train_cmd, eval_cmd, refresh_cmd}) {
    cmd->add_option("--stopwords", p.stopwords, "Stop-word list, one per line");
    cmd->add_option("--markers", p.markers, "Validity marker file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*serve_cmd) return run_serve(p, port, async, out, err);

    if (*score_cmd) {
      const auto bundle = std::make_shared<const learn::ModelBundle>(learn::load_bundle(p.bundle));
      const score::Scorer scorer(bundle);
      const auto ctx = make_context(p);
      for (const auto& url : urls) {
        const auto labels = score::score_url(url, ctx, scorer);
        auto line = to_json(to_result(labels));
        line["model_version"] = labels.model_version;
        out << line.dump() << '\n';
      }
      return 0;
    }

    if (*train_cmd) {
      const auto ratings = read_ratings(p.ratings, err);
      const auto ctx = make_context(p);
      learn::TrainOptions options;
      options.fast = fast;
      options.split_seed = seed;
      options.folds = folds;
      const auto bundle = learn::train_all(ratings, make_page_source(p, ctx, err),
                                           embed::EmbeddingProviderSpec::fallback(dim), options);
      learn::save_bundle(bundle, p.out);
      json params = json::object();
      for (const auto& [d, bp] : bundle.best_params) params[std::string(to_string(d))] = bp.describe();
      out << json{{"bundle", p.out}, {"version", bundle.version}, {"best_params", params},
                  {"report", report_json(bundle.report.dimensions)}}
                 .dump()
          << '\n';
      return 0;
    }

    if (*eval_cmd) {
      const auto ratings = read_ratings(p.ratings, err);
      const auto bundle = learn::load_bundle(p.bundle);
      const auto ctx = make_context(p);
      out << json{{"version", bundle.version},
                  {"report", report_json(learn::evaluate_bundle(bundle, ratings, make_page_source(p, ctx, err)))}}
                 .dump()
          << '\n';
      return 0;
    }

    if (*refresh_cmd) {
      store::SqliteStore db(p.db);
      const auto bundle = std::make_shared<const learn::ModelBundle>(learn::load_bundle(p.bundle));
      const score::Scorer scorer(bundle);
      const auto ctx = make_context(p);
      const auto n = store::refresh_stale(db, now_utc(), [&](const std::string& url) {
        return score::score_url(url, ctx, scorer);
      });
      out << json{{"refreshed", n}, {"entries", db.count()}}.dump() << '\n';
      return 0;
    }

    if (*export_cmd) {
      if (!std::filesystem::exists(p.db)) throw std::runtime_error("no store at " + p.db);
      store::SqliteStore db(p.db);
      store::export_jsonl(db, out);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace cle::serve
