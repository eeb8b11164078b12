#include "cle/store.hpp"
#include "cle/url.hpp"

#include <sqlite3.h>

#include <mutex>
#include <ostream>

namespace cle::store {

using nlohmann::json;

void InMemoryStore::put(const score::ContentLabels& labels) {
  score::check_labels(labels);
  auto key = canonicalize_url(labels.url);
  std::unique_lock lock(mutex_);
  entries_[key] = StoreEntry{key, labels, ttl_};
}

std::optional<StoreEntry> InMemoryStore::get(std::string_view url) const {
  const auto key = canonicalize_url(url);
  std::shared_lock lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

std::size_t InMemoryStore::count() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<StoreEntry> InMemoryStore::entries() const {
  std::shared_lock lock(mutex_);
  std::vector<StoreEntry> out;
  out.reserve(entries_.size());
  for (const auto& [key, entry] : entries_) out.push_back(entry);
  return out;
}

namespace {

// Finalizes the wrapped statement on scope exit.
class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw StorageUnavailable(std::string("sqlite prepare failed: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  void bind(int idx, std::string_view text) {
    check(sqlite3_bind_text(stmt_, idx, text.data(), static_cast<int>(text.size()), SQLITE_TRANSIENT));
  }
  void bind(int idx, std::int64_t v) { check(sqlite3_bind_int64(stmt_, idx, v)); }

  // True while rows remain.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw StorageUnavailable(std::string("sqlite step failed: ") + sqlite3_errmsg(db_));
  }

  std::string text(int col) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string();
  }
  std::int64_t int64(int col) const { return sqlite3_column_int64(stmt_, col); }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw StorageUnavailable(std::string("sqlite bind failed: ") + sqlite3_errmsg(db_));
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

StoreEntry entry_from_row(const Statement& st) {
  try {
    return StoreEntry{st.text(0), score::labels_from_json(json::parse(st.text(1))),
                      std::chrono::milliseconds(st.int64(2))};
  } catch (const std::exception& e) {
    throw StorageUnavailable(std::string("corrupt store row: ") + e.what());
  }
}

}  // namespace

SqliteStore::SqliteStore(const std::filesystem::path& path, std::chrono::milliseconds ttl) : ttl_(ttl) {
  const int rc = sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                                 nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw StorageUnavailable("cannot open store " + path.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA journal_mode=WAL;");
  exec("CREATE TABLE IF NOT EXISTS labels ("
       " url TEXT PRIMARY KEY,"
       " labels_json TEXT NOT NULL,"
       " ttl_ms INTEGER NOT NULL,"
       " scored_at_ms INTEGER NOT NULL)");
}

SqliteStore::~SqliteStore() { sqlite3_close(db_); }

void SqliteStore::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw StorageUnavailable("sqlite: " + msg);
  }
}

void SqliteStore::put(const score::ContentLabels& labels) {
  score::check_labels(labels);
  const auto key = canonicalize_url(labels.url);
  const auto body = score::to_json(labels).dump();
  std::lock_guard lock(mutex_);
  Statement st(db_,
               "INSERT INTO labels (url, labels_json, ttl_ms, scored_at_ms) VALUES (?1, ?2, ?3, ?4) "
               "ON CONFLICT(url) DO UPDATE SET labels_json = excluded.labels_json, ttl_ms = excluded.ttl_ms, "
               "scored_at_ms = excluded.scored_at_ms");
  st.bind(1, key);
  st.bind(2, body);
  st.bind(3, static_cast<std::int64_t>(ttl_.count()));
  st.bind(4, to_epoch_ms(labels.scored_at));
  st.step();
}

std::optional<StoreEntry> SqliteStore::get(std::string_view url) const {
  const auto key = canonicalize_url(url);
  std::lock_guard lock(mutex_);
  Statement st(db_, "SELECT url, labels_json, ttl_ms FROM labels WHERE url = ?1");
  st.bind(1, key);
  if (!st.step()) return std::nullopt;
  return entry_from_row(st);
}

std::size_t SqliteStore::count() const {
  std::lock_guard lock(mutex_);
  Statement st(db_, "SELECT COUNT(*) FROM labels");
  st.step();
  return static_cast<std::size_t>(st.int64(0));
}

std::vector<StoreEntry> SqliteStore::entries() const {
  std::lock_guard lock(mutex_);
  Statement st(db_, "SELECT url, labels_json, ttl_ms FROM labels ORDER BY url");
  std::vector<StoreEntry> out;
  while (st.step()) out.push_back(entry_from_row(st));
  return out;
}

bool needs_refresh(const StoreEntry& entry, Timestamp now, std::optional<ContentHash> current_hash) {
  if (now - entry.labels.scored_at > entry.ttl) return true;
  return current_hash.has_value() && entry.labels.content_hash != current_hash;
}

std::size_t refresh_stale(LabelStore& store, Timestamp now, const Rescorer& rescorer) {
  std::size_t refreshed = 0;
  for (const auto& entry : store.entries()) {
    if (!needs_refresh(entry, now)) continue;
    // Rescore the URL the labels were produced for; the key is its canonical form.
    const std::string url = entry.labels.url.empty() ? entry.url : entry.labels.url;
    try {
      store.put(rescorer(url));
      ++refreshed;
    } catch (const StorageUnavailable&) {
      throw;
    } catch (const std::exception& e) {
      score::ContentLabels failed;
      failed.url = url;
      failed.status = score::LabelStatus::Error;
      failed.reason = "RefreshFailed";
      failed.detail = e.what();
      failed.model_version = entry.labels.model_version;
      failed.scored_at = now;
      store.put(failed);
    }
  }
  return refreshed;
}

void export_jsonl(const LabelStore& store, std::ostream& out) {
  for (const auto& e : store.entries()) {
    out << json{{"key", e.url}, {"ttl_ms", e.ttl.count()}, {"labels", score::to_json(e.labels)}}.dump() << '\n';
  }
}

}  // namespace cle::store
