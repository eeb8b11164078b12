#pragma once

#include "cle/clock.hpp"
#include "cle/hash.hpp"
#include "cle/score.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

struct sqlite3;

namespace cle::store {

/// Scores are re-computed daily by default.
inline constexpr std::chrono::milliseconds kDefaultTtl = std::chrono::hours(24);

struct StoreEntry {
  std::string url;  // canonical key
  score::ContentLabels labels;
  std::chrono::milliseconds ttl = kDefaultTtl;

  friend bool operator==(const StoreEntry&, const StoreEntry&) = default;
};

class StorageUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Labels keyed by canonical URL. Implementations are safe for concurrent use;
/// put is atomic per key and last write wins.
class LabelStore {
 public:
  virtual ~LabelStore() = default;
  /// Throws std::invalid_argument for labels failing score::check_labels.
  virtual void put(const score::ContentLabels& labels) = 0;
  virtual std::optional<StoreEntry> get(std::string_view url) const = 0;
  virtual std::size_t count() const = 0;
  /// Snapshot of every entry, ordered by key.
  virtual std::vector<StoreEntry> entries() const = 0;
};

class InMemoryStore final : public LabelStore {
 public:
  explicit InMemoryStore(std::chrono::milliseconds ttl = kDefaultTtl) : ttl_(ttl) {}

  void put(const score::ContentLabels& labels) override;
  std::optional<StoreEntry> get(std::string_view url) const override;
  std::size_t count() const override;
  std::vector<StoreEntry> entries() const override;

 private:
  std::chrono::milliseconds ttl_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, StoreEntry> entries_;
};

/// Single-file SQLite store. Labels are kept as JSON text, so every numeric
/// field round-trips at full precision.
class SqliteStore final : public LabelStore {
 public:
  /// Opens or creates the database. Throws StorageUnavailable.
  explicit SqliteStore(const std::filesystem::path& path, std::chrono::milliseconds ttl = kDefaultTtl);
  ~SqliteStore() override;
  SqliteStore(const SqliteStore&) = delete;
  SqliteStore& operator=(const SqliteStore&) = delete;

  void put(const score::ContentLabels& labels) override;
  std::optional<StoreEntry> get(std::string_view url) const override;
  std::size_t count() const override;
  std::vector<StoreEntry> entries() const override;

 private:
  void exec(const char* sql) const;

  sqlite3* db_ = nullptr;
  std::chrono::milliseconds ttl_;
  mutable std::mutex mutex_;
};

/// True when the entry is older than its TTL, or when `current_hash` is given
/// and differs from the stored content hash.
bool needs_refresh(const StoreEntry& entry, Timestamp now, std::optional<ContentHash> current_hash = std::nullopt);

/// Produces fresh labels for a URL; may throw.
using Rescorer = std::function<score::ContentLabels(const std::string& url)>;

/// Re-scores every entry that is stale at `now` and returns how many were
/// re-scored successfully. A rescorer failure stores an Error entry stamped
/// `now` for that URL and the sweep continues.
std::size_t refresh_stale(LabelStore& store, Timestamp now, const Rescorer& rescorer);

/// One JSON object per line: {"key": ..., "ttl_ms": ..., "labels": {...}}.
void export_jsonl(const LabelStore& store, std::ostream& out);

}  // namespace cle::store
