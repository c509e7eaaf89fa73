#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "semgate/clock.hpp"
#include "semgate/embedding.hpp"
#include "semgate/hnsw.hpp"

namespace semgate {

/// One cached question/response pair. `entry_id` equals the NodeId of the
/// embedding inside its partition's index. `ttl_secs == 0` means the entry
/// never expires.
struct CacheEntry {
  std::uint64_t entry_id = 0;
  std::string question;
  std::string response;
  UnitEmbedding embedding;
  std::uint64_t created_at_ms = 0;
  std::uint64_t ttl_secs = 0;

  bool expired_at(std::uint64_t now_ms) const {
    return ttl_secs > 0 && now_ms >= created_at_ms + ttl_secs * 1000;
  }
};

struct ScoredEntry {
  CacheEntry entry;
  double similarity;
};

struct PartitionStats {
  std::uint32_t dim = 0;
  std::size_t entries = 0;
  std::size_t tombstones = 0;
};

struct StoreStats {
  std::vector<PartitionStats> partitions;
  std::size_t total_entries = 0;
  std::size_t total_tombstones = 0;
};

struct StoreConfig {
  std::uint64_t default_ttl_secs = 86'400; // 24h
  HnswParams hnsw;
  /// A partition is rebuilt when tombstones exceed this share of its nodes.
  double rebuild_tombstone_ratio = 0.3;
};

/// In-memory semantic cache, partitioned by embedding dimension. Each
/// partition pairs an HnswIndex with an entry map keyed by NodeId; the two
/// stay in bijection (an index node is live iff its entry is stored).
///
/// Expiry is lazy on read — nearest() filters expired entries out of
/// results — plus an explicit purge_expired() sweep that actually removes
/// them and tombstones their index nodes. Heavily tombstoned partitions are
/// compacted by an index rebuild, which renumbers entry ids densely.
///
/// Thread contract: nearest/stats run concurrently under a shared lock;
/// put/purge/flush/snapshot ops take the store exclusively, so readers
/// never observe torn state and snapshots are consistent.
class SemanticStore {
public:
  SemanticStore(StoreConfig config, ClockPtr clock);

  SemanticStore(SemanticStore &&) noexcept;
  SemanticStore &operator=(SemanticStore &&) noexcept;

  /// Inserts an entry into the partition for embedding.dim (created on
  /// demand). Returns the new entry id. Throws InvalidEntry on empty
  /// question or response.
  std::uint64_t put(const std::string &question, const UnitEmbedding &embedding,
                    const std::string &response,
                    std::optional<std::uint64_t> ttl_secs = std::nullopt);

  /// Top-k unexpired entries of the partition matching q's dimension,
  /// sorted by similarity descending. No partition or no live entries
  /// yields an empty list.
  std::vector<ScoredEntry> nearest(const UnitEmbedding &q,
                                   std::size_t k) const;

  /// Removes every expired entry, tombstoning its index node; rebuilds any
  /// partition whose tombstone ratio is above the configured threshold.
  /// Returns the number of entries removed.
  std::size_t purge_expired();

  /// Empties all partitions. Returns the number of entries dropped.
  std::size_t flush();

  /// Writes a versioned snapshot of all unexpired entries (see README for
  /// the byte layout). Indexes are not serialized; they are rebuilt on
  /// load. Returns bytes written. Throws IoFailure.
  std::uint64_t snapshot_save(const std::string &path) const;

  /// Restores a store from a snapshot, rebuilding each partition's index
  /// deterministically in entry-id order. Throws CorruptSnapshot on a bad
  /// magic/version/checksum or truncation, IoFailure on unreadable input.
  static SemanticStore snapshot_load(const std::string &path,
                                     StoreConfig config, ClockPtr clock);

  StoreStats stats() const;

  const StoreConfig &config() const noexcept { return config_; }
  Clock &clock() const noexcept { return *clock_; }

private:
  struct Partition {
    HnswIndex index;
    std::map<std::uint64_t, CacheEntry> entries;
  };

  void rebuild_partition(Partition &part);
  std::size_t purge_expired_locked();

  StoreConfig config_;
  ClockPtr clock_;
  std::map<std::uint32_t, Partition> partitions_;
  mutable std::shared_mutex mutex_;
};

} // namespace semgate
