#include "semgate/store.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <mutex>

#include <zlib.h>

#include "semgate/errors.hpp"

namespace semgate {

SemanticStore::SemanticStore(StoreConfig config, ClockPtr clock)
    : config_(std::move(config)), clock_(std::move(clock)) {}

SemanticStore::SemanticStore(SemanticStore &&other) noexcept
    : config_(std::move(other.config_)), clock_(std::move(other.clock_)),
      partitions_(std::move(other.partitions_)) {}

SemanticStore &SemanticStore::operator=(SemanticStore &&other) noexcept {
  if (this != &other) {
    std::unique_lock lock(mutex_);
    config_ = std::move(other.config_);
    clock_ = std::move(other.clock_);
    partitions_ = std::move(other.partitions_);
  }
  return *this;
}

std::uint64_t SemanticStore::put(const std::string &question,
                                 const UnitEmbedding &embedding,
                                 const std::string &response,
                                 std::optional<std::uint64_t> ttl_secs) {
  if (question.empty() || response.empty()) {
    throw InvalidEntry("put: question and response must be non-empty");
  }
  std::unique_lock lock(mutex_);
  const auto dim = static_cast<std::uint32_t>(embedding.dim());
  auto it = partitions_.find(dim);
  if (it == partitions_.end()) {
    it = partitions_
             .emplace(dim, Partition{HnswIndex(embedding.dim(), config_.hnsw),
                                     {}})
             .first;
  }
  Partition &part = it->second;
  const NodeId id = part.index.insert(embedding);
  part.entries.emplace(
      id, CacheEntry{id, question, response, embedding, clock_->wall_ms(),
                     ttl_secs.value_or(config_.default_ttl_secs)});
  return id;
}

std::vector<ScoredEntry> SemanticStore::nearest(const UnitEmbedding &q,
                                                std::size_t k) const {
  std::shared_lock lock(mutex_);
  const auto it = partitions_.find(static_cast<std::uint32_t>(q.dim()));
  if (it == partitions_.end() || k == 0) {
    return {};
  }
  const Partition &part = it->second;
  const std::uint64_t now = clock_->wall_ms();

  // Expired entries are filtered lazily here and left for purge_expired()
  // to remove. Widen the fetch when they crowd out live results.
  std::size_t want = k;
  const std::size_t live = part.index.stats().live_count;
  std::vector<ScoredEntry> out;
  while (true) {
    out.clear();
    const auto hits = part.index.search(q, want);
    for (const SearchHit &hit : hits) {
      const auto entry_it = part.entries.find(hit.node);
      if (entry_it == part.entries.end()) continue;
      if (entry_it->second.expired_at(now)) continue;
      out.push_back({entry_it->second, hit.similarity});
      if (out.size() == k) break;
    }
    if (out.size() == k || hits.size() < want || want >= live) break;
    want = std::min(live, want * 2);
  }
  return out;
}

std::size_t SemanticStore::purge_expired_locked() {
  const std::uint64_t now = clock_->wall_ms();
  std::size_t removed = 0;
  for (auto &[dim, part] : partitions_) {
    std::vector<std::uint64_t> expired;
    for (const auto &[id, entry] : part.entries) {
      if (entry.expired_at(now)) expired.push_back(id);
    }
    for (std::uint64_t id : expired) {
      part.index.remove(id);
      part.entries.erase(id);
      ++removed;
    }
    const auto s = part.index.stats();
    const std::size_t total = s.live_count + s.tombstone_count;
    if (total > 0 && static_cast<double>(s.tombstone_count) /
                             static_cast<double>(total) >
                         config_.rebuild_tombstone_ratio) {
      rebuild_partition(part);
    }
  }
  return removed;
}

std::size_t SemanticStore::purge_expired() {
  std::unique_lock lock(mutex_);
  return purge_expired_locked();
}

void SemanticStore::rebuild_partition(Partition &part) {
  auto result = part.index.rebuild();
  std::map<std::uint64_t, CacheEntry> renumbered;
  for (const auto &[old_id, new_id] : result.remap) {
    auto node = part.entries.extract(old_id);
    if (node.empty()) continue;
    node.key() = new_id;
    node.mapped().entry_id = new_id;
    renumbered.insert(std::move(node));
  }
  part.entries = std::move(renumbered);
  part.index = std::move(result.index);
}

std::size_t SemanticStore::flush() {
  std::unique_lock lock(mutex_);
  std::size_t dropped = 0;
  for (const auto &[dim, part] : partitions_) {
    dropped += part.entries.size();
  }
  partitions_.clear();
  return dropped;
}

StoreStats SemanticStore::stats() const {
  std::shared_lock lock(mutex_);
  StoreStats out;
  for (const auto &[dim, part] : partitions_) {
    const auto s = part.index.stats();
    out.partitions.push_back({dim, part.entries.size(), s.tombstone_count});
    out.total_entries += part.entries.size();
    out.total_tombstones += s.tombstone_count;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Snapshot format (all integers little-endian):
//   magic "SGC1" | version u8 (0x01) | partition count u32
//   per partition: dim u32 | entry count u64
//     per entry: entry_id u64 | created_at_ms u64 | ttl_secs u64
//                | question len u32 + bytes | response len u32 + bytes
//                | dim x float32
//   crc32 (IEEE) of all preceding bytes, u32
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'G', 'C', '1'};
constexpr std::uint8_t kVersion = 0x01;

void append_bytes(std::string &buf, const void *data, std::size_t n) {
  buf.append(static_cast<const char *>(data), n);
}

template <typename T> void append_le(std::string &buf, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<char>((value >> (8 * i)) & 0xffU));
  }
}

void append_f32(std::string &buf, float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  append_le(buf, bits);
}

class Reader {
public:
  explicit Reader(const std::string &bytes) : bytes_(bytes) {}

  template <typename T> T read_le() {
    static_assert(std::is_unsigned_v<T>);
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i]))
               << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  float read_f32() {
    const std::uint32_t bits = read_le<std::uint32_t>();
    float value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
  }

  std::string read_string(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }

private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw CorruptSnapshot("snapshot truncated");
    }
  }
  const std::string &bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const std::string &bytes, std::size_t length) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef *>(bytes.data()),
              static_cast<uInt>(length)));
}

} // namespace

std::uint64_t SemanticStore::snapshot_save(const std::string &path) const {
  std::shared_lock lock(mutex_);
  const std::uint64_t now = clock_->wall_ms();

  std::string buf;
  append_bytes(buf, kMagic, sizeof(kMagic));
  buf.push_back(static_cast<char>(kVersion));
  append_le(buf, static_cast<std::uint32_t>(partitions_.size()));

  for (const auto &[dim, part] : partitions_) {
    std::uint64_t kept = 0;
    for (const auto &[id, entry] : part.entries) {
      if (!entry.expired_at(now)) ++kept;
    }
    append_le(buf, dim);
    append_le(buf, kept);
    for (const auto &[id, entry] : part.entries) {
      if (entry.expired_at(now)) continue;
      append_le(buf, entry.entry_id);
      append_le(buf, entry.created_at_ms);
      append_le(buf, entry.ttl_secs);
      append_le(buf, static_cast<std::uint32_t>(entry.question.size()));
      append_bytes(buf, entry.question.data(), entry.question.size());
      append_le(buf, static_cast<std::uint32_t>(entry.response.size()));
      append_bytes(buf, entry.response.data(), entry.response.size());
      for (float v : entry.embedding.values()) append_f32(buf, v);
    }
  }
  append_le(buf, crc32_of(buf, buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoFailure("snapshot_save: cannot open " + path);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) {
    throw IoFailure("snapshot_save: write failed for " + path);
  }
  return buf.size();
}

SemanticStore SemanticStore::snapshot_load(const std::string &path,
                                           StoreConfig config, ClockPtr clock) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoFailure("snapshot_load: cannot open " + path);
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());

  if (bytes.size() < sizeof(kMagic) + 1 + 4 + 4) {
    throw CorruptSnapshot("snapshot too short");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CorruptSnapshot("bad snapshot magic");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kVersion) {
    throw CorruptSnapshot("unsupported snapshot version");
  }

  const std::size_t body_len = bytes.size() - 4;
  std::uint32_t stored_crc = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    stored_crc |= static_cast<std::uint32_t>(
                      static_cast<unsigned char>(bytes[body_len + i]))
                  << (8 * i);
  }
  if (crc32_of(bytes, body_len) != stored_crc) {
    throw CorruptSnapshot("snapshot checksum mismatch");
  }

  SemanticStore store(std::move(config), std::move(clock));
  Reader reader(bytes);
  reader.read_string(sizeof(kMagic)); // magic
  reader.read_le<std::uint8_t>();     // version
  const auto partition_count = reader.read_le<std::uint32_t>();

  try {
    for (std::uint32_t p = 0; p < partition_count; ++p) {
      const auto dim = reader.read_le<std::uint32_t>();
      const auto entry_count = reader.read_le<std::uint64_t>();
      if (dim == 0) {
        throw CorruptSnapshot("snapshot partition with dim 0");
      }
      auto &part =
          store.partitions_
              .emplace(dim, Partition{HnswIndex(dim, store.config_.hnsw), {}})
              .first->second;
      for (std::uint64_t e = 0; e < entry_count; ++e) {
        reader.read_le<std::uint64_t>(); // original entry id; ids are
                                         // reassigned densely on reinsertion
        const auto created_at = reader.read_le<std::uint64_t>();
        const auto ttl = reader.read_le<std::uint64_t>();
        const auto qlen = reader.read_le<std::uint32_t>();
        std::string question = reader.read_string(qlen);
        const auto rlen = reader.read_le<std::uint32_t>();
        std::string response = reader.read_string(rlen);
        std::vector<float> values(dim);
        for (std::uint32_t i = 0; i < dim; ++i) values[i] = reader.read_f32();
        UnitEmbedding embedding{std::move(values)};
        const NodeId id = part.index.insert(embedding);
        part.entries.emplace(id, CacheEntry{id, std::move(question),
                                            std::move(response),
                                            std::move(embedding), created_at,
                                            ttl});
      }
    }
    if (reader.pos() != body_len) {
      throw CorruptSnapshot("snapshot has trailing bytes");
    }
  } catch (const ZeroVector &) {
    throw CorruptSnapshot("snapshot embedding is not unit-norm");
  }
  return store;
}

} // namespace semgate
