#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "semgate/embedding.hpp"

namespace semgate {

using NodeId = std::uint64_t;

/// Tuning knobs for the graph. `level_lambda` defaults to 1/ln(m) when left
/// at 0. The seed fixes level draws, so two indexes built with the same
/// params and insertion order are identical.
struct HnswParams {
  std::size_t m = 16;               // max neighbors per node per upper level
  std::size_t ef_construction = 200; // candidate beam width during insert
  std::size_t ef_search = 64;        // candidate beam width during query
  double level_lambda = 0.0;         // level assignment scale; 0 -> 1/ln(m)
  std::uint64_t seed = 42;
};

struct SearchHit {
  NodeId node;
  double similarity; // in [-1, 1]
};

struct IndexStats {
  std::size_t live_count = 0;
  std::size_t tombstone_count = 0;
  int max_level = 0;
  std::uint64_t distance_count = 0; // total similarity evaluations so far
};

/// Hierarchical Navigable Small World graph over unit embeddings, metric =
/// cosine similarity (plain dot on unit vectors; higher is closer).
///
/// Layer 0 holds every node; upper layers thin out geometrically and act as
/// an express lane for the greedy descent. Insertion connects a node to the
/// top-M most similar candidates found by a beam search of width
/// ef_construction; neighbor lists over capacity are pruned by keeping the
/// highest-similarity edges. Deletions are tombstones: the node stops
/// appearing in results but keeps serving as a graph waypoint until
/// rebuild() compacts the index.
///
/// Results are ordered by similarity descending, ties by ascending NodeId —
/// everywhere, including the internal beams, which makes searches
/// deterministic.
///
/// Concurrency: many concurrent readers (search/stats) or one writer
/// (insert/remove/rebuild). Not internally synchronized; the owning store
/// enforces the contract. The distance counter is atomic so readers may
/// share it.
class HnswIndex {
public:
  explicit HnswIndex(std::size_t dim, HnswParams params = {});

  HnswIndex(HnswIndex &&) noexcept;
  HnswIndex &operator=(HnswIndex &&) noexcept;
  HnswIndex(const HnswIndex &) = delete;
  HnswIndex &operator=(const HnswIndex &) = delete;

  /// Inserts a vector, returns its dense NodeId. Throws DimensionMismatch.
  NodeId insert(const UnitEmbedding &v);

  /// Approximate top-k live nodes for q. Greedy descent through the upper
  /// layers, then a best-first expansion at level 0 with beam width
  /// max(ef_search, k) + tombstone_count (the over-fetch keeps tombstones
  /// from starving results). Empty index yields an empty list.
  std::vector<SearchHit> search(const UnitEmbedding &q, std::size_t k) const;

  /// Exact top-k by full scan over live nodes; the O(n) correctness oracle.
  std::vector<SearchHit> brute_force_search(const UnitEmbedding &q,
                                            std::size_t k) const;

  /// Tombstones a node. Returns false if unknown or already tombstoned.
  /// Graph edges are untouched until rebuild().
  bool remove(NodeId node);

  struct RebuildResult {
    HnswIndex index;
    std::vector<std::pair<NodeId, NodeId>> remap; // old id -> new id, ascending
  };

  /// Fresh index containing exactly the live nodes, reinserted in NodeId
  /// order with the same params and a deterministically derived seed.
  RebuildResult rebuild() const;

  IndexStats stats() const;

  std::size_t dim() const noexcept { return dim_; }
  const HnswParams &params() const noexcept { return params_; }
  /// Total nodes ever inserted, tombstones included.
  std::size_t size() const noexcept { return node_levels_.size(); }
  bool is_live(NodeId node) const;
  std::optional<NodeId> entry_point() const noexcept { return entry_point_; }

  // Read-only structure access for audits and tests.
  int node_level(NodeId node) const;
  const std::vector<NodeId> &neighbors(NodeId node, int level) const;
  std::span<const float> vector_of(NodeId node) const;

private:
  struct Candidate {
    double similarity;
    NodeId node;
  };
  // "Better" = more similar, ties to the smaller id.
  static bool better(const Candidate &a, const Candidate &b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.node < b.node;
  }

  double similarity_to(std::span<const float> q, NodeId node) const;
  int draw_level();
  NodeId greedy_closest(std::span<const float> q, NodeId start,
                        int level) const;
  std::vector<Candidate> search_layer(std::span<const float> q, NodeId entry,
                                      std::size_t ef, int level) const;
  void prune_neighbors(NodeId node, int level, std::size_t cap);

  std::size_t dim_;
  HnswParams params_;
  std::mt19937_64 rng_;

  std::optional<NodeId> entry_point_;
  int max_level_ = 0;

  std::vector<float> vectors_;   // flat, node i at [i*dim, (i+1)*dim)
  std::vector<int> node_levels_; // top level of each node
  std::vector<std::vector<std::vector<NodeId>>> links_; // [node][level]
  std::vector<std::uint8_t> live_;
  std::size_t live_count_ = 0;

  mutable std::atomic<std::uint64_t> distance_count_{0};
};

} // namespace semgate
