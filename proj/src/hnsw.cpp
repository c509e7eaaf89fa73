#include "semgate/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

#include "semgate/errors.hpp"

namespace semgate {

namespace {

// splitmix64; derives the seed of a rebuilt index from its parent's.
std::uint64_t derive_seed(std::uint64_t seed) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

HnswIndex::HnswIndex(std::size_t dim, HnswParams params)
    : dim_(dim), params_(params), rng_(params.seed) {
  if (dim_ == 0) {
    throw std::invalid_argument("hnsw: dim must be positive");
  }
  if (params_.m == 0 || params_.ef_construction < params_.m ||
      params_.ef_search == 0) {
    throw std::invalid_argument("hnsw: invalid params (need ef_construction "
                                ">= m >= 1, ef_search >= 1)");
  }
  if (params_.level_lambda <= 0.0) {
    params_.level_lambda = 1.0 / std::log(static_cast<double>(params_.m));
  }
}

HnswIndex::HnswIndex(HnswIndex &&other) noexcept
    : dim_(other.dim_), params_(other.params_), rng_(other.rng_),
      entry_point_(other.entry_point_), max_level_(other.max_level_),
      vectors_(std::move(other.vectors_)),
      node_levels_(std::move(other.node_levels_)),
      links_(std::move(other.links_)), live_(std::move(other.live_)),
      live_count_(other.live_count_),
      distance_count_(other.distance_count_.load()) {}

HnswIndex &HnswIndex::operator=(HnswIndex &&other) noexcept {
  if (this != &other) {
    dim_ = other.dim_;
    params_ = other.params_;
    rng_ = other.rng_;
    entry_point_ = other.entry_point_;
    max_level_ = other.max_level_;
    vectors_ = std::move(other.vectors_);
    node_levels_ = std::move(other.node_levels_);
    links_ = std::move(other.links_);
    live_ = std::move(other.live_);
    live_count_ = other.live_count_;
    distance_count_.store(other.distance_count_.load());
  }
  return *this;
}

double HnswIndex::similarity_to(std::span<const float> q, NodeId node) const {
  distance_count_.fetch_add(1, std::memory_order_relaxed);
  return detail::dot_raw(q, {&vectors_[node * dim_], dim_});
}

int HnswIndex::draw_level() {
  // u in (0, 1]; floor(-ln(u) * lambda) is the standard geometric draw.
  const double u =
      (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  return static_cast<int>(-std::log(u) * params_.level_lambda);
}

NodeId HnswIndex::greedy_closest(std::span<const float> q, NodeId start,
                                 int level) const {
  NodeId cur = start;
  double cur_sim = similarity_to(q, cur);
  bool improved = true;
  while (improved) {
    improved = false;
    for (NodeId nb : links_[cur][level]) {
      const double s = similarity_to(q, nb);
      if (s > cur_sim) {
        cur_sim = s;
        cur = nb;
        improved = true;
      }
    }
  }
  return cur;
}

std::vector<HnswIndex::Candidate>
HnswIndex::search_layer(std::span<const float> q, NodeId entry, std::size_t ef,
                        int level) const {
  // Best-first beam search. `frontier` pops the most similar unexpanded
  // candidate; `found` keeps the ef best seen so far with the worst on top.
  const auto frontier_cmp = [](const Candidate &a, const Candidate &b) {
    return better(b, a);
  };
  const auto found_cmp = [](const Candidate &a, const Candidate &b) {
    return better(a, b);
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(frontier_cmp)>
      frontier(frontier_cmp);
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(found_cmp)>
      found(found_cmp);

  std::vector<std::uint8_t> visited(node_levels_.size(), 0);
  visited[entry] = 1;
  const Candidate start{similarity_to(q, entry), entry};
  frontier.push(start);
  found.push(start);

  while (!frontier.empty()) {
    const Candidate cand = frontier.top();
    frontier.pop();
    if (found.size() >= ef && better(found.top(), cand)) {
      break; // every remaining candidate is worse than the current beam
    }
    for (NodeId nb : links_[cand.node][level]) {
      if (visited[nb]) continue;
      visited[nb] = 1;
      const Candidate next{similarity_to(q, nb), nb};
      if (found.size() < ef || better(next, found.top())) {
        frontier.push(next);
        found.push(next);
        if (found.size() > ef) found.pop();
      }
    }
  }

  std::vector<Candidate> out;
  out.reserve(found.size());
  while (!found.empty()) {
    out.push_back(found.top());
    found.pop();
  }
  std::reverse(out.begin(), out.end()); // best first
  return out;
}

void HnswIndex::prune_neighbors(NodeId node, int level, std::size_t cap) {
  auto &adj = links_[node][level];
  if (adj.size() <= cap) return;

  const std::span<const float> self{&vectors_[node * dim_], dim_};
  std::vector<Candidate> scored;
  scored.reserve(adj.size());
  for (NodeId nb : adj) {
    scored.push_back({similarity_to(self, nb), nb});
  }
  std::sort(scored.begin(), scored.end(), better);

  std::vector<NodeId> dropped(scored.size() - cap);
  for (std::size_t i = cap; i < scored.size(); ++i) {
    dropped[i - cap] = scored[i].node;
  }
  scored.resize(cap);

  adj.clear();
  for (const Candidate &c : scored) adj.push_back(c.node);

  // Keep adjacency symmetric: a dropped edge disappears from both ends.
  for (NodeId d : dropped) {
    auto &back = links_[d][level];
    back.erase(std::remove(back.begin(), back.end(), node), back.end());
  }
}

NodeId HnswIndex::insert(const UnitEmbedding &v) {
  if (v.dim() != dim_) {
    throw DimensionMismatch("hnsw insert: dim " + std::to_string(v.dim()) +
                            " into index of dim " + std::to_string(dim_));
  }

  const NodeId id = node_levels_.size();
  const int level = draw_level();

  vectors_.insert(vectors_.end(), v.values().begin(), v.values().end());
  node_levels_.push_back(level);
  links_.emplace_back(static_cast<std::size_t>(level) + 1);
  live_.push_back(1);
  ++live_count_;

  if (!entry_point_.has_value()) {
    entry_point_ = id;
    max_level_ = level;
    return id;
  }

  const std::span<const float> q = v.values();
  NodeId cur = *entry_point_;
  for (int l = max_level_; l > level; --l) {
    cur = greedy_closest(q, cur, l);
  }

  for (int l = std::min(level, max_level_); l >= 0; --l) {
    const auto candidates = search_layer(q, cur, params_.ef_construction, l);
    const std::size_t cap = (l == 0) ? 2 * params_.m : params_.m;
    const std::size_t connect = std::min(params_.m, candidates.size());
    for (std::size_t i = 0; i < connect; ++i) {
      const NodeId nb = candidates[i].node;
      links_[id][l].push_back(nb);
      links_[nb][l].push_back(id);
      if (links_[nb][l].size() > cap) {
        prune_neighbors(nb, l, cap);
      }
    }
    if (!candidates.empty()) cur = candidates.front().node;
  }

  if (level > max_level_) {
    entry_point_ = id;
    max_level_ = level;
  }
  return id;
}

std::vector<SearchHit> HnswIndex::search(const UnitEmbedding &q,
                                         std::size_t k) const {
  if (q.dim() != dim_) {
    throw DimensionMismatch("hnsw search: query dim " +
                            std::to_string(q.dim()) + " vs index dim " +
                            std::to_string(dim_));
  }
  if (!entry_point_.has_value() || live_count_ == 0 || k == 0) {
    return {};
  }

  const std::span<const float> qs = q.values();
  NodeId cur = *entry_point_;
  for (int l = max_level_; l > 0; --l) {
    cur = greedy_closest(qs, cur, l);
  }

  const std::size_t tombstones = node_levels_.size() - live_count_;
  const std::size_t ef = std::max(params_.ef_search, k) + tombstones;
  const auto candidates = search_layer(qs, cur, ef, 0);

  std::vector<SearchHit> hits;
  hits.reserve(k);
  for (const Candidate &c : candidates) {
    if (!live_[c.node]) continue;
    hits.push_back({c.node, c.similarity});
    if (hits.size() == k) break;
  }
  return hits;
}

std::vector<SearchHit> HnswIndex::brute_force_search(const UnitEmbedding &q,
                                                     std::size_t k) const {
  if (q.dim() != dim_) {
    throw DimensionMismatch("hnsw brute force: query dim " +
                            std::to_string(q.dim()) + " vs index dim " +
                            std::to_string(dim_));
  }
  const std::span<const float> qs = q.values();
  std::vector<Candidate> all;
  all.reserve(live_count_);
  for (NodeId id = 0; id < node_levels_.size(); ++id) {
    if (!live_[id]) continue;
    all.push_back({similarity_to(qs, id), id});
  }
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + take, all.end(), better);

  std::vector<SearchHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    hits.push_back({all[i].node, all[i].similarity});
  }
  return hits;
}

bool HnswIndex::remove(NodeId node) {
  if (node >= node_levels_.size() || !live_[node]) {
    return false;
  }
  live_[node] = 0;
  --live_count_;
  if (live_count_ == 0) {
    // Tombstoned nodes stay in the graph but are unreachable for results;
    // the next insert starts a fresh entry point.
    entry_point_.reset();
    max_level_ = 0;
  }
  return true;
}

HnswIndex::RebuildResult HnswIndex::rebuild() const {
  HnswParams next = params_;
  next.seed = derive_seed(params_.seed);
  RebuildResult result{HnswIndex(dim_, next), {}};
  result.remap.reserve(live_count_);
  for (NodeId id = 0; id < node_levels_.size(); ++id) {
    if (!live_[id]) continue;
    std::vector<float> values(vectors_.begin() + id * dim_,
                              vectors_.begin() + (id + 1) * dim_);
    const NodeId fresh = result.index.insert(UnitEmbedding(std::move(values)));
    result.remap.emplace_back(id, fresh);
  }
  return result;
}

IndexStats HnswIndex::stats() const {
  return IndexStats{
      .live_count = live_count_,
      .tombstone_count = node_levels_.size() - live_count_,
      .max_level = entry_point_.has_value() ? max_level_ : 0,
      .distance_count = distance_count_.load(std::memory_order_relaxed),
  };
}

bool HnswIndex::is_live(NodeId node) const {
  return node < live_.size() && live_[node] != 0;
}

int HnswIndex::node_level(NodeId node) const {
  if (node >= node_levels_.size()) {
    throw std::out_of_range("hnsw: unknown node");
  }
  return node_levels_[node];
}

const std::vector<NodeId> &HnswIndex::neighbors(NodeId node, int level) const {
  if (node >= node_levels_.size() || level < 0 ||
      level > node_levels_[node]) {
    throw std::out_of_range("hnsw: no adjacency at that node/level");
  }
  return links_[node][level];
}

std::span<const float> HnswIndex::vector_of(NodeId node) const {
  if (node >= node_levels_.size()) {
    throw std::out_of_range("hnsw: unknown node");
  }
  return {&vectors_[node * dim_], dim_};
}

} // namespace semgate
