#include "kgeval/ann.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "kgeval/binio.hpp"
#include "kgeval/rng.hpp"

namespace kgeval {

const char* metric_name(Metric m) { return m == Metric::Cosine ? "cosine" : "l2"; }

double vector_distance(std::span<const float> a, std::span<const float> b, Metric metric) {
  if (a.size() != b.size())
    throw ValidationError("vector dimension mismatch: " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
  if (metric == Metric::L2) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
      sum += d * d;
    }
    return std::sqrt(sum);
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return na == nb ? 0.0 : 1.0;
  const double sim = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
  return 1.0 - sim;
}

std::vector<Neighbor> brute_force_knn(const EmbeddingSet& set, std::span<const float> query,
                                      size_t k, Metric metric) {
  const size_t n = set.count();
  std::vector<Neighbor> all;
  all.reserve(n);
  for (size_t i = 0; i < n; ++i)
    all.push_back({static_cast<EntityId>(i), vector_distance(query, set.vec(i), metric)});
  const size_t keep = std::min(k, n);
  std::partial_sort(all.begin(), all.begin() + keep, all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
                    });
  all.resize(keep);
  return all;
}

HnswIndex HnswIndex::build(const EmbeddingSet& set, const BuildParams& params) {
  if (set.count() == 0) throw ValidationError("cannot build an index over an empty set");
  if (params.M < 2) throw ConfigError("HNSW M must be >= 2");

  HnswIndex index;
  index.params_ = params;
  index.dim_ = set.dim;
  index.n_ = set.count();
  index.data_ = set.vectors;
  index.links_.resize(index.n_);

  const double ml = 1.0 / std::log(static_cast<double>(params.M));
  Rng rng(mix_seed(params.seed, 0xA22ull));
  for (uint32_t id = 0; id < index.n_; ++id) {
    double u = rng.uniform();
    if (u <= 0.0) u = 1e-18;
    const int level = static_cast<int>(-std::log(u) * ml);
    index.insert(id, level);
  }
  return index;
}

uint32_t HnswIndex::greedy_descend(std::span<const float> query, uint32_t start,
                                   int level) const {
  uint32_t cur = start;
  double cur_dist = dist(query, cur);
  bool improved = true;
  while (improved) {
    improved = false;
    for (uint32_t nb : links_[cur][level]) {
      const double d = dist(query, nb);
      if (d < cur_dist || (d == cur_dist && nb < cur)) {
        cur = nb;
        cur_dist = d;
        improved = true;
      }
    }
  }
  return cur;
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(std::span<const float> query,
                                                          std::span<const Candidate> entries,
                                                          size_t ef, int level,
                                                          std::vector<char>& visited) const {
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> candidates;
  std::priority_queue<Candidate> results;  // max-heap: worst on top

  for (const Candidate& e : entries) {
    if (visited[e.id]) continue;
    visited[e.id] = 1;
    candidates.push(e);
    results.push(e);
    if (results.size() > ef) results.pop();
  }

  while (!candidates.empty()) {
    const Candidate c = candidates.top();
    candidates.pop();
    if (results.size() >= ef && results.top() < c) break;
    for (uint32_t nb : links_[c.id][level]) {
      if (visited[nb]) continue;
      visited[nb] = 1;
      const Candidate cand{dist(query, nb), nb};
      if (results.size() < ef || cand < results.top()) {
        candidates.push(cand);
        results.push(cand);
        if (results.size() > ef) results.pop();
      }
    }
  }

  std::vector<Candidate> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::reverse(out.begin(), out.end());  // ascending (distance, id)
  return out;
}

std::vector<uint32_t> HnswIndex::select_neighbors(std::vector<Candidate> candidates,
                                                  size_t m) const {
  std::sort(candidates.begin(), candidates.end());
  std::vector<uint32_t> result;
  std::vector<Candidate> discarded;
  // Relative-neighborhood heuristic; pruned candidates refill remaining slots
  // to keep the layer graph well connected.
  for (const Candidate& c : candidates) {
    if (result.size() >= m) break;
    bool keep = true;
    for (uint32_t r : result) {
      if (vector_distance(point(c.id), point(r), params_.metric) < c.distance) {
        keep = false;
        break;
      }
    }
    if (keep)
      result.push_back(c.id);
    else
      discarded.push_back(c);
  }
  for (const Candidate& c : discarded) {
    if (result.size() >= m) break;
    result.push_back(c.id);
  }
  return result;
}

void HnswIndex::insert(uint32_t id, int level) {
  links_[id].assign(level + 1, {});
  const auto query = point(id);

  if (max_level_ < 0) {
    entry_ = id;
    max_level_ = level;
    return;
  }

  std::vector<char> visited(n_, 0);
  Candidate ep{dist(query, entry_), entry_};

  for (int lc = max_level_; lc > level; --lc) {
    const uint32_t best = greedy_descend(query, ep.id, lc);
    ep = {dist(query, best), best};
  }

  std::vector<Candidate> entries{ep};
  for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
    std::fill(visited.begin(), visited.end(), 0);
    std::vector<Candidate> found =
        search_layer(query, entries, params_.ef_construction, lc, visited);
    std::vector<uint32_t> neighbors = select_neighbors(found, params_.M);

    for (uint32_t nb : neighbors) {
      links_[id][lc].push_back(nb);
      auto& back = links_[nb][lc];
      back.push_back(id);
      if (back.size() > max_links(lc)) {
        std::vector<Candidate> cands;
        cands.reserve(back.size());
        const auto nb_point = point(nb);
        for (uint32_t x : back)
          cands.push_back({vector_distance(nb_point, point(x), params_.metric), x});
        back = select_neighbors(std::move(cands), max_links(lc));
      }
    }
    entries = std::move(found);
  }

  if (level > max_level_) {
    entry_ = id;
    max_level_ = level;
  }
}

std::vector<Neighbor> HnswIndex::knn(std::span<const float> query, size_t k,
                                     size_t ef_search) const {
  if (query.size() != dim_) throw ValidationError("query dimension mismatch");
  if (k == 0) throw ConfigError("k must be >= 1");
  if (n_ == 0) return {};

  uint32_t ep = entry_;
  for (int lc = max_level_; lc >= 1; --lc) ep = greedy_descend(query, ep, lc);

  const size_t ef = std::max(ef_search, k);
  std::vector<char> visited(n_, 0);
  const std::vector<Candidate> entries{{dist(query, ep), ep}};
  std::vector<Candidate> found = search_layer(query, entries, ef, 0, visited);

  std::vector<Neighbor> out;
  out.reserve(std::min(k, found.size()));
  for (size_t i = 0; i < found.size() && i < k; ++i)
    out.push_back({found[i].id, found[i].distance});
  return out;
}

void HnswIndex::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  write_magic(os, "KGAI1");
  write_le<uint8_t>(os, static_cast<uint8_t>(params_.metric));
  write_le<uint32_t>(os, dim_);
  write_le<uint64_t>(os, n_);
  write_le<uint64_t>(os, params_.M);
  write_le<uint64_t>(os, params_.ef_construction);
  write_le<uint64_t>(os, params_.seed);
  write_le<uint32_t>(os, entry_);
  write_le<int32_t>(os, max_level_);
  for (const auto& node : links_) {
    write_le<uint32_t>(os, static_cast<uint32_t>(node.size()));
    for (const auto& level : node) {
      write_le<uint32_t>(os, static_cast<uint32_t>(level.size()));
      for (uint32_t nb : level) write_le<uint32_t>(os, nb);
    }
  }
  if (!os) throw IoError("write failed for " + path);
}

HnswIndex HnswIndex::load(const std::string& path, const EmbeddingSet& set) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  expect_magic(is, "KGAI1", "index file");

  HnswIndex index;
  index.params_.metric = static_cast<Metric>(read_le<uint8_t>(is));
  index.dim_ = read_le<uint32_t>(is);
  index.n_ = read_le<uint64_t>(is);
  index.params_.M = read_le<uint64_t>(is);
  index.params_.ef_construction = read_le<uint64_t>(is);
  index.params_.seed = read_le<uint64_t>(is);
  index.entry_ = read_le<uint32_t>(is);
  index.max_level_ = read_le<int32_t>(is);

  if (index.dim_ != set.dim || index.n_ != set.count())
    throw ValidationError(path + ": index does not match the embedding set");
  index.data_ = set.vectors;

  index.links_.resize(index.n_);
  for (auto& node : index.links_) {
    node.resize(read_le<uint32_t>(is));
    for (auto& level : node) {
      level.resize(read_le<uint32_t>(is));
      for (uint32_t& nb : level) nb = read_le<uint32_t>(is);
    }
  }
  return index;
}

}  // namespace kgeval
