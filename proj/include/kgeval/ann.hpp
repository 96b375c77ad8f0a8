#pragma once

#include <span>
#include <string>
#include <vector>

#include "kgeval/embedding.hpp"

namespace kgeval {

enum class Metric : uint8_t { Cosine, L2 };

const char* metric_name(Metric m);

// Distance shared by the HNSW and brute-force paths so both rank identically.
// Cosine distance is 1 - cosine similarity; zero vectors have similarity 0
// against anything except another zero vector.
double vector_distance(std::span<const float> a, std::span<const float> b, Metric metric);

struct Neighbor {
  EntityId id = 0;
  double distance = 0.0;
  bool operator==(const Neighbor&) const = default;
};

// Exact k nearest by linear scan; ascending distance, ties by ascending id.
std::vector<Neighbor> brute_force_knn(const EmbeddingSet& set, std::span<const float> query,
                                      size_t k, Metric metric);

// Hierarchical navigable small-world proximity graph. Build is single-writer
// with insertion order = ascending entity id; queries are const and safe to
// run concurrently.
class HnswIndex {
 public:
  struct BuildParams {
    size_t M = 16;
    size_t ef_construction = 200;
    Metric metric = Metric::Cosine;
    uint64_t seed = 42;
  };

  static HnswIndex build(const EmbeddingSet& set, const BuildParams& params);

  std::vector<Neighbor> knn(std::span<const float> query, size_t k, size_t ef_search) const;

  size_t size() const { return n_; }
  uint32_t dim() const { return dim_; }
  Metric metric() const { return params_.metric; }
  const BuildParams& params() const { return params_; }

  void save(const std::string& path) const;
  // The index file stores only the graph; vectors come from the original set.
  static HnswIndex load(const std::string& path, const EmbeddingSet& set);

 private:
  HnswIndex() = default;

  std::span<const float> point(uint32_t id) const { return {data_.data() + id * dim_, dim_}; }
  double dist(std::span<const float> a, uint32_t b) const {
    return vector_distance(a, point(b), params_.metric);
  }

  struct Candidate {
    double distance;
    uint32_t id;
    bool operator<(const Candidate& o) const {
      return distance != o.distance ? distance < o.distance : id < o.id;
    }
    bool operator>(const Candidate& o) const { return o < *this; }
  };

  void insert(uint32_t id, int level);
  std::vector<Candidate> search_layer(std::span<const float> query,
                                      std::span<const Candidate> entries, size_t ef,
                                      int level, std::vector<char>& visited) const;
  std::vector<uint32_t> select_neighbors(std::vector<Candidate> candidates,
                                         size_t m) const;
  uint32_t greedy_descend(std::span<const float> query, uint32_t start, int level) const;
  size_t max_links(int level) const { return level == 0 ? 2 * params_.M : params_.M; }

  BuildParams params_;
  uint32_t dim_ = 0;
  size_t n_ = 0;
  std::vector<float> data_;
  std::vector<std::vector<std::vector<uint32_t>>> links_;  // node -> level -> neighbors
  uint32_t entry_ = 0;
  int max_level_ = -1;
};

}  // namespace kgeval
