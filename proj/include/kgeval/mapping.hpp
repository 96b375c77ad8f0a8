#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgeval/graph.hpp"

namespace kgeval {

// A task-dataset entity to be mapped into the KG. The label is mandatory;
// URIs are optional hints from well-known graphs.
struct DatasetEntity {
  uint32_t id = 0;
  std::string label;
  std::vector<std::string> uris;
};

enum class MapMethod : uint8_t { Uri, SameAs, Label };

const char* map_method_name(MapMethod m);

struct MapEntry {
  EntityId kg_entity = 0;
  double confidence = 1.0;
  MapMethod method = MapMethod::Uri;
};

// Partial map from dataset entity id to KG entity; unmapped entities absent.
class EntityMapping {
 public:
  void insert(uint32_t dataset_id, MapEntry entry) { entries_[dataset_id] = entry; }
  bool contains(uint32_t dataset_id) const { return entries_.count(dataset_id) > 0; }
  const MapEntry* find(uint32_t dataset_id) const {
    auto it = entries_.find(dataset_id);
    return it == entries_.end() ? nullptr : &it->second;
  }
  size_t size() const { return entries_.size(); }
  const std::unordered_map<uint32_t, MapEntry>& entries() const { return entries_; }
  void merge(const EntityMapping& other);

  std::string to_tsv(const KnowledgeGraph& graph) const;
  static EntityMapping from_tsv(const std::string& text, const KnowledgeGraph& graph);

 private:
  std::unordered_map<uint32_t, MapEntry> entries_;
};

// Unicode-lowercases (ASCII, Latin-1/Extended-A, Greek, Cyrillic), maps
// punctuation to spaces, collapses whitespace, trims.
std::string normalize_label(std::string_view s);

// Similarity of two normalized labels: tokens sorted, rejoined, then
// 1 - levenshtein/max-length. Both empty -> 1.0.
double token_sort_similarity(std::string_view a, std::string_view b);

// normalize_label followed by lexicographic token sort; the LabelIndex key.
std::string canonical_label_key(std::string_view s);

// Immutable lookup structure over the KG's labels. Keys are canonical label
// keys; postings are sorted by descending degree, then ascending id. Blank
// nodes are excluded.
class LabelIndex {
 public:
  static LabelIndex build(const KnowledgeGraph& graph);

  size_t key_count() const { return keys_.size(); }

  struct Match {
    EntityId entity;
    double score;
  };
  // Best entity for a raw label, or nothing below the threshold.
  // Ties on score resolved by highest degree, then lowest entity id.
  std::optional<Match> best_match(std::string_view raw_label, double threshold) const;

 private:
  std::optional<Match> pick_best(const std::vector<uint32_t>& key_ids, double score) const;

  std::vector<std::string> keys_;
  std::vector<std::vector<EntityId>> postings_;
  std::unordered_map<std::string, uint32_t> key_ids_;
  std::unordered_map<std::string, std::vector<uint32_t>> token_index_;
  std::vector<uint32_t> degree_;
};

// Exact URI matching against entity IRIs, then same-as links. Confidence 1.0;
// ambiguous same-as hits resolved by highest degree, then lowest id.
EntityMapping map_by_uri(const KnowledgeGraph& graph, std::span<const DatasetEntity> entities);

// Fuzzy label matching for entities not already covered by `skip`.
EntityMapping map_by_label(const LabelIndex& index, std::span<const DatasetEntity> entities,
                           double threshold, const EntityMapping* skip = nullptr,
                           int threads = 1);

struct MapperStep {
  enum class Kind : uint8_t { Uri, Label };
  Kind kind = Kind::Uri;
  double threshold = 1.0;  // Label only
};

// Each mapper sees only the entities earlier mappers left unmapped.
EntityMapping run_mapper_chain(const KnowledgeGraph& graph, const LabelIndex& index,
                               std::span<const DatasetEntity> entities,
                               std::span<const MapperStep> chain, int threads = 1);

}  // namespace kgeval
