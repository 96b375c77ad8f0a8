#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgeval/ntriples.hpp"

namespace kgeval {

using EntityId = uint32_t;
using RelationId = uint32_t;

struct Triple {
  EntityId subject;
  RelationId predicate;
  EntityId object;
  bool operator==(const Triple&) const = default;
};

struct GraphConfig {
  std::vector<std::string> label_predicates = {
      "http://www.w3.org/2000/01/rdf-schema#label",
      "http://www.w3.org/2004/02/skos/core#prefLabel",
      "http://xmlns.com/foaf/0.1/name",
  };
  std::vector<std::string> sameas_predicates = {
      "http://www.w3.org/2002/07/owl#sameAs",
  };
};

struct LoadStats {
  size_t entities = 0;
  size_t relations = 0;
  size_t relational_triples = 0;
  size_t labels = 0;
  size_t sameas_links = 0;
  size_t dropped_literals = 0;  // literal objects under non-label predicates
  size_t parsed_lines = 0;
  size_t skipped_lines = 0;
  std::string to_text() const;
};

// Interned triple store. Built single-writer via GraphBuilder, immutable after
// freeze; safe for concurrent readers.
class KnowledgeGraph {
 public:
  size_t entity_count() const { return entity_iris_.size(); }
  size_t relation_count() const { return relation_iris_.size(); }
  size_t triple_count() const { return triples_.size(); }

  const std::string& entity_iri(EntityId id) const {
    check_entity(id);
    return entity_iris_[id];
  }
  const std::string& relation_iri(RelationId id) const;
  std::optional<EntityId> find_entity(std::string_view iri) const;
  std::optional<RelationId> find_relation(std::string_view iri) const;

  const std::vector<Triple>& triples() const { return triples_; }

  const std::vector<std::string>& labels_of(EntityId id) const;
  // Sorted unique IRIs asserted equal to this entity.
  const std::vector<std::string>& sameas_of(EntityId id) const;
  // In-degree plus out-degree over relational triples.
  uint32_t degree(EntityId id) const {
    check_entity(id);
    return degree_[id];
  }

  bool is_blank(EntityId id) const {
    check_entity(id);
    return entity_iris_[id].size() >= 2 && entity_iris_[id][0] == '_' &&
           entity_iris_[id][1] == ':';
  }

  // Outgoing relational edges of an entity, in triple insertion order.
  std::span<const std::pair<RelationId, EntityId>> out_edges(EntityId id) const {
    check_entity(id);
    return {out_edges_.data() + out_offsets_[id], out_offsets_[id + 1] - out_offsets_[id]};
  }

  std::string serialize_relational() const;

 private:
  friend class GraphBuilder;
  void check_entity(EntityId id) const {
    if (id >= entity_iris_.size())
      throw LookupError("unknown entity id " + std::to_string(id));
  }

  std::vector<std::string> entity_iris_;
  std::vector<std::string> relation_iris_;
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
  std::vector<Triple> triples_;
  std::unordered_map<EntityId, std::vector<std::string>> labels_;
  std::unordered_map<EntityId, std::vector<std::string>> sameas_;
  std::vector<uint32_t> degree_;
  std::vector<size_t> out_offsets_;
  std::vector<std::pair<RelationId, EntityId>> out_edges_;
};

class GraphBuilder {
 public:
  explicit GraphBuilder(GraphConfig config = {});

  void add(const Statement& st);
  // Builds degree and adjacency indices and seals the graph.
  KnowledgeGraph freeze();

  LoadStats& stats() { return stats_; }

 private:
  EntityId intern_entity(const std::string& iri);
  RelationId intern_relation(const std::string& iri);
  bool is_label_predicate(const std::string& iri) const;
  bool is_sameas_predicate(const std::string& iri) const;

  GraphConfig config_;
  KnowledgeGraph graph_;
  // Raw same-as pairs (subject id, object IRI); resolved at freeze time so the
  // index is symmetric for pairs whose object is itself interned.
  std::vector<std::pair<EntityId, std::string>> sameas_raw_;
  LoadStats stats_;
  bool frozen_ = false;
};

KnowledgeGraph build_graph(const std::vector<Statement>& statements,
                           GraphConfig config = {}, LoadStats* stats = nullptr);

// Loads one or more .nt / .nt.gz files into a frozen graph.
KnowledgeGraph load_graph(const std::vector<std::string>& paths, const GraphConfig& config,
                          ParseMode mode, LoadStats* stats = nullptr);

}  // namespace kgeval
