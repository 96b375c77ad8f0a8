#include "kgeval/graph.hpp"

#include <algorithm>
#include <sstream>

namespace kgeval {

namespace {
const std::vector<std::string> kNoStrings;
}

std::string LoadStats::to_text() const {
  std::ostringstream os;
  os << "entities: " << entities << "\n"
     << "relations: " << relations << "\n"
     << "relational_triples: " << relational_triples << "\n"
     << "labels: " << labels << "\n"
     << "sameas_links: " << sameas_links << "\n"
     << "dropped_literals: " << dropped_literals << "\n"
     << "parsed_lines: " << parsed_lines << "\n"
     << "skipped_lines: " << skipped_lines << "\n";
  return os.str();
}

const std::string& KnowledgeGraph::relation_iri(RelationId id) const {
  if (id >= relation_iris_.size())
    throw LookupError("unknown relation id " + std::to_string(id));
  return relation_iris_[id];
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view iri) const {
  auto it = entity_ids_.find(std::string(iri));
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view iri) const {
  auto it = relation_ids_.find(std::string(iri));
  if (it == relation_ids_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& KnowledgeGraph::labels_of(EntityId id) const {
  check_entity(id);
  auto it = labels_.find(id);
  return it == labels_.end() ? kNoStrings : it->second;
}

const std::vector<std::string>& KnowledgeGraph::sameas_of(EntityId id) const {
  check_entity(id);
  auto it = sameas_.find(id);
  return it == sameas_.end() ? kNoStrings : it->second;
}

std::string KnowledgeGraph::serialize_relational() const {
  std::string out;
  for (const Triple& t : triples_) {
    out += '<';
    out += entity_iris_[t.subject];
    out += "> <";
    out += relation_iris_[t.predicate];
    out += "> <";
    out += entity_iris_[t.object];
    out += "> .\n";
  }
  return out;
}

GraphBuilder::GraphBuilder(GraphConfig config) : config_(std::move(config)) {
  if (config_.label_predicates.empty())
    throw ConfigError("label predicate list must be non-empty");
  if (config_.sameas_predicates.empty())
    throw ConfigError("same-as predicate list must be non-empty");
}

EntityId GraphBuilder::intern_entity(const std::string& iri) {
  auto [it, inserted] =
      graph_.entity_ids_.emplace(iri, static_cast<EntityId>(graph_.entity_iris_.size()));
  if (inserted) graph_.entity_iris_.push_back(iri);
  return it->second;
}

RelationId GraphBuilder::intern_relation(const std::string& iri) {
  auto [it, inserted] = graph_.relation_ids_.emplace(
      iri, static_cast<RelationId>(graph_.relation_iris_.size()));
  if (inserted) graph_.relation_iris_.push_back(iri);
  return it->second;
}

bool GraphBuilder::is_label_predicate(const std::string& iri) const {
  return std::find(config_.label_predicates.begin(), config_.label_predicates.end(),
                   iri) != config_.label_predicates.end();
}

bool GraphBuilder::is_sameas_predicate(const std::string& iri) const {
  return std::find(config_.sameas_predicates.begin(), config_.sameas_predicates.end(),
                   iri) != config_.sameas_predicates.end();
}

void GraphBuilder::add(const Statement& st) {
  if (frozen_) throw ValidationError("graph builder already frozen");
  const EntityId subject = intern_entity(st.subject);

  if (st.object.kind == TermKind::Literal) {
    if (is_label_predicate(st.predicate)) {
      graph_.labels_[subject].push_back(st.object.value);
      ++stats_.labels;
    } else {
      ++stats_.dropped_literals;
    }
    return;
  }

  // IRI or blank-node object from here on.
  if (is_sameas_predicate(st.predicate)) {
    sameas_raw_.emplace_back(subject, st.object.value);
    ++stats_.sameas_links;
    return;
  }

  const EntityId object = intern_entity(st.object.value);
  const RelationId predicate = intern_relation(st.predicate);
  graph_.triples_.push_back(Triple{subject, predicate, object});
}

KnowledgeGraph GraphBuilder::freeze() {
  if (frozen_) throw ValidationError("graph builder already frozen");
  frozen_ = true;

  const size_t n = graph_.entity_iris_.size();
  graph_.degree_.assign(n, 0);
  std::vector<size_t> out_count(n, 0);
  for (const Triple& t : graph_.triples_) {
    ++graph_.degree_[t.subject];
    ++graph_.degree_[t.object];
    ++out_count[t.subject];
  }

  graph_.out_offsets_.assign(n + 1, 0);
  for (size_t i = 0; i < n; ++i) graph_.out_offsets_[i + 1] = graph_.out_offsets_[i] + out_count[i];
  graph_.out_edges_.resize(graph_.triples_.size());
  std::vector<size_t> cursor(graph_.out_offsets_.begin(), graph_.out_offsets_.end() - 1);
  for (const Triple& t : graph_.triples_)
    graph_.out_edges_[cursor[t.subject]++] = {t.predicate, t.object};

  // Same-as entries become visible from both sides when both are interned.
  for (const auto& [subject, object_iri] : sameas_raw_) {
    graph_.sameas_[subject].push_back(object_iri);
    if (auto other = graph_.find_entity(object_iri); other && *other != subject)
      graph_.sameas_[*other].push_back(graph_.entity_iris_[subject]);
  }
  for (auto& [id, iris] : graph_.sameas_) {
    std::sort(iris.begin(), iris.end());
    iris.erase(std::unique(iris.begin(), iris.end()), iris.end());
  }

  stats_.entities = n;
  stats_.relations = graph_.relation_iris_.size();
  stats_.relational_triples = graph_.triples_.size();

  return std::move(graph_);
}

KnowledgeGraph build_graph(const std::vector<Statement>& statements, GraphConfig config,
                           LoadStats* stats) {
  GraphBuilder builder(std::move(config));
  for (const Statement& st : statements) builder.add(st);
  KnowledgeGraph graph = builder.freeze();
  if (stats) *stats = builder.stats();
  return graph;
}

KnowledgeGraph load_graph(const std::vector<std::string>& paths, const GraphConfig& config,
                          ParseMode mode, LoadStats* stats) {
  GraphBuilder builder(config);
  ParseStats pstats;
  for (const std::string& path : paths)
    parse_ntriples_file(path, mode, pstats, [&](const Statement& st) { builder.add(st); });
  KnowledgeGraph graph = builder.freeze();
  builder.stats().parsed_lines = pstats.lines;
  builder.stats().skipped_lines = pstats.skipped;
  if (stats) *stats = builder.stats();
  return graph;
}

}  // namespace kgeval
