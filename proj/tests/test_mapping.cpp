#include "doctest.h"
#include "kgeval/mapping.hpp"
#include "kgeval/rng.hpp"
#include "support/oracles.hpp"

using namespace kgeval;

namespace {

KnowledgeGraph labeled_graph(const std::vector<std::pair<std::string, std::string>>& labels,
                             const std::vector<std::pair<std::string, std::string>>& edges = {},
                             const std::vector<std::pair<std::string, std::string>>& sameas = {}) {
  std::vector<Statement> sts;
  for (const auto& [iri, label] : labels) {
    Statement st;
    st.subject = iri;
    st.predicate = "http://www.w3.org/2000/01/rdf-schema#label";
    st.object.kind = TermKind::Literal;
    st.object.value = label;
    sts.push_back(st);
  }
  for (const auto& [s, o] : edges) {
    Statement st;
    st.subject = s;
    st.predicate = "http://x/p";
    st.object.kind = TermKind::Iri;
    st.object.value = o;
    sts.push_back(st);
  }
  for (const auto& [s, o] : sameas) {
    Statement st;
    st.subject = s;
    st.predicate = "http://www.w3.org/2002/07/owl#sameAs";
    st.object.kind = TermKind::Iri;
    st.object.value = o;
    sts.push_back(st);
  }
  return build_graph(sts);
}

DatasetEntity entity(uint32_t id, std::string label, std::vector<std::string> uris = {}) {
  DatasetEntity e;
  e.id = id;
  e.label = std::move(label);
  e.uris = std::move(uris);
  return e;
}

}  // namespace

TEST_SUITE("mapping") {

TEST_CASE("normalize_label examples") {
  CHECK(normalize_label("New York") == "new york");
  CHECK(normalize_label("O'Brien,  J.") == "o brien j");
  CHECK(normalize_label("") == "");
  CHECK(normalize_label("  Trim  me  ") == "trim me");
  CHECK(normalize_label("Café—Zürich") == "café zürich");
  CHECK(normalize_label("ÉCOLE") == "école");
}

TEST_CASE("token_sort_similarity examples") {
  CHECK(token_sort_similarity("new york", "york new") == 1.0);
  CHECK(token_sort_similarity("mannheim", "mannhem") == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(token_sort_similarity("abc", "") == 0.0);
  CHECK(token_sort_similarity("", "") == 1.0);
}

TEST_CASE("token_sort_similarity symmetry and identity properties") {
  Rng rng(11);
  const char* words[] = {"red", "blue", "green", "stone", "river", "north"};
  for (int trial = 0; trial < 200; ++trial) {
    auto make = [&] {
      std::string s;
      const size_t n = 1 + rng.below(3);
      for (size_t i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += words[rng.below(6)];
      }
      return s;
    };
    const std::string a = make(), b = make();
    const double sab = token_sort_similarity(a, b);
    CHECK(sab == token_sort_similarity(b, a));
    CHECK(sab >= 0.0);
    CHECK(sab <= 1.0);
    // 1.0 iff the sorted token strings are equal
    const bool same_key = canonical_label_key(a) == canonical_label_key(b);
    CHECK((sab == 1.0) == same_key);
  }
}

TEST_CASE("similarity agrees with a reference Levenshtein") {
  // sorted single-token inputs: similarity = 1 - lev/maxlen directly
  const std::string a = "mannhem", b = "mannheim";
  const double expected =
      1.0 - double(oracle::levenshtein(a, b)) / double(std::max(a.size(), b.size()));
  CHECK(token_sort_similarity(a, b) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.875));
}

TEST_CASE("map_by_uri: exact IRI, same-as, and degree tie-breaking") {
  const KnowledgeGraph g = labeled_graph(
      {{"http://kg/a", "Alpha"}, {"http://kg/b", "Beta"}, {"http://kg/c", "Gamma"}},
      {{"http://kg/b", "http://kg/a"},
       {"http://kg/b", "http://kg/c"},
       {"http://kg/c", "http://kg/b"}},
      {{"http://kg/b", "http://ext/x"}, {"http://kg/c", "http://ext/x"},
       {"http://kg/a", "http://ext/a"}});

  const std::vector<DatasetEntity> entities = {
      entity(0, "whatever", {"http://kg/a"}),      // exact IRI hit
      entity(1, "other", {"http://ext/a"}),        // same-as hit
      entity(2, "ambiguous", {"http://ext/x"}),    // two candidates, degrees differ
      entity(3, "nothing", {"http://nope/x"}),     // no hit
      entity(4, "no uris"),
  };
  const EntityMapping m = map_by_uri(g, entities);

  REQUIRE(m.contains(0));
  CHECK(m.find(0)->method == MapMethod::Uri);
  CHECK(m.find(0)->confidence == 1.0);
  CHECK(g.entity_iri(m.find(0)->kg_entity) == "http://kg/a");

  REQUIRE(m.contains(1));
  CHECK(m.find(1)->method == MapMethod::SameAs);
  CHECK(g.entity_iri(m.find(1)->kg_entity) == "http://kg/a");

  // b has degree 3 (two out, one in), c has degree 2
  REQUIRE(m.contains(2));
  CHECK(g.entity_iri(m.find(2)->kg_entity) == "http://kg/b");

  CHECK(!m.contains(3));
  CHECK(!m.contains(4));
}

TEST_CASE("map_by_label thresholds and fuzzy matches") {
  const KnowledgeGraph g = labeled_graph(
      {{"http://kg/berlin", "Berlin"}, {"http://kg/mannheim", "Mannheim"}});
  const LabelIndex index = LabelIndex::build(g);

  SUBCASE("exact at threshold 1.0") {
    const std::vector<DatasetEntity> es = {entity(0, "Berlin")};
    const EntityMapping m = map_by_label(index, es, 1.0);
    REQUIRE(m.contains(0));
    CHECK(m.find(0)->confidence == 1.0);
    CHECK(m.find(0)->method == MapMethod::Label);
  }
  SUBCASE("below threshold stays unmapped") {
    const std::vector<DatasetEntity> es = {entity(0, "Brlnx")};
    // best similarity to "berlin" is well below 0.7
    const EntityMapping m = map_by_label(index, es, 0.7);
    CHECK(!m.contains(0));
  }
  SUBCASE("fuzzy match carries the similarity as confidence") {
    const std::vector<DatasetEntity> es = {entity(0, "mannhem")};
    const EntityMapping m = map_by_label(index, es, 0.7);
    REQUIRE(m.contains(0));
    CHECK(m.find(0)->confidence == doctest::Approx(0.875));
    CHECK(g.entity_iri(m.find(0)->kg_entity) == "http://kg/mannheim");
  }
  SUBCASE("token order does not matter at threshold 1.0") {
    const KnowledgeGraph g2 = labeled_graph({{"http://kg/ny", "New York"}});
    const LabelIndex idx2 = LabelIndex::build(g2);
    const std::vector<DatasetEntity> es = {entity(0, "york new")};
    CHECK(map_by_label(idx2, es, 1.0).contains(0));
  }
}

TEST_CASE("label ties break by degree then id") {
  const KnowledgeGraph g = labeled_graph(
      {{"http://kg/x1", "Same Label"}, {"http://kg/x2", "Same Label"}},
      {{"http://kg/x2", "http://kg/x1"}, {"http://kg/x2", "http://kg/x1"},
       {"http://kg/x1", "http://kg/x2"}});
  // both entities have degree 3, so the lower id wins
  const LabelIndex index = LabelIndex::build(g);
  const std::vector<DatasetEntity> es = {entity(0, "Same Label")};
  const EntityMapping m = map_by_label(index, es, 1.0);
  REQUIRE(m.contains(0));
  CHECK(g.entity_iri(m.find(0)->kg_entity) == "http://kg/x1");
}

TEST_CASE("mapper chain: earlier mappers shadow later ones") {
  const KnowledgeGraph g = labeled_graph({{"http://kg/berlin", "Berlin"}},
                                         {},
                                         {{"http://kg/berlin", "http://ext/Berlin"}});
  const LabelIndex index = LabelIndex::build(g);
  const std::vector<DatasetEntity> es = {entity(0, "Berlin", {"http://ext/Berlin"})};
  const std::vector<MapperStep> chain = {{MapperStep::Kind::Uri, 1.0},
                                         {MapperStep::Kind::Label, 1.0}};
  const EntityMapping m = run_mapper_chain(g, index, es, chain);
  REQUIRE(m.contains(0));
  CHECK(m.find(0)->method == MapMethod::SameAs);  // uri mapper got there first
}

TEST_CASE("empty chain is a config error") {
  const KnowledgeGraph g = labeled_graph({{"http://kg/a", "A"}});
  const LabelIndex index = LabelIndex::build(g);
  CHECK_THROWS_AS(run_mapper_chain(g, index, {}, {}), ConfigError);
}

TEST_CASE("threshold out of range is a config error") {
  const KnowledgeGraph g = labeled_graph({{"http://kg/a", "A"}});
  const LabelIndex index = LabelIndex::build(g);
  const std::vector<DatasetEntity> es = {entity(0, "A")};
  CHECK_THROWS_AS(map_by_label(index, es, 1.3), ConfigError);
  CHECK_THROWS_AS(map_by_label(index, es, 0.0), ConfigError);
}

TEST_CASE("threshold monotonicity and chain monotonicity") {
  Rng rng(3);
  const char* words[] = {"alpha", "beta", "gamma", "delta", "omega", "sigma", "kappa"};
  std::vector<std::pair<std::string, std::string>> labels;
  for (int i = 0; i < 60; ++i)
    labels.push_back({"http://kg/e" + std::to_string(i),
                      std::string(words[rng.below(7)]) + " " + words[rng.below(7)]});
  const KnowledgeGraph g = labeled_graph(labels);
  const LabelIndex index = LabelIndex::build(g);

  std::vector<DatasetEntity> es;
  for (uint32_t i = 0; i < 40; ++i) {
    std::string lbl = std::string(words[rng.below(7)]);
    if (rng.coin()) lbl += std::string(" ") + words[rng.below(7)];
    if (rng.coin()) lbl[0] = 'x';  // perturb
    es.push_back(entity(i, lbl));
  }

  const EntityMapping strict = map_by_label(index, es, 1.0);
  const EntityMapping loose = map_by_label(index, es, 0.7);
  const EntityMapping looser = map_by_label(index, es, 0.4);
  for (const auto& [id, entry] : strict.entries()) CHECK(loose.contains(id));
  for (const auto& [id, entry] : loose.entries()) CHECK(looser.contains(id));

  // chain [label(1.0), label(0.7)] maps a superset of label(1.0) alone
  const std::vector<MapperStep> chain = {{MapperStep::Kind::Label, 1.0},
                                         {MapperStep::Kind::Label, 0.7}};
  const EntityMapping chained = run_mapper_chain(g, index, es, chain);
  for (const auto& [id, entry] : strict.entries()) {
    REQUIRE(chained.contains(id));
    CHECK(chained.find(id)->kg_entity == entry.kg_entity);
  }
  CHECK(chained.size() >= strict.size());

  // appending a mapper that maps nothing leaves the result unchanged
  const std::vector<MapperStep> plus_uri = {{MapperStep::Kind::Label, 1.0},
                                            {MapperStep::Kind::Label, 0.7},
                                            {MapperStep::Kind::Uri, 1.0}};
  const EntityMapping chained2 = run_mapper_chain(g, index, es, plus_uri);
  CHECK(chained2.size() == chained.size());
  for (const auto& [id, entry] : chained.entries()) {
    REQUIRE(chained2.contains(id));
    CHECK(chained2.find(id)->kg_entity == entry.kg_entity);
    CHECK(chained2.find(id)->confidence == entry.confidence);
  }
}

TEST_CASE("parallel label mapping matches the serial reference") {
  Rng rng(9);
  const char* words[] = {"north", "south", "east", "west", "river", "lake", "hill"};
  std::vector<std::pair<std::string, std::string>> labels;
  for (int i = 0; i < 80; ++i)
    labels.push_back({"http://kg/e" + std::to_string(i),
                      std::string(words[rng.below(7)]) + " " + words[rng.below(7)] + " " +
                          std::to_string(rng.below(50))});
  const KnowledgeGraph g = labeled_graph(labels);
  const LabelIndex index = LabelIndex::build(g);

  std::vector<DatasetEntity> es;
  for (uint32_t i = 0; i < 60; ++i) {
    std::string lbl = std::string(words[rng.below(7)]) + " " + words[rng.below(7)] + " " +
                      std::to_string(rng.below(50));
    if (rng.coin()) lbl.back() = '9';
    es.push_back(entity(i, lbl));
  }
  const EntityMapping serial = map_by_label(index, es, 0.7, nullptr, 1);
  const EntityMapping parallel = map_by_label(index, es, 0.7, nullptr, 4);
  REQUIRE(serial.size() == parallel.size());
  for (const auto& [id, entry] : serial.entries()) {
    REQUIRE(parallel.contains(id));
    CHECK(parallel.find(id)->kg_entity == entry.kg_entity);
    CHECK(parallel.find(id)->confidence == entry.confidence);
  }
}

TEST_CASE("coverage accounting: mapped plus unmapped equals total") {
  const KnowledgeGraph g = labeled_graph({{"http://kg/a", "Alpha"}, {"http://kg/b", "Beta"}});
  const LabelIndex index = LabelIndex::build(g);
  const std::vector<DatasetEntity> es = {entity(0, "Alpha"), entity(1, "Beta"),
                                         entity(2, "Gamma"), entity(3, "Delta")};
  const std::vector<MapperStep> chain = {{MapperStep::Kind::Label, 1.0}};
  const EntityMapping m = run_mapper_chain(g, index, es, chain);
  size_t unmapped = 0;
  for (const auto& e : es) unmapped += m.contains(e.id) ? 0 : 1;
  CHECK(m.size() + unmapped == es.size());
  CHECK(m.size() == 2);
}

TEST_CASE("mapping TSV round-trip") {
  const KnowledgeGraph g = labeled_graph({{"http://kg/a", "Alpha"}, {"http://kg/b", "Beta"}});
  const LabelIndex index = LabelIndex::build(g);
  const std::vector<DatasetEntity> es = {entity(0, "Alpha"), entity(7, "Beta")};
  const EntityMapping m = map_by_label(index, es, 1.0);
  const std::string tsv = m.to_tsv(g);
  const EntityMapping m2 = EntityMapping::from_tsv(tsv, g);
  REQUIRE(m2.size() == m.size());
  for (const auto& [id, entry] : m.entries()) {
    REQUIRE(m2.contains(id));
    CHECK(m2.find(id)->kg_entity == entry.kg_entity);
    CHECK(m2.find(id)->method == entry.method);
  }
}

TEST_CASE("blank nodes are not label-mapping candidates") {
  std::vector<Statement> sts;
  Statement st;
  st.subject = "_:hidden";
  st.predicate = "http://www.w3.org/2000/01/rdf-schema#label";
  st.object.kind = TermKind::Literal;
  st.object.value = "Berlin";
  sts.push_back(st);
  const KnowledgeGraph g = build_graph(sts);
  const LabelIndex index = LabelIndex::build(g);
  const std::vector<DatasetEntity> es = {entity(0, "Berlin")};
  CHECK(!map_by_label(index, es, 1.0).contains(0));
}

}  // TEST_SUITE
