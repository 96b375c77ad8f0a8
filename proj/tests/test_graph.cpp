#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "kgeval/graph.hpp"
#include "kgeval/rng.hpp"

using namespace kgeval;

namespace {

std::vector<Statement> parse_all(const std::string& text,
                                 ParseMode mode = ParseMode::Strict) {
  std::vector<Statement> out;
  ParseStats stats;
  parse_ntriples_text(text, mode, stats, [&](const Statement& s) { out.push_back(s); });
  return out;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("parses a plain triple") {
  const auto sts = parse_all("<http://x/a> <http://x/p> <http://x/b> .\n");
  REQUIRE(sts.size() == 1);
  CHECK(sts[0].subject == "http://x/a");
  CHECK(sts[0].predicate == "http://x/p");
  CHECK(sts[0].object.kind == TermKind::Iri);
  CHECK(sts[0].object.value == "http://x/b");
}

TEST_CASE("parses a language-tagged label literal") {
  const auto sts = parse_all(
      "<http://x/a> <http://www.w3.org/2000/01/rdf-schema#label> \"Mannheim\"@en .\n");
  REQUIRE(sts.size() == 1);
  CHECK(sts[0].object.kind == TermKind::Literal);
  CHECK(sts[0].object.value == "Mannheim");
  CHECK(sts[0].object.lang == "en");
}

TEST_CASE("parses datatyped literals, blank nodes, comments") {
  const auto sts = parse_all(
      "# a comment\n"
      "\n"
      "_:b1 <http://x/p> \"3.14\"^^<http://www.w3.org/2001/XMLSchema#double> .\n"
      "<http://x/a> <http://x/p> _:b1 . # trailing comment\n");
  REQUIRE(sts.size() == 2);
  CHECK(sts[0].subject == "_:b1");
  CHECK(sts[0].object.datatype == "http://www.w3.org/2001/XMLSchema#double");
  CHECK(sts[1].object.kind == TermKind::Blank);
  CHECK(sts[1].object.value == "_:b1");
}

TEST_CASE("decodes escape sequences in literals") {
  const auto sts = parse_all(
      "<http://x/a> <http://x/p> \"quote:\\\" back:\\\\ nl:\\n tab:\\t u:\\u00e9 U:\\U0001F600\" .\n");
  REQUIRE(sts.size() == 1);
  CHECK(sts[0].object.value == "quote:\" back:\\ nl:\n tab:\t u:\xc3\xa9 U:\xf0\x9f\x98\x80");
}

TEST_CASE("malformed line raises with its line number") {
  CHECK_THROWS_AS(parse_all("<http://x/a> <http://x/p>\n"), ParseError);
  try {
    parse_all("<http://x/ok> <http://x/p> <http://x/b> .\n<http://x/a> <http://x/p>\n");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_all("<http://x/a> <http://x/p> <http://x/b> . junk\n"), ParseError);
  CHECK_THROWS_AS(parse_all("<http://x/a> <http://x/p> \"open .\n"), ParseError);
}

TEST_CASE("lenient mode skips and counts bad lines") {
  ParseStats stats;
  size_t seen = 0;
  parse_ntriples_text(
      "<http://x/a> <http://x/p> <http://x/b> .\nbroken line\n<http://x/b> <http://x/p> <http://x/c> .\n",
      ParseMode::Lenient, stats, [&](const Statement&) { ++seen; });
  CHECK(seen == 2);
  CHECK(stats.skipped == 1);
  CHECK(stats.statements == 2);
  CHECK(stats.first_error_line == 2);
}

TEST_CASE("build_graph routes labels, same-as, and relational triples") {
  const auto sts = parse_all(
      "<http://x/a> <http://www.w3.org/2000/01/rdf-schema#label> \"A\" .\n"
      "<http://x/a> <http://x/p> <http://x/b> .\n"
      "<http://x/a> <http://www.w3.org/2002/07/owl#sameAs> <http://ext/1> .\n"
      "<http://x/a> <http://x/other> \"dropped\" .\n");
  LoadStats stats;
  const KnowledgeGraph g = build_graph(sts, {}, &stats);

  CHECK(g.entity_count() == 2);  // a, b; ext/1 is not interned
  CHECK(g.triple_count() == 1);
  CHECK(g.labels_of(0) == std::vector<std::string>{"A"});
  CHECK(g.sameas_of(0) == std::vector<std::string>{"http://ext/1"});
  CHECK(stats.dropped_literals == 1);
  CHECK(stats.labels == 1);
  CHECK(stats.sameas_links == 1);
}

TEST_CASE("same-as entries are symmetric when both sides are interned") {
  const auto sts = parse_all(
      "<http://x/a> <http://x/p> <http://x/b> .\n"
      "<http://x/a> <http://www.w3.org/2002/07/owl#sameAs> <http://x/b> .\n");
  const KnowledgeGraph g = build_graph(sts);
  CHECK(g.sameas_of(*g.find_entity("http://x/a")) ==
        std::vector<std::string>{"http://x/b"});
  CHECK(g.sameas_of(*g.find_entity("http://x/b")) ==
        std::vector<std::string>{"http://x/a"});
}

TEST_CASE("empty input yields an empty graph") {
  const KnowledgeGraph g = build_graph({});
  CHECK(g.entity_count() == 0);
  CHECK(g.triple_count() == 0);
}

TEST_CASE("lookup accessors and degree") {
  const auto sts = parse_all(
      "<http://x/a> <http://x/p> <http://x/b> .\n"
      "<http://x/a> <http://x/q> <http://x/c> .\n"
      "<http://x/b> <http://x/p> <http://x/a> .\n");
  const KnowledgeGraph g = build_graph(sts);
  const EntityId a = *g.find_entity("http://x/a");
  CHECK(g.degree(a) == 3);
  CHECK(g.labels_of(a).empty());
  CHECK(g.sameas_of(a).empty());
  CHECK_THROWS_AS(g.degree(99), LookupError);
  CHECK_THROWS_AS(g.labels_of(99), LookupError);
}

TEST_CASE("degree total equals twice the triple count") {
  Rng rng(5);
  std::vector<Statement> sts;
  for (int i = 0; i < 200; ++i) {
    Statement st;
    st.subject = "http://x/e" + std::to_string(rng.below(40));
    st.predicate = "http://x/r" + std::to_string(rng.below(5));
    st.object.kind = TermKind::Iri;
    st.object.value = "http://x/e" + std::to_string(rng.below(40));
    sts.push_back(st);
  }
  const KnowledgeGraph g = build_graph(sts);
  size_t total = 0;
  for (EntityId e = 0; e < g.entity_count(); ++e) total += g.degree(e);
  CHECK(total == 2 * g.triple_count());
}

TEST_CASE("relational round-trip preserves the graph") {
  Rng rng(7);
  std::vector<Statement> sts;
  for (int i = 0; i < 150; ++i) {
    Statement st;
    st.subject = "http://x/e" + std::to_string(rng.below(30));
    st.predicate = "http://x/r" + std::to_string(rng.below(4));
    st.object.kind = TermKind::Iri;
    st.object.value = "http://x/e" + std::to_string(rng.below(30));
    sts.push_back(st);
  }
  const KnowledgeGraph g = build_graph(sts);
  const KnowledgeGraph g2 = build_graph(parse_all(g.serialize_relational()));

  REQUIRE(g2.entity_count() == g.entity_count());
  REQUIRE(g2.triple_count() == g.triple_count());
  for (EntityId e = 0; e < g.entity_count(); ++e) {
    CHECK(g2.entity_iri(e) == g.entity_iri(e));
    CHECK(g2.degree(e) == g.degree(e));
  }
  CHECK(g2.triples() == g.triples());
}

TEST_CASE("blank nodes are interned with their prefix") {
  const auto sts = parse_all("_:x <http://x/p> _:y .\n");
  const KnowledgeGraph g = build_graph(sts);
  CHECK(g.entity_count() == 2);
  CHECK(g.is_blank(0));
  CHECK(g.entity_iri(0) == "_:x");
}

TEST_CASE("out_edges follow insertion order") {
  const auto sts = parse_all(
      "<http://x/a> <http://x/p> <http://x/b> .\n"
      "<http://x/a> <http://x/q> <http://x/c> .\n");
  const KnowledgeGraph g = build_graph(sts);
  const auto edges = g.out_edges(*g.find_entity("http://x/a"));
  REQUIRE(edges.size() == 2);
  CHECK(g.entity_iri(edges[0].second) == "http://x/b");
  CHECK(g.entity_iri(edges[1].second) == "http://x/c");
}

TEST_CASE("loads plain and gzip files identically") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kgeval_graph_test";
  fs::create_directories(dir);
  const std::string text =
      "<http://x/a> <http://x/p> <http://x/b> .\n"
      "<http://x/b> <http://x/p> <http://x/c> .\n";
  const std::string plain = (dir / "g.nt").string();
  {
    std::ofstream os(plain);
    os << text;
  }
  const std::string gz = (dir / "g.nt.gz").string();
  REQUIRE(std::system(("gzip -c " + plain + " > " + gz).c_str()) == 0);

  LoadStats s1, s2;
  const KnowledgeGraph g1 = load_graph({plain}, {}, ParseMode::Strict, &s1);
  const KnowledgeGraph g2 = load_graph({gz}, {}, ParseMode::Strict, &s2);
  CHECK(g1.entity_count() == g2.entity_count());
  CHECK(g1.triples() == g2.triples());
  CHECK(s1.parsed_lines == s2.parsed_lines);
  fs::remove_all(dir);
}

}  // TEST_SUITE
