#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "kgeval/dataset.hpp"

using namespace kgeval;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = KGEVAL_FIXTURE_DIR;

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "kgeval_ds_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const std::string p = (path / name).string();
    std::ofstream os(p);
    os << content;
    return name;
  }
};

ManifestEntry tabular_entry(TaskType task, const std::string& path) {
  ManifestEntry e;
  e.name = "test";
  e.task = task;
  e.path = path;
  return e;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("loads a 3-row regression TSV") {
  TempDir dir;
  const std::string name = dir.file("reg.tsv",
                                    "label\turis\ttarget\n"
                                    "Berlin\thttp://ext/Berlin\t3.7\n"
                                    "Paris\t\t2.1\n"
                                    "Rome\t\t2.8\n");
  const LoadedDataset ds =
      load_dataset(tabular_entry(TaskType::Regression, name), dir.path.string());
  const auto& tab = std::get<TabularDataset>(ds.data);
  REQUIRE(tab.entities.size() == 3);
  CHECK(tab.numeric_targets == std::vector<double>{3.7, 2.1, 2.8});
  CHECK(tab.entities[0].uris == std::vector<std::string>{"http://ext/Berlin"});
  CHECK(tab.entities[1].uris.empty());
}

TEST_CASE("load errors carry file and line information") {
  TempDir dir;
  SUBCASE("missing column") {
    const std::string name = dir.file("bad.tsv", "label\tvalue\nBerlin\t1\n");
    CHECK_THROWS_WITH_AS(
        load_dataset(tabular_entry(TaskType::Regression, name), dir.path.string()),
        doctest::Contains("missing column 'target'"), ValidationError);
  }
  SUBCASE("non-finite target") {
    const std::string name =
        dir.file("nan.tsv", "label\turis\ttarget\nBerlin\t\tnan\n");
    CHECK_THROWS_AS(load_dataset(tabular_entry(TaskType::Regression, name), dir.path.string()),
                    ValidationError);
  }
  SUBCASE("empty label") {
    const std::string name = dir.file("empty.tsv", "label\turis\ttarget\n\t\t1.0\n");
    CHECK_THROWS_AS(load_dataset(tabular_entry(TaskType::Regression, name), dir.path.string()),
                    ValidationError);
  }
  SUBCASE("single class") {
    const std::string name =
        dir.file("one.tsv", "label\turis\ttarget\nA\t\tx\nB\t\tx\n");
    CHECK_THROWS_AS(
        load_dataset(tabular_entry(TaskType::Classification, name), dir.path.string()),
        ValidationError);
  }
}

TEST_CASE("relatedness ranks must form a permutation") {
  TempDir dir;
  const std::string header = "seed_label\tseed_uris\tcandidate_label\tcandidate_uris\trank\n";
  SUBCASE("valid") {
    const std::string name = dir.file(
        "rel.tsv", header + "Berlin\t\tGermany\t\t1\nBerlin\t\tParis\t\t2\n");
    const LoadedDataset ds =
        load_dataset(tabular_entry(TaskType::EntityRelatedness, name), dir.path.string());
    CHECK(std::get<RelatednessDataset>(ds.data).seeds.size() == 1);
  }
  SUBCASE("duplicate rank rejected") {
    const std::string name = dir.file(
        "rel_bad.tsv",
        header + "Berlin\t\tGermany\t\t1\nBerlin\t\tParis\t\t2\nBerlin\t\tRome\t\t2\n");
    CHECK_THROWS_WITH_AS(
        load_dataset(tabular_entry(TaskType::EntityRelatedness, name), dir.path.string()),
        doctest::Contains("permutation"), ValidationError);
  }
}

TEST_CASE("ratings loader applies the positivity threshold and drops sparse users") {
  TempDir dir;
  const std::string name = dir.file("ratings.tsv",
                                    "user_id\tlabel\turis\trating\n"
                                    "u1\tA\t\t5.0\n"
                                    "u1\tB\t\t4.5\n"
                                    "u1\tC\t\t1.0\n"
                                    "u2\tA\t\t4.2\n"   // single positive -> dropped
                                    "u2\tB\t\t2.0\n"
                                    "u3\tA\t\t5.0\n"
                                    "u3\tA\t\t4.0\n"   // duplicate pair, kept once
                                    "u3\tC\t\t4.1\n");
  ManifestEntry entry = tabular_entry(TaskType::Recommendation, name);
  entry.rating_threshold = 4.0;
  entry.top_k = 2;
  const LoadedDataset ds = load_dataset(entry, dir.path.string());
  const auto& ratings = std::get<RatingsDataset>(ds.data);
  CHECK(ratings.items.size() == 3);
  CHECK(ratings.dropped_users == 1);
  CHECK(ratings.duplicate_ratings == 1);
  REQUIRE(ratings.user_positives.size() == 2);
  CHECK(ratings.user_positives[0].first == "u1");
  CHECK(ratings.user_positives[0].second.size() == 2);
  CHECK(ratings.user_positives[1].first == "u3");
}

TEST_CASE("collect_entities pools by label and uri set") {
  TempDir dir;
  const std::string class_name = dir.file("c.tsv",
                                          "label\turis\ttarget\n"
                                          "Berlin\thttp://ext/B\ta\n"
                                          "Paris\t\tb\n");
  const std::string reg_name = dir.file("r.tsv",
                                        "label\turis\ttarget\n"
                                        "Berlin\thttp://ext/B\t1.0\n"   // same pooled entity
                                        "Berlin\thttp://other/B\t2.0\n" // different uri set
                                        "Paris\t\t3.0\n");
  std::vector<LoadedDataset> datasets;
  datasets.push_back(
      load_dataset(tabular_entry(TaskType::Classification, class_name), dir.path.string()));
  datasets.push_back(
      load_dataset(tabular_entry(TaskType::Regression, reg_name), dir.path.string()));

  EntityPool pool;
  collect_entities(datasets, pool);
  CHECK(pool.size() == 3);  // Berlin+extB, Paris, Berlin+otherB

  const auto& c = std::get<TabularDataset>(datasets[0].data);
  const auto& r = std::get<TabularDataset>(datasets[1].data);
  CHECK(c.entities[0].id == r.entities[0].id);
  CHECK(r.entities[1].id != r.entities[0].id);
  CHECK(c.entities[1].id == r.entities[2].id);

  CHECK(dataset_pool_ids(datasets[0]).size() == 2);
  CHECK(dataset_pool_ids(datasets[1]).size() == 3);
}

TEST_CASE("empty dataset list pools nothing") {
  EntityPool pool;
  std::vector<LoadedDataset> none;
  collect_entities(none, pool);
  CHECK(pool.size() == 0);
}

TEST_CASE("loading is pure: identical files give identical datasets") {
  TempDir dir;
  const std::string name = dir.file("c.tsv",
                                    "label\turis\ttarget\n"
                                    "X\t\ta\n"
                                    "Y\t\tb\n");
  const auto e = tabular_entry(TaskType::Classification, name);
  const auto d1 = load_dataset(e, dir.path.string());
  const auto d2 = load_dataset(e, dir.path.string());
  const auto& t1 = std::get<TabularDataset>(d1.data);
  const auto& t2 = std::get<TabularDataset>(d2.data);
  CHECK(t1.class_targets == t2.class_targets);
  REQUIRE(t1.entities.size() == t2.entities.size());
  for (size_t i = 0; i < t1.entities.size(); ++i)
    CHECK(t1.entities[i].label == t2.entities[i].label);
}

TEST_CASE("manifest validation") {
  SUBCASE("full benchmark roster counts 26 tasks") {
    const Manifest manifest = load_manifest(kFixtures + "/table1_manifest.json");
    CHECK(validate_manifest(manifest).size() == 26);
  }
  SUBCASE("bundled miniature manifest counts 7 tasks") {
    const Manifest manifest = load_manifest(kFixtures + "/manifest.json");
    CHECK(validate_manifest(manifest).size() == 7);
  }
  SUBCASE("empty manifest yields an empty roster") {
    const Manifest manifest = parse_manifest_json(R"({"datasets": []})", ".");
    CHECK(validate_manifest(manifest).empty());
  }
  SUBCASE("duplicate task/dataset pair is rejected") {
    const Manifest manifest = parse_manifest_json(
        R"({"datasets": [
          {"name": "Cities", "task": "classification", "path": "a.tsv"},
          {"name": "Cities", "task": "classification", "path": "b.tsv"}]})",
        ".");
    CHECK_THROWS_AS(validate_manifest(manifest), ValidationError);
  }
  SUBCASE("same dataset under different tasks is fine") {
    const Manifest manifest = parse_manifest_json(
        R"({"datasets": [
          {"name": "Cities", "task": "classification", "path": "a.tsv"},
          {"name": "Cities", "task": "regression", "path": "a.tsv"}]})",
        ".");
    CHECK(validate_manifest(manifest).size() == 2);
  }
  SUBCASE("unknown task type is rejected at parse time") {
    CHECK_THROWS_WITH_AS(
        parse_manifest_json(
            R"({"datasets": [{"name": "X", "task": "link_prediction", "path": "x.tsv"}]})",
            "."),
        doctest::Contains("unknown task type"), ConfigError);
  }
  SUBCASE("unknown keys are rejected") {
    CHECK_THROWS_AS(parse_manifest_json(
                        R"({"datasets": [{"name": "X", "task": "regression",
                            "path": "x.tsv", "typo_field": 1}]})",
                        "."),
                    ConfigError);
  }
}

TEST_CASE("bundled fixtures load for every task type") {
  const Manifest manifest = load_manifest(kFixtures + "/manifest.json");
  std::vector<LoadedDataset> datasets;
  for (const ManifestEntry& entry : manifest.entries)
    datasets.push_back(load_dataset(entry, manifest.base_dir));

  EntityPool pool;
  collect_entities(datasets, pool);
  CHECK(pool.size() > 20);
  CHECK(pool.size() <= 60);

  size_t total_rows = 0;
  for (const auto& ds : datasets) total_rows += dataset_pool_ids(ds).size();
  CHECK(pool.size() <= total_rows);  // equality only without cross-dataset sharing
}

}  // TEST_SUITE
