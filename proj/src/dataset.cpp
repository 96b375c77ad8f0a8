#include "kgeval/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace kgeval {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct TsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<size_t> row_lines;

  size_t column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ValidationError(path + ": missing column '" + name + "'");
    return static_cast<size_t>(it - header.begin());
  }
  std::optional<size_t> column_opt(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<size_t>(it - header.begin());
  }
  const std::string& cell(size_t row, size_t col) const { return rows[row][col]; }
  [[noreturn]] void fail(size_t row, const std::string& msg) const {
    throw ValidationError(path + ":" + std::to_string(row_lines[row]) + ": " + msg);
  }
};

std::vector<std::string> split_tsv_line(const std::string& line) {
  std::vector<std::string> cols;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cols;
}

TsvTable read_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  TsvTable table;
  table.path = path;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_tsv_line(line);
    if (table.header.empty()) {
      table.header = std::move(cols);
      continue;
    }
    if (cols.size() != table.header.size())
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " columns, got " +
                            std::to_string(cols.size()));
    table.rows.push_back(std::move(cols));
    table.row_lines.push_back(line_no);
  }
  if (table.header.empty()) throw ValidationError(path + ": empty file");
  return table;
}

std::vector<std::string> split_uris(const std::string& cell) {
  std::vector<std::string> uris;
  std::istringstream is(cell);
  std::string uri;
  while (is >> uri) uris.push_back(uri);
  return uris;
}

DatasetEntity make_entity(const TsvTable& table, size_t row, size_t label_col,
                          std::optional<size_t> uris_col) {
  DatasetEntity e;
  e.label = table.cell(row, label_col);
  if (e.label.empty()) table.fail(row, "entity label must be non-empty");
  if (uris_col) e.uris = split_uris(table.cell(row, *uris_col));
  return e;
}

double parse_finite(const TsvTable& table, size_t row, size_t col, const char* what) {
  double v;
  try {
    v = std::stod(table.cell(row, col));
  } catch (const std::exception&) {
    table.fail(row, std::string("cannot parse ") + what + " '" + table.cell(row, col) + "'");
  }
  if (!std::isfinite(v)) table.fail(row, std::string(what) + " must be finite");
  return v;
}

TabularDataset load_tabular(const ManifestEntry& entry, const std::string& path) {
  TsvTable table = read_tsv(path);
  const size_t label_col = table.column("label");
  const auto uris_col = table.column_opt("uris");
  const size_t target_col = table.column("target");

  TabularDataset ds;
  ds.task = entry.task;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    ds.entities.push_back(make_entity(table, r, label_col, uris_col));
    if (entry.task == TaskType::Regression) {
      ds.numeric_targets.push_back(parse_finite(table, r, target_col, "regression target"));
    } else {
      const std::string& target = table.cell(r, target_col);
      if (target.empty()) table.fail(r, "target must be non-empty");
      ds.class_targets.push_back(target);
    }
  }
  if (ds.entities.empty()) throw ValidationError(path + ": dataset has no rows");

  if (entry.task != TaskType::Regression) {
    std::set<std::string> distinct(ds.class_targets.begin(), ds.class_targets.end());
    if (distinct.size() < 2)
      throw ValidationError(path + ": needs at least 2 distinct classes/clusters");
    if (entry.task == TaskType::Clustering)
      ds.num_clusters = entry.clusters.value_or(distinct.size());
  }
  return ds;
}

DocSimDataset load_docsim(const ManifestEntry& entry, const std::string& base_dir) {
  const std::string ann_path = (fs::path(base_dir) / entry.annotations).string();
  const std::string gold_path = (fs::path(base_dir) / entry.gold).string();
  TsvTable ann = read_tsv(ann_path);
  const size_t doc_col = ann.column("doc_id");
  const size_t label_col = ann.column("label");
  const auto uris_col = ann.column_opt("uris");

  DocSimDataset ds;
  std::map<std::string, size_t> doc_index;
  for (size_t r = 0; r < ann.rows.size(); ++r) {
    const std::string& doc_id = ann.cell(r, doc_col);
    if (doc_id.empty()) ann.fail(r, "doc_id must be non-empty");
    auto [it, inserted] = doc_index.emplace(doc_id, ds.docs.size());
    if (inserted) ds.docs.push_back({doc_id, {}});
    ds.entities.push_back(make_entity(ann, r, label_col, uris_col));
    ds.docs[it->second].entity_rows.push_back(ds.entities.size() - 1);
  }
  if (ds.docs.size() < 2) throw ValidationError(ann_path + ": needs at least 2 documents");

  TsvTable gold = read_tsv(gold_path);
  const size_t a_col = gold.column("doc_a");
  const size_t b_col = gold.column("doc_b");
  const size_t score_col = gold.column("score");
  for (size_t r = 0; r < gold.rows.size(); ++r) {
    DocSimDataset::GoldPair pair;
    auto a_it = doc_index.find(gold.cell(r, a_col));
    auto b_it = doc_index.find(gold.cell(r, b_col));
    if (a_it == doc_index.end()) gold.fail(r, "unknown doc_a '" + gold.cell(r, a_col) + "'");
    if (b_it == doc_index.end()) gold.fail(r, "unknown doc_b '" + gold.cell(r, b_col) + "'");
    pair.doc_a = a_it->second;
    pair.doc_b = b_it->second;
    pair.score = parse_finite(gold, r, score_col, "gold score");
    ds.gold.push_back(pair);
  }
  if (ds.gold.empty()) throw ValidationError(gold_path + ": no gold pairs");
  return ds;
}

RelatednessDataset load_relatedness(const std::string& path) {
  TsvTable table = read_tsv(path);
  const size_t seed_label = table.column("seed_label");
  const auto seed_uris = table.column_opt("seed_uris");
  const size_t cand_label = table.column("candidate_label");
  const auto cand_uris = table.column_opt("candidate_uris");
  const size_t rank_col = table.column("rank");

  RelatednessDataset ds;
  std::map<std::string, size_t> seed_index;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& seed = table.cell(r, seed_label);
    auto [it, inserted] = seed_index.emplace(seed, ds.seeds.size());
    if (inserted) {
      RelatednessDataset::Seed s;
      s.seed = make_entity(table, r, seed_label, seed_uris);
      ds.seeds.push_back(std::move(s));
    }
    RelatednessDataset::Seed& s = ds.seeds[it->second];
    s.candidates.push_back(make_entity(table, r, cand_label, cand_uris));
    const double rank = parse_finite(table, r, rank_col, "rank");
    if (rank < 1 || rank != std::floor(rank)) table.fail(r, "rank must be a positive integer");
    s.gold_ranks.push_back(static_cast<int>(rank));
  }

  for (const auto& s : ds.seeds) {
    std::vector<int> sorted = s.gold_ranks;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != static_cast<int>(i + 1))
        throw ValidationError(path + ": seed '" + s.seed.label +
                              "' ranks are not a permutation of 1.." +
                              std::to_string(sorted.size()));
    }
  }
  if (ds.seeds.empty()) throw ValidationError(path + ": no seeds");
  return ds;
}

AnalogyDataset load_analogies(const std::string& path) {
  TsvTable table = read_tsv(path);
  const char* names[4] = {"a", "b", "c", "d"};
  size_t label_cols[4];
  std::optional<size_t> uris_cols[4];
  for (int i = 0; i < 4; ++i) {
    label_cols[i] = table.column(std::string(names[i]) + "_label");
    uris_cols[i] = table.column_opt(std::string(names[i]) + "_uris");
  }
  AnalogyDataset ds;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    AnalogyDataset::Row row;
    row.a = make_entity(table, r, label_cols[0], uris_cols[0]);
    row.b = make_entity(table, r, label_cols[1], uris_cols[1]);
    row.c = make_entity(table, r, label_cols[2], uris_cols[2]);
    row.d = make_entity(table, r, label_cols[3], uris_cols[3]);
    ds.rows.push_back(std::move(row));
  }
  if (ds.rows.empty()) throw ValidationError(path + ": no analogy rows");
  return ds;
}

RatingsDataset load_ratings(const ManifestEntry& entry, const std::string& path) {
  TsvTable table = read_tsv(path);
  const size_t user_col = table.column("user_id");
  const size_t label_col = table.column("label");
  const auto uris_col = table.column_opt("uris");
  const size_t rating_col = table.column("rating");

  RatingsDataset ds;
  ds.threshold = entry.rating_threshold;
  ds.top_k = entry.top_k;
  if (ds.top_k == 0) throw ConfigError(path + ": top_k must be >= 1");

  std::unordered_map<std::string, uint32_t> item_index;
  std::map<std::string, std::vector<uint32_t>> positives;  // ordered by user id
  std::set<std::pair<std::string, uint32_t>> seen;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    DatasetEntity item = make_entity(table, r, label_col, uris_col);
    std::string key = item.label;
    key.push_back('\x1f');
    {
      std::vector<std::string> uris = item.uris;
      std::sort(uris.begin(), uris.end());
      for (const auto& u : uris) {
        key += u;
        key.push_back('\x1f');
      }
    }
    auto [it, inserted] = item_index.emplace(std::move(key), ds.items.size());
    if (inserted) ds.items.push_back(std::move(item));
    const uint32_t item_row = it->second;

    const std::string& user = table.cell(r, user_col);
    if (user.empty()) table.fail(r, "user_id must be non-empty");
    const double rating = parse_finite(table, r, rating_col, "rating");
    if (!seen.insert({user, item_row}).second) {
      ++ds.duplicate_ratings;  // keep first occurrence
      continue;
    }
    if (rating >= ds.threshold) positives[user].push_back(item_row);
  }

  for (auto& [user, items] : positives) {
    if (items.size() < 2) {
      ++ds.dropped_users;
      continue;
    }
    ds.user_positives.emplace_back(user, std::move(items));
  }
  if (ds.user_positives.empty())
    throw ValidationError(path + ": no user has two or more positive ratings");
  return ds;
}

ManifestEntry parse_manifest_entry(const json& j, size_t index) {
  static const std::set<std::string> known_keys = {
      "name", "task", "path", "annotations", "gold", "rating_threshold", "top_k", "clusters"};
  const std::string where = "datasets[" + std::to_string(index) + "]";
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known_keys.count(it.key()))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
  ManifestEntry entry;
  if (!j.contains("name") || !j["name"].is_string())
    throw ConfigError(where + ": 'name' (string) is required");
  entry.name = j["name"].get<std::string>();
  if (!j.contains("task") || !j["task"].is_string())
    throw ConfigError(where + ": 'task' (string) is required");
  const std::string task_str = j["task"].get<std::string>();
  auto task = parse_task_type(task_str);
  if (!task) throw ConfigError(where + ": unknown task type '" + task_str + "'");
  entry.task = *task;

  if (entry.task == TaskType::DocumentSimilarity) {
    if (!j.contains("annotations") || !j.contains("gold"))
      throw ConfigError(where + ": document_similarity needs 'annotations' and 'gold'");
    entry.annotations = j["annotations"].get<std::string>();
    entry.gold = j["gold"].get<std::string>();
  } else {
    if (!j.contains("path")) throw ConfigError(where + ": 'path' is required");
    entry.path = j["path"].get<std::string>();
  }
  if (j.contains("rating_threshold")) entry.rating_threshold = j["rating_threshold"].get<double>();
  if (j.contains("top_k")) entry.top_k = j["top_k"].get<size_t>();
  if (j.contains("clusters")) entry.clusters = j["clusters"].get<size_t>();
  return entry;
}

}  // namespace

const char* task_type_name(TaskType t) {
  switch (t) {
    case TaskType::Classification: return "classification";
    case TaskType::Regression: return "regression";
    case TaskType::Clustering: return "clustering";
    case TaskType::DocumentSimilarity: return "document_similarity";
    case TaskType::EntityRelatedness: return "entity_relatedness";
    case TaskType::SemanticAnalogies: return "semantic_analogies";
    case TaskType::Recommendation: return "recommendation";
  }
  return "?";
}

std::optional<TaskType> parse_task_type(std::string_view s) {
  for (TaskType t : {TaskType::Classification, TaskType::Regression, TaskType::Clustering,
                     TaskType::DocumentSimilarity, TaskType::EntityRelatedness,
                     TaskType::SemanticAnalogies, TaskType::Recommendation}) {
    if (s == task_type_name(t)) return t;
  }
  return std::nullopt;
}

Manifest parse_manifest_json(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  if (!j.is_object() || !j.contains("datasets") || !j["datasets"].is_array())
    throw ConfigError("manifest: expected object with a 'datasets' array");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "datasets")
      throw ConfigError("manifest: unknown key '" + it.key() + "'");

  Manifest manifest;
  manifest.base_dir = base_dir;
  size_t index = 0;
  for (const json& entry : j["datasets"])
    manifest.entries.push_back(parse_manifest_entry(entry, index++));
  return manifest;
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest_json(buf.str(), fs::path(path).parent_path().string());
}

std::vector<TaskRosterItem> validate_manifest(const Manifest& manifest) {
  std::set<std::pair<TaskType, std::string>> seen;
  std::vector<TaskRosterItem> roster;
  for (const ManifestEntry& entry : manifest.entries) {
    if (!seen.insert({entry.task, entry.name}).second)
      throw ValidationError("duplicate manifest entry (" +
                            std::string(task_type_name(entry.task)) + ", " + entry.name + ")");
    roster.push_back({entry.task, entry.name});
  }
  return roster;
}

LoadedDataset load_dataset(const ManifestEntry& entry, const std::string& base_dir) {
  const std::string path = (fs::path(base_dir) / entry.path).string();
  LoadedDataset out;
  out.entry = entry;
  switch (entry.task) {
    case TaskType::Classification:
    case TaskType::Regression:
    case TaskType::Clustering:
      out.data = load_tabular(entry, path);
      break;
    case TaskType::DocumentSimilarity:
      out.data = load_docsim(entry, base_dir);
      break;
    case TaskType::EntityRelatedness:
      out.data = load_relatedness(path);
      break;
    case TaskType::SemanticAnalogies:
      out.data = load_analogies(path);
      break;
    case TaskType::Recommendation:
      out.data = load_ratings(entry, path);
      break;
  }
  return out;
}

uint32_t EntityPool::intern(DatasetEntity& e) {
  std::string key = e.label;
  key.push_back('\x1f');
  std::vector<std::string> uris = e.uris;
  std::sort(uris.begin(), uris.end());
  uris.erase(std::unique(uris.begin(), uris.end()), uris.end());
  for (const auto& u : uris) {
    key += u;
    key.push_back('\x1f');
  }
  auto [it, inserted] = key_to_id_.emplace(std::move(key), static_cast<uint32_t>(pool_.size()));
  if (inserted) {
    DatasetEntity pooled = e;
    pooled.id = it->second;
    pool_.push_back(std::move(pooled));
  }
  e.id = it->second;
  return it->second;
}

void collect_entities(std::span<LoadedDataset> datasets, EntityPool& pool) {
  auto visit_entity = [&](DatasetEntity& e) { pool.intern(e); };
  for (LoadedDataset& ds : datasets) {
    std::visit(
        [&](auto& data) {
          using T = std::decay_t<decltype(data)>;
          if constexpr (std::is_same_v<T, TabularDataset>) {
            for (auto& e : data.entities) visit_entity(e);
          } else if constexpr (std::is_same_v<T, DocSimDataset>) {
            for (auto& e : data.entities) visit_entity(e);
          } else if constexpr (std::is_same_v<T, RelatednessDataset>) {
            for (auto& s : data.seeds) {
              visit_entity(s.seed);
              for (auto& c : s.candidates) visit_entity(c);
            }
          } else if constexpr (std::is_same_v<T, AnalogyDataset>) {
            for (auto& row : data.rows) {
              visit_entity(row.a);
              visit_entity(row.b);
              visit_entity(row.c);
              visit_entity(row.d);
            }
          } else if constexpr (std::is_same_v<T, RatingsDataset>) {
            for (auto& e : data.items) visit_entity(e);
          }
        },
        ds.data);
  }
}

std::vector<uint32_t> dataset_pool_ids(const LoadedDataset& dataset) {
  std::vector<uint32_t> ids;
  auto add = [&](const DatasetEntity& e) { ids.push_back(e.id); };
  std::visit(
      [&](const auto& data) {
        using T = std::decay_t<decltype(data)>;
        if constexpr (std::is_same_v<T, TabularDataset>) {
          for (const auto& e : data.entities) add(e);
        } else if constexpr (std::is_same_v<T, DocSimDataset>) {
          for (const auto& e : data.entities) add(e);
        } else if constexpr (std::is_same_v<T, RelatednessDataset>) {
          for (const auto& s : data.seeds) {
            add(s.seed);
            for (const auto& c : s.candidates) add(c);
          }
        } else if constexpr (std::is_same_v<T, AnalogyDataset>) {
          for (const auto& row : data.rows) {
            add(row.a);
            add(row.b);
            add(row.c);
            add(row.d);
          }
        } else if constexpr (std::is_same_v<T, RatingsDataset>) {
          for (const auto& e : data.items) add(e);
        }
      },
      dataset.data);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace kgeval
