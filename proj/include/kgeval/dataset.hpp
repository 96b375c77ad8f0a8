#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kgeval/mapping.hpp"

namespace kgeval {

enum class TaskType : uint8_t {
  Classification,
  Regression,
  Clustering,
  DocumentSimilarity,
  EntityRelatedness,
  SemanticAnalogies,
  Recommendation,
};

const char* task_type_name(TaskType t);
std::optional<TaskType> parse_task_type(std::string_view s);

// Classification / regression / clustering share one shape.
struct TabularDataset {
  TaskType task = TaskType::Classification;
  std::vector<DatasetEntity> entities;
  std::vector<std::string> class_targets;  // classification & clustering gold
  std::vector<double> numeric_targets;     // regression gold
  size_t num_clusters = 0;                 // clustering only
};

struct DocSimDataset {
  struct Doc {
    std::string doc_id;
    std::vector<size_t> entity_rows;  // indexes into `entities`
  };
  struct GoldPair {
    size_t doc_a = 0, doc_b = 0;
    double score = 0.0;
  };
  std::vector<DatasetEntity> entities;
  std::vector<Doc> docs;
  std::vector<GoldPair> gold;
};

struct RelatednessDataset {
  struct Seed {
    DatasetEntity seed;
    std::vector<DatasetEntity> candidates;
    std::vector<int> gold_ranks;  // permutation of 1..m, rank 1 = most related
  };
  std::vector<Seed> seeds;
};

struct AnalogyDataset {
  struct Row {
    DatasetEntity a, b, c, d;
  };
  std::vector<Row> rows;
};

struct RatingsDataset {
  std::vector<DatasetEntity> items;  // deduplicated by (label, uri-set)
  // Positive item rows per user, in file order; users with fewer than two
  // positive ratings are dropped at load time.
  std::vector<std::pair<std::string, std::vector<uint32_t>>> user_positives;
  double threshold = 4.0;
  size_t top_k = 10;
  size_t dropped_users = 0;
  size_t duplicate_ratings = 0;
};

struct ManifestEntry {
  std::string name;
  TaskType task = TaskType::Classification;
  std::string path;                      // single-file formats
  std::string annotations, gold;         // document similarity
  double rating_threshold = 4.0;
  size_t top_k = 10;
  std::optional<size_t> clusters;        // clustering override
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string base_dir;
};

Manifest load_manifest(const std::string& path);
Manifest parse_manifest_json(const std::string& json_text, const std::string& base_dir);

struct TaskRosterItem {
  TaskType task;
  std::string dataset;
};

// Structural check of the task roster: known task types, no duplicate
// (task, dataset) pairs. Does not touch the referenced files.
std::vector<TaskRosterItem> validate_manifest(const Manifest& manifest);

using DatasetData =
    std::variant<TabularDataset, DocSimDataset, RelatednessDataset, AnalogyDataset,
                 RatingsDataset>;

struct LoadedDataset {
  ManifestEntry entry;
  DatasetData data;
};

LoadedDataset load_dataset(const ManifestEntry& entry, const std::string& base_dir);

// Deduplicated pool of dataset entities keyed by (label, uri-set). Interning
// assigns the stable ids the mapping stage works with.
class EntityPool {
 public:
  uint32_t intern(DatasetEntity& e);
  const std::vector<DatasetEntity>& entities() const { return pool_; }
  size_t size() const { return pool_.size(); }

 private:
  std::unordered_map<std::string, uint32_t> key_to_id_;
  std::vector<DatasetEntity> pool_;
};

// Interns every entity of every dataset, rewriting DatasetEntity::id in place.
void collect_entities(std::span<LoadedDataset> datasets, EntityPool& pool);

// Distinct pool ids referenced by one dataset (coverage denominator).
std::vector<uint32_t> dataset_pool_ids(const LoadedDataset& dataset);

}  // namespace kgeval
