#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kgeval/orchestrator.hpp"

namespace kgeval {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError(where + ": expected an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<MapperStep> parse_chain(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of mapper steps");
  std::vector<MapperStep> chain;
  size_t i = 0;
  for (const auto& step_json : j) {
    const std::string step_where = where + "[" + std::to_string(i++) + "]";
    reject_unknown(step_json, {"type", "threshold"}, step_where);
    if (!step_json.contains("type") || !step_json["type"].is_string())
      throw ConfigError(step_where + ": 'type' (string) is required");
    const std::string type = step_json["type"].get<std::string>();
    MapperStep step;
    if (type == "uri") {
      step.kind = MapperStep::Kind::Uri;
      if (step_json.contains("threshold"))
        throw ConfigError(step_where + ": uri mapper takes no threshold");
    } else if (type == "label") {
      step.kind = MapperStep::Kind::Label;
      if (step_json.contains("threshold")) step.threshold = step_json["threshold"].get<double>();
      if (!(step.threshold > 0.0 && step.threshold <= 1.0))
        throw ConfigError(step_where + ": threshold must lie in (0, 1]");
    } else {
      throw ConfigError(step_where + ": unknown mapper type '" + type + "'");
    }
    chain.push_back(step);
  }
  if (chain.empty()) throw ConfigError(where + ": chain must contain at least one mapper");
  return chain;
}

EmbeddingSpec parse_embedding(const json& j, const std::string& where) {
  reject_unknown(j,
                 {"kind", "dim", "epochs", "learning_rate", "margin", "negatives",
                  "batch_size", "l2_lambda", "walks_per_entity", "depth", "window"},
                 where);
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ConfigError(where + ": 'kind' (string) is required");
  const std::string kind_str = j["kind"].get<std::string>();
  const auto kind = parse_model_kind(kind_str);
  if (!kind) throw ConfigError(where + ": unknown embedding kind '" + kind_str + "'");

  EmbeddingSpec spec;
  spec.kind = *kind;
  auto get_u32 = [&](const char* key, uint32_t fallback) {
    return j.contains(key) ? j[key].get<uint32_t>() : fallback;
  };
  auto get_d = [&](const char* key, double fallback) {
    return j.contains(key) ? j[key].get<double>() : fallback;
  };

  if (*kind == ModelKind::RDF2vec) {
    for (const char* key : {"margin", "batch_size", "l2_lambda"})
      if (j.contains(key))
        throw ConfigError(where + ": '" + key + "' does not apply to rdf2vec");
    spec.rdf2vec.dim = get_u32("dim", spec.rdf2vec.dim);
    spec.rdf2vec.walks_per_entity = get_u32("walks_per_entity", spec.rdf2vec.walks_per_entity);
    spec.rdf2vec.depth = get_u32("depth", spec.rdf2vec.depth);
    spec.rdf2vec.window = get_u32("window", spec.rdf2vec.window);
    spec.rdf2vec.negatives = get_u32("negatives", spec.rdf2vec.negatives);
    spec.rdf2vec.epochs = get_u32("epochs", spec.rdf2vec.epochs);
    spec.rdf2vec.learning_rate = get_d("learning_rate", spec.rdf2vec.learning_rate);
  } else {
    for (const char* key : {"walks_per_entity", "depth", "window"})
      if (j.contains(key))
        throw ConfigError(where + ": '" + key + "' applies only to rdf2vec");
    spec.train.dim = get_u32("dim", spec.train.dim);
    spec.train.epochs = get_u32("epochs", spec.train.epochs);
    spec.train.learning_rate = get_d("learning_rate", spec.train.learning_rate);
    spec.train.margin = get_d("margin", spec.train.margin);
    spec.train.negatives = get_u32("negatives", spec.train.negatives);
    spec.train.batch_size = get_u32("batch_size", spec.train.batch_size);
    spec.train.l2_lambda = get_d("l2_lambda", spec.train.l2_lambda);
  }
  return spec;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).string();
}

}  // namespace

Config parse_config_json(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j,
                 {"kg", "embeddings", "mapping", "manifest", "folds", "seed", "threads",
                  "deterministic", "output"},
                 "config");

  Config config;

  if (!j.contains("kg")) throw ConfigError("config: 'kg' section is required");
  {
    const json& kg = j["kg"];
    reject_unknown(kg, {"paths", "label_predicates", "sameas_predicates", "strict_parse"},
                   "config.kg");
    if (!kg.contains("paths")) throw ConfigError("config.kg: 'paths' is required");
    config.kg_paths = string_list(kg["paths"], "config.kg.paths");
    if (config.kg_paths.empty()) throw ConfigError("config.kg.paths: must be non-empty");
    for (auto& path : config.kg_paths) path = resolve(base_dir, path);
    if (kg.contains("label_predicates"))
      config.graph.label_predicates =
          string_list(kg["label_predicates"], "config.kg.label_predicates");
    if (kg.contains("sameas_predicates"))
      config.graph.sameas_predicates =
          string_list(kg["sameas_predicates"], "config.kg.sameas_predicates");
    if (config.graph.label_predicates.empty())
      throw ConfigError("config.kg.label_predicates: must be non-empty");
    if (config.graph.sameas_predicates.empty())
      throw ConfigError("config.kg.sameas_predicates: must be non-empty");
    if (kg.contains("strict_parse")) config.strict_parse = kg["strict_parse"].get<bool>();
  }

  if (j.contains("seed")) config.seed = j["seed"].get<uint64_t>();

  if (!j.contains("embeddings") || !j["embeddings"].is_array() || j["embeddings"].empty())
    throw ConfigError("config: 'embeddings' must be a non-empty array");
  {
    size_t i = 0;
    std::set<std::string> kinds;
    for (const auto& spec_json : j["embeddings"]) {
      const std::string where = "config.embeddings[" + std::to_string(i++) + "]";
      EmbeddingSpec spec = parse_embedding(spec_json, where);
      if (!kinds.insert(model_kind_name(spec.kind)).second)
        throw ConfigError(where + ": duplicate embedding kind");
      config.embeddings.push_back(std::move(spec));
    }
  }

  // Scenario chains per the evaluation protocol: a shared precision-oriented
  // chain (exact label matches) and a recall-oriented chain at threshold 0.7.
  config.precision_chain = {MapperStep{MapperStep::Kind::Uri, 1.0},
                            MapperStep{MapperStep::Kind::Label, 1.0}};
  config.recall_chain = {MapperStep{MapperStep::Kind::Uri, 1.0},
                         MapperStep{MapperStep::Kind::Label, 0.7}};
  if (j.contains("mapping")) {
    const json& mapping = j["mapping"];
    reject_unknown(mapping, {"precision_chain", "recall_chain"}, "config.mapping");
    if (mapping.contains("precision_chain"))
      config.precision_chain =
          parse_chain(mapping["precision_chain"], "config.mapping.precision_chain");
    if (mapping.contains("recall_chain"))
      config.recall_chain = parse_chain(mapping["recall_chain"], "config.mapping.recall_chain");
  }

  if (!j.contains("manifest") || !j["manifest"].is_string())
    throw ConfigError("config: 'manifest' (string path) is required");
  config.manifest_path = resolve(base_dir, j["manifest"].get<std::string>());

  if (j.contains("folds")) config.folds = j["folds"].get<size_t>();
  if (config.folds < 2) throw ConfigError("config.folds: must be >= 2");
  if (j.contains("threads")) config.threads = j["threads"].get<int>();
  if (config.threads < 0) throw ConfigError("config.threads: must be >= 0");
  if (j.contains("deterministic")) config.deterministic = j["deterministic"].get<bool>();
  if (j.contains("output")) config.output_dir = resolve(base_dir, j["output"].get<std::string>());

  for (const std::string& path : config.kg_paths)
    if (!fs::exists(path)) throw ConfigError("config.kg.paths: no such file: " + path);
  if (!fs::exists(config.manifest_path))
    throw ConfigError("config.manifest: no such file: " + config.manifest_path);

  return config;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str(), fs::path(path).parent_path().string());
}

}  // namespace kgeval
