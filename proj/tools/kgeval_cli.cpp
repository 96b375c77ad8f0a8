#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "kgeval/orchestrator.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  int64_t seed = -1;
  int threads = -1;
  bool deterministic = false;
  std::string stage_filter;
};

std::set<std::string> parse_stage_filter(const std::string& filter) {
  static const std::set<std::string> known = {"prepare", "preprocess", "map", "run", "report"};
  std::set<std::string> stages;
  std::stringstream ss(filter);
  std::string stage;
  while (std::getline(ss, stage, ',')) {
    if (stage.empty()) continue;
    if (!known.count(stage))
      throw kgeval::ConfigError("unknown stage in --stage-filter: " + stage);
    stages.insert(stage);
  }
  return stages;
}

kgeval::Config make_config(const GlobalOptions& opts) {
  kgeval::Config config = kgeval::load_config(opts.config_path);
  if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
  if (opts.seed >= 0) config.seed = static_cast<uint64_t>(opts.seed);
  if (opts.threads >= 0) config.threads = opts.threads;
  if (opts.deterministic) config.deterministic = true;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph evaluation pipeline: train embeddings, map task datasets, "
               "run downstream tasks, report extrinsic metrics"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "Pipeline configuration (JSON)")
      ->required();
  app.add_option("--out", opts.out_dir, "Output directory (overrides config)");
  app.add_option("--seed", opts.seed, "Global seed (overrides config)");
  app.add_option("--threads", opts.threads, "Worker threads, 0 = all cores");
  app.add_flag("--deterministic", opts.deterministic,
               "Single-threaded bitwise-reproducible mode");
  app.add_option("--stage-filter", opts.stage_filter,
                 "Comma-separated stages to execute for 'all'");

  std::string command;
  for (const char* name : {"prepare", "preprocess", "map", "run", "report", "all"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->callback([&command, name] { command = name; });
  }
  app.get_subcommand("prepare")->description("Load the KG and print its statistics");
  app.get_subcommand("preprocess")->description("Train embeddings and build ANN indices");
  app.get_subcommand("map")->description("Run the mapper chains over the dataset entities");
  app.get_subcommand("run")->description("Execute the task plan");
  app.get_subcommand("report")->description("Aggregate results and emit the report");
  app.get_subcommand("all")->description("Run every stage in order");

  CLI11_PARSE(app, argc, argv);

  try {
    kgeval::Orchestrator orchestrator(make_config(opts));
    if (command == "prepare") {
      orchestrator.prepare();
    } else if (command == "preprocess") {
      orchestrator.preprocess();
    } else if (command == "map") {
      orchestrator.map();
    } else if (command == "run") {
      orchestrator.run();
    } else if (command == "report") {
      orchestrator.report();
    } else if (command == "all") {
      orchestrator.all(parse_stage_filter(opts.stage_filter));
    }
  } catch (const kgeval::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
