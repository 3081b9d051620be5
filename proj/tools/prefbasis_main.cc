// prefbasis command-line entry point: one subcommand per pipeline stage.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "fmt/format.h"
#include "prefbasis/error.h"
#include "prefbasis/pipeline.h"

namespace {

const std::map<std::string, std::string>& StageHelp() {
  static const std::map<std::string, std::string> help = {
      {"ingest", "load and filter a raw comparison file into corpus.jsonl"},
      {"annotate", "extract preferences, topics and persona per record"},
      {"cluster", "group raw labels into categories"},
      {"refine", "threshold categories into the kept basis"},
      {"analyze", "write distribution and granular-frequency reports"},
      {"mmc", "build the multiple-multiple-choice benchmark"},
      {"judge", "answer benchmark tasks with LLM judges"},
      {"metrics", "compute R-fractions and probability ratios"},
      {"elo", "overall and per-preference Elo rankings"},
      {"serve", "run the human survey HTTP service"},
      {"pipeline", "run ingest through elo in order"},
  };
  return help;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Preference-basis toolkit: extract, cluster, refine, validate and rank.",
               "prefbasis");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  app.add_option("--config", config_file, "key = value settings file (flags override it)");
  std::map<std::string, std::string> flags;
  for (const std::string& key : prefbasis::RunConfigKeys()) {
    app.add_option("--" + key, flags[key]);
  }

  std::vector<std::string> order = prefbasis::StageNames();
  order.push_back("pipeline");
  for (const std::string& name : order) app.add_subcommand(name, StageHelp().at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  prefbasis::RunConfig config;
  try {
    if (!config_file.empty()) config.LoadFile(config_file);
    for (const std::string& key : prefbasis::RunConfigKeys()) {
      if (app.count("--" + key) > 0) config.Set(key, flags[key]);
    }
    prefbasis::RunStage(app.get_subcommands().front()->get_name(), config, std::cout);
  } catch (const prefbasis::ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
