#include "prefbasis/pipeline.h"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <sstream>

#include "prefbasis/error.h"
#include "support/synthetic.h"
#include "test_util.h"

namespace prefbasis {
namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr together
};

CommandResult RunCli(const std::string& args) {
  const std::string command = std::string(PREFBASIS_CLI_PATH) + " " + args + " 2>&1";
  CommandResult result;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  char buffer[4096];
  size_t n;
  while ((n = fread(buffer, 1, sizeof buffer, pipe)) > 0) result.output.append(buffer, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::map<std::string, std::string> Snapshot(const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      files[std::filesystem::relative(entry.path(), root).string()] = ReadFile(entry.path());
    }
  }
  return files;
}

TEST(RunConfig, SetParsesEveryKey) {
  RunConfig c;
  c.Set("batch-limit", "50");
  c.Set("threshold", "0.05");
  c.Set("judges", "gpt-4o, claude");
  c.Set("elo-k", "8");
  c.Set("timeout-ms", "1500");
  c.Set("max-parallel", "2");
  EXPECT_EQ(c.batch_limit, 50u);
  EXPECT_DOUBLE_EQ(c.threshold, 0.05);
  EXPECT_EQ(c.judges, (std::vector<std::string>{"gpt-4o", "claude"}));
  EXPECT_DOUBLE_EQ(c.elo.k, 8.0);
  EXPECT_EQ(c.provider_config.timeout, std::chrono::milliseconds(1500));
  EXPECT_EQ(c.provider_config.max_parallel, 2);
  EXPECT_THROW(c.Set("no-such-key", "1"), ConfigError);
  EXPECT_THROW(c.Set("n-tasks", "many"), ConfigError);
  EXPECT_THROW(c.Set("n-tasks", "-3"), ConfigError);
  for (const std::string& key : RunConfigKeys()) {
    EXPECT_EQ(key.find('_'), std::string::npos) << key;
  }
}

TEST(RunConfig, ValidateRanges) {
  RunConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.threshold = 0.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.batch_limit = 250;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.provider = "cloud";
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.port = 70000;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(RunConfig, LoadFile) {
  testing::TempDir dir;
  testing::WriteText(dir / "run.conf",
                     "# comment\nseed = 42\n\nn-tasks=10   # trailing\nworkdir = out dir\n");
  RunConfig c;
  c.LoadFile(dir / "run.conf");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.n_tasks, 10u);
  EXPECT_EQ(c.workdir, "out dir");
  testing::WriteText(dir / "bad.conf", "seed 42\n");
  EXPECT_THROW(c.LoadFile(dir / "bad.conf"), ConfigError);
  EXPECT_THROW(c.LoadFile(dir / "absent.conf"), ConfigError);
}

TEST(RunStage, MissingArtifactNamesProducingStage) {
  testing::TempDir dir;
  RunConfig c;
  c.workdir = dir / "w";
  std::ostringstream out;
  try {
    RunStage("mmc", c, out);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("'ingest' stage"), std::string::npos) << e.what();
  }
  EXPECT_THROW(RunStage("teleport", c, out), ConfigError);
}

TEST(RunStage, StagesComposeToThePipeline) {
  testing::TempDir dir;
  testing::WriteArenaJsonl(dir / "raw.jsonl", testing::MakeSyntheticCorpus(150, 8));
  RunConfig c;
  c.input = dir / "raw.jsonl";
  c.seed = 3;
  c.n_tasks = 40;
  c.elo.permutations = 5;

  std::ostringstream out;
  c.workdir = dir / "whole";
  RunStage("pipeline", c, out);
  c.workdir = dir / "parts";
  for (const std::string& stage : StageNames()) {
    if (stage != "serve") RunStage(stage, c, out);
  }
  const auto whole = Snapshot(dir / "whole");
  const auto parts = Snapshot(dir / "parts");
  EXPECT_EQ(whole.size(), parts.size());
  for (const auto& [name, content] : whole) {
    ASSERT_EQ(parts.count(name), 1u) << name;
    EXPECT_EQ(parts.at(name), content) << name;
  }
  for (const char* name : {"corpus.jsonl", "annotations.jsonl", "preference_basis.json",
                           "benchmark.jsonl", "answer_key.jsonl", "judge_responses.jsonl",
                           "reports/metrics/metrics.json", "reports/elo/elo_rankings.csv",
                           "reports/analytics/preference_distribution.csv"}) {
    EXPECT_EQ(whole.count(name), 1u) << name;
  }
  EXPECT_NE(out.str().find("mmc"), std::string::npos);
}

TEST(Cli, UnknownSubcommandPrintsUsage) {
  const CommandResult r = RunCli("frobnicate");
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.output.find("pipeline"), std::string::npos) << r.output;
}

TEST(Cli, NoSubcommandIsAnError) {
  const CommandResult r = RunCli("");
  EXPECT_NE(r.exit_code, 0);
}

TEST(Cli, HelpListsStages) {
  const CommandResult r = RunCli("--help");
  EXPECT_EQ(r.exit_code, 0);
  for (const std::string& stage : StageNames()) {
    EXPECT_NE(r.output.find(stage), std::string::npos) << stage;
  }
}

TEST(Cli, BadConfigExitsWithUsageCode) {
  const CommandResult r = RunCli("ingest --threshold 2");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("threshold"), std::string::npos);
}

TEST(Cli, MissingArtifactExitsNonzero) {
  testing::TempDir dir;
  const CommandResult r = RunCli("judge --workdir " + (dir / "w").string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("'mmc' stage"), std::string::npos) << r.output;
}

TEST(Cli, FlagsOverrideConfigFile) {
  testing::TempDir dir;
  testing::WriteText(dir / "raw.jsonl", "");
  testing::WriteArenaJsonl(dir / "raw.jsonl", testing::MakeSyntheticCorpus(20, 1));
  testing::WriteText(dir / "run.conf", "workdir = " + (dir / "from_file").string() +
                                           "\ninput = " + (dir / "raw.jsonl").string() + "\n");
  const CommandResult r = RunCli("ingest --config " + (dir / "run.conf").string() +
                                 " --workdir " + (dir / "from_flag").string());
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(dir / "from_flag" / "corpus.jsonl"));
  EXPECT_FALSE(std::filesystem::exists(dir / "from_file"));
}

}  // namespace
}  // namespace prefbasis
