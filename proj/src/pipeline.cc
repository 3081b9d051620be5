#include "prefbasis/pipeline.h"

#include <csignal>
#include <cstdlib>
#include <functional>
#include <memory>
#include <random>

#include "fmt/format.h"
#include "fmt/ostream.h"
#include "prefbasis/analytics.h"
#include "prefbasis/annotate.h"
#include "prefbasis/cluster.h"
#include "prefbasis/corpus.h"
#include "prefbasis/error.h"
#include "prefbasis/judge.h"
#include "prefbasis/labeled_index.h"
#include "prefbasis/mmc.h"
#include "prefbasis/rng.h"
#include "prefbasis/survey.h"

namespace prefbasis {
namespace {

// Artifact file names and the stage that writes each.
constexpr char kCorpus[] = "corpus.jsonl";
constexpr char kRejects[] = "ingest_rejects.jsonl";
constexpr char kAnnotations[] = "annotations.jsonl";
constexpr char kAnnotationFailures[] = "annotation_failures.jsonl";
constexpr char kPreferenceMap[] = "preference_map.json";
constexpr char kTopicMap[] = "topic_map.json";
constexpr char kPreferenceBasis[] = "preference_basis.json";
constexpr char kTopicBasis[] = "topic_basis.json";
constexpr char kBenchmark[] = "benchmark.jsonl";
constexpr char kAnswerKey[] = "answer_key.jsonl";
constexpr char kBenchmarkLog[] = "benchmark_skipped.jsonl";
constexpr char kJudgeResponses[] = "judge_responses.jsonl";
constexpr char kJudgeFailures[] = "judge_failures.jsonl";
constexpr char kSurveyLog[] = "survey_log.jsonl";

// Mock runs stamp responses with a fixed time so artifacts are reproducible.
constexpr char kMockTimestamp[] = "1970-01-01T00:00:00Z";

const std::map<std::string, std::string>& Producers() {
  static const std::map<std::string, std::string> producers = {
      {kCorpus, "ingest"},          {kAnnotations, "annotate"},  {kPreferenceMap, "cluster"},
      {kTopicMap, "cluster"},       {kPreferenceBasis, "refine"}, {kTopicBasis, "refine"},
      {kBenchmark, "mmc"},          {kAnswerKey, "mmc"},         {kJudgeResponses, "judge"},
  };
  return producers;
}

std::filesystem::path Require(const RunConfig& config, const std::string& artifact) {
  const std::filesystem::path path = config.Path(artifact);
  if (!std::filesystem::exists(path)) {
    auto it = Producers().find(artifact);
    throw PreconditionError(fmt::format("missing {} (produced by the '{}' stage)", path.string(),
                                        it == Producers().end() ? "?" : it->second));
  }
  return path;
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    T out{};
    if constexpr (std::is_floating_point_v<T>) {
      out = static_cast<T>(std::stod(value, &used));
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
      out = static_cast<T>(std::stoull(value, &used));
    } else {
      out = static_cast<T>(std::stoll(value, &used));
    }
    if (used != value.size()) throw std::invalid_argument("trailing text");
    return out;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: '{}' is not a valid number", key, value));
  }
}

std::vector<std::string> SplitList(const std::string& value) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= value.size()) {
    size_t end = value.find(',', start);
    if (end == std::string::npos) end = value.size();
    std::string item = value.substr(start, end - start);
    const size_t b = item.find_first_not_of(" \t");
    const size_t e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    start = end + 1;
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& Setters() {
  static const std::vector<std::pair<std::string, Setter>> setters = {
      {"workdir", [](RunConfig& c, auto&, auto& v) { c.workdir = v; }},
      {"input", [](RunConfig& c, auto&, auto& v) { c.input = v; }},
      {"field-map", [](RunConfig& c, auto&, auto& v) { c.field_map = v; }},
      {"language", [](RunConfig& c, auto&, auto& v) { c.language = v; }},
      {"max-turns", [](RunConfig& c, auto& k, auto& v) { c.max_turns = ParseNumber<int>(k, v); }},
      {"provider", [](RunConfig& c, auto&, auto& v) { c.provider = v; }},
      {"transcripts", [](RunConfig& c, auto&, auto& v) { c.transcripts = v; }},
      {"seed", [](RunConfig& c, auto& k, auto& v) { c.seed = ParseNumber<uint64_t>(k, v); }},
      {"threshold", [](RunConfig& c, auto& k, auto& v) { c.threshold = ParseNumber<double>(k, v); }},
      {"batch-limit",
       [](RunConfig& c, auto& k, auto& v) { c.batch_limit = ParseNumber<size_t>(k, v); }},
      {"cluster-extra-rounds",
       [](RunConfig& c, auto& k, auto& v) { c.cluster_extra_rounds = ParseNumber<int>(k, v); }},
      {"n-tasks", [](RunConfig& c, auto& k, auto& v) { c.n_tasks = ParseNumber<size_t>(k, v); }},
      {"judges", [](RunConfig& c, auto&, auto& v) { c.judges = SplitList(v); }},
      {"responses", [](RunConfig& c, auto&, auto& v) { c.responses = v; }},
      {"tasks-per-rater",
       [](RunConfig& c, auto& k, auto& v) { c.tasks_per_rater = ParseNumber<size_t>(k, v); }},
      {"host", [](RunConfig& c, auto&, auto& v) { c.host = v; }},
      {"port", [](RunConfig& c, auto& k, auto& v) { c.port = ParseNumber<int>(k, v); }},
      {"operator-token", [](RunConfig& c, auto&, auto& v) { c.operator_token = v; }},
      {"static-dir", [](RunConfig& c, auto&, auto& v) { c.static_dir = v; }},
      {"elo-initial",
       [](RunConfig& c, auto& k, auto& v) { c.elo.initial = ParseNumber<double>(k, v); }},
      {"elo-k", [](RunConfig& c, auto& k, auto& v) { c.elo.k = ParseNumber<double>(k, v); }},
      {"elo-scale", [](RunConfig& c, auto& k, auto& v) { c.elo.scale = ParseNumber<double>(k, v); }},
      {"elo-permutations",
       [](RunConfig& c, auto& k, auto& v) { c.elo.permutations = ParseNumber<int>(k, v); }},
      {"endpoint", [](RunConfig& c, auto&, auto& v) { c.provider_config.endpoint = v; }},
      {"model", [](RunConfig& c, auto&, auto& v) { c.provider_config.model = v; }},
      {"max-parallel",
       [](RunConfig& c, auto& k, auto& v) { c.provider_config.max_parallel = ParseNumber<int>(k, v); }},
      {"retry-budget",
       [](RunConfig& c, auto& k, auto& v) { c.provider_config.retry_budget = ParseNumber<int>(k, v); }},
      {"requests-per-second",
       [](RunConfig& c, auto& k, auto& v) {
         c.provider_config.requests_per_second = ParseNumber<double>(k, v);
       }},
      {"timeout-ms",
       [](RunConfig& c, auto& k, auto& v) {
         c.provider_config.timeout = std::chrono::milliseconds(ParseNumber<int64_t>(k, v));
       }},
  };
  return setters;
}

// Provider for one stage. Live calls are recorded so a later run can replay
// them with --provider replay.
class StageProvider {
 public:
  StageProvider(const RunConfig& config, const std::string& stream, uint64_t mock_seed,
                const std::string& model = {}) {
    const std::filesystem::path transcript =
        (config.transcripts.empty() ? config.Path("transcripts") : config.transcripts) /
        fmt::format("{}.jsonl", stream);
    if (config.provider == "mock") {
      owned_ = std::make_unique<MockProvider>(mock_seed);
    } else if (config.provider == "live") {
      ProviderConfig pc = config.provider_config;
      if (!model.empty()) pc.model = model;
      std::filesystem::create_directories(transcript.parent_path());
      inner_ = std::make_unique<HttpProvider>(pc);
      owned_ = std::make_unique<RecordingProvider>(*inner_, transcript);
    } else {
      owned_ = std::make_unique<ReplayProvider>(transcript);
    }
  }

  Provider& get() { return *owned_; }

 private:
  std::unique_ptr<Provider> inner_;
  std::unique_ptr<Provider> owned_;
};

std::string StageSlug(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '.' || c == '_';
    out += ok ? c : '_';
  }
  return out;
}

Corpus LoadWorkCorpus(const RunConfig& config) {
  const LoadResult loaded = LoadCorpus(Require(config, kCorpus));
  if (!loaded.rejects.empty()) {
    throw ValidationError(fmt::format("{}: line {}: {}", config.Path(kCorpus).string(),
                                      loaded.rejects.front().line_number,
                                      loaded.rejects.front().reason));
  }
  return loaded.corpus;
}

struct Loaded {
  std::vector<Annotation> annotations;
  CategoryMap preference_map;
  CategoryMap topic_map;
  Basis preference_basis;
  Basis topic_basis;
};

Loaded LoadLabeled(const RunConfig& config) {
  Loaded l;
  l.annotations = ReadAnnotations(Require(config, kAnnotations));
  l.preference_map = CategoryMapFromJson(ReadJsonFile(Require(config, kPreferenceMap)));
  l.topic_map = CategoryMapFromJson(ReadJsonFile(Require(config, kTopicMap)));
  l.preference_basis = BasisFromJson(ReadJsonFile(Require(config, kPreferenceBasis)));
  l.topic_basis = BasisFromJson(ReadJsonFile(Require(config, kTopicBasis)));
  return l;
}

void Ingest(const RunConfig& config, std::ostream& out) {
  if (config.input.empty()) throw ConfigError("ingest needs --input <file>");
  if (!std::filesystem::exists(config.input)) {
    throw IoError(fmt::format("input {} does not exist", config.input.string()));
  }
  FieldMap map;
  if (config.field_map == "arena") {
    map = ArenaFieldMap();
  } else if (config.field_map == "auto") {
    for (const std::string& line : ReadLines(config.input)) {
      if (line.empty()) continue;
      try {
        const Json first = Json::parse(line);
        if (first.is_object() && !first.contains("record_id") && first.contains("question_id")) {
          map = ArenaFieldMap();
        }
      } catch (const Json::exception&) {
      }
      break;
    }
  }
  const LoadResult loaded = LoadCorpus(config.input, map);
  FilterCriteria criteria;
  criteria.require_language = config.language;
  criteria.max_turns = config.max_turns;
  const Corpus kept = FilterCorpus(loaded.corpus, criteria);
  WriteCorpus(config.Path(kCorpus), kept);
  WriteRejects(config.Path(kRejects), loaded.rejects);
  fmt::print(out, "ingest: {} parsed, {} rejected, {} kept after filtering -> {}\n",
             loaded.corpus.size(), loaded.rejects.size(), kept.size(),
             config.Path(kCorpus).string());
}

void Annotate(const RunConfig& config, std::ostream& out) {
  const Corpus corpus = LoadWorkCorpus(config);
  StageProvider provider(config, "annotate", DeriveSeed(config.seed, "annotate"));
  const std::filesystem::path checkpoint = config.Path("annotate.checkpoint.jsonl");
  const AnnotationSet set =
      AnnotateCorpus(corpus, provider.get(), config.provider_config, {checkpoint});
  WriteAnnotations(config.Path(kAnnotations), set.annotations);
  WriteAnnotationFailures(config.Path(kAnnotationFailures), set.failures);
  std::filesystem::remove(checkpoint);
  fmt::print(out, "annotate: {} annotated, {} failed -> {}\n", set.annotations.size(),
             set.failures.size(), config.Path(kAnnotations).string());
}

void Cluster(const RunConfig& config, std::ostream& out) {
  const std::vector<Annotation> annotations = ReadAnnotations(Require(config, kAnnotations));
  std::string summary;
  for (LabelKind kind : {LabelKind::kPreference, LabelKind::kTopic}) {
    const std::string name(LabelKindName(kind));
    StageProvider provider(config, "cluster-" + name, DeriveSeed(config.seed, "cluster-" + name));
    ClusterOptions options;
    options.batch_limit = config.batch_limit;
    options.seed = DeriveSeed(config.seed, "cluster-order-" + name);
    options.max_extra_rounds = config.cluster_extra_rounds;
    options.state_path = config.Path(fmt::format("cluster_{}.state.json", name));
    options.provider = config.provider_config;
    const std::set<std::string> labels = CollectLabels(annotations, kind);
    const CategoryMap map = ClusterLabels(labels, kind, provider.get(), options);
    WriteJsonFile(config.Path(kind == LabelKind::kPreference ? kPreferenceMap : kTopicMap),
                  CategoryMapToJson(map));
    summary += fmt::format("{}{} {} labels -> {} categories", summary.empty() ? "" : "; ",
                           name, labels.size(), map.categories.size());
  }
  fmt::print(out, "cluster: {}\n", summary);
}

void Refine(const RunConfig& config, std::ostream& out) {
  const std::vector<Annotation> annotations = ReadAnnotations(Require(config, kAnnotations));
  std::string summary;
  for (LabelKind kind : {LabelKind::kPreference, LabelKind::kTopic}) {
    const bool pref = kind == LabelKind::kPreference;
    const CategoryMap map =
        CategoryMapFromJson(ReadJsonFile(Require(config, pref ? kPreferenceMap : kTopicMap)));
    const Basis basis = RefineByThreshold(map, annotations, config.threshold);
    WriteJsonFile(config.Path(pref ? kPreferenceBasis : kTopicBasis), BasisToJson(basis, map));
    summary += fmt::format("{}{} kept={} residual={} coverage={:.4f}", summary.empty() ? "" : "; ",
                           LabelKindName(kind), basis.kept.size(), basis.residual.size(),
                           basis.coverage);
  }
  fmt::print(out, "refine: threshold={} {}\n", config.threshold, summary);
}

void Analyze(const RunConfig& config, std::ostream& out) {
  const Loaded l = LoadLabeled(config);
  const LabeledIndex index(l.annotations, l.preference_map, l.preference_basis, l.topic_map,
                           l.topic_basis);
  const std::filesystem::path dir = config.Path("reports/analytics");
  WriteAnalyticsReports(index, dir);
  fmt::print(out, "analyze: {} records, {} preferences x {} topics -> {}\n",
             index.records().size(), index.kept_preferences().size(), index.kept_topics().size(),
             dir.string());
}

void Mmc(const RunConfig& config, std::ostream& out) {
  const Corpus corpus = LoadWorkCorpus(config);
  const Loaded l = LoadLabeled(config);
  const LabeledIndex index(l.annotations, l.preference_map, l.preference_basis, l.topic_map,
                           l.topic_basis);
  const BenchmarkResult result =
      BuildBenchmark(index, corpus, config.n_tasks, DeriveSeed(config.seed, "mmc"));
  WriteBenchmark(config.Path(kBenchmark), config.Path(kAnswerKey), result.tasks);
  std::vector<Json> skipped;
  for (const BenchmarkSkip& s : result.skipped) {
    skipped.push_back({{"record_id", s.record_id}, {"preference", s.preference}, {"tier", s.tier}});
  }
  WriteJsonLines(config.Path(kBenchmarkLog), skipped);
  fmt::print(out, "mmc: {} tasks from {} eligible records, {} unbuildable skipped -> {}\n",
             result.tasks.size(), result.eligible_records, result.skipped.size(),
             config.Path(kBenchmark).string());
  if (result.shortfall) {
    fmt::print(stderr, "warning: requested {} tasks, only {} buildable\n", config.n_tasks,
               result.tasks.size());
  }
}

std::vector<std::string> JudgeNames(const RunConfig& config) {
  if (!config.judges.empty()) return config.judges;
  if (config.provider == "mock") return {"mock-judge-1", "mock-judge-2", "mock-judge-3"};
  return {config.provider_config.model};
}

void Judge(const RunConfig& config, std::ostream& out) {
  const std::vector<MmcTask> tasks =
      ReadBenchmark(Require(config, kBenchmark), Require(config, kAnswerKey));
  std::vector<std::unique_ptr<StageProvider>> providers;
  std::vector<JudgeSpec> judges;
  for (const std::string& name : JudgeNames(config)) {
    providers.push_back(std::make_unique<StageProvider>(
        config, "judge-" + StageSlug(name), DeriveSeed(config.seed, "judge-" + name), name));
    judges.push_back({name, &providers.back()->get()});
  }
  JudgeOptions options;
  options.checkpoint = config.Path("judge.checkpoint.jsonl");
  if (config.provider == "mock") options.clock = [] { return std::string(kMockTimestamp); };
  const JudgeRun run = RunJudges(tasks, judges, config.provider_config, options);
  WriteResponses(config.Path(kJudgeResponses), run.responses);
  WriteJudgeFailures(config.Path(kJudgeFailures), run.failures);
  std::filesystem::remove(options.checkpoint);
  fmt::print(out, "judge: {} tasks x {} judges: {} responses, {} failures -> {}\n", tasks.size(),
             judges.size(), run.responses.size(), run.failures.size(),
             config.Path(kJudgeResponses).string());
}

void Metrics(const RunConfig& config, std::ostream& out) {
  const std::filesystem::path responses_path =
      config.responses.empty() ? Require(config, kJudgeResponses) : config.responses;
  if (!std::filesystem::exists(responses_path)) {
    throw PreconditionError(fmt::format("missing {}", responses_path.string()));
  }
  const AnswerKey key = ReadAnswerKey(Require(config, kAnswerKey));
  const std::vector<MmcResponse> responses = ReadResponses(responses_path);
  const std::filesystem::path dir = config.Path("reports/metrics");
  WriteMetricsReports(responses, key, dir);
  const MetricsReport report = ComputeMetrics(responses, key);
  std::string ratios;
  for (const RatioValue& v : report.ratios) {
    ratios += fmt::format(" {}={}", v.name, v.defined ? fmt::format("{:.3f}", v.value) : "undefined");
  }
  fmt::print(out, "metrics: {} responses R1={:.3f} R6={:.3f}{} -> {}\n", report.n_responses,
             report.r[0], report.r[5], ratios, dir.string());
}

void Elo(const RunConfig& config, std::ostream& out) {
  const Corpus corpus = LoadWorkCorpus(config);
  const Loaded l = LoadLabeled(config);
  const LabeledIndex index(l.annotations, l.preference_map, l.preference_basis, l.topic_map,
                           l.topic_basis);
  EloConfig elo = config.elo;
  elo.seed = DeriveSeed(config.seed, "elo");
  const std::vector<Match> matches = BuildMatches(corpus, &index);
  const auto tables = ComputePelo(matches, index.kept_preferences(), elo);
  std::vector<std::string> order = {"overall"};
  order.insert(order.end(), index.kept_preferences().begin(), index.kept_preferences().end());
  const std::filesystem::path dir = config.Path("reports/elo");
  WriteEloReports(tables, order, dir);
  const auto ranking = tables.at("overall").Ranking();
  fmt::print(out, "elo: {} matches, {} models, {} subsets, top={} -> {}\n", matches.size(),
             ranking.size(), order.size(), ranking.empty() ? "-" : ranking.front(),
             dir.string());
}

SurveyServer* g_server = nullptr;

extern "C" void StopServer(int) {
  if (g_server != nullptr) g_server->Stop();
}

void Serve(const RunConfig& config, std::ostream& out) {
  const std::vector<MmcTask> pool =
      ReadBenchmark(Require(config, kBenchmark), Require(config, kAnswerKey));
  SurveyStore store(pool, config.Path(kSurveyLog), {config.tasks_per_rater});
  ServerOptions options;
  options.host = config.host;
  options.port = config.port;
  options.static_dir = config.static_dir;
  options.operator_token = config.operator_token;
  bool generated = false;
  if (options.operator_token.empty()) {
    if (const char* env = std::getenv("PREFBASIS_OPERATOR_TOKEN")) options.operator_token = env;
  }
  if (options.operator_token.empty()) {
    std::random_device rd;
    options.operator_token = fmt::format("{:08x}{:08x}{:08x}{:08x}", rd(), rd(), rd(), rd());
    generated = true;
  }
  SurveyServer server(store, MakeAnswerKey(pool), options);
  g_server = &server;
  std::signal(SIGINT, StopServer);
  std::signal(SIGTERM, StopServer);
  server.Run([&](int port) {
    fmt::print(out, "serve: {} tasks, {} sessions on record, listening on http://{}:{}\n",
               pool.size(), store.session_count(), config.host, port);
    if (generated) fmt::print(out, "operator token: {}\n", options.operator_token);
    out.flush();
  });
  g_server = nullptr;
}

}  // namespace

void RunConfig::Set(const std::string& key, const std::string& value) {
  for (const auto& [name, setter] : Setters()) {
    if (name == key) {
      setter(*this, key, value);
      return;
    }
  }
  throw ConfigError(fmt::format("unknown setting '{}'", key));
}

void RunConfig::LoadFile(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError(fmt::format("config file {} does not exist", path.string()));
  }
  size_t line_number = 0;
  for (std::string line : ReadLines(path)) {
    ++line_number;
    if (const size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected key = value", path.string(), line_number));
    }
    auto trim = [](std::string s) {
      const size_t first = s.find_first_not_of(" \t");
      if (first == std::string::npos) return std::string();
      return s.substr(first, s.find_last_not_of(" \t") - first + 1);
    };
    try {
      Set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path.string(), line_number, e.what()));
    }
  }
}

void RunConfig::Validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must be in (0, 1)");
  if (batch_limit < 1 || batch_limit >= 250) throw ConfigError("batch-limit must be in [1, 250)");
  if (provider != "mock" && provider != "live" && provider != "replay") {
    throw ConfigError(fmt::format("provider must be mock, live or replay (got '{}')", provider));
  }
  if (field_map != "auto" && field_map != "arena" && field_map != "canonical") {
    throw ConfigError("field-map must be auto, arena or canonical");
  }
  if (max_turns < 1) throw ConfigError("max-turns must be >= 1");
  if (n_tasks < 1) throw ConfigError("n-tasks must be >= 1");
  if (tasks_per_rater < 1) throw ConfigError("tasks-per-rater must be >= 1");
  if (port < 0 || port > 65535) throw ConfigError("port must be in [0, 65535]");
  if (cluster_extra_rounds < 0) throw ConfigError("cluster-extra-rounds must be >= 0");
  elo.Validate();
  provider_config.Validate();
}

const std::vector<std::string>& RunConfigKeys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [name, setter] : Setters()) out.push_back(name);
    return out;
  }();
  return keys;
}

const std::vector<std::string>& StageNames() {
  static const std::vector<std::string> names = {"ingest", "annotate", "cluster", "refine",
                                                 "analyze", "mmc",     "judge",   "metrics",
                                                 "elo",     "serve"};
  return names;
}

void RunStage(const std::string& stage, const RunConfig& config, std::ostream& out) {
  config.Validate();
  std::filesystem::create_directories(config.workdir);
  static const std::map<std::string, void (*)(const RunConfig&, std::ostream&)> stages = {
      {"ingest", Ingest}, {"annotate", Annotate}, {"cluster", Cluster}, {"refine", Refine},
      {"analyze", Analyze}, {"mmc", Mmc}, {"judge", Judge}, {"metrics", Metrics},
      {"elo", Elo}, {"serve", Serve}};
  if (stage == "pipeline") {
    for (const std::string& name : StageNames()) {
      if (name != "serve") stages.at(name)(config, out);
    }
    return;
  }
  auto it = stages.find(stage);
  if (it == stages.end()) throw ConfigError(fmt::format("unknown stage '{}'", stage));
  it->second(config, out);
}

}  // namespace prefbasis
