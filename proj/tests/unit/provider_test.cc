#include "prefbasis/provider.h"

#include <gtest/gtest.h>
#include <stdlib.h>

#include <thread>

#include "httplib.h"
#include "prefbasis/annotate.h"
#include "prefbasis/error.h"
#include "support/synthetic.h"
#include "test_util.h"

namespace prefbasis {
namespace {

TEST(RequestKind, NamesRoundTrip) {
  for (RequestKind k : {RequestKind::kExtract, RequestKind::kCluster, RequestKind::kJudge}) {
    EXPECT_EQ(RequestKindFromName(RequestKindName(k)), k);
  }
  EXPECT_THROW(RequestKindFromName("summarize"), ValidationError);
}

TEST(MockProvider, DeterministicPerSeedAndPrompt) {
  const Corpus c = FilterCorpus(testing::MakeSyntheticCorpus(20, 2), {});
  MockProvider a(11);
  MockProvider b(11);
  MockProvider other(12);
  int differs = 0;
  for (const ComparisonRecord& r : c) {
    const ProviderRequest req{RequestKind::kExtract, BuildExtractionPrompt(r)};
    const std::string out = a.Complete(req);
    EXPECT_EQ(out, b.Complete(req));
    EXPECT_EQ(out, a.Complete(req));
    EXPECT_NO_THROW(ParseExtractionResponse(out)) << out;
    if (out != other.Complete(req)) ++differs;
  }
  EXPECT_GT(differs, 0);
}

TEST(MockProvider, JudgeAnswersAreValidPositions) {
  MockProvider mock(1);
  for (int i = 0; i < 50; ++i) {
    const std::string out = mock.Complete({RequestKind::kJudge, "task " + std::to_string(i)});
    ASSERT_FALSE(out.empty());
    for (char ch : out) EXPECT_TRUE(ch == ',' || (ch >= '1' && ch <= '6')) << out;
  }
}

TEST(RecordReplay, ReplayReturnsRecordedResponses) {
  testing::TempDir dir;
  int n = 0;
  testing::FnProvider live([&](const ProviderRequest& r) {
    return r.prompt + "#" + std::to_string(n++);
  });
  {
    RecordingProvider rec(live, dir / "t.jsonl");
    EXPECT_EQ(rec.Complete({RequestKind::kExtract, "p"}), "p#0");
    EXPECT_EQ(rec.Complete({RequestKind::kJudge, "p"}), "p#1");
    EXPECT_EQ(rec.Complete({RequestKind::kExtract, "p"}), "p#2");
    EXPECT_EQ(rec.Name(), "fn");
  }
  ReplayProvider replay(dir / "t.jsonl");
  EXPECT_EQ(replay.Complete({RequestKind::kExtract, "p"}), "p#0");
  EXPECT_EQ(replay.Complete({RequestKind::kExtract, "p"}), "p#2");
  EXPECT_EQ(replay.Complete({RequestKind::kExtract, "p"}), "p#2");
  EXPECT_EQ(replay.Complete({RequestKind::kJudge, "p"}), "p#1");
  EXPECT_THROW(replay.Complete({RequestKind::kCluster, "p"}), ProviderError);
  EXPECT_THROW(replay.Complete({RequestKind::kExtract, "q"}), ProviderError);
}

TEST(RecordReplay, MalformedTranscriptIsValidationError) {
  testing::TempDir dir;
  testing::WriteText(dir / "t.jsonl", "{\"kind\":\"extract\"}\n");
  EXPECT_THROW(ReplayProvider(dir / "t.jsonl"), ValidationError);
}

TEST(HttpProvider, MissingKeyIsConfigError) {
  const char* saved = std::getenv("PREFBASIS_API_KEY");
  const std::string keep = saved ? saved : "";
  unsetenv("PREFBASIS_API_KEY");
  EXPECT_THROW(HttpProvider(ProviderConfig{}), ConfigError);
  if (saved) setenv("PREFBASIS_API_KEY", keep.c_str(), 1);
}

TEST(HttpProvider, MalformedEndpointIsConfigError) {
  ProviderConfig c;
  c.endpoint = "api.example.com/v1";
  EXPECT_THROW(HttpProvider(c, "k"), ConfigError);
}

class LocalServer {
 public:
  LocalServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      const Json body = Json::parse(req.body);
      last_model_ = body.at("model").get<std::string>();
      const std::string prompt = body.at("messages").at(0).at("content").get<std::string>();
      if (prompt == "fail") {
        res.status = 429;
        return;
      }
      if (prompt == "garbage") {
        res.set_content("{\"nope\":1}", "application/json");
        return;
      }
      res.set_content(
          Json{{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo:" + prompt}}}}}}}
              .dump(),
          "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }

  int port() const { return port_; }
  std::string last_auth_;
  std::string last_model_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpProvider, TalksChatCompletions) {
  LocalServer server;
  ProviderConfig c;
  c.endpoint = "http://127.0.0.1:" + std::to_string(server.port()) + "/v1/";
  c.model = "test-model";
  c.timeout = std::chrono::milliseconds(5000);
  HttpProvider provider(c, "secret");
  EXPECT_EQ(provider.Complete({RequestKind::kExtract, "hello"}), "echo:hello");
  EXPECT_EQ(server.last_auth_, "Bearer secret");
  EXPECT_EQ(server.last_model_, "test-model");
  EXPECT_EQ(provider.Name(), "test-model");
  try {
    provider.Complete({RequestKind::kJudge, "fail"});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.status(), 429);
  }
  EXPECT_THROW(provider.Complete({RequestKind::kJudge, "garbage"}), ProviderError);
}

TEST(HttpProvider, UnreachableHostIsProviderError) {
  int port;
  {
    httplib::Server s;
    port = s.bind_to_any_port("127.0.0.1");
  }
  ProviderConfig c;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port);
  c.timeout = std::chrono::milliseconds(1000);
  HttpProvider provider(c, "k");
  EXPECT_THROW(provider.Complete({RequestKind::kExtract, "x"}), ProviderError);
}

}  // namespace
}  // namespace prefbasis
