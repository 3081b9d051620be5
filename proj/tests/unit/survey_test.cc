#include "prefbasis/survey.h"

#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "httplib.h"
#include "prefbasis/error.h"
#include "prefbasis/rng.h"
#include "test_util.h"

namespace prefbasis {
namespace {

std::vector<MmcTask> Pool(size_t n) {
  std::vector<MmcTask> pool;
  Rng rng(n);
  for (size_t i = 0; i < n; ++i) {
    MmcTask t;
    char id[16];
    std::snprintf(id, sizeof id, "mmc-%05zu", i + 1);
    t.task_id = id;
    t.record_id = "secret-record-" + std::to_string(i);
    t.prompt = "prompt " + std::to_string(i);
    t.response_a = "first answer " + std::to_string(i);
    t.response_b = "second answer " + std::to_string(i);
    t.chosen = i % 3 == 0 ? "B" : "A";
    t.response_order = i % 2 == 0 ? "BA" : "AB";
    std::vector<int> tiers = {1, 2, 3, 4, 5, 6};
    rng.Shuffle(tiers);
    for (int tier : tiers) {
      t.choices.push_back({tier == 6 ? kOtherReasons : "choice " + std::to_string(i) + "." +
                                                           std::to_string(tier),
                           tier});
    }
    t.seed = 1234567 + i;
    pool.push_back(std::move(t));
  }
  return pool;
}

TEST(SurveyStore, PoolOfExactlyTwentyIsAPermutation) {
  testing::TempDir dir;
  SurveyStore store(Pool(20), dir / "log.jsonl");
  const Session s = store.CreateSession(1);
  ASSERT_EQ(s.assigned.size(), 20u);
  std::set<std::string> ids(s.assigned.begin(), s.assigned.end());
  EXPECT_EQ(ids.size(), 20u);
}

TEST(SurveyStore, AssignmentsVaryAcrossSessions) {
  testing::TempDir dir;
  SurveyStore store(Pool(1000), dir / "log.jsonl");
  std::set<std::vector<std::string>> seen;
  for (int i = 0; i < 50; ++i) {
    const Session s = store.CreateSession();
    std::set<std::string> unique(s.assigned.begin(), s.assigned.end());
    EXPECT_EQ(unique.size(), 20u);
    seen.insert(s.assigned);
  }
  EXPECT_EQ(seen.size(), 50u);
  EXPECT_EQ(store.session_count(), 50u);
}

TEST(SurveyStore, SeededAssignmentIsReproducible) {
  testing::TempDir dir;
  SurveyStore store(Pool(100), dir / "log.jsonl");
  EXPECT_EQ(store.CreateSession(9).assigned, store.CreateSession(9).assigned);
}

TEST(SurveyStore, SmallPoolRefusesSessions) {
  testing::TempDir dir;
  SurveyStore store(Pool(19), dir / "log.jsonl");
  EXPECT_THROW(store.CreateSession(), PreconditionError);
  EXPECT_THROW(SurveyStore(Pool(5), dir / "x.jsonl", SurveyConfig{0}), ConfigError);
}

TEST(SurveyStore, WalksTasksInOrderThenSignalsDone) {
  testing::TempDir dir;
  SurveyStore store(Pool(30), dir / "log.jsonl", SurveyConfig{3});
  const Session s = store.CreateSession(2);
  for (size_t i = 0; i < 3; ++i) {
    const MmcTask* t = store.NextTask(s.session_id);
    ASSERT_NE(t, nullptr);
    EXPECT_EQ(t->task_id, s.assigned[i]);
    const SubmitResult r = store.Submit(s.session_id, t->task_id, {2, 6});
    EXPECT_EQ(r.remaining, 2 - i);
    EXPECT_FALSE(r.duplicate);
  }
  EXPECT_EQ(store.NextTask(s.session_id), nullptr);
  EXPECT_THROW(store.Submit(s.session_id, "mmc-00001", {1}), ConflictError);
}

TEST(SurveyStore, StoresSelectionAsSubmitted) {
  testing::TempDir dir;
  SurveyStore store(Pool(30), dir / "log.jsonl", SurveyConfig{2});
  const Session s = store.CreateSession(3);
  store.Submit(s.session_id, s.assigned[0], {6, 2});
  const auto responses = store.Responses();
  ASSERT_EQ(responses.size(), 1u);
  EXPECT_EQ(responses[0].selected, (std::vector<int>{2, 6}));
  EXPECT_EQ(responses[0].source, ResponseSource::kHuman);
  EXPECT_EQ(responses[0].rater_id, s.session_id);
}

TEST(SurveyStore, DuplicateEmptyAndConflictingSubmissions) {
  testing::TempDir dir;
  SurveyStore store(Pool(30), dir / "log.jsonl", SurveyConfig{3});
  const Session s = store.CreateSession(4);
  EXPECT_THROW(store.Submit(s.session_id, s.assigned[0], {}), ValidationError);
  EXPECT_THROW(store.Submit(s.session_id, s.assigned[0], {7}), ValidationError);
  EXPECT_THROW(store.Submit(s.session_id, s.assigned[0], {0}), ValidationError);
  EXPECT_THROW(store.Submit(s.session_id, s.assigned[0], {3, 3}), ValidationError);
  EXPECT_THROW(store.Submit(s.session_id, s.assigned[1], {1}), ConflictError);  // not current
  EXPECT_THROW(store.Submit("nobody", s.assigned[0], {1}), AuthorizationError);
  EXPECT_THROW(store.NextTask("nobody"), AuthorizationError);

  store.Submit(s.session_id, s.assigned[0], {1, 4});
  const SubmitResult again = store.Submit(s.session_id, s.assigned[0], {4, 1});
  EXPECT_TRUE(again.duplicate);
  EXPECT_EQ(again.remaining, 2u);
  EXPECT_THROW(store.Submit(s.session_id, s.assigned[0], {1}), ConflictError);
  EXPECT_EQ(store.Responses().size(), 1u);
}

TEST(SurveyStore, RestartReplaysLog) {
  testing::TempDir dir;
  Session s;
  std::vector<MmcResponse> before;
  {
    SurveyStore store(Pool(40), dir / "log.jsonl", SurveyConfig{5});
    s = store.CreateSession(5);
    store.CreateSession(6);
    store.Submit(s.session_id, s.assigned[0], {1});
    store.Submit(s.session_id, s.assigned[1], {2, 3});
    before = store.Responses();
  }
  SurveyStore store(Pool(40), dir / "log.jsonl", SurveyConfig{5});
  EXPECT_EQ(store.session_count(), 2u);
  EXPECT_EQ(store.Responses(), before);
  EXPECT_EQ(store.NextTask(s.session_id)->task_id, s.assigned[2]);
  const auto found = store.FindSession(s.session_id);
  ASSERT_TRUE(found.has_value());
  EXPECT_EQ(found->assigned, s.assigned);
  EXPECT_EQ(found->completed.size(), 2u);
  EXPECT_TRUE(store.Submit(s.session_id, s.assigned[1], {2, 3}).duplicate);
  EXPECT_EQ(store.Submit(s.session_id, s.assigned[2], {6}).remaining, 2u);
}

TEST(SurveyStore, TornTailIsDropped) {
  testing::TempDir dir;
  Session s;
  {
    SurveyStore store(Pool(40), dir / "log.jsonl", SurveyConfig{5});
    s = store.CreateSession(5);
    store.Submit(s.session_id, s.assigned[0], {1});
  }
  {
    std::ofstream out(dir / "log.jsonl", std::ios::app);
    out << R"({"type":"response","response":{"task_id":")" << s.assigned[1];
  }
  {
    SurveyStore store(Pool(40), dir / "log.jsonl", SurveyConfig{5});
    EXPECT_EQ(store.Responses().size(), 1u);
    store.Submit(s.session_id, s.assigned[1], {3});
  }
  SurveyStore store(Pool(40), dir / "log.jsonl", SurveyConfig{5});
  EXPECT_EQ(store.Responses().size(), 2u);
}

TEST(SurveyStore, LogWithForeignTasksIsRejected) {
  testing::TempDir dir;
  {
    SurveyStore store(Pool(40), dir / "log.jsonl", SurveyConfig{5});
    store.CreateSession(1);
  }
  EXPECT_THROW(SurveyStore(Pool(3), dir / "log.jsonl", SurveyConfig{1}), ValidationError);
}

// Nothing from the answer key or the task's provenance may reach a rater.
void ExpectNoLeak(const Json& view, const MmcTask& task) {
  const std::string text = view.dump();
  for (const char* word : {"tier", "seed", "record_id", "response_order"}) {
    EXPECT_EQ(text.find(word), std::string::npos) << word << " in " << text;
  }
  EXPECT_EQ(text.find(task.record_id), std::string::npos);
  EXPECT_EQ(text.find(std::to_string(task.seed)), std::string::npos);
}

TEST(TaskViewToJson, DisplayOrderAndNoLeaks) {
  for (const MmcTask& t : Pool(12)) {
    const Json v = TaskViewToJson(t, 3, 20);
    ExpectNoLeak(v, t);
    EXPECT_EQ(v["done"], false);
    EXPECT_EQ(v["progress"]["done"], 3);
    ASSERT_EQ(v["choices"].size(), 6u);
    for (size_t i = 0; i < 6; ++i) EXPECT_EQ(v["choices"][i], t.choices[i].text);
    const bool swapped = t.response_order == "BA";
    EXPECT_EQ(v["response_a"], swapped ? t.response_b : t.response_a);
    // "chosen" names the display slot holding the user's pick.
    const std::string shown = v["chosen"] == "A" ? v["response_a"] : v["response_b"];
    EXPECT_EQ(shown, t.chosen == "A" ? t.response_a : t.response_b);
  }
}

class ServerFixture {
 public:
  ServerFixture(const std::filesystem::path& log, std::vector<MmcTask> pool, size_t per_rater)
      : store_(pool, log, SurveyConfig{per_rater}),
        server_(store_, MakeAnswerKey(pool), ServerOptions{"127.0.0.1", 0, "op-token", {}}) {
    std::promise<int> bound;
    auto port = bound.get_future();
    thread_ = std::thread([&] { server_.Run([&](int p) { bound.set_value(p); }); });
    port_ = port.get();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  ~ServerFixture() {
    server_.Stop();
    thread_.join();
  }
  httplib::Client& client() { return *client_; }
  SurveyStore& store() { return store_; }

 private:
  SurveyStore store_;
  SurveyServer server_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

TEST(SurveyServer, RequiresOperatorToken) {
  testing::TempDir dir;
  SurveyStore store(Pool(20), dir / "log.jsonl");
  EXPECT_THROW(SurveyServer(store, {}, ServerOptions{}), ConfigError);
}

TEST(SurveyServer, SessionLifecycleOverHttp) {
  testing::TempDir dir;
  const auto pool = Pool(25);
  ServerFixture f(dir / "log.jsonl", pool, 2);
  auto& c = f.client();

  auto created = c.Post("/api/session");
  ASSERT_TRUE(created);
  ASSERT_EQ(created->status, 200);
  const Json session = Json::parse(created->body);
  const std::string token = session["session_id"];
  EXPECT_EQ(session["total"], 2);

  auto task = c.Get("/api/task?session=" + token);
  ASSERT_EQ(task->status, 200);
  Json view = Json::parse(task->body);
  const std::string first = view["task_id"];
  for (const MmcTask& t : pool) {
    if (t.task_id == first) ExpectNoLeak(view, t);
  }

  auto post = [&](const Json& body) {
    return c.Post("/api/response", body.dump(), "application/json");
  };
  EXPECT_EQ(post({{"session", token}, {"task_id", first}, {"selected", Json::array()}})->status, 400);
  EXPECT_EQ(post({{"session", "bogus"}, {"task_id", first}, {"selected", {1}}})->status, 401);
  EXPECT_EQ(c.Post("/api/response", "not json", "application/json")->status, 400);
  auto ok = post({{"session", token}, {"task_id", first}, {"selected", {2, 6}}});
  ASSERT_EQ(ok->status, 200);
  EXPECT_EQ(Json::parse(ok->body)["remaining"], 1);
  EXPECT_EQ(post({{"session", token}, {"task_id", first}, {"selected", {6, 2}}})->status, 200);
  EXPECT_EQ(post({{"session", token}, {"task_id", first}, {"selected", {1}}})->status, 409);

  view = Json::parse(c.Get("/api/task?session=" + token)->body);
  EXPECT_EQ(view["progress"]["done"], 1);
  ASSERT_EQ(post({{"session", token}, {"task_id", view["task_id"]}, {"selected", {3}}})->status, 200);
  view = Json::parse(c.Get("/api/task?session=" + token)->body);
  EXPECT_EQ(view["done"], true);
  EXPECT_EQ(c.Get("/api/task?session=bogus")->status, 401);

  EXPECT_EQ(c.Get("/api/metrics")->status, 401);
  httplib::Headers wrong = {{"Authorization", "Bearer op-tokeX"}};
  EXPECT_EQ(c.Get("/api/metrics", wrong)->status, 401);
  httplib::Headers right = {{"Authorization", "Bearer op-token"}};
  auto metrics = c.Get("/api/metrics", right);
  ASSERT_EQ(metrics->status, 200);
  const Json m = Json::parse(metrics->body);
  EXPECT_EQ(m["n_responses"], 2);
  EXPECT_EQ(m["sessions"], 1);

  const auto responses = f.store().Responses();
  ASSERT_EQ(responses.size(), 2u);
  EXPECT_EQ(responses[0].selected, (std::vector<int>{2, 6}));
}

TEST(SurveyServer, SmallPoolAnswers503) {
  testing::TempDir dir;
  ServerFixture f(dir / "log.jsonl", Pool(3), 20);
  auto res = f.client().Post("/api/session");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 503);
}

}  // namespace
}  // namespace prefbasis
