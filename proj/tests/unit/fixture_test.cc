#include "restcheck/fixture.h"

#include <gtest/gtest.h>

#include <regex>
#include <set>
#include <thread>

#include "httplib.h"
#include "restcheck/error.h"
#include "restcheck/json_util.h"
#include "restcheck/student.h"

namespace restcheck {
namespace {

constexpr char kJson[] = "application/json";

class FixtureTest : public ::testing::Test {
 protected:
  void start(BugMode mode = BugMode::kAtomic, bool allow_reset = true) {
    FixtureOptions options;
    options.mode = mode;
    options.allow_reset = allow_reset;
    server_ = std::make_unique<FixtureServer>(student_spec(), options);
    server_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", server_->port());
  }

  Json create(const Json& body) {
    auto res = client_->Post("/students", body.dump(), kJson);
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    return Json::parse(res->body);
  }

  Json body() const {
    return Json{{"firstName", "Ana"}, {"lastName", "Silva"}, {"email", "a@b.c"}, {"age", 20}, {"phone", "1"}};
  }

  std::unique_ptr<FixtureServer> server_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(FixtureTest, PostReturnsObjectWithHexId) {
  start();
  const Json created = create(body());
  ASSERT_TRUE(created.contains("id"));
  EXPECT_TRUE(std::regex_match(created["id"].get<std::string>(), std::regex("[0-9A-F]{12}")));
  Json expected = body();
  expected["id"] = created["id"];
  EXPECT_EQ(created, expected);
  EXPECT_EQ(server_->object_count("student"), 1u);
}

TEST_F(FixtureTest, GetMissingIs404) {
  start();
  auto res = client_->Get("/students/000000000000");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(FixtureTest, CrudRoundTrip) {
  start();
  const Json created = create(body());
  const std::string id = created["id"];
  auto got = client_->Get("/students/" + id);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->status, 200);
  EXPECT_EQ(Json::parse(got->body), created);

  Json replacement = body();
  replacement["age"] = 30;
  auto put = client_->Put("/students/" + id, replacement.dump(), kJson);
  ASSERT_TRUE(put);
  EXPECT_EQ(put->status, 200);
  replacement["id"] = id;
  EXPECT_EQ(Json::parse(put->body), replacement);

  auto patch = client_->Patch("/students/" + id, Json{{"email", "x@y.z"}}.dump(), kJson);
  ASSERT_TRUE(patch);
  EXPECT_EQ(patch->status, 200);
  replacement["email"] = "x@y.z";
  EXPECT_EQ(Json::parse(patch->body), replacement);

  auto all = client_->Get("/students");
  ASSERT_TRUE(all);
  EXPECT_EQ(Json::parse(all->body), Json::array({replacement}));

  auto del = client_->Delete("/students/" + id);
  ASSERT_TRUE(del);
  EXPECT_EQ(del->status, 200);
  EXPECT_EQ(Json::parse(del->body), Json(id));

  EXPECT_EQ(client_->Delete("/students/" + id)->status, 404);
  EXPECT_EQ(client_->Put("/students/" + id, body().dump(), kJson)->status, 404);
  EXPECT_EQ(client_->Patch("/students/" + id, body().dump(), kJson)->status, 404);
}

TEST_F(FixtureTest, UnusedMethodIs405) {
  start();
  EXPECT_EQ(client_->Post("/students/ABC", "{}", kJson)->status, 405);
  EXPECT_EQ(client_->Delete("/students")->status, 405);
  EXPECT_EQ(client_->Put("/students", "{}", kJson)->status, 405);
}

TEST_F(FixtureTest, MalformedJsonIs400) {
  start();
  EXPECT_EQ(client_->Post("/students", "{oops", kJson)->status, 400);
  EXPECT_EQ(client_->Post("/students", "[1,2]", kJson)->status, 400);
  const std::string id = create(body())["id"];
  EXPECT_EQ(client_->Put("/students/" + id, "not json", kJson)->status, 400);
  EXPECT_EQ(server_->object_count("student"), 1u);
}

TEST_F(FixtureTest, ResetEmptiesStoreAndIsIdempotent) {
  start();
  create(body());
  create(body());
  EXPECT_EQ(client_->Post("/reset", "", kJson)->status, 200);
  EXPECT_EQ(Json::parse(client_->Get("/students")->body), Json::array());
  EXPECT_EQ(client_->Post("/reset", "", kJson)->status, 200);
  EXPECT_EQ(Json::parse(client_->Get("/students")->body), Json::array());
}

TEST_F(FixtureTest, ResetHiddenWithoutFlag) {
  start(BugMode::kAtomic, /*allow_reset=*/false);
  create(body());
  auto res = client_->Post("/reset", "", kJson);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(server_->object_count("student"), 1u);
}

TEST_F(FixtureTest, ResetDuringTrafficLeavesLaterRequestsEmpty) {
  start(BugMode::kCheckThenAct);
  std::atomic<bool> stop{false};
  std::vector<std::thread> writers;
  for (int t = 0; t < 3; ++t) {
    writers.emplace_back([&] {
      httplib::Client c("127.0.0.1", server_->port());
      while (!stop) c.Post("/students", body().dump(), kJson);
    });
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  stop = true;
  // Barrier: all writers have finished their last request before the reset.
  for (auto& w : writers) w.join();
  EXPECT_GT(server_->object_count("student"), 0u);
  EXPECT_EQ(client_->Post("/reset", "", kJson)->status, 200);
  EXPECT_EQ(Json::parse(client_->Get("/students")->body), Json::array());
}

TEST_F(FixtureTest, IdsUniqueAcrossResets) {
  start();
  std::set<std::string> ids;
  for (int round = 0; round < 3; ++round) {
    for (int i = 0; i < 200; ++i) ASSERT_TRUE(ids.insert(create(body())["id"]).second);
    server_->reset();
  }
  EXPECT_EQ(ids.size(), 600u);
}

TEST_F(FixtureTest, StaleReadAllServesSnapshot) {
  start(BugMode::kStaleReadAll);
  EXPECT_EQ(Json::parse(client_->Get("/students")->body), Json::array());
  create(body());
  // Within the refresh window the snapshot still shows the empty store.
  EXPECT_EQ(Json::parse(client_->Get("/students")->body), Json::array());
  std::this_thread::sleep_for(std::chrono::milliseconds(80));
  EXPECT_EQ(Json::parse(client_->Get("/students")->body).size(), 1u);
}

TEST_F(FixtureTest, CheckThenActPutMayReturnNullAfterConcurrentDelete) {
  start(BugMode::kCheckThenAct);
  int null_bodies = 0;
  for (int i = 0; i < 60 && null_bodies == 0; ++i) {
    const std::string id = create(body())["id"];
    std::thread deleter([&] {
      httplib::Client c("127.0.0.1", server_->port());
      std::this_thread::sleep_for(std::chrono::microseconds(1500));
      c.Delete("/students/" + id);
    });
    auto put = client_->Put("/students/" + id, body().dump(), kJson);
    deleter.join();
    if (put && put->status == 200 && Json::parse(put->body).is_null()) ++null_bodies;
  }
  EXPECT_GT(null_bodies, 0);
}

TEST_F(FixtureTest, BindFailureThrows) {
  start();
  FixtureOptions options;
  options.port = server_->port();
  FixtureServer second(student_spec(), options);
  EXPECT_THROW(second.start(), Error);
}

TEST(BugModeTest, NamesRoundTrip) {
  for (auto m : {BugMode::kAtomic, BugMode::kCheckThenAct, BugMode::kLostUpdate, BugMode::kStaleReadAll}) {
    EXPECT_EQ(parse_bug_mode(to_string(m)), m);
  }
  EXPECT_FALSE(parse_bug_mode("chaos"));
}

}  // namespace
}  // namespace restcheck
