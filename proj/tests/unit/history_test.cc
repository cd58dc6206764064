#include "restcheck/history.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "restcheck/error.h"
#include "support/history_gen.h"
#include "support/scenarios.h"

namespace restcheck {
namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("restcheck-history-test-" + name);
}

History four_events() {
  return testing::HistoryBuilder()
      .invoke(0, "createStudent", std::nullopt, testing::student_body("Ana", 20))
      .ok(0, "createStudent", "ID1", testing::student("ID1", "Ana", 20), 201)
      .invoke(0, "getStudent", "ID1")
      .ok(0, "getStudent", "ID1", testing::student("ID1", "Ana", 20))
      .build();
}

TEST(HistoryTest, FourEventRoundTrip) {
  const History h = four_events();
  const fs::path file = temp_file("four.jsonl");
  save_history(h, file);
  std::ifstream in(file);
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 4);
  EXPECT_EQ(load_history(file), h);
  fs::remove(file);
}

TEST(HistoryTest, EmptyRoundTrip) {
  const fs::path file = temp_file("empty.jsonl");
  save_history({}, file);
  EXPECT_EQ(fs::file_size(file), 0u);
  EXPECT_TRUE(load_history(file).empty());
  fs::remove(file);
}

TEST(HistoryTest, GeneratedHistoriesRoundTrip) {
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const History h = testing::generate_history(rng);
    ASSERT_NO_THROW(validate_history(h));
    ASSERT_EQ(parse_history(serialize_history(h)), h);
  }
}

TEST(HistoryTest, UnmatchedCompletionReportsLine) {
  History h = four_events();
  h.erase(h.begin() + 2);  // drop the second invoke
  for (std::size_t i = 0; i < h.size(); ++i) h[i].index = i;
  try {
    parse_history(serialize_history(h));
    FAIL() << "expected HistoryError";
  } catch (const HistoryError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("unmatched completion at line 3"), std::string::npos)
        << e.what();
  }
}

TEST(HistoryTest, MalformedLineReportsLine) {
  const std::string text = serialize_history(four_events()) + "{not json\n";
  try {
    parse_history(text);
    FAIL() << "expected HistoryError";
  } catch (const HistoryError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
  EXPECT_THROW(parse_history(R"({"index":0,"client":0,"kind":"invoke","opId":"x","method":"GET","resource":"r","colour":1})"),
               HistoryError);
  EXPECT_THROW(parse_history(R"({"index":0,"client":0,"kind":"maybe","opId":"x","method":"GET","resource":"r"})"),
               HistoryError);
}

TEST(HistoryTest, ValidationRejectsBadOrders) {
  History h = four_events();
  h[2].index = 1;
  EXPECT_THROW(validate_history(h), HistoryError);

  History twice = four_events();
  twice.erase(twice.begin() + 1);  // invoke, invoke from one client
  for (std::size_t i = 0; i < twice.size(); ++i) twice[i].index = i;
  EXPECT_THROW(validate_history(twice), HistoryError);

  History mismatch = four_events();
  mismatch[3].op_id = "deleteStudent";
  EXPECT_THROW(validate_history(mismatch), HistoryError);
}

TEST(HistoryTest, TrailingInvokeIsValid) {
  History h = four_events();
  h.pop_back();
  EXPECT_NO_THROW(validate_history(h));
}

TEST(RenderTest, OkDeleteLine) {
  HistoryEvent e;
  e.client = 3;
  e.kind = EventKind::kOk;
  e.op_id = "deleteStudent";
  e.method = HttpMethod::kDelete;
  e.resource = "student";
  e.id = "498C98D9E8CB";
  e.output = Json("498C98D9E8CB");
  e.status = 200;
  EXPECT_NE(render_event(e).find(":3 :ok, :delete, :output \"498C98D9E8CB\""), std::string::npos)
      << render_event(e);
}

TEST(RenderTest, NilOutputPutLine) {
  const History h = testing::put_after_delete_history();
  const std::string line = render_event(h.back());
  EXPECT_NE(line.find(":2 :ok, :put, :path \"71D1083D76BD\", :output nil"), std::string::npos) << line;
}

TEST(RenderTest, InvokeLinesListBodyThenPath) {
  const History h = testing::put_after_delete_history();
  const std::string put = render_event(h[2]);
  EXPECT_NE(put.find(":2 :invoke, :put, {:age 93, :email \"Sasha@example.org\", :firstName \"Sasha\""),
            std::string::npos)
      << put;
  EXPECT_NE(put.find("}, :path \"71D1083D76BD\""), std::string::npos) << put;
  EXPECT_NE(render_event(h[3]).find(":3 :invoke, :get"), std::string::npos);
}

TEST(RenderTest, FailureLinesUseFail) {
  const History h = testing::HistoryBuilder()
                        .invoke(0, "getAllStudents")
                        .fail(0, "getAllStudents", std::nullopt, 500)
                        .build();
  EXPECT_NE(render_event(h[1]).find(":0 :fail, :get"), std::string::npos) << render_event(h[1]);
}

TEST(RenderTest, ListOutputRendersAsSequence) {
  const History h = testing::put_after_delete_history();
  const std::string line = render_event(h[7]);
  EXPECT_NE(line.find(":output ({:age 40"), std::string::npos) << line;
  EXPECT_EQ(line.back(), ')');
}

TEST(RenderTest, EmptyHistoryRendersEmpty) { EXPECT_EQ(render_log({}), ""); }

TEST(RenderTest, OneLinePerEvent) {
  const History h = testing::put_after_delete_history();
  const std::string log = render_log(h);
  EXPECT_EQ(static_cast<std::size_t>(std::count(log.begin(), log.end(), '\n')), h.size());
}

TEST(RenderTest, EdnScalars) {
  EXPECT_EQ(render_edn(Json()), "nil");
  EXPECT_EQ(render_edn(Json(true)), "true");
  EXPECT_EQ(render_edn(Json(12)), "12");
  EXPECT_EQ(render_edn(Json("a\"b")), "\"a\\\"b\"");
  EXPECT_EQ(render_edn(Json::array({1, 2})), "(1 2)");
  EXPECT_EQ(render_edn(Json{{"k", "v"}, {"n", 1}}), "{:k \"v\", :n 1}");
}

// Lines minus their timestamp determine (client, kind, method, id, output).
TEST(RenderTest, InjectiveOnObservableTuple) {
  Rng rng(31);
  std::map<std::string, std::string> seen;
  for (int i = 0; i < 300; ++i) {
    for (const auto& e : testing::generate_history(rng)) {
      if (!e.is_completion()) continue;
      const std::string line = render_event(e).substr(9);
      const std::string tuple = std::to_string(e.client) + "|" + std::string(to_string(e.kind)) + "|" +
                                std::string(to_string(e.method)) + "|" + e.id.value_or("-") + "|" +
                                (e.output ? e.output->dump() : "-");
      auto [it, inserted] = seen.emplace(line, tuple);
      ASSERT_EQ(it->second, tuple) << line;
    }
  }
}

}  // namespace
}  // namespace restcheck
