#include <doctest.h>

#include <sstream>

#include "dropwarn/error.hpp"
#include "dropwarn/event_store.hpp"
#include "fixtures.hpp"

using namespace dropwarn;
using namespace dropwarn::testing;

namespace {

Cohort Parse(const std::string& text, const Schema& schema = SmallSchema()) {
  std::istringstream in(text);
  return IngestStream(in, schema);
}

ErrorKind KindOf(const std::string& text) {
  try {
    Parse(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kUsage;
}

const char* kClass3 =
    R"({"student":"a","day":3,"kind":"class_session","teacher":"t1","inclass":[1,2,3],"outclass":[0,1]})";

}  // namespace

TEST_CASE("empty input yields an empty cohort") {
  CHECK(Parse("").empty());
  CHECK(Parse("\n\n").empty());
}

TEST_CASE("class then dropout gives a two-observation dropout record") {
  const auto c = Parse(std::string(kClass3) + "\n" +
                       R"({"student":"a","day":10,"kind":"dropout_event"})" + "\n");
  REQUIRE(c.size() == 1);
  const auto& s = c.students.at("a");
  CHECK(s.size() == 2);
  CHECK(s.final_status == FinalStatus::kDropout);
  CHECK(s.teacher_id == "t1");
  CHECK(s.first_day() == 3);
  CHECK(s.last_day() == 10);
}

TEST_CASE("records are grouped per student and sorted by day") {
  const auto c = Parse(
      R"({"student":"b","day":5,"kind":"follow_up","polarity":-1})"
      "\n"
      R"({"student":"a","day":2,"kind":"reschedule"})"
      "\n"
      R"({"student":"b","day":1,"kind":"reschedule"})"
      "\n");
  REQUIRE(c.size() == 2);
  const auto& b = c.students.at("b");
  CHECK(b.observations[0].day == 1);
  CHECK(b.observations[1].day == 5);
  CHECK(*b.observations[1].polarity == -1);
  CHECK(c.students.begin()->first == "a");
}

TEST_CASE("dropout before a class is a validation error naming the student") {
  const std::string text = std::string(R"({"student":"a","day":1,"kind":"dropout_event"})") +
                           "\n" + kClass3 + "\n";
  try {
    Parse(text);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kValidation);
    CHECK(std::string(e.what()).find("a") != std::string::npos);
  }
}

TEST_CASE("ingest errors carry the right kind") {
  SUBCASE("malformed line reports its number") {
    try {
      Parse(std::string(kClass3) + "\n{not json\n");
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kParse);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("duplicate day") {
    CHECK(KindOf(std::string(kClass3) + "\n" +
                 R"({"student":"a","day":3,"kind":"reschedule"})") == ErrorKind::kValidation);
  }
  SUBCASE("width mismatch") {
    CHECK(KindOf(R"({"student":"a","day":3,"kind":"class_session","inclass":[1,2]})") ==
          ErrorKind::kSchema);
  }
  SUBCASE("unknown kind") {
    CHECK(KindOf(R"({"student":"a","day":3,"kind":"party"})") == ErrorKind::kParse);
  }
  SUBCASE("non-positive day") {
    CHECK(KindOf(R"({"student":"a","day":0,"kind":"reschedule"})") == ErrorKind::kValidation);
  }
}

TEST_CASE("schema parsing") {
  const auto s = ParseSchema(R"({"inclass_columns":["p","q"],"outclass_columns":["r"]})");
  CHECK(s.inclass_width() == 2);
  CHECK(s.outclass_width() == 1);
  CHECK(s.epoch == "1970-01-01");
  CHECK_THROWS_AS(ParseSchema("[1,2]"), Error);
}

TEST_CASE("cohort stats") {
  SUBCASE("single completion student") {
    const auto st = CohortStats(MakeCohort({Student("a", {1, 5, 9})}));
    CHECK(st.dropout_rate == 0.0);
    CHECK(st.total_pairs == 3);
    CHECK(st.mean_span_days == doctest::Approx(8.0));
  }
  SUBCASE("ten students with three dropouts") {
    std::vector<StudentRecord> v;
    std::size_t pairs = 0;
    for (int i = 0; i < 10; ++i) {
      auto s = i < 3 ? Student("s" + std::to_string(i), {2, 4}, 9 + i)
                     : Student("s" + std::to_string(i), {1, 3, 5, 7});
      pairs += s.size();
      v.push_back(std::move(s));
    }
    const auto st = CohortStats(MakeCohort(std::move(v)));
    CHECK(st.dropout_rate == doctest::Approx(0.3));
    CHECK(st.dropouts == 3);
    CHECK(st.total_pairs == pairs);
  }
  SUBCASE("empty cohort") {
    try {
      CohortStats(Cohort{});
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kEmptyInput);
    }
  }
}

TEST_CASE("write then ingest round-trips, including ongoing students") {
  auto c = RandomCohort(40, 11);
  auto& first = c.students.begin()->second;
  if (!first.dropped()) first.final_status = FinalStatus::kOngoing;
  std::ostringstream out;
  WriteEvents(c, out);
  const auto back = Parse(out.str());
  CHECK(back == c);

  std::ostringstream again;
  WriteEvents(back, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("ingest is deterministic") {
  const auto c = RandomCohort(20, 3);
  std::ostringstream out;
  WriteEvents(c, out);
  CHECK(Parse(out.str()) == Parse(out.str()));
}

TEST_CASE("truncation") {
  const auto s = Student("a", {2, 5, 9}, 12);
  const auto t = TruncateAfter(s, 6);
  CHECK(t.size() == 2);
  CHECK(t.final_status == FinalStatus::kOngoing);
  CHECK(TruncateAfter(s, 12) == s);
}
