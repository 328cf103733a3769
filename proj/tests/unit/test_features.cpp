#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "dropwarn/error.hpp"
#include "dropwarn/features.hpp"
#include "dropwarn/teacher_history.hpp"
#include "fixtures.hpp"

using namespace dropwarn;
using namespace dropwarn::testing;

namespace {

double Column(const FeatureVector& fv, const std::string& name) {
  const auto it = std::find(fv.names.begin(), fv.names.end(), name);
  REQUIRE_MESSAGE(it != fv.names.end(), name);
  return fv.values[static_cast<std::size_t>(it - fv.names.begin())];
}

Cohort TeacherFixture() {
  return MakeCohort({Student("a", {1, 5, 9}), Student("b", {2, 6, 20}), Student("c", {3, 30}),
                     Student("d", {4, 35}, 40)});
}

bool BytesEqual(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("teacher history counts strictly before the query day") {
  const auto index = TeacherHistoryIndex::Build(TeacherFixture());
  CHECK(index.global_prior() == doctest::Approx(0.25));

  const auto at50 = index.Query("t0", 50);
  CHECK(at50.courses_taught == 10);
  CHECK(at50.distinct_students == 4);
  CHECK(at50.dropout_rate == doctest::Approx(0.25));

  const auto at40 = index.Query("t0", 40);
  CHECK(at40.courses_taught == 10);
  CHECK(at40.dropout_rate == 0.0);

  const auto at1 = index.Query("t0", 1);
  CHECK(at1.courses_taught == 0);
  CHECK(at1.distinct_students == 0);
  CHECK(at1.dropout_rate == doctest::Approx(0.25));

  const auto unknown = index.Query("nobody", 50);
  CHECK(unknown.courses_taught == 0);
  CHECK(unknown.dropout_rate == doctest::Approx(0.25));

  CHECK(TeacherHistoryIndex::FromJson(index.ToJson()) == index);
}

TEST_CASE("window counts follow the half-open window") {
  FeatureConfig cfg;
  cfg.lookback_days = {7};
  const auto cohort = MakeCohort({Student("a", {3, 10})});
  const auto pipe = FeaturePipeline::Fit(cohort, cfg);
  const auto& s = cohort.students.at("a");

  // (3, 10] holds only the class on day 10.
  const auto at10 = pipe.Assemble(s, 10);
  CHECK(Column(at10, "w7_class_count") == 1);
  CHECK(Column(at10, "days_since_last_class") == 0);
  CHECK(Column(at10, "class_count_total") == 2);

  const auto at12 = pipe.Assemble(s, 12);
  CHECK(Column(at12, "w7_class_count") == 1);
  CHECK(Column(at12, "w7_days_since_last_class") == 2);

  const auto at9 = pipe.Assemble(s, 9);
  CHECK(Column(at9, "w7_class_count") == 1);
  CHECK(Column(at9, "days_since_last_class") == 6);

  const auto first = pipe.Assemble(s, 3);
  CHECK(Column(first, "w7_class_count") == 1);
  CHECK(Column(first, "w7_mean_class_gap") == 0);
  CHECK(Column(first, "w7_class_gap_count") == 0);
  CHECK(Column(first, "tenure_days") == 0);
}

TEST_CASE("mean class gap and follow-up polarity") {
  FeatureConfig cfg;
  cfg.lookback_days = {14};
  auto s = Student("a", {2, 5, 11});
  s.observations.insert(s.observations.begin() + 2, Event(6, EventKind::kFollowUp, -1));
  s.observations.insert(s.observations.begin() + 3, Event(7, EventKind::kFollowUp, 1));
  s.observations.insert(s.observations.begin() + 4, Event(8, EventKind::kReschedule));
  const auto cohort = MakeCohort({s});
  const auto fv = FeaturePipeline::Fit(cohort, cfg).Assemble(cohort.students.at("a"), 12);
  CHECK(Column(fv, "w14_mean_class_gap") == doctest::Approx(4.5));
  CHECK(Column(fv, "w14_class_gap_count") == 2);
  CHECK(Column(fv, "w14_follow_up_count") == 2);
  CHECK(Column(fv, "w14_follow_up_positive") == 1);
  CHECK(Column(fv, "w14_follow_up_negative") == 1);
  CHECK(Column(fv, "w14_reschedule_count") == 1);
}

TEST_CASE("dropout event never changes features") {
  FeatureConfig cfg;
  const auto with = MakeCohort({Student("a", {2, 5}, 9), Student("b", {1, 4, 6})});
  const auto pipe = FeaturePipeline::Fit(with, cfg);
  auto plain = with.students.at("a");
  plain.observations.pop_back();
  plain.final_status = FinalStatus::kOngoing;
  CHECK(BytesEqual(pipe.AssembleValues(with.students.at("a"), 9), pipe.AssembleValues(plain, 9)));
}

TEST_CASE("assemble properties on a random cohort") {
  const auto cohort = RandomCohort(60, 21);
  FeatureConfig cfg;
  cfg.lookback_days = {3, 7, 10, 30};
  const auto pipe = FeaturePipeline::Fit(cohort, cfg);
  Rng rng(5);
  std::vector<const StudentRecord*> students;
  for (const auto& [id, s] : cohort.students) students.push_back(&s);

  for (int q = 0; q < 200; ++q) {
    const auto& s = *students[static_cast<std::size_t>(rng.UniformInt(0, static_cast<int>(students.size()) - 1))];
    const int day = rng.UniformInt(s.first_day(), s.last_day() + 5);
    const auto fv = pipe.Assemble(s, day);

    CHECK(fv.values.size() == pipe.width());
    CHECK(fv.names == pipe.names());
    for (double v : fv.values) CHECK(std::isfinite(v));
    CHECK(BytesEqual(fv.values, pipe.AssembleValues(s, day)));
    CHECK(BytesEqual(fv.values, pipe.AssembleValues(TruncateAfter(s, day), day)));

    if (day - 7 >= s.first_day()) {
      const auto earlier = pipe.Assemble(s, day - 7);
      CHECK(Column(fv, "w10_class_count") ==
            Column(earlier, "w3_class_count") + Column(fv, "w7_class_count"));
      CHECK(Column(fv, "w10_reschedule_count") ==
            Column(earlier, "w3_reschedule_count") + Column(fv, "w7_reschedule_count"));
    }
  }
}

TEST_CASE("assemble before the first observation is out of range") {
  const auto cohort = MakeCohort({Student("a", {5, 9})});
  const auto pipe = FeaturePipeline::Fit(cohort, FeatureConfig{});
  try {
    pipe.Assemble(cohort.students.at("a"), 4);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kOutOfRange);
  }
}

TEST_CASE("feature blocks") {
  CHECK(FeatureBlocks::Parse("in+out+time") == FeatureBlocks::All());
  CHECK(FeatureBlocks::Parse("time").ToString() == "Time");
  CHECK(FeatureBlocks::Parse("out+in").ToString() == "In+Out");
  CHECK_THROWS_AS(FeatureBlocks::Parse("in+video"), Error);

  const auto cohort = RandomCohort(20, 2);
  const auto pipe = FeaturePipeline::Fit(cohort, FeatureConfig{});
  const auto in = pipe.ColumnsFor(FeatureBlocks::Parse("in"));
  const auto out = pipe.ColumnsFor(FeatureBlocks::Parse("out"));
  const auto time = pipe.ColumnsFor(FeatureBlocks::Parse("time"));
  CHECK(in.size() + out.size() + time.size() == pipe.width());
  for (auto c : in) CHECK(pipe.names()[c].rfind("in_", 0) == 0);
  for (auto c : out) CHECK(pipe.names()[c].rfind("out_", 0) == 0);
}

TEST_CASE("config validation") {
  FeatureConfig cfg;
  cfg.lookback_days = {7, 7};
  CHECK_THROWS_AS(cfg.Validate(), Error);
  cfg.lookback_days = {0, 7};
  CHECK_THROWS_AS(cfg.Validate(), Error);
  cfg.lookback_days = {3, 7};
  CHECK_NOTHROW(cfg.Validate());
}

TEST_CASE("pipeline json round-trip reproduces features") {
  const auto cohort = RandomCohort(30, 8);
  const auto pipe = FeaturePipeline::Fit(cohort, FeatureConfig{});
  const auto back = FeaturePipeline::FromJson(nlohmann::json::parse(pipe.ToJson().dump()));
  CHECK(back.names() == pipe.names());
  for (const auto& [id, s] : cohort.students) {
    CHECK(BytesEqual(back.AssembleValues(s, s.last_day()), pipe.AssembleValues(s, s.last_day())));
  }
}
