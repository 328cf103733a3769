#include <doctest.h>

#include <set>
#include <tuple>

#include "dropwarn/augmentation.hpp"
#include "dropwarn/error.hpp"
#include "dropwarn/labeling.hpp"
#include "fixtures.hpp"

using namespace dropwarn;
using namespace dropwarn::testing;

namespace {

template <class F>
ErrorKind KindOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kUsage;
}

// Dropout student with a class at `prev` and the dropout on `tn`.
StudentRecord Dropper(int prev, int tn) { return Student("d", {prev / 2, prev}, tn); }

}  // namespace

TEST_CASE("original pairs") {
  SUBCASE("dropout student with days 3, 10, 17") {
    const auto pairs = BuildOriginalPairs(MakeCohort({Student("a", {3, 10}, 17)}));
    REQUIRE(pairs.positives.size() == 1);
    CHECK(pairs.positives[0].day == 17);
    CHECK(pairs.positives[0].label == 1);
    CHECK(pairs.positives[0].weight == 1.0);
    CHECK(pairs.negatives.size() == 2);
  }
  SUBCASE("completion student") {
    const auto pairs = BuildOriginalPairs(MakeCohort({Student("a", {1, 2, 3, 4})}));
    CHECK(pairs.positives.empty());
    CHECK(pairs.negatives.size() == 4);
  }
  SUBCASE("fixture with three dropouts and two completions") {
    const auto pairs = BuildOriginalPairs(MakeCohort({
        Student("d1", {1}, 5), Student("d2", {1, 2, 3, 4}, 9), Student("d3", {1, 2}, 6),
        Student("c1", {1, 2, 3, 4}), Student("c2", {5, 6, 7, 8})}));
    CHECK(pairs.positives.size() == 3);
    CHECK(pairs.negatives.size() == 15);
  }
  SUBCASE("ongoing students are skipped; none resolved is an error") {
    auto s = Student("a", {1, 2});
    s.final_status = FinalStatus::kOngoing;
    auto c = MakeCohort({s, Student("b", {3, 4})});
    CHECK(BuildOriginalPairs(c).negatives.size() == 2);
    c.students.erase("b");
    CHECK(KindOf([&] { BuildOriginalPairs(c); }) == ErrorKind::kEmptyInput);
  }
}

TEST_CASE("original pairs partition the resolved pairs") {
  const auto c = RandomCohort(50, 4);
  const auto pairs = BuildOriginalPairs(c);
  std::set<std::pair<std::string, int>> seen;
  for (const auto& p : pairs.positives) CHECK(seen.insert({p.student_id, p.day}).second);
  for (const auto& p : pairs.negatives) {
    CHECK(seen.insert({p.student_id, p.day}).second);
    CHECK(p.label == 0);
  }
  std::size_t total = 0, dropouts = 0;
  for (const auto& [id, s] : c.students) {
    total += s.size();
    dropouts += s.dropped() ? 1 : 0;
  }
  CHECK(seen.size() == total);
  CHECK(pairs.positives.size() == dropouts);
}

TEST_CASE("horizon labels") {
  const auto s = Dropper(80, 100);
  CHECK(HorizonLabel(s, 95, 7) == 1);
  CHECK(HorizonLabel(s, 90, 7) == 0);
  CHECK(HorizonLabel(s, 99, 1) == 1);
  CHECK(HorizonLabel(Student("c", {1, 50}), 10, 14) == 0);
  for (int day = 40; day < 100; ++day) {
    int prev = 0;
    for (int delta = 1; delta <= 30; ++delta) {
      const int label = HorizonLabel(s, day, delta);
      CHECK(label >= prev);
      prev = label;
    }
  }
  auto ongoing = Student("o", {1, 2});
  ongoing.final_status = FinalStatus::kOngoing;
  CHECK(KindOf([&] { HorizonLabel(ongoing, 1, 3); }) == ErrorKind::kUnresolvedStatus);
  CHECK(KindOf([&] { HorizonLabel(s, 100, 3); }) == ErrorKind::kOutOfRange);
  CHECK(KindOf([&] { HorizonLabel(s, 90, 0); }) == ErrorKind::kDomain);
}

TEST_CASE("query days exclude the resolution day") {
  const auto s = Student("a", {3, 6}, 9);
  CHECK(QueryDays(s, QueryGrid::kDaily) == std::vector<int>{3, 4, 5, 6, 7, 8});
  CHECK(QueryDays(s, QueryGrid::kObservationDays) == std::vector<int>{3, 6});
}

TEST_CASE("pseudo days") {
  auto days = [](int prev, int tn, int lambda) { return PseudoDays(Dropper(prev, tn), lambda); };
  CHECK(days(80, 100, 7) == std::vector<int>{94, 95, 96, 97, 98, 99});
  CHECK(days(98, 100, 7) == std::vector<int>{99});
  CHECK(days(99, 100, 7).empty());
  CHECK(days(80, 100, 3) == std::vector<int>{98, 99});

  // n = 1: a lone dropout event clips the window at day 0.
  CHECK(PseudoDays(Student("x", {}, 4), 7) == std::vector<int>{1, 2, 3});

  CHECK(KindOf([&] { PseudoDays(Student("c", {1, 2}), 7); }) == ErrorKind::kMisuse);

  for (int prev = 1; prev < 40; ++prev)
    for (int lambda : {1, 3, 7, 14}) {
      const int tn = 40;
      const auto expected = std::max(0, tn - std::max(prev, tn - lambda) - 1);
      CHECK(static_cast<int>(days(prev, tn, lambda).size()) == expected);
    }
}

TEST_CASE("weights") {
  CHECK(WeightOf(99, 100, 7, Weighting::kLinear) == doctest::Approx(0.857143).epsilon(1e-6));
  CHECK(WeightOf(94, 100, 7, Weighting::kConvex) == doctest::Approx(0.020408).epsilon(1e-5));
  CHECK(WeightOf(94, 100, 7, Weighting::kConcave) == doctest::Approx(0.265306).epsilon(1e-6));
  CHECK(KindOf([] { WeightOf(100, 100, 7, Weighting::kLinear); }) == ErrorKind::kDomain);
  CHECK(KindOf([] { WeightOf(92, 100, 7, Weighting::kLinear); }) == ErrorKind::kDomain);

  for (auto g : {Weighting::kLinear, Weighting::kConvex, Weighting::kConcave}) {
    CHECK(EvaluateWeight(g, 0.0) == 1.0);
    CHECK(EvaluateWeight(g, 1.0) == 0.0);
    double prev = 2.0;
    for (int d = 99; d >= 94; --d) {
      const double w = WeightOf(d, 100, 7, g);
      CHECK(w < 1.0);
      CHECK(w < prev);
      prev = w;
    }
  }
  for (int i = 1; i < 100; ++i) {
    const double u = i / 100.0;
    CHECK(EvaluateWeight(Weighting::kConvex, u) <= EvaluateWeight(Weighting::kLinear, u));
    CHECK(EvaluateWeight(Weighting::kLinear, u) <= EvaluateWeight(Weighting::kConcave, u));
  }
  CHECK(ParseWeighting("convex") == Weighting::kConvex);
  CHECK_FALSE(ParseWeighting("cubic").has_value());
}

TEST_CASE("augment emits weighted pseudo positives") {
  const auto c = MakeCohort({Dropper(80, 100), Student("c", {1, 2, 3})});
  AugmentationConfig cfg;
  cfg.lookback_days = 7;
  cfg.weighting = Weighting::kLinear;
  const auto p = Augment(c, cfg);
  REQUIRE(p.size() == 6);
  for (const auto& pair : p) {
    CHECK(pair.label == 1);
    CHECK(pair.provenance == Provenance::kPseudoPositive);
    CHECK(pair.weight == WeightOf(pair.day, 100, 7, Weighting::kLinear));
  }
  cfg.lookback_days = 3;
  CHECK(Augment(c, cfg).size() == 2);
}
