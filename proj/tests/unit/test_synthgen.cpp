#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "dropwarn/dataset.hpp"
#include "dropwarn/error.hpp"
#include "dropwarn/event_store.hpp"
#include "dropwarn/synthgen.hpp"

using namespace dropwarn;

namespace {

std::string Dump(const SimOutput& out) {
  std::ostringstream s;
  WriteEvents(out.cohort, s);
  WriteTruth(out.truth, s);
  return s.str();
}

}  // namespace

TEST_CASE("default configuration calibrates to the target rate") {
  SimConfig cfg;
  cfg.seed = 1;
  const auto out = Simulate(cfg);
  const auto stats = CohortStats(out.cohort);
  CHECK(stats.students == 500);
  CHECK(std::abs(stats.dropout_rate - 0.1616) <= 0.03);
  CHECK(out.realized_dropout_rate == stats.dropout_rate);
  CHECK(stats.mean_span_days > 40.0);
}

TEST_CASE("generation is byte-identical per seed and round-trips through ingest") {
  SimConfig cfg;
  cfg.n_students = 80;
  cfg.seed = 4;
  const auto a = Simulate(cfg);
  CHECK(Dump(a) == Dump(Simulate(cfg)));
  cfg.seed = 5;
  CHECK(Dump(a) != Dump(Simulate(cfg)));

  std::ostringstream events;
  WriteEvents(a.cohort, events);
  std::istringstream in(events.str());
  CHECK(IngestStream(in, SimSchema()) == a.cohort);
}

TEST_CASE("truth traces line up with the event log") {
  SimConfig cfg;
  cfg.n_students = 100;
  cfg.seed = 2;
  const auto out = Simulate(cfg);
  for (const auto& t : out.truth) {
    const auto& rec = out.cohort.students.at(t.student_id);
    CHECK(rec.teacher_id == t.teacher_id);
    CHECK(rec.dropped() == t.dropout_day.has_value());
    if (t.dropout_day) {
      CHECK(rec.last_day() == *t.dropout_day);
      CHECK(t.hazard.size() == static_cast<std::size_t>(*t.dropout_day - t.start_day));
    }
    CHECK(t.hazard.size() == t.engagement.size());
  }
}

TEST_CASE("with every hazard term off the hazard is flat") {
  SimConfig cfg;
  cfg.n_students = 3000;
  cfg.recency_slope = 0.0;
  cfg.engagement_slope = 0.0;
  cfg.follow_up_relief = 0.0;
  cfg.missed_class_shock = 0.0;
  cfg.intercept = -4.0;
  cfg.seed = 3;
  const auto out = Simulate(cfg);
  // Empirical daily hazard per days-since-last-class bin.
  std::map<int, std::pair<double, double>> bins;  // bin -> (events, exposure)
  for (const auto& t : out.truth) {
    for (std::size_t k = 0; k < t.days_since_last_class.size(); ++k) {
      const int bin = std::min(t.days_since_last_class[k] / 3, 3);
      auto& b = bins[bin];
      b.second += 1.0;
      if (t.dropout_day && k + 1 == t.days_since_last_class.size()) b.first += 1.0;
    }
  }
  const double p = Sigmoid(-4.0);
  for (const auto& [bin, b] : bins) {
    if (b.second < 500) continue;
    const double rate = b.first / b.second;
    const double se = std::sqrt(p * (1 - p) / b.second);
    CHECK(std::abs(rate - p) < 4.0 * se);
  }
}

TEST_CASE("with a recency slope dropouts happen after longer absences") {
  SimConfig cfg;
  cfg.seed = 6;
  const auto out = Simulate(cfg);
  double at_drop = 0.0, all = 0.0;
  std::size_t n_drop = 0, n_all = 0;
  for (const auto& t : out.truth) {
    for (int d : t.days_since_last_class) {
      all += d;
      ++n_all;
    }
    if (t.dropout_day) {
      at_drop += t.days_since_last_class.back();
      ++n_drop;
    }
  }
  REQUIRE(n_drop > 0);
  CHECK(at_drop / n_drop > all / n_all);
}

TEST_CASE("unreachable calibration targets are reported") {
  SimConfig cfg;
  // With 7 students the reachable rates are k/7, none within 0.01 of 0.5.
  cfg.n_students = 7;
  cfg.target_dropout_rate = 0.5;
  cfg.calibration_tolerance = 0.01;
  cfg.seed = 1;
  try {
    Simulate(cfg);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kCalibration);
  }
  cfg.n_students = 0;
  CHECK_THROWS_AS(Simulate(cfg), Error);
}

TEST_CASE("a missed class raises the hazard for the next two days") {
  auto dropout_share_after_miss = [](double shock) {
    SimConfig cfg;
    cfg.n_students = 1500;
    cfg.seed = 8;
    cfg.missed_class_shock = shock;
    const auto out = Simulate(cfg);
    std::size_t after_miss = 0, dropouts = 0;
    for (const auto& [id, s] : out.cohort.students) {
      if (s.final_status != FinalStatus::kDropout) continue;
      ++dropouts;
      const int day = s.last_day();
      for (const auto& obs : s.observations) {
        if (obs.kind == EventKind::kReschedule && day - obs.day >= 1 && day - obs.day <= 2) {
          ++after_miss;
          break;
        }
      }
    }
    REQUIRE(dropouts > 0);
    return static_cast<double>(after_miss) / static_cast<double>(dropouts);
  };
  CHECK(dropout_share_after_miss(3.0) > dropout_share_after_miss(0.0) + 0.1);
}
