#pragma once

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "dropwarn/event_store.hpp"
#include "dropwarn/rng.hpp"

namespace dropwarn::testing {

inline Schema SmallSchema() {
  Schema s;
  s.inclass_columns = {"a", "b", "c"};
  s.outclass_columns = {"x", "y"};
  return s;
}

inline Observation Class(int day, const std::string& teacher = "t0", double level = 0.0) {
  Observation o;
  o.day = day;
  o.kind = EventKind::kClassSession;
  o.teacher = teacher;
  o.inclass = std::vector<double>{level, 0.5 * level + day * 0.01, -level};
  o.outclass = std::vector<double>{level * 2.0, 1.0};
  return o;
}

inline Observation Event(int day, EventKind kind, int polarity = 0) {
  Observation o;
  o.day = day;
  o.kind = kind;
  if (polarity != 0) o.polarity = polarity;
  return o;
}

// Class sessions on the given days; a dropout event at `dropout_day` when > 0.
inline StudentRecord Student(const std::string& id, std::initializer_list<int> class_days,
                             int dropout_day = 0, const std::string& teacher = "t0") {
  StudentRecord r;
  r.student_id = id;
  r.teacher_id = teacher;
  for (int d : class_days) r.observations.push_back(Class(d, teacher, 0.1 * d));
  if (dropout_day > 0) {
    r.observations.push_back(Event(dropout_day, EventKind::kDropout));
    r.final_status = FinalStatus::kDropout;
  }
  return r;
}

inline Cohort MakeCohort(std::vector<StudentRecord> students, Schema schema = SmallSchema()) {
  Cohort c;
  c.schema = std::move(schema);
  for (auto& s : students) c.students.emplace(s.student_id, std::move(s));
  return c;
}

// A random, ingest-valid cohort with mixed event kinds.
inline Cohort RandomCohort(int n_students, std::uint64_t seed, double dropout_share = 0.3) {
  Rng rng(seed);
  std::vector<StudentRecord> all;
  for (int i = 0; i < n_students; ++i) {
    StudentRecord r;
    r.student_id = "s" + std::to_string(100 + i);
    r.teacher_id = "t" + std::to_string(rng.UniformInt(0, 4));
    int day = rng.UniformInt(1, 20);
    const int n = rng.UniformInt(1, 25);
    for (int k = 0; k < n; ++k) {
      const int pick = rng.UniformInt(0, 9);
      Observation o;
      if (k == 0 || pick < 5) {
        o = Class(day, r.teacher_id, rng.Normal());
      } else if (pick < 7) {
        o = Event(day, EventKind::kFollowUp, rng.Bernoulli(0.5) ? 1 : -1);
      } else if (pick < 9) {
        o = Event(day, EventKind::kReschedule);
      } else {
        o = Event(day, EventKind::kPurchase);
        o.outclass = std::vector<double>{rng.Normal(), 0.0};
      }
      r.observations.push_back(std::move(o));
      day += rng.UniformInt(1, 8);
    }
    if (rng.Bernoulli(dropout_share)) {
      r.observations.push_back(Event(day + rng.UniformInt(0, 10), EventKind::kDropout));
      r.final_status = FinalStatus::kDropout;
    }
    all.push_back(std::move(r));
  }
  return MakeCohort(std::move(all));
}

}  // namespace dropwarn::testing
