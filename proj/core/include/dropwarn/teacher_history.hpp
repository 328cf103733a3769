#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dropwarn/event_store.hpp"

namespace dropwarn {

struct TeacherStats {
  double courses_taught = 0.0;
  double distinct_students = 0.0;
  double dropout_rate = 0.0;

  bool operator==(const TeacherStats&) const = default;
};

// Per-teacher timelines answering "what was known strictly before day d".
// Immutable once built; queries are const and thread-safe.
class TeacherHistoryIndex {
 public:
  TeacherHistoryIndex() = default;

  static TeacherHistoryIndex Build(const Cohort& cohort);

  // Unknown teachers, and teachers with no students before `day`, report the
  // global prior as dropout rate.
  TeacherStats Query(const std::string& teacher, int day) const;

  double global_prior() const { return global_prior_; }

  nlohmann::json ToJson() const;
  static TeacherHistoryIndex FromJson(const nlohmann::json& doc);

  bool operator==(const TeacherHistoryIndex&) const = default;

 private:
  struct Timeline {
    std::vector<int> session_days;        // sorted
    std::vector<int> student_first_days;  // first session day per student, sorted
    std::vector<int> dropout_days;        // dropout day of each student taught, sorted

    bool operator==(const Timeline&) const = default;
  };

  std::map<std::string, Timeline> teachers_;
  double global_prior_ = 0.0;
};

}  // namespace dropwarn
