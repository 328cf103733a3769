#include "dropwarn/teacher_history.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace dropwarn {
namespace {

double CountBefore(const std::vector<int>& sorted_days, int day) {
  return static_cast<double>(std::lower_bound(sorted_days.begin(), sorted_days.end(), day) -
                             sorted_days.begin());
}

}  // namespace

TeacherHistoryIndex TeacherHistoryIndex::Build(const Cohort& cohort) {
  TeacherHistoryIndex index;
  std::size_t resolved = 0;
  std::size_t dropped = 0;
  for (const auto& [id, record] : cohort.students) {
    if (record.resolved()) ++resolved;
    if (record.dropped()) ++dropped;

    std::map<std::string, int> first_session;
    for (const auto& obs : record.observations) {
      if (obs.kind != EventKind::kClassSession) continue;
      const std::string& teacher = obs.teacher ? *obs.teacher : record.teacher_id;
      if (teacher.empty()) continue;
      index.teachers_[teacher].session_days.push_back(obs.day);
      first_session.emplace(teacher, obs.day);
    }
    for (const auto& [teacher, day] : first_session) {
      auto& timeline = index.teachers_[teacher];
      timeline.student_first_days.push_back(day);
      if (record.dropped()) timeline.dropout_days.push_back(record.last_day());
    }
  }
  for (auto& [teacher, timeline] : index.teachers_) {
    std::sort(timeline.session_days.begin(), timeline.session_days.end());
    std::sort(timeline.student_first_days.begin(), timeline.student_first_days.end());
    std::sort(timeline.dropout_days.begin(), timeline.dropout_days.end());
  }
  index.global_prior_ =
      resolved == 0 ? 0.0 : static_cast<double>(dropped) / static_cast<double>(resolved);
  return index;
}

TeacherStats TeacherHistoryIndex::Query(const std::string& teacher, int day) const {
  TeacherStats stats;
  stats.dropout_rate = global_prior_;
  auto it = teachers_.find(teacher);
  if (it == teachers_.end()) return stats;
  const Timeline& t = it->second;
  stats.courses_taught = CountBefore(t.session_days, day);
  stats.distinct_students = CountBefore(t.student_first_days, day);
  if (stats.distinct_students > 0.0) {
    stats.dropout_rate = CountBefore(t.dropout_days, day) / stats.distinct_students;
  }
  return stats;
}

nlohmann::json TeacherHistoryIndex::ToJson() const {
  nlohmann::json doc;
  doc["global_prior"] = global_prior_;
  auto& teachers = doc["teachers"] = nlohmann::json::object();
  for (const auto& [name, t] : teachers_) {
    teachers[name] = {{"session_days", t.session_days},
                      {"student_first_days", t.student_first_days},
                      {"dropout_days", t.dropout_days}};
  }
  return doc;
}

TeacherHistoryIndex TeacherHistoryIndex::FromJson(const nlohmann::json& doc) {
  TeacherHistoryIndex index;
  index.global_prior_ = doc.at("global_prior").get<double>();
  for (const auto& [name, t] : doc.at("teachers").items()) {
    Timeline timeline;
    timeline.session_days = t.at("session_days").get<std::vector<int>>();
    timeline.student_first_days = t.at("student_first_days").get<std::vector<int>>();
    timeline.dropout_days = t.at("dropout_days").get<std::vector<int>>();
    index.teachers_.emplace(name, std::move(timeline));
  }
  return index;
}

}  // namespace dropwarn
