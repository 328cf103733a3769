#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dropwarn {

enum class EventKind { kClassSession, kFollowUp, kReschedule, kPurchase, kDropout };

enum class FinalStatus { kDropout, kCompletion, kOngoing };

std::string_view EventKindName(EventKind kind);
std::optional<EventKind> ParseEventKind(std::string_view name);
std::string_view FinalStatusName(FinalStatus status);

// Named numeric columns carried by class sessions (in-class) and any other
// non-terminal event (out-of-class).
struct Schema {
  std::vector<std::string> inclass_columns;
  std::vector<std::string> outclass_columns;
  std::string epoch = "1970-01-01";

  std::size_t inclass_width() const { return inclass_columns.size(); }
  std::size_t outclass_width() const { return outclass_columns.size(); }

  bool operator==(const Schema&) const = default;
};

// One timestamped observation of a student. Days are integer offsets from the
// cohort epoch.
struct Observation {
  int day = 0;
  EventKind kind = EventKind::kClassSession;
  std::optional<std::vector<double>> inclass;
  std::optional<std::vector<double>> outclass;
  std::optional<std::string> teacher;
  // Follow-up report sentiment: +1 positive, -1 negative.
  std::optional<int> polarity;

  bool operator==(const Observation&) const = default;
};

struct StudentRecord {
  std::string student_id;
  std::vector<Observation> observations;  // strictly increasing days
  FinalStatus final_status = FinalStatus::kCompletion;
  std::string teacher_id;

  int first_day() const { return observations.front().day; }
  int last_day() const { return observations.back().day; }
  std::size_t size() const { return observations.size(); }
  bool resolved() const { return final_status != FinalStatus::kOngoing; }
  bool dropped() const { return final_status == FinalStatus::kDropout; }

  bool operator==(const StudentRecord&) const = default;
};

// Immutable after construction; ordered by student id.
struct Cohort {
  Schema schema;
  std::map<std::string, StudentRecord> students;

  bool empty() const { return students.empty(); }
  std::size_t size() const { return students.size(); }

  bool operator==(const Cohort&) const = default;
};

struct CohortSummary {
  std::size_t students = 0;
  std::size_t dropouts = 0;
  std::size_t completions = 0;
  std::size_t ongoing = 0;
  double dropout_rate = 0.0;
  double mean_span_days = 0.0;
  std::size_t total_pairs = 0;
};

Schema ParseSchema(std::string_view json_text);
Schema LoadSchema(const std::string& path);
void WriteSchema(const Schema& schema, std::ostream& out);

// Parses line-delimited event records. Throws Error with kParse (line number
// in the message), kValidation or kSchema.
Cohort IngestStream(std::istream& in, const Schema& schema);
Cohort Ingest(const std::string& events_path, const std::string& schema_path);

// Inverse of IngestStream: one record per observation, ordered by (student, day).
void WriteEvents(const Cohort& cohort, std::ostream& out);

// Checks every record invariant; IngestStream calls this before returning.
void Validate(const StudentRecord& record, const Schema& schema);

CohortSummary CohortStats(const Cohort& cohort);

// Restricts a cohort to the given ids; unknown ids are ignored.
Cohort SubsetCohort(const Cohort& cohort, const std::vector<std::string>& ids);

// Removes every observation with day > day_limit. Students left empty are
// dropped; a truncated dropout student becomes ongoing.
StudentRecord TruncateAfter(const StudentRecord& record, int day_limit);

}  // namespace dropwarn
