#include "dropwarn/event_store.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dropwarn/error.hpp"

namespace dropwarn {
namespace {

using nlohmann::json;

[[noreturn]] void ParseFail(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + what);
}

std::vector<double> ReadVector(const json& value, std::size_t width, const char* field,
                               std::size_t line_no) {
  if (!value.is_array()) ParseFail(line_no, std::string(field) + " must be an array");
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_number()) ParseFail(line_no, std::string(field) + " must contain numbers");
    out.push_back(v.get<double>());
  }
  if (out.size() != width) {
    throw Error(ErrorKind::kSchema, "line " + std::to_string(line_no) + ": " + field +
                                        " has width " + std::to_string(out.size()) +
                                        ", schema declares " + std::to_string(width));
  }
  return out;
}

std::vector<std::string> ReadColumns(const json& doc, const char* key) {
  std::vector<std::string> cols;
  if (!doc.contains(key)) return cols;
  const auto& arr = doc.at(key);
  if (!arr.is_array()) throw Error(ErrorKind::kSchema, std::string(key) + " must be an array");
  for (const auto& c : arr) {
    if (!c.is_string()) throw Error(ErrorKind::kSchema, std::string(key) + " must hold strings");
    cols.push_back(c.get<std::string>());
  }
  return cols;
}

struct PendingStudent {
  std::vector<std::pair<Observation, std::size_t>> rows;  // observation, line number
  std::optional<FinalStatus> declared;
};

}  // namespace

std::string_view EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kClassSession: return "class_session";
    case EventKind::kFollowUp: return "follow_up";
    case EventKind::kReschedule: return "reschedule";
    case EventKind::kPurchase: return "purchase_event";
    case EventKind::kDropout: return "dropout_event";
  }
  return "unknown";
}

std::optional<EventKind> ParseEventKind(std::string_view name) {
  for (auto kind : {EventKind::kClassSession, EventKind::kFollowUp, EventKind::kReschedule,
                    EventKind::kPurchase, EventKind::kDropout}) {
    if (EventKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view FinalStatusName(FinalStatus status) {
  switch (status) {
    case FinalStatus::kDropout: return "dropout";
    case FinalStatus::kCompletion: return "completion";
    case FinalStatus::kOngoing: return "ongoing";
  }
  return "unknown";
}

Schema ParseSchema(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kSchema, std::string("schema is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kSchema, "schema must be a JSON object");
  Schema schema;
  schema.inclass_columns = ReadColumns(doc, "inclass_columns");
  schema.outclass_columns = ReadColumns(doc, "outclass_columns");
  if (doc.contains("epoch")) schema.epoch = doc.at("epoch").get<std::string>();
  std::set<std::string> seen;
  for (const auto* cols : {&schema.inclass_columns, &schema.outclass_columns}) {
    for (const auto& c : *cols) {
      if (!seen.insert(c).second) throw Error(ErrorKind::kSchema, "duplicate column name: " + c);
    }
  }
  return schema;
}

Schema LoadSchema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open schema file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseSchema(buf.str());
}

void WriteSchema(const Schema& schema, std::ostream& out) {
  json doc;
  doc["epoch"] = schema.epoch;
  doc["inclass_columns"] = schema.inclass_columns;
  doc["outclass_columns"] = schema.outclass_columns;
  out << doc.dump(2) << '\n';
}

void Validate(const StudentRecord& record, const Schema& schema) {
  const auto& id = record.student_id;
  if (record.observations.empty()) {
    throw Error(ErrorKind::kValidation, "student " + id + " has no observations");
  }
  int prev = 0;
  std::size_t dropouts = 0;
  for (std::size_t i = 0; i < record.observations.size(); ++i) {
    const auto& obs = record.observations[i];
    if (obs.day <= prev) {
      throw Error(ErrorKind::kValidation,
                  "student " + id + ": days must be positive and strictly increasing (day " +
                      std::to_string(obs.day) + ")");
    }
    prev = obs.day;
    const bool is_class = obs.kind == EventKind::kClassSession;
    if (is_class != obs.inclass.has_value()) {
      throw Error(ErrorKind::kSchema, "student " + id + " day " + std::to_string(obs.day) +
                                          ": inclass values required exactly on class_session");
    }
    if (obs.inclass && obs.inclass->size() != schema.inclass_width()) {
      throw Error(ErrorKind::kSchema, "student " + id + ": inclass width mismatch");
    }
    if (obs.outclass && obs.outclass->size() != schema.outclass_width()) {
      throw Error(ErrorKind::kSchema, "student " + id + ": outclass width mismatch");
    }
    if (obs.kind == EventKind::kDropout) {
      ++dropouts;
      if (i + 1 != record.observations.size()) {
        throw Error(ErrorKind::kValidation,
                    "student " + id + ": dropout_event must be the last observation");
      }
    }
  }
  const bool dropped = record.final_status == FinalStatus::kDropout;
  if (dropped != (dropouts == 1)) {
    throw Error(ErrorKind::kValidation,
                "student " + id + ": final status inconsistent with dropout events");
  }
}

Cohort IngestStream(std::istream& in, const Schema& schema) {
  std::map<std::string, PendingStudent> pending;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      ParseFail(line_no, e.what());
    }
    if (!rec.is_object()) ParseFail(line_no, "record must be a JSON object");
    if (!rec.contains("student") || !rec["student"].is_string()) {
      ParseFail(line_no, "missing string field 'student'");
    }
    if (!rec.contains("day") || !rec["day"].is_number_integer()) {
      ParseFail(line_no, "missing integer field 'day'");
    }
    if (!rec.contains("kind") || !rec["kind"].is_string()) {
      ParseFail(line_no, "missing string field 'kind'");
    }
    auto kind = ParseEventKind(rec["kind"].get<std::string>());
    if (!kind) ParseFail(line_no, "unknown kind '" + rec["kind"].get<std::string>() + "'");

    Observation obs;
    obs.day = rec["day"].get<int>();
    obs.kind = *kind;
    if (rec.contains("teacher")) {
      if (!rec["teacher"].is_string()) ParseFail(line_no, "'teacher' must be a string");
      obs.teacher = rec["teacher"].get<std::string>();
    }
    if (rec.contains("inclass")) {
      obs.inclass = ReadVector(rec["inclass"], schema.inclass_width(), "inclass", line_no);
    }
    if (rec.contains("outclass")) {
      obs.outclass = ReadVector(rec["outclass"], schema.outclass_width(), "outclass", line_no);
    }
    if (rec.contains("polarity")) {
      if (!rec["polarity"].is_number_integer()) ParseFail(line_no, "'polarity' must be integer");
      obs.polarity = rec["polarity"].get<int>();
    }
    auto& student = pending[rec["student"].get<std::string>()];
    if (rec.contains("status")) {
      const auto status = rec["status"].get<std::string>();
      FinalStatus parsed;
      if (status == "completion") {
        parsed = FinalStatus::kCompletion;
      } else if (status == "ongoing") {
        parsed = FinalStatus::kOngoing;
      } else {
        ParseFail(line_no, "status must be 'completion' or 'ongoing'");
      }
      if (student.declared && *student.declared != parsed) {
        throw Error(ErrorKind::kValidation, "line " + std::to_string(line_no) +
                                                ": conflicting status for student " +
                                                rec["student"].get<std::string>());
      }
      student.declared = parsed;
    }
    student.rows.emplace_back(std::move(obs), line_no);
  }

  Cohort cohort;
  cohort.schema = schema;
  for (auto& [id, student] : pending) {
    // Stable sort keeps file order for equal days so the duplicate is reported.
    std::stable_sort(student.rows.begin(), student.rows.end(),
                     [](const auto& a, const auto& b) { return a.first.day < b.first.day; });
    StudentRecord record;
    record.student_id = id;
    for (std::size_t i = 0; i < student.rows.size(); ++i) {
      if (i > 0 && student.rows[i].first.day == student.rows[i - 1].first.day) {
        throw Error(ErrorKind::kValidation, "line " + std::to_string(student.rows[i].second) +
                                                ": duplicate day " +
                                                std::to_string(student.rows[i].first.day) +
                                                " for student " + id);
      }
      record.observations.push_back(std::move(student.rows[i].first));
    }
    const bool has_dropout =
        std::any_of(record.observations.begin(), record.observations.end(),
                    [](const Observation& o) { return o.kind == EventKind::kDropout; });
    if (has_dropout) {
      if (student.declared) {
        throw Error(ErrorKind::kValidation,
                    "student " + id + " has a dropout_event and a declared status");
      }
      record.final_status = FinalStatus::kDropout;
    } else {
      record.final_status = student.declared.value_or(FinalStatus::kCompletion);
    }
    for (const auto& obs : record.observations) {
      if (obs.teacher) {
        record.teacher_id = *obs.teacher;
        break;
      }
    }
    Validate(record, schema);
    cohort.students.emplace(id, std::move(record));
  }
  return cohort;
}

Cohort Ingest(const std::string& events_path, const std::string& schema_path) {
  const Schema schema = LoadSchema(schema_path);
  std::ifstream in(events_path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open events file: " + events_path);
  return IngestStream(in, schema);
}

void WriteEvents(const Cohort& cohort, std::ostream& out) {
  for (const auto& [id, record] : cohort.students) {
    bool first = true;
    for (const auto& obs : record.observations) {
      json rec = json::object();
      rec["student"] = id;
      rec["day"] = obs.day;
      rec["kind"] = std::string(EventKindName(obs.kind));
      if (obs.teacher) rec["teacher"] = *obs.teacher;
      if (obs.inclass) rec["inclass"] = *obs.inclass;
      if (obs.outclass) rec["outclass"] = *obs.outclass;
      if (obs.polarity) rec["polarity"] = *obs.polarity;
      if (first && record.final_status == FinalStatus::kOngoing) rec["status"] = "ongoing";
      first = false;
      out << rec.dump() << '\n';
    }
  }
}

CohortSummary CohortStats(const Cohort& cohort) {
  if (cohort.empty()) throw Error(ErrorKind::kEmptyInput, "cohort has no students");
  CohortSummary s;
  double span_sum = 0.0;
  for (const auto& [id, record] : cohort.students) {
    ++s.students;
    switch (record.final_status) {
      case FinalStatus::kDropout: ++s.dropouts; break;
      case FinalStatus::kCompletion: ++s.completions; break;
      case FinalStatus::kOngoing: ++s.ongoing; break;
    }
    span_sum += record.last_day() - record.first_day();
    s.total_pairs += record.size();
  }
  s.dropout_rate = static_cast<double>(s.dropouts) / static_cast<double>(s.students);
  s.mean_span_days = span_sum / static_cast<double>(s.students);
  return s;
}

Cohort SubsetCohort(const Cohort& cohort, const std::vector<std::string>& ids) {
  Cohort out;
  out.schema = cohort.schema;
  for (const auto& id : ids) {
    auto it = cohort.students.find(id);
    if (it != cohort.students.end()) out.students.emplace(id, it->second);
  }
  return out;
}

StudentRecord TruncateAfter(const StudentRecord& record, int day_limit) {
  StudentRecord out;
  out.student_id = record.student_id;
  out.teacher_id = record.teacher_id;
  out.final_status = record.final_status;
  for (const auto& obs : record.observations) {
    if (obs.day > day_limit) {
      if (out.final_status == FinalStatus::kDropout) out.final_status = FinalStatus::kOngoing;
      break;
    }
    out.observations.push_back(obs);
  }
  return out;
}

}  // namespace dropwarn
