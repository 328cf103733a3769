#include "dropwarn/labeling.hpp"

#include <cstdio>
#include <ostream>

#include "dropwarn/error.hpp"
#include "dropwarn/features.hpp"
#include "dropwarn/parallel.hpp"

namespace dropwarn {

std::string_view ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kOriginalPositive: return "original_positive";
    case Provenance::kOriginalNegative: return "original_negative";
    case Provenance::kPseudoPositive: return "pseudo_positive";
  }
  return "unknown";
}

OriginalPairs BuildOriginalPairs(const Cohort& cohort) {
  OriginalPairs out;
  bool any_resolved = false;
  for (const auto& [id, record] : cohort.students) {
    if (!record.resolved()) continue;
    any_resolved = true;
    const std::size_t n = record.size();
    for (std::size_t j = 0; j < n; ++j) {
      TrainingPair pair;
      pair.student_id = id;
      pair.day = record.observations[j].day;
      if (record.dropped() && j + 1 == n) {
        pair.label = 1;
        pair.provenance = Provenance::kOriginalPositive;
        out.positives.push_back(std::move(pair));
      } else {
        pair.label = 0;
        pair.provenance = Provenance::kOriginalNegative;
        out.negatives.push_back(std::move(pair));
      }
    }
  }
  if (!any_resolved) throw Error(ErrorKind::kEmptyInput, "cohort has no resolved students");
  return out;
}

int HorizonLabel(const StudentRecord& student, int day, int delta) {
  if (!student.resolved()) {
    throw Error(ErrorKind::kUnresolvedStatus,
                "student " + student.student_id + " is still ongoing");
  }
  if (delta < 1) throw Error(ErrorKind::kDomain, "horizon must be >= 1 day");
  if (!student.dropped()) return 0;
  const int dropout_day = student.last_day();
  if (day >= dropout_day) {
    throw Error(ErrorKind::kOutOfRange, "student " + student.student_id + ": query day " +
                                            std::to_string(day) + " is not before dropout");
  }
  return dropout_day <= day + delta ? 1 : 0;
}

std::vector<int> QueryDays(const StudentRecord& student, QueryGrid grid) {
  std::vector<int> days;
  if (!student.resolved()) return days;
  const int end = student.last_day();  // resolution day, excluded
  if (grid == QueryGrid::kDaily) {
    for (int d = student.first_day(); d < end; ++d) days.push_back(d);
  } else {
    for (const auto& obs : student.observations)
      if (obs.day < end) days.push_back(obs.day);
  }
  return days;
}

void FeaturizePairs(std::vector<TrainingPair>& pairs, const Cohort& cohort,
                    const FeaturePipeline& pipeline, unsigned workers) {
  ParallelFor(pairs.size(), workers, [&](std::size_t i) {
    auto& pair = pairs[i];
    auto it = cohort.students.find(pair.student_id);
    if (it == cohort.students.end()) {
      throw Error(ErrorKind::kData, "pair references unknown student " + pair.student_id);
    }
    pair.features = pipeline.AssembleValues(it->second, pair.day);
  });
}

void WritePairsCsv(std::ostream& out, const std::vector<TrainingPair>& pairs) {
  out << "student_id,day,label,weight,provenance\n";
  char buf[32];
  for (const auto& p : pairs) {
    std::snprintf(buf, sizeof(buf), "%.17g", p.weight);
    out << p.student_id << ',' << p.day << ',' << p.label << ',' << buf << ','
        << ProvenanceName(p.provenance) << '\n';
  }
}

}  // namespace dropwarn
