#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dropwarn/event_store.hpp"

namespace dropwarn {

class FeaturePipeline;

enum class Provenance { kOriginalPositive, kOriginalNegative, kPseudoPositive };

std::string_view ProvenanceName(Provenance p);

// A labeled <student, day> instance. Features are filled by FeaturizePairs.
struct TrainingPair {
  std::string student_id;
  int day = 0;
  std::vector<double> features;
  int label = 0;
  double weight = 1.0;
  Provenance provenance = Provenance::kOriginalNegative;
};

struct OriginalPairs {
  std::vector<TrainingPair> positives;  // P: last observation of each dropout student
  std::vector<TrainingPair> negatives;  // N: every other observation of resolved students
};

// Ongoing students are skipped. Throws kEmptyInput without resolved students.
OriginalPairs BuildOriginalPairs(const Cohort& cohort);

// 1 iff the student dropped out on a day in (day, day + delta].
int HorizonLabel(const StudentRecord& student, int day, int delta);

enum class QueryGrid {
  kDaily,             // every day from the first observation to the day before resolution
  kObservationDays,   // only observation days before resolution
};

// Days at which a resolved student is scored during evaluation. The
// resolution day itself is never a query.
std::vector<int> QueryDays(const StudentRecord& student, QueryGrid grid);

// Assembles features for each pair in place, in parallel over pairs.
void FeaturizePairs(std::vector<TrainingPair>& pairs, const Cohort& cohort,
                    const FeaturePipeline& pipeline, unsigned workers);

// pairs.csv: student_id,day,label,weight,provenance
void WritePairsCsv(std::ostream& out, const std::vector<TrainingPair>& pairs);

}  // namespace dropwarn
