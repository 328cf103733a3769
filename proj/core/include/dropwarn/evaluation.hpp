#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dropwarn/event_store.hpp"
#include "dropwarn/labeling.hpp"
#include "dropwarn/pca.hpp"

namespace dropwarn {

class FeaturePipeline;

// Rank-based (Mann-Whitney) AUC with average ranks for ties. Throws
// kUndefinedMetric unless both classes are present.
double Auc(std::span<const double> scores, std::span<const int> labels);

// Flags the top ceil(fraction * n) students by score (ties: smaller id first)
// and returns the share of `dropouts` among them.
double RecallAtFraction(const std::map<std::string, double>& scores,
                        const std::set<std::string>& dropouts, double fraction);

std::size_t FlagCount(std::size_t n, double fraction);

// Every (student, day) at which a resolved test student is still enrolled,
// with the fully assembled feature row.
struct QuerySet {
  std::vector<const StudentRecord*> students;  // per query
  std::vector<int> days;
  std::vector<char> observation_day;  // 1 if the student has an observation that day
  Matrix features;

  std::size_t size() const { return days.size(); }
};

QuerySet BuildQuerySet(const Cohort& cohort, const FeaturePipeline& pipeline, unsigned workers);

struct HorizonCell {
  std::optional<double> auc;  // empty when ground truth is single-class
  std::size_t queries = 0;
  std::size_t positives = 0;
};

struct RecallCell {
  std::optional<double> pooled;      // hits / dropouts over all days
  std::optional<double> daily_mean;  // mean of per-day recall over days with dropouts
  std::size_t days = 0;
  std::size_t dropouts = 0;
};

struct EvalReport {
  std::map<int, HorizonCell> horizons;
  std::map<std::pair<double, int>, RecallCell> recall;  // (fraction, delta)
  std::string fingerprint;
  QueryGrid grid = QueryGrid::kObservationDays;

  nlohmann::json ToJson() const;
  std::string ToCsv() const;
};

HorizonCell EvaluateHorizon(const QuerySet& queries, std::span<const double> scores, int delta,
                            QueryGrid grid);

// Daily flagging: on each day, rank the enrolled students and flag the top
// fraction; positives are students whose dropout falls in (day, day + delta].
RecallCell EvaluateFlagging(const QuerySet& queries, std::span<const double> scores,
                            double fraction, int delta);

struct EvalOptions {
  std::vector<int> deltas;
  std::vector<double> recall_fractions = {0.3};
  QueryGrid grid = QueryGrid::kObservationDays;
};

EvalReport Evaluate(const QuerySet& queries, std::span<const double> scores,
                    const EvalOptions& options, std::string fingerprint);

std::vector<int> DefaultDeltas();  // 1..14

}  // namespace dropwarn
