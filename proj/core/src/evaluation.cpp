#include "dropwarn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dropwarn/error.hpp"
#include "dropwarn/features.hpp"
#include "dropwarn/parallel.hpp"

namespace dropwarn {

double Auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::kDomain, "scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    // ranks i+1 .. j+1 share their average
    const double avg_rank = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j + 1;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorKind::kUndefinedMetric, "AUC needs both positive and negative labels");
  }
  const double np = static_cast<double>(positives);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(negatives));
}

std::size_t FlagCount(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::kDomain, "flag fraction must lie in (0, 1]");
  }
  // Guard against 0.3 * 10 = 3.0000000000000004 rounding up to 4.
  const double raw = fraction * static_cast<double>(n);
  return std::min(n, static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw))));
}

double RecallAtFraction(const std::map<std::string, double>& scores,
                        const std::set<std::string>& dropouts, double fraction) {
  if (dropouts.empty()) throw Error(ErrorKind::kUndefinedMetric, "recall needs at least one dropout");
  std::vector<std::pair<std::string, double>> ranked(scores.begin(), scores.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t k = FlagCount(ranked.size(), fraction);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += dropouts.count(ranked[i].first);
  return static_cast<double>(hits) / static_cast<double>(dropouts.size());
}

QuerySet BuildQuerySet(const Cohort& cohort, const FeaturePipeline& pipeline, unsigned workers) {
  QuerySet q;
  for (const auto& [id, record] : cohort.students) {
    std::size_t next_obs = 0;
    for (int d : QueryDays(record, QueryGrid::kDaily)) {
      while (next_obs < record.size() && record.observations[next_obs].day < d) ++next_obs;
      const bool is_obs = next_obs < record.size() && record.observations[next_obs].day == d;
      q.students.push_back(&record);
      q.days.push_back(d);
      q.observation_day.push_back(is_obs ? 1 : 0);
    }
  }
  q.features = Matrix(q.size(), pipeline.width());
  ParallelFor(q.size(), workers, [&](std::size_t i) {
    const auto values = pipeline.AssembleValues(*q.students[i], q.days[i]);
    std::copy(values.begin(), values.end(), q.features.row(i).begin());
  });
  return q;
}

HorizonCell EvaluateHorizon(const QuerySet& queries, std::span<const double> scores, int delta,
                            QueryGrid grid) {
  std::vector<double> s;
  std::vector<int> y;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (grid == QueryGrid::kObservationDays && !queries.observation_day[i]) continue;
    s.push_back(scores[i]);
    y.push_back(HorizonLabel(*queries.students[i], queries.days[i], delta));
  }
  HorizonCell cell;
  cell.queries = y.size();
  cell.positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  if (cell.positives > 0 && cell.positives < cell.queries) cell.auc = Auc(s, y);
  return cell;
}

RecallCell EvaluateFlagging(const QuerySet& queries, std::span<const double> scores,
                            double fraction, int delta) {
  std::map<int, std::vector<std::size_t>> by_day;
  for (std::size_t i = 0; i < queries.size(); ++i) by_day[queries.days[i]].push_back(i);

  RecallCell cell;
  std::size_t hits = 0;
  double recall_sum = 0.0;
  for (auto& [day, idx] : by_day) {
    std::size_t dropouts = 0;
    for (std::size_t i : idx) dropouts += static_cast<std::size_t>(HorizonLabel(*queries.students[i], day, delta));
    if (dropouts == 0) continue;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return queries.students[a]->student_id < queries.students[b]->student_id;
    });
    const std::size_t k = FlagCount(idx.size(), fraction);
    std::size_t day_hits = 0;
    for (std::size_t r = 0; r < k; ++r)
      day_hits += static_cast<std::size_t>(HorizonLabel(*queries.students[idx[r]], day, delta));
    hits += day_hits;
    cell.dropouts += dropouts;
    ++cell.days;
    recall_sum += static_cast<double>(day_hits) / static_cast<double>(dropouts);
  }
  if (cell.dropouts > 0) {
    cell.pooled = static_cast<double>(hits) / static_cast<double>(cell.dropouts);
    cell.daily_mean = recall_sum / static_cast<double>(cell.days);
  }
  return cell;
}

EvalReport Evaluate(const QuerySet& queries, std::span<const double> scores,
                    const EvalOptions& options, std::string fingerprint) {
  if (scores.size() != queries.size()) throw Error(ErrorKind::kDomain, "one score per query expected");
  EvalReport report;
  report.fingerprint = std::move(fingerprint);
  report.grid = options.grid;
  for (int delta : options.deltas) {
    report.horizons[delta] = EvaluateHorizon(queries, scores, delta, options.grid);
    for (double f : options.recall_fractions) {
      report.recall[{f, delta}] = EvaluateFlagging(queries, scores, f, delta);
    }
  }
  return report;
}

std::vector<int> DefaultDeltas() {
  std::vector<int> d(14);
  std::iota(d.begin(), d.end(), 1);
  return d;
}

namespace {

nlohmann::json OptionalNumber(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string FormatOptional(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", *v);
  return buf;
}

}  // namespace

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json doc;
  doc["fingerprint"] = fingerprint;
  doc["query_grid"] = grid == QueryGrid::kDaily ? "daily" : "observation_days";
  auto& h = doc["horizons"] = nlohmann::json::array();
  for (const auto& [delta, cell] : horizons) {
    h.push_back({{"delta", delta},
                 {"auc", OptionalNumber(cell.auc)},
                 {"queries", cell.queries},
                 {"positives", cell.positives}});
  }
  auto& r = doc["recall"] = nlohmann::json::array();
  for (const auto& [key, cell] : recall) {
    r.push_back({{"fraction", key.first},
                 {"delta", key.second},
                 {"pooled", OptionalNumber(cell.pooled)},
                 {"daily_mean", OptionalNumber(cell.daily_mean)},
                 {"days", cell.days},
                 {"dropouts", cell.dropouts}});
  }
  return doc;
}

std::string EvalReport::ToCsv() const {
  std::ostringstream out;
  out << "delta,auc,queries,positives";
  std::set<double> fractions;
  for (const auto& [key, cell] : recall) fractions.insert(key.first);
  for (double f : fractions) out << ",recall_pooled@" << f << ",recall_daily_mean@" << f;
  out << '\n';
  for (const auto& [delta, cell] : horizons) {
    out << delta << ',' << FormatOptional(cell.auc) << ',' << cell.queries << ',' << cell.positives;
    for (double f : fractions) {
      auto it = recall.find({f, delta});
      if (it == recall.end()) {
        out << ",,";
      } else {
        out << ',' << FormatOptional(it->second.pooled) << ','
            << FormatOptional(it->second.daily_mean);
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace dropwarn
