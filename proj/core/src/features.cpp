#include "dropwarn/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dropwarn/error.hpp"

namespace dropwarn {
namespace {

struct WindowStats {
  double classes = 0, follow_ups = 0, reschedules = 0, purchases = 0;
  double follow_up_pos = 0, follow_up_neg = 0;
  double mean_class_gap = 0, class_gaps = 0;
  double days_since_last_class = 0;
};

// Intermediate aggregates for one <student, day> pair. A default-constructed
// state has the right shape and is used to derive column names.
struct PairState {
  std::vector<double> in_sum, in_last;
  double in_count = 0;
  std::vector<double> out_sum, out_last;
  double out_count = 0;
  double tenure = 0, days_since_last_class = 0, class_total = 0;
  std::vector<WindowStats> windows;
  TeacherStats teacher;
};

const char* AggregatorName(Aggregator a) {
  switch (a) {
    case Aggregator::kMean: return "mean";
    case Aggregator::kSum: return "sum";
    case Aggregator::kLast: return "last";
    case Aggregator::kCount: return "count";
  }
  return "?";
}

template <class Sink>
void EmitVectorBlock(Sink& sink, FeatureBlock block, const std::string& prefix,
                     const std::vector<std::string>& cols, const std::vector<double>& sum,
                     const std::vector<double>& last, double count,
                     const std::vector<Aggregator>& aggs) {
  for (Aggregator a : aggs) {
    if (a == Aggregator::kCount) {
      sink(prefix + "_count", block, count);
      continue;
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
      double v = 0.0;
      if (a == Aggregator::kMean) v = count > 0 ? sum[i] / count : 0.0;
      if (a == Aggregator::kSum) v = sum[i];
      if (a == Aggregator::kLast) v = last[i];
      sink(prefix + "_" + AggregatorName(a) + "_" + cols[i], block, v);
    }
  }
}

template <class Sink>
void Emit(Sink& sink, const PairState& s, const FeatureConfig& config,
          const std::vector<std::string>& in_cols, const std::vector<std::string>& out_cols) {
  if (config.blocks.has(FeatureBlock::kInClass)) {
    EmitVectorBlock(sink, FeatureBlock::kInClass, "in", in_cols, s.in_sum, s.in_last, s.in_count,
                    config.aggregators);
  }
  if (config.blocks.has(FeatureBlock::kOutClass)) {
    EmitVectorBlock(sink, FeatureBlock::kOutClass, "out", out_cols, s.out_sum, s.out_last,
                    s.out_count, config.aggregators);
  }
  if (config.blocks.has(FeatureBlock::kTimeVariant)) {
    constexpr auto kTime = FeatureBlock::kTimeVariant;
    sink("tenure_days", kTime, s.tenure);
    sink("days_since_last_class", kTime, s.days_since_last_class);
    sink("class_count_total", kTime, s.class_total);
    for (std::size_t w = 0; w < config.lookback_days.size(); ++w) {
      const std::string p = "w" + std::to_string(config.lookback_days[w]) + "_";
      const WindowStats& ws = s.windows[w];
      sink(p + "class_count", kTime, ws.classes);
      sink(p + "follow_up_count", kTime, ws.follow_ups);
      sink(p + "reschedule_count", kTime, ws.reschedules);
      sink(p + "purchase_count", kTime, ws.purchases);
      sink(p + "follow_up_positive", kTime, ws.follow_up_pos);
      sink(p + "follow_up_negative", kTime, ws.follow_up_neg);
      sink(p + "mean_class_gap", kTime, ws.mean_class_gap);
      sink(p + "class_gap_count", kTime, ws.class_gaps);
      sink(p + "days_since_last_class", kTime, ws.days_since_last_class);
    }
    sink("teacher_courses_taught", kTime, s.teacher.courses_taught);
    sink("teacher_distinct_students", kTime, s.teacher.distinct_students);
    sink("teacher_dropout_rate", kTime, s.teacher.dropout_rate);
  }
}

std::vector<std::string> PcaColumnNames(const std::optional<PcaModel>& pca) {
  std::vector<std::string> names;
  if (!pca) return names;
  for (std::size_t i = 0; i < pca->output_width(); ++i) names.push_back("pc" + std::to_string(i));
  return names;
}

PairState BlankState(const FeatureConfig& config, std::size_t in_width, std::size_t out_width) {
  PairState s;
  s.in_sum.assign(in_width, 0.0);
  s.in_last.assign(in_width, 0.0);
  s.out_sum.assign(out_width, 0.0);
  s.out_last.assign(out_width, 0.0);
  s.windows.resize(config.lookback_days.size());
  return s;
}

PairState ComputeState(const StudentRecord& student, int at_day,
                       const std::optional<PcaModel>& pca, const TeacherHistoryIndex& history,
                       const FeatureConfig& config, const Schema& schema) {
  if (student.observations.empty() || at_day < student.first_day()) {
    throw Error(ErrorKind::kOutOfRange, "student " + student.student_id + ": day " +
                                            std::to_string(at_day) +
                                            " precedes the first observation");
  }
  const std::size_t in_width = pca ? pca->output_width() : 0;
  PairState s = BlankState(config, in_width, schema.outclass_width());
  std::vector<double> projected(in_width);
  std::vector<int> prev_class(config.lookback_days.size(), -1);
  int last_class = -1;

  for (const auto& obs : student.observations) {
    if (obs.day > at_day) break;
    if (obs.kind == EventKind::kDropout) continue;

    if (obs.inclass && pca) {
      pca->Project(*obs.inclass, projected);
      for (std::size_t i = 0; i < in_width; ++i) s.in_sum[i] += projected[i];
      s.in_last = projected;
    }
    if (obs.inclass) s.in_count += 1;
    if (obs.outclass) {
      for (std::size_t i = 0; i < obs.outclass->size(); ++i) s.out_sum[i] += (*obs.outclass)[i];
      s.out_last = *obs.outclass;
      s.out_count += 1;
    }
    const bool is_class = obs.kind == EventKind::kClassSession;
    if (is_class) {
      last_class = obs.day;
      s.class_total += 1;
    }

    for (std::size_t w = 0; w < config.lookback_days.size(); ++w) {
      if (obs.day <= at_day - config.lookback_days[w]) continue;
      WindowStats& ws = s.windows[w];
      switch (obs.kind) {
        case EventKind::kClassSession:
          ws.classes += 1;
          if (prev_class[w] >= 0) {
            ws.mean_class_gap += obs.day - prev_class[w];
            ws.class_gaps += 1;
          }
          prev_class[w] = obs.day;
          break;
        case EventKind::kFollowUp:
          ws.follow_ups += 1;
          if (obs.polarity && *obs.polarity > 0) ws.follow_up_pos += 1;
          if (obs.polarity && *obs.polarity < 0) ws.follow_up_neg += 1;
          break;
        case EventKind::kReschedule: ws.reschedules += 1; break;
        case EventKind::kPurchase: ws.purchases += 1; break;
        case EventKind::kDropout: break;
      }
    }
  }

  for (std::size_t w = 0; w < s.windows.size(); ++w) {
    WindowStats& ws = s.windows[w];
    if (ws.class_gaps > 0) ws.mean_class_gap /= ws.class_gaps;
    if (prev_class[w] >= 0) ws.days_since_last_class = at_day - prev_class[w];
  }
  s.tenure = at_day - student.first_day();
  if (last_class >= 0) s.days_since_last_class = at_day - last_class;
  s.teacher = history.Query(student.teacher_id, at_day);
  return s;
}

}  // namespace

FeatureBlocks FeatureBlocks::Parse(std::string_view text) {
  unsigned mask = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('+', start);
    if (end == std::string_view::npos) end = text.size();
    std::string part(text.substr(start, end - start));
    std::transform(part.begin(), part.end(), part.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (part == "in") {
      mask |= static_cast<unsigned>(FeatureBlock::kInClass);
    } else if (part == "out") {
      mask |= static_cast<unsigned>(FeatureBlock::kOutClass);
    } else if (part == "time") {
      mask |= static_cast<unsigned>(FeatureBlock::kTimeVariant);
    } else {
      throw Error(ErrorKind::kUsage, "unknown feature block '" + part + "' in '" +
                                         std::string(text) + "'");
    }
    start = end + 1;
  }
  return FeatureBlocks(mask);
}

std::string FeatureBlocks::ToString() const {
  std::string out;
  auto add = [&](FeatureBlock b, const char* name) {
    if (!has(b)) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(FeatureBlock::kInClass, "In");
  add(FeatureBlock::kOutClass, "Out");
  add(FeatureBlock::kTimeVariant, "Time");
  return out.empty() ? "None" : out;
}

void FeatureConfig::Validate() const {
  for (std::size_t i = 0; i < lookback_days.size(); ++i) {
    if (lookback_days[i] < 1) throw Error(ErrorKind::kDomain, "lookback lengths must be >= 1");
    if (i > 0 && lookback_days[i] <= lookback_days[i - 1])
      throw Error(ErrorKind::kDomain, "lookback lengths must be strictly increasing");
  }
  if (blocks.empty()) throw Error(ErrorKind::kDomain, "at least one feature block is required");
}

FeaturePipeline::FeaturePipeline(FeatureConfig config, Schema schema, std::optional<PcaModel> pca,
                                 TeacherHistoryIndex history)
    : config_(std::move(config)),
      schema_(std::move(schema)),
      pca_(std::move(pca)),
      history_(std::move(history)) {
  config_.Validate();
  BuildNames();
}

FeaturePipeline FeaturePipeline::Fit(const Cohort& training, const FeatureConfig& config) {
  config.Validate();
  std::optional<PcaModel> pca;
  if (config.blocks.has(FeatureBlock::kInClass) && training.schema.inclass_width() > 0) {
    pca = FitPca(InClassRows(training), config.pca_components);
  }
  return FeaturePipeline(config, training.schema, std::move(pca),
                         TeacherHistoryIndex::Build(training));
}

void FeaturePipeline::BuildNames() {
  names_.clear();
  column_blocks_.clear();
  const PairState blank =
      BlankState(config_, pca_ ? pca_->output_width() : 0, schema_.outclass_width());
  auto sink = [&](const std::string& name, FeatureBlock block, double) {
    names_.push_back(name);
    column_blocks_.push_back(block);
  };
  Emit(sink, blank, config_, PcaColumnNames(pca_), schema_.outclass_columns);
}

std::vector<double> FeaturePipeline::AssembleValues(const StudentRecord& student,
                                                    int at_day) const {
  const PairState s = ComputeState(student, at_day, pca_, history_, config_, schema_);
  std::vector<double> values;
  values.reserve(names_.size());
  auto sink = [&](const std::string&, FeatureBlock, double v) {
    values.push_back(std::isfinite(v) ? v : 0.0);
  };
  Emit(sink, s, config_, PcaColumnNames(pca_), schema_.outclass_columns);
  return values;
}

FeatureVector FeaturePipeline::Assemble(const StudentRecord& student, int at_day) const {
  return {AssembleValues(student, at_day), names_};
}

std::vector<std::size_t> FeaturePipeline::ColumnsFor(FeatureBlocks subset) const {
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < column_blocks_.size(); ++i) {
    if (subset.has(column_blocks_[i])) cols.push_back(i);
  }
  return cols;
}

FeatureVector Assemble(const StudentRecord& student, int at_day, const std::optional<PcaModel>& pca,
                       const TeacherHistoryIndex& history, const FeatureConfig& config,
                       const Schema& schema) {
  return FeaturePipeline(config, schema, pca, history).Assemble(student, at_day);
}

Matrix InClassRows(const Cohort& cohort) {
  std::size_t n = 0;
  for (const auto& [id, record] : cohort.students)
    for (const auto& obs : record.observations)
      if (obs.inclass) ++n;
  Matrix rows(n, cohort.schema.inclass_width());
  std::size_t r = 0;
  for (const auto& [id, record] : cohort.students) {
    for (const auto& obs : record.observations) {
      if (!obs.inclass) continue;
      std::copy(obs.inclass->begin(), obs.inclass->end(), rows.row(r).begin());
      ++r;
    }
  }
  return rows;
}

namespace {

nlohmann::json PcaToJson(const PcaModel& pca) {
  nlohmann::json doc;
  doc["mean"] = pca.mean;
  doc["explained_variance"] = pca.explained_variance;
  auto& comps = doc["components"] = nlohmann::json::array();
  for (std::size_t r = 0; r < pca.components.rows(); ++r) {
    auto row = pca.components.row(r);
    comps.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return doc;
}

PcaModel PcaFromJson(const nlohmann::json& doc) {
  PcaModel pca;
  pca.mean = doc.at("mean").get<std::vector<double>>();
  pca.explained_variance = doc.at("explained_variance").get<std::vector<double>>();
  const auto& comps = doc.at("components");
  pca.components = Matrix(comps.size(), pca.mean.size());
  for (std::size_t r = 0; r < comps.size(); ++r) {
    const auto row = comps[r].get<std::vector<double>>();
    if (row.size() != pca.mean.size()) throw Error(ErrorKind::kSchema, "PCA component width");
    std::copy(row.begin(), row.end(), pca.components.row(r).begin());
  }
  return pca;
}

}  // namespace

nlohmann::json FeaturePipeline::ToJson() const {
  nlohmann::json doc;
  auto& cfg = doc["config"];
  cfg["lookback_days"] = config_.lookback_days;
  cfg["pca_mode"] = config_.pca_components.mode == ComponentTarget::Mode::kCount ? "count"
                                                                                  : "variance_fraction";
  cfg["pca_value"] = config_.pca_components.value;
  std::vector<std::string> aggs;
  for (auto a : config_.aggregators) aggs.emplace_back(AggregatorName(a));
  cfg["aggregators"] = aggs;
  cfg["blocks"] = config_.blocks.ToString();
  doc["schema"] = {{"inclass_columns", schema_.inclass_columns},
                   {"outclass_columns", schema_.outclass_columns},
                   {"epoch", schema_.epoch}};
  doc["pca"] = pca_ ? PcaToJson(*pca_) : nlohmann::json(nullptr);
  doc["teacher_history"] = history_.ToJson();
  doc["feature_names"] = names_;
  return doc;
}

FeaturePipeline FeaturePipeline::FromJson(const nlohmann::json& doc) {
  FeatureConfig config;
  const auto& cfg = doc.at("config");
  config.lookback_days = cfg.at("lookback_days").get<std::vector<int>>();
  config.pca_components.mode = cfg.at("pca_mode").get<std::string>() == "count"
                                   ? ComponentTarget::Mode::kCount
                                   : ComponentTarget::Mode::kVarianceFraction;
  config.pca_components.value = cfg.at("pca_value").get<double>();
  config.aggregators.clear();
  for (const auto& name : cfg.at("aggregators").get<std::vector<std::string>>()) {
    if (name == "mean") config.aggregators.push_back(Aggregator::kMean);
    else if (name == "sum") config.aggregators.push_back(Aggregator::kSum);
    else if (name == "last") config.aggregators.push_back(Aggregator::kLast);
    else if (name == "count") config.aggregators.push_back(Aggregator::kCount);
    else throw Error(ErrorKind::kSchema, "unknown aggregator " + name);
  }
  config.blocks = FeatureBlocks::Parse(cfg.at("blocks").get<std::string>());
  Schema schema;
  schema.inclass_columns = doc.at("schema").at("inclass_columns").get<std::vector<std::string>>();
  schema.outclass_columns = doc.at("schema").at("outclass_columns").get<std::vector<std::string>>();
  schema.epoch = doc.at("schema").at("epoch").get<std::string>();
  std::optional<PcaModel> pca;
  if (!doc.at("pca").is_null()) pca = PcaFromJson(doc.at("pca"));
  FeaturePipeline pipeline(config, schema, std::move(pca),
                           TeacherHistoryIndex::FromJson(doc.at("teacher_history")));
  if (doc.contains("feature_names") &&
      doc.at("feature_names").get<std::vector<std::string>>() != pipeline.names()) {
    throw Error(ErrorKind::kSchema, "stored feature names disagree with the feature config");
  }
  return pipeline;
}

void WriteFeatureCsv(std::ostream& out, const std::vector<std::string>& names,
                     const std::vector<std::pair<std::string, int>>& keys,
                     const std::vector<std::vector<double>>& rows) {
  out << "student_id,day";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << keys[i].first << ',' << keys[i].second;
    for (double v : rows[i]) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace dropwarn
