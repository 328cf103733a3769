#include "dropwarn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dropwarn/error.hpp"
#include "dropwarn/parallel.hpp"
#include "dropwarn/rng.hpp"

namespace dropwarn {
namespace {

constexpr std::uint64_t kSamplerStream = 0x5A4D;

std::string Hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

nlohmann::json TrainOptions::ToJson() const {
  nlohmann::json doc;
  doc["lookback"] = augmentation.lookback_days ? nlohmann::json(*augmentation.lookback_days)
                                               : nlohmann::json("none");
  doc["weighting"] = std::string(WeightingName(augmentation.weighting));
  doc["features"] = blocks.ToString();
  doc["lookback_days"] = features.lookback_days;
  doc["sampler"] = {{"target_positive_fraction", sampler.target_positive_fraction},
                    {"seed", sampler.seed},
                    {"carry_weights", sampler.carry_weights}};
  doc["model_type"] = model_type == ModelType::kGbdt ? "gbdt" : "logistic";
  doc["gbdt"] = {{"n_trees", gbdt.n_trees},
                 {"max_depth", gbdt.max_depth},
                 {"learning_rate", gbdt.learning_rate},
                 {"min_child_weight", gbdt.min_child_weight},
                 {"l2_leaf_reg", gbdt.l2_leaf_reg}};
  doc["logistic"] = {{"epochs", logistic.epochs}, {"step", logistic.step}};
  return doc;
}

TrainedModel::TrainedModel(FeaturePipeline pipeline, FeatureBlocks blocks,
                           std::variant<GbdtModel, LogisticModel> learner)
    : pipeline_(std::move(pipeline)),
      blocks_(blocks),
      columns_(pipeline_.ColumnsFor(blocks)),
      learner_(std::move(learner)) {}

double TrainedModel::ScoreRow(std::span<const double> full_row) const {
  if (full_row.size() != pipeline_.width()) {
    throw Error(ErrorKind::kSchema, "feature row width does not match the model pipeline");
  }
  const auto x = SelectColumns(full_row, columns_);
  return std::visit([&](const auto& m) { return m.Predict(x); }, learner_);
}

double TrainedModel::Score(const StudentRecord& student, int day) const {
  return ScoreRow(pipeline_.AssembleValues(student, day));
}

nlohmann::json TrainedModel::ToJson() const {
  nlohmann::json doc;
  doc["format"] = "dropwarn-model";
  doc["version"] = 1;
  doc["blocks"] = blocks_.ToString();
  doc["features"] = pipeline_.ToJson();
  if (const auto* g = std::get_if<GbdtModel>(&learner_)) {
    doc["learner_type"] = "gbdt";
    doc["learner"] = g->ToJson();
  } else {
    doc["learner_type"] = "logistic";
    doc["learner"] = std::get<LogisticModel>(learner_).ToJson();
  }
  return doc;
}

TrainedModel TrainedModel::FromJson(const nlohmann::json& doc) {
  if (doc.value("format", "") != "dropwarn-model" || doc.value("version", 0) != 1) {
    throw Error(ErrorKind::kSchema, "not a version-1 dropwarn model file");
  }
  try {
    auto pipeline = FeaturePipeline::FromJson(doc.at("features"));
    const auto blocks = FeatureBlocks::Parse(doc.at("blocks").get<std::string>());
    const auto type = doc.at("learner_type").get<std::string>();
    std::variant<GbdtModel, LogisticModel> learner;
    if (type == "gbdt") {
      learner = GbdtModel::FromJson(doc.at("learner"));
    } else if (type == "logistic") {
      learner = LogisticModel::FromJson(doc.at("learner"));
    } else {
      throw Error(ErrorKind::kSchema, "unknown learner type " + type);
    }
    TrainedModel model(std::move(pipeline), blocks, std::move(learner));
    const auto& names = std::holds_alternative<GbdtModel>(model.learner_)
                            ? std::get<GbdtModel>(model.learner_).feature_names()
                            : std::get<LogisticModel>(model.learner_).feature_names;
    if (names.size() != model.columns_.size()) {
      throw Error(ErrorKind::kSchema, "learner width disagrees with the selected feature blocks");
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] != model.pipeline_.names()[model.columns_[i]]) {
        throw Error(ErrorKind::kSchema, "learner feature names disagree with the pipeline");
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed model file: ") + e.what());
  }
}

std::string TrainedModel::Fingerprint() const { return Hex64(HashString(ToJson().dump())); }

PreparedTraining PrepareTraining(const Cohort& training, const FeatureConfig& features,
                                 const std::vector<int>& lookbacks, unsigned workers) {
  PreparedTraining prepared;
  prepared.cohort = &training;
  FeatureConfig full = features;
  full.blocks = FeatureBlocks::All();
  prepared.pipeline = FeaturePipeline::Fit(training, full);

  auto original = BuildOriginalPairs(training);
  FeaturizePairs(original.positives, training, prepared.pipeline, workers);
  FeaturizePairs(original.negatives, training, prepared.pipeline, workers);
  prepared.positives = std::move(original.positives);
  prepared.negatives = std::move(original.negatives);

  for (int lookback : std::set<int>(lookbacks.begin(), lookbacks.end())) {
    AugmentationConfig cfg;
    cfg.lookback_days = lookback;
    prepared.pseudo_by_lookback[lookback] = Augment(training, cfg, prepared.pipeline, workers);
  }
  return prepared;
}

TrainResult TrainPrepared(const PreparedTraining& prepared, const TrainOptions& options) {
  std::vector<TrainingPair> pseudo;
  if (options.augmentation.enabled()) {
    const int lookback = *options.augmentation.lookback_days;
    auto it = prepared.pseudo_by_lookback.find(lookback);
    if (it == prepared.pseudo_by_lookback.end()) {
      throw Error(ErrorKind::kMisuse, "lookback " + std::to_string(lookback) + " was not prepared");
    }
    pseudo = it->second;
    for (auto& p : pseudo) {
      const auto& record = prepared.cohort->students.at(p.student_id);
      p.weight = WeightOf(p.day, record.last_day(), lookback, options.augmentation.weighting);
    }
  }

  const auto sampled = Oversample(prepared.positives, pseudo, prepared.negatives, options.sampler);
  const auto columns = prepared.pipeline.ColumnsFor(options.blocks);
  if (columns.empty()) throw Error(ErrorKind::kDomain, "selected feature blocks produce no columns");
  const Dataset data = MakeDataset(sampled, prepared.pipeline.names(), &columns);

  TrainStats stats;
  stats.students = prepared.cohort->size();
  stats.positives = prepared.positives.size();
  stats.negatives = prepared.negatives.size();
  stats.pseudo_positives = pseudo.size();
  stats.positive_draws = sampled.size() - prepared.negatives.size();

  std::variant<GbdtModel, LogisticModel> learner;
  if (options.model_type == ModelType::kGbdt) {
    GbdtConfig cfg = options.gbdt;
    cfg.workers = options.workers;
    learner = FitGbdt(data, cfg, &stats.loss_trace);
  } else {
    learner = FitLogistic(data, options.logistic);
  }
  return {TrainedModel(prepared.pipeline, options.blocks, std::move(learner)), std::move(stats)};
}

TrainResult Train(const Cohort& training, const TrainOptions& options) {
  std::vector<int> lookbacks;
  if (options.augmentation.enabled()) lookbacks.push_back(*options.augmentation.lookback_days);
  const auto prepared = PrepareTraining(training, options.features, lookbacks, options.workers);
  return TrainPrepared(prepared, options);
}

std::vector<double> ScoreQueries(const TrainedModel& model, const QuerySet& queries,
                                 unsigned workers) {
  std::vector<double> scores(queries.size());
  ParallelFor(queries.size(), workers,
              [&](std::size_t i) { scores[i] = model.ScoreRow(queries.features.row(i)); });
  return scores;
}

Split SplitStudents(const Cohort& cohort, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::kDomain, "test fraction must lie in (0, 1)");
  }
  std::vector<std::string> ids;
  for (const auto& [id, record] : cohort.students) ids.push_back(id);
  Rng rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.NextU64() % i);
    std::swap(ids[i - 1], ids[j]);
  }
  const auto n_test = static_cast<std::size_t>(
      std::ceil(test_fraction * static_cast<double>(ids.size()) - 1e-9));
  Split split;
  split.test.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_test), ids.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

std::uint64_t SamplerSeed(std::uint64_t run_seed) { return MixSeed(run_seed, kSamplerStream); }

std::string SweepCell::Label() const {
  std::string out = "lookback=" + (lookback ? std::to_string(*lookback) : std::string("none"));
  out += " weighting=" + (lookback ? std::string(WeightingName(weighting)) : std::string("none"));
  out += " features=" + blocks.ToString();
  return out;
}

std::vector<SweepCell> GridCells(const std::vector<std::optional<int>>& lookbacks,
                                 const std::vector<Weighting>& weightings,
                                 const std::vector<FeatureBlocks>& feature_sets) {
  std::vector<SweepCell> cells;
  for (const auto& blocks : feature_sets) {
    for (const auto& lookback : lookbacks) {
      if (!lookback) {
        cells.push_back({std::nullopt, Weighting::kConvex, blocks});
        continue;
      }
      for (Weighting g : weightings) cells.push_back({lookback, g, blocks});
    }
  }
  return cells;
}

SweepReport RunSweep(const Cohort& cohort, const std::vector<SweepCell>& cells,
                     const SweepOptions& options) {
  if (options.seeds.empty()) throw Error(ErrorKind::kDomain, "sweep needs at least one seed");
  if (cells.empty()) throw Error(ErrorKind::kDomain, "sweep needs at least one cell");
  std::vector<int> lookbacks;
  for (const auto& c : cells)
    if (c.lookback) lookbacks.push_back(*c.lookback);

  SweepReport report;
  for (const auto& c : cells) report.cells.push_back({c, {}, {}, {}});

  const unsigned workers = options.base.workers;
  for (std::uint64_t seed : options.seeds) {
    const Split split = SplitStudents(cohort, options.test_fraction, seed);
    const Cohort train = SubsetCohort(cohort, split.train);
    const Cohort test = SubsetCohort(cohort, split.test);
    const auto prepared = PrepareTraining(train, options.base.features, lookbacks, workers);
    const QuerySet queries = BuildQuerySet(test, prepared.pipeline, workers);
    for (auto& result : report.cells) {
      TrainOptions opts = options.base;
      opts.augmentation.lookback_days = result.cell.lookback;
      opts.augmentation.weighting = result.cell.weighting;
      opts.blocks = result.cell.blocks;
      opts.sampler.seed = SamplerSeed(seed);
      const auto trained = TrainPrepared(prepared, opts);
      const auto scores = ScoreQueries(trained.model, queries, workers);
      result.per_seed.push_back(
          Evaluate(queries, scores, options.eval, trained.model.Fingerprint()));
    }
  }

  for (auto& result : report.cells) {
    for (int delta : options.eval.deltas) {
      std::vector<double> values;
      for (const auto& r : result.per_seed) {
        const auto& cell = r.horizons.at(delta);
        if (cell.auc) values.push_back(*cell.auc);
      }
      if (values.empty()) continue;
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      result.mean_auc[delta] = mean;
      result.std_auc[delta] =
          values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
    }
  }
  return report;
}

nlohmann::json SweepReport::ToJson() const {
  nlohmann::json doc;
  auto& arr = doc["cells"] = nlohmann::json::array();
  for (const auto& r : cells) {
    nlohmann::json cell;
    cell["label"] = r.cell.Label();
    cell["lookback"] = r.cell.lookback ? nlohmann::json(*r.cell.lookback) : nlohmann::json("none");
    cell["weighting"] = r.cell.lookback ? std::string(WeightingName(r.cell.weighting)) : "none";
    cell["features"] = r.cell.blocks.ToString();
    auto& summary = cell["summary"] = nlohmann::json::array();
    for (const auto& [delta, mean] : r.mean_auc) {
      summary.push_back({{"delta", delta}, {"mean_auc", mean}, {"std_auc", r.std_auc.at(delta)}});
    }
    auto& seeds = cell["per_seed"] = nlohmann::json::array();
    for (const auto& rep : r.per_seed) seeds.push_back(rep.ToJson());
    arr.push_back(std::move(cell));
  }
  return doc;
}

std::string SweepReport::ToCsv() const {
  std::ostringstream out;
  out << "lookback,weighting,features,delta,mean_auc,std_auc,seeds\n";
  char buf[64];
  for (const auto& r : cells) {
    for (const auto& [delta, mean] : r.mean_auc) {
      out << (r.cell.lookback ? std::to_string(*r.cell.lookback) : "none") << ','
          << (r.cell.lookback ? WeightingName(r.cell.weighting) : "none") << ','
          << r.cell.blocks.ToString() << ',' << delta << ',';
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g", mean, r.std_auc.at(delta));
      out << buf << ',' << r.per_seed.size() << '\n';
    }
  }
  return out.str();
}

}  // namespace dropwarn
