#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dropwarn/augmentation.hpp"
#include "dropwarn/evaluation.hpp"
#include "dropwarn/features.hpp"
#include "dropwarn/gbdt.hpp"
#include "dropwarn/labeling.hpp"
#include "dropwarn/logistic.hpp"
#include "dropwarn/oversample.hpp"

namespace dropwarn {

enum class ModelType { kGbdt, kLogistic };

struct TrainOptions {
  FeatureConfig features;  // pipeline is always fit with every block
  FeatureBlocks blocks = FeatureBlocks::All();
  AugmentationConfig augmentation;
  SamplerConfig sampler;
  ModelType model_type = ModelType::kGbdt;
  GbdtConfig gbdt;
  LogisticConfig logistic;
  unsigned workers = 1;

  nlohmann::json ToJson() const;
};

// Feature pipeline, the columns the learner saw and the learner itself.
class TrainedModel {
 public:
  TrainedModel(FeaturePipeline pipeline, FeatureBlocks blocks,
               std::variant<GbdtModel, LogisticModel> learner);

  const FeaturePipeline& pipeline() const { return pipeline_; }
  FeatureBlocks blocks() const { return blocks_; }
  const std::vector<std::size_t>& columns() const { return columns_; }
  const std::variant<GbdtModel, LogisticModel>& learner() const { return learner_; }

  // Probability from a full-width pipeline feature row.
  double ScoreRow(std::span<const double> full_row) const;
  double Score(const StudentRecord& student, int day) const;

  nlohmann::json ToJson() const;
  static TrainedModel FromJson(const nlohmann::json& doc);
  std::string Fingerprint() const;

 private:
  FeaturePipeline pipeline_;
  FeatureBlocks blocks_;
  std::vector<std::size_t> columns_;
  std::variant<GbdtModel, LogisticModel> learner_;
};

struct TrainStats {
  std::size_t students = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t pseudo_positives = 0;
  std::size_t positive_draws = 0;
  std::vector<double> loss_trace;
};

struct TrainResult {
  TrainedModel model;
  TrainStats stats;
};

// Featurized training material shared by every arm trained on one cohort.
struct PreparedTraining {
  const Cohort* cohort = nullptr;
  FeaturePipeline pipeline;
  std::vector<TrainingPair> positives;
  std::vector<TrainingPair> negatives;
  std::map<int, std::vector<TrainingPair>> pseudo_by_lookback;  // weights unset
};

PreparedTraining PrepareTraining(const Cohort& training, const FeatureConfig& features,
                                 const std::vector<int>& lookbacks, unsigned workers);

// features -> P, N -> P~ with weights -> weighted over-sampling -> learner.
TrainResult TrainPrepared(const PreparedTraining& prepared, const TrainOptions& options);
TrainResult Train(const Cohort& training, const TrainOptions& options);

std::vector<double> ScoreQueries(const TrainedModel& model, const QuerySet& queries,
                                 unsigned workers);

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Random student-level partition; ceil(test_fraction * n) students go to test.
Split SplitStudents(const Cohort& cohort, double test_fraction, std::uint64_t seed);

// Seed derivation shared by the CLI and the sweep so a one-cell sweep equals a
// direct train + evaluate.
std::uint64_t SamplerSeed(std::uint64_t run_seed);

struct SweepCell {
  std::optional<int> lookback;
  Weighting weighting = Weighting::kConvex;
  FeatureBlocks blocks = FeatureBlocks::All();

  std::string Label() const;  // e.g. "lookback=7 weighting=convex features=In+Out+Time"
};

struct SweepOptions {
  std::vector<std::uint64_t> seeds = {0};
  double test_fraction = 0.2;
  TrainOptions base;  // per-cell fields are overwritten from each cell
  EvalOptions eval;
};

struct SweepCellResult {
  SweepCell cell;
  std::vector<EvalReport> per_seed;  // aligned with SweepOptions::seeds
  std::map<int, double> mean_auc;    // over seeds with a defined AUC
  std::map<int, double> std_auc;
};

struct SweepReport {
  std::vector<SweepCellResult> cells;

  nlohmann::json ToJson() const;
  std::string ToCsv() const;
};

// Cartesian product; lookback "none" cells are emitted once per feature set.
std::vector<SweepCell> GridCells(const std::vector<std::optional<int>>& lookbacks,
                                 const std::vector<Weighting>& weightings,
                                 const std::vector<FeatureBlocks>& feature_sets);

SweepReport RunSweep(const Cohort& cohort, const std::vector<SweepCell>& cells,
                     const SweepOptions& options);

}  // namespace dropwarn
