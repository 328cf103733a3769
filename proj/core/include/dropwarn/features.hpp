#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dropwarn/event_store.hpp"
#include "dropwarn/pca.hpp"
#include "dropwarn/teacher_history.hpp"

namespace dropwarn {

// The three feature families: in-class (PCA-reduced), out-of-class and
// time-variant (lookback windows plus teacher history).
enum class FeatureBlock { kInClass = 1, kOutClass = 2, kTimeVariant = 4 };

class FeatureBlocks {
 public:
  constexpr FeatureBlocks() = default;
  constexpr explicit FeatureBlocks(unsigned mask) : mask_(mask & 7u) {}

  static constexpr FeatureBlocks All() { return FeatureBlocks(7u); }
  // Accepts "in", "out", "time" joined by '+', e.g. "in+out+time".
  static FeatureBlocks Parse(std::string_view text);

  constexpr bool has(FeatureBlock b) const { return (mask_ & static_cast<unsigned>(b)) != 0; }
  constexpr bool contains(FeatureBlocks other) const { return (mask_ & other.mask_) == other.mask_; }
  constexpr unsigned mask() const { return mask_; }
  constexpr bool empty() const { return mask_ == 0; }
  std::string ToString() const;  // "In+Out+Time" ordering

  bool operator==(const FeatureBlocks&) const = default;

 private:
  unsigned mask_ = 7u;
};

enum class Aggregator { kMean, kSum, kLast, kCount };

struct FeatureConfig {
  std::vector<int> lookback_days = {7, 14, 21, 30};
  ComponentTarget pca_components = ComponentTarget::Fraction(0.9);
  std::vector<Aggregator> aggregators = {Aggregator::kMean, Aggregator::kLast, Aggregator::kCount};
  FeatureBlocks blocks = FeatureBlocks::All();

  // Throws kDomain on a non-increasing or non-positive lookback list.
  void Validate() const;

  bool operator==(const FeatureConfig&) const = default;
};

struct FeatureVector {
  std::vector<double> values;
  std::vector<std::string> names;
};

// Everything assemble() needs, fitted on a training cohort. Immutable after
// Fit; Assemble is const and safe to call concurrently.
class FeaturePipeline {
 public:
  FeaturePipeline() = default;
  FeaturePipeline(FeatureConfig config, Schema schema, std::optional<PcaModel> pca,
                  TeacherHistoryIndex history);

  static FeaturePipeline Fit(const Cohort& training, const FeatureConfig& config);

  const FeatureConfig& config() const { return config_; }
  const Schema& schema() const { return schema_; }
  const std::optional<PcaModel>& pca() const { return pca_; }
  const TeacherHistoryIndex& history() const { return history_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<FeatureBlock>& column_blocks() const { return column_blocks_; }
  std::size_t width() const { return names_.size(); }

  // Uses only observations with day <= at_day and teacher history strictly
  // before at_day. Throws kOutOfRange if at_day precedes the first observation.
  std::vector<double> AssembleValues(const StudentRecord& student, int at_day) const;
  FeatureVector Assemble(const StudentRecord& student, int at_day) const;

  // Column indices belonging to a subset of this pipeline's blocks.
  std::vector<std::size_t> ColumnsFor(FeatureBlocks subset) const;

  nlohmann::json ToJson() const;
  static FeaturePipeline FromJson(const nlohmann::json& doc);

 private:
  void BuildNames();

  FeatureConfig config_;
  Schema schema_;
  std::optional<PcaModel> pca_;
  TeacherHistoryIndex history_;
  std::vector<std::string> names_;
  std::vector<FeatureBlock> column_blocks_;
};

// Free-function form of FeaturePipeline::Assemble.
FeatureVector Assemble(const StudentRecord& student, int at_day, const std::optional<PcaModel>& pca,
                       const TeacherHistoryIndex& history, const FeatureConfig& config,
                       const Schema& schema);

// Collects every in-class vector of the cohort as PCA training rows.
Matrix InClassRows(const Cohort& cohort);

// features.csv: header "student_id,day,<names>", one row per pair.
void WriteFeatureCsv(std::ostream& out, const std::vector<std::string>& names,
                     const std::vector<std::pair<std::string, int>>& keys,
                     const std::vector<std::vector<double>>& rows);

}  // namespace dropwarn
