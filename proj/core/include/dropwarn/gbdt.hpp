#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dropwarn/dataset.hpp"
#include "dropwarn/features.hpp"

namespace dropwarn {

struct GbdtConfig {
  int n_trees = 200;
  int max_depth = 4;
  double learning_rate = 0.1;
  double min_child_weight = 1.0;
  double l2_leaf_reg = 1.0;
  unsigned workers = 1;  // split search across features; result is worker-independent

  void Validate() const;
};

// Internal nodes route x[feature] < threshold to the left child. Leaves carry
// their (already learning-rate scaled) output in value.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double Predict(std::span<const double> x) const;
  int Depth() const;
  bool operator==(const RegressionTree&) const = default;
};

class GbdtModel {
 public:
  GbdtModel() = default;
  GbdtModel(double base_score, std::vector<RegressionTree> trees,
            std::vector<std::string> feature_names, GbdtConfig config = {});

  double base_score() const { return base_score_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const GbdtConfig& config() const { return config_; }

  double Margin(std::span<const double> x) const;
  // sigmoid(base_score + sum of tree outputs). Throws kSchema on width mismatch.
  double Predict(std::span<const double> x) const;
  double Predict(const FeatureVector& fv) const { return Predict(fv.values); }

  nlohmann::json ToJson() const;
  static GbdtModel FromJson(const nlohmann::json& doc);

 private:
  double base_score_ = 0.0;
  std::vector<RegressionTree> trees_;
  std::vector<std::string> feature_names_;
  GbdtConfig config_;
};

// Second-order boosting on binary log-loss with exact greedy splits. Gain ties
// resolve to the lowest feature index, then the lowest threshold. If a leaf's
// Newton step would raise that leaf's loss, the step is halved until it does
// not. When loss_trace is given it receives the weighted training loss before
// the first round and after each round.
GbdtModel FitGbdt(const Dataset& data, const GbdtConfig& config,
                  std::vector<double>* loss_trace = nullptr);

}  // namespace dropwarn
