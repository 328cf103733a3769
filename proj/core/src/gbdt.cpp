#include "dropwarn/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <nlohmann/json.hpp>

#include "dropwarn/error.hpp"
#include "dropwarn/parallel.hpp"

namespace dropwarn {
namespace {

// Gains below this share of the parent score are rounding noise (for example a
// "split" of a node whose children would get identical values).
constexpr double kMinRelativeGain = 1e-9;

struct SplitCandidate {
  double gain = 0.0;
  double threshold = 0.0;
  int feature = -1;
};

double LeafLoss(const std::vector<std::uint32_t>& members, std::span<const double> margin,
                double shift, std::span<const int> y, std::span<const double> w) {
  double loss = 0.0;
  for (std::uint32_t i : members) {
    const double z = margin[i] + shift;
    const double s = y[i] == 1 ? -z : z;
    loss += w[i] * (s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)));
  }
  return loss;
}

// Per-feature sample order and the feature values in that order.
struct PresortedColumns {
  std::vector<std::vector<std::uint32_t>> index;
  std::vector<std::vector<double>> value;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const GbdtConfig& config,
              const PresortedColumns& sorted)
      : data_(data), config_(config), sorted_(sorted) {}

  RegressionTree Build(std::span<const double> margin, std::vector<int>& node_of) {
    const std::size_t n = data_.size();
    grad_.resize(n);
    hess_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = Sigmoid(margin[i]);
      grad_[i] = data_.w[i] * (p - data_.y[i]);
      hess_[i] = data_.w[i] * p * (1.0 - p);
    }
    RegressionTree tree;
    tree.nodes.emplace_back();
    node_g_.assign(1, 0.0);
    node_h_.assign(1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      node_g_[0] += grad_[i];
      node_h_[0] += hess_[i];
    }
    std::fill(node_of.begin(), node_of.end(), 0);

    std::vector<int> frontier = {0};
    for (int depth = 0; depth < config_.max_depth && !frontier.empty(); ++depth) {
      const auto best = FindSplits(tree, frontier, node_of);
      std::vector<int> next;
      std::vector<char> split(tree.nodes.size(), 0);
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        if (best[s].feature < 0) continue;
        const int node = frontier[s];
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        node_g_.resize(tree.nodes.size(), 0.0);
        node_h_.resize(tree.nodes.size(), 0.0);
        split.resize(tree.nodes.size(), 0);
        auto& parent = tree.nodes[static_cast<std::size_t>(node)];
        parent.feature = best[s].feature;
        parent.threshold = best[s].threshold;
        parent.left = left;
        parent.right = left + 1;
        split[static_cast<std::size_t>(node)] = 1;
        next.push_back(left);
        next.push_back(left + 1);
      }
      if (next.empty()) break;
      for (std::size_t i = 0; i < n; ++i) {
        const auto node = static_cast<std::size_t>(node_of[i]);
        if (!split[node]) continue;
        const auto& parent = tree.nodes[node];
        const int child = data_.x(i, static_cast<std::size_t>(parent.feature)) < parent.threshold
                              ? parent.left
                              : parent.right;
        node_of[i] = child;
        node_g_[static_cast<std::size_t>(child)] += grad_[i];
        node_h_[static_cast<std::size_t>(child)] += hess_[i];
      }
      frontier = std::move(next);
    }
    return tree;
  }

  double NodeG(int node) const { return node_g_[static_cast<std::size_t>(node)]; }
  double NodeH(int node) const { return node_h_[static_cast<std::size_t>(node)]; }

 private:
  std::vector<SplitCandidate> FindSplits(const RegressionTree& tree, const std::vector<int>& frontier,
                                         const std::vector<int>& node_of) const {
    const std::size_t slots = frontier.size();
    const std::size_t features = data_.width();
    std::vector<int> slot_of(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < slots; ++s) slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);

    const double lambda = config_.l2_leaf_reg;
    const double mcw = config_.min_child_weight;
    std::vector<double> parent_score(slots);
    for (std::size_t s = 0; s < slots; ++s) {
      const double g = NodeG(frontier[s]);
      const double h = NodeH(frontier[s]);
      parent_score[s] = h + lambda > 0.0 ? g * g / (h + lambda) : 0.0;
    }

    std::vector<int> slot_of_sample(node_of.size());
    for (std::size_t i = 0; i < node_of.size(); ++i) {
      slot_of_sample[i] = slot_of[static_cast<std::size_t>(node_of[i])];
    }

    std::vector<SplitCandidate> per_feature(features * slots);
    ParallelFor(features, config_.workers, [&](std::size_t j) {
      std::vector<double> gl(slots, 0.0), hl(slots, 0.0), last(slots, 0.0);
      std::vector<char> seen(slots, 0);
      SplitCandidate* best = &per_feature[j * slots];
      for (std::size_t s = 0; s < slots; ++s) best[s].gain = kMinRelativeGain * parent_score[s];
      const auto& order = sorted_.index[j];
      const auto& values = sorted_.value[j];
      for (std::size_t r = 0; r < order.size(); ++r) {
        const std::uint32_t i = order[r];
        const int s_raw = slot_of_sample[i];
        if (s_raw < 0) continue;
        const auto s = static_cast<std::size_t>(s_raw);
        const double x = values[r];
        if (seen[s] && x > last[s]) {
          const double g = NodeG(frontier[s]);
          const double h = NodeH(frontier[s]);
          const double gr = g - gl[s];
          const double hr = h - hl[s];
          if (hl[s] >= mcw && hr >= mcw && hl[s] + lambda > 0.0 && hr + lambda > 0.0) {
            const double gain =
                0.5 * (gl[s] * gl[s] / (hl[s] + lambda) + gr * gr / (hr + lambda) - parent_score[s]);
            if (gain > best[s].gain) {
              double threshold = 0.5 * (last[s] + x);
              if (!(threshold > last[s])) threshold = x;
              best[s] = {gain, threshold, static_cast<int>(j)};
            }
          }
        }
        gl[s] += grad_[i];
        hl[s] += hess_[i];
        last[s] = x;
        seen[s] = 1;
      }
    });

    std::vector<SplitCandidate> best(slots);
    for (std::size_t s = 0; s < slots; ++s) best[s].gain = kMinRelativeGain * parent_score[s];
    for (std::size_t j = 0; j < features; ++j) {
      for (std::size_t s = 0; s < slots; ++s) {
        const auto& c = per_feature[j * slots + s];
        if (c.feature >= 0 && c.gain > best[s].gain) best[s] = c;
      }
    }
    return best;
  }

  const Dataset& data_;
  const GbdtConfig& config_;
  const PresortedColumns& sorted_;
  std::vector<double> grad_, hess_;
  std::vector<double> node_g_, node_h_;
};

nlohmann::json ConfigToJson(const GbdtConfig& c) {
  return {{"n_trees", c.n_trees},
          {"max_depth", c.max_depth},
          {"learning_rate", c.learning_rate},
          {"min_child_weight", c.min_child_weight},
          {"l2_leaf_reg", c.l2_leaf_reg}};
}

}  // namespace

void GbdtConfig::Validate() const {
  if (n_trees < 0) throw Error(ErrorKind::kDomain, "n_trees must be >= 0");
  if (max_depth < 1) throw Error(ErrorKind::kDomain, "max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw Error(ErrorKind::kDomain, "learning_rate must lie in (0, 1]");
  if (min_child_weight < 0.0) throw Error(ErrorKind::kDomain, "min_child_weight must be >= 0");
  if (l2_leaf_reg < 0.0) throw Error(ErrorKind::kDomain, "l2_leaf_reg must be >= 0");
}

double RegressionTree::Predict(std::span<const double> x) const {
  std::size_t node = 0;
  while (!nodes[node].leaf()) {
    const auto& n = nodes[node];
    node = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                                         : n.right);
  }
  return nodes[node].value;
}

int RegressionTree::Depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].leaf()) continue;
    for (int child : {nodes[i].left, nodes[i].right}) {
      depth[static_cast<std::size_t>(child)] = depth[i] + 1;
      deepest = std::max(deepest, depth[i] + 1);
    }
  }
  return deepest;
}

GbdtModel::GbdtModel(double base_score, std::vector<RegressionTree> trees,
                     std::vector<std::string> feature_names, GbdtConfig config)
    : base_score_(base_score),
      trees_(std::move(trees)),
      feature_names_(std::move(feature_names)),
      config_(config) {}

double GbdtModel::Margin(std::span<const double> x) const {
  double z = base_score_;
  for (const auto& t : trees_) z += t.Predict(x);
  return z;
}

double GbdtModel::Predict(std::span<const double> x) const {
  if (x.size() != feature_names_.size()) {
    throw Error(ErrorKind::kSchema, "feature width " + std::to_string(x.size()) +
                                        " does not match model width " +
                                        std::to_string(feature_names_.size()));
  }
  return Sigmoid(Margin(x));
}

nlohmann::json GbdtModel::ToJson() const {
  nlohmann::json doc;
  doc["format"] = "dropwarn-gbdt";
  doc["version"] = 1;
  doc["base_score"] = base_score_;
  doc["config"] = ConfigToJson(config_);
  doc["feature_names"] = feature_names_;
  auto& trees = doc["trees"] = nlohmann::json::array();
  for (const auto& t : trees_) {
    std::vector<int> feature, left, right;
    std::vector<double> threshold, value;
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"value", value}});
  }
  return doc;
}

GbdtModel GbdtModel::FromJson(const nlohmann::json& doc) {
  if (doc.value("format", "") != "dropwarn-gbdt" || doc.value("version", 0) != 1) {
    throw Error(ErrorKind::kSchema, "not a version-1 dropwarn GBDT model");
  }
  GbdtConfig config;
  const auto& c = doc.at("config");
  config.n_trees = c.at("n_trees").get<int>();
  config.max_depth = c.at("max_depth").get<int>();
  config.learning_rate = c.at("learning_rate").get<double>();
  config.min_child_weight = c.at("min_child_weight").get<double>();
  config.l2_leaf_reg = c.at("l2_leaf_reg").get<double>();
  const auto names = doc.at("feature_names").get<std::vector<std::string>>();
  std::vector<RegressionTree> trees;
  for (const auto& t : doc.at("trees")) {
    const auto feature = t.at("feature").get<std::vector<int>>();
    const auto threshold = t.at("threshold").get<std::vector<double>>();
    const auto left = t.at("left").get<std::vector<int>>();
    const auto right = t.at("right").get<std::vector<int>>();
    const auto value = t.at("value").get<std::vector<double>>();
    const std::size_t m = feature.size();
    if (threshold.size() != m || left.size() != m || right.size() != m || value.size() != m || m == 0) {
      throw Error(ErrorKind::kSchema, "malformed tree node arrays");
    }
    RegressionTree tree;
    for (std::size_t i = 0; i < m; ++i) {
      TreeNode node{feature[i], threshold[i], left[i], right[i], value[i]};
      if (!node.leaf()) {
        const auto in_range = [&](int k) { return k > static_cast<int>(i) && k < static_cast<int>(m); };
        if (node.feature >= static_cast<int>(names.size()) || !in_range(node.left) ||
            !in_range(node.right)) {
          throw Error(ErrorKind::kSchema, "tree node references out of range");
        }
      }
      tree.nodes.push_back(node);
    }
    trees.push_back(std::move(tree));
  }
  return GbdtModel(doc.at("base_score").get<double>(), std::move(trees), names, config);
}

GbdtModel FitGbdt(const Dataset& data, const GbdtConfig& config, std::vector<double>* loss_trace) {
  config.Validate();
  const std::size_t n = data.size();
  const std::size_t f = data.width();
  double wpos = 0.0, wall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(data.w[i] >= 0.0) || !std::isfinite(data.w[i]))
      throw Error(ErrorKind::kData, "sample weights must be finite and non-negative");
    wall += data.w[i];
    if (data.y[i] == 1) wpos += data.w[i];
    for (std::size_t j = 0; j < f; ++j)
      if (!std::isfinite(data.x(i, j))) throw Error(ErrorKind::kData, "non-finite feature value");
  }
  if (!(wpos > 0.0) || !(wall - wpos > 0.0)) {
    throw Error(ErrorKind::kDegenerateData, "training data must contain both classes");
  }
  const double prior = wpos / wall;
  const double base = std::log(prior / (1.0 - prior));

  PresortedColumns sorted;
  sorted.index.resize(f);
  sorted.value.resize(f);
  ParallelFor(f, config.workers, [&](std::size_t j) {
    auto& order = sorted.index[j];
    order.resize(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return data.x(a, j) < data.x(b, j); });
    sorted.value[j].resize(n);
    for (std::size_t r = 0; r < n; ++r) sorted.value[j][r] = data.x(order[r], j);
  });

  std::vector<double> margin(n, base);
  std::vector<int> node_of(n, 0);
  if (loss_trace) {
    loss_trace->clear();
    loss_trace->push_back(WeightedLogLoss(margin, data.y, data.w));
  }

  TreeBuilder builder(data, config, sorted);
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(config.n_trees));
  for (int round = 0; round < config.n_trees; ++round) {
    RegressionTree tree = builder.Build(margin, node_of);

    std::vector<std::vector<std::uint32_t>> members(tree.nodes.size());
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(node_of[i])].push_back(static_cast<std::uint32_t>(i));
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      auto& node = tree.nodes[k];
      if (!node.leaf()) continue;
      const double g = builder.NodeG(static_cast<int>(k));
      const double h = builder.NodeH(static_cast<int>(k));
      const double denom = h + config.l2_leaf_reg;
      double value = denom > 0.0 ? -g / denom * config.learning_rate : 0.0;
      if (value != 0.0 && !members[k].empty()) {
        const double before = LeafLoss(members[k], margin, 0.0, data.y, data.w);
        int halvings = 0;
        while (LeafLoss(members[k], margin, value, data.y, data.w) > before) {
          value *= 0.5;
          if (++halvings > 60) {
            value = 0.0;
            break;
          }
        }
      }
      node.value = value;
      for (std::uint32_t i : members[k]) margin[i] += value;
    }
    if (loss_trace) loss_trace->push_back(WeightedLogLoss(margin, data.y, data.w));
    trees.push_back(std::move(tree));
  }
  return GbdtModel(base, std::move(trees), data.feature_names, config);
}

}  // namespace dropwarn
