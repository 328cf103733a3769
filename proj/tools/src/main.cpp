#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "artifacts.hpp"
#include "dropwarn/augmentation.hpp"
#include "dropwarn/error.hpp"
#include "dropwarn/evaluation.hpp"
#include "dropwarn/event_store.hpp"
#include "dropwarn/features.hpp"
#include "dropwarn/labeling.hpp"
#include "dropwarn/parallel.hpp"
#include "dropwarn/pipeline.hpp"
#include "dropwarn/synthgen.hpp"

namespace dropwarn::cli {
namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitModel = 4;

// Errors raised while reading or applying a saved model.
struct ModelError : Error {
  using Error::Error;
};

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
    case ErrorKind::kDomain:
    case ErrorKind::kMisuse:
      return kExitUsage;
    default:
      return kExitData;
  }
}

void ReportError(const std::string& kind, const std::string& message, int code) {
  nlohmann::json rec = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  std::cerr << rec.dump() << std::endl;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int ParseInt(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::kUsage, "invalid " + what + " '" + text + "'");
}

// "1..14", "1,7,14" or a mix such as "1..3,7".
std::vector<int> ParseDeltas(const std::string& text) {
  std::set<int> out;
  for (const auto& part : SplitList(text)) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.insert(ParseInt(part, "delta"));
      continue;
    }
    const int lo = ParseInt(part.substr(0, dots), "delta");
    const int hi = ParseInt(part.substr(dots + 2), "delta");
    if (hi < lo) throw Error(ErrorKind::kUsage, "empty delta range '" + part + "'");
    for (int d = lo; d <= hi; ++d) out.insert(d);
  }
  if (out.empty() || *out.begin() < 1) throw Error(ErrorKind::kUsage, "deltas must be >= 1");
  return {out.begin(), out.end()};
}

std::optional<int> ParseLookback(const std::string& text) {
  if (text == "none") return std::nullopt;
  const int v = ParseInt(text, "lookback");
  if (v < 1) throw Error(ErrorKind::kUsage, "lookback must be >= 1 or 'none'");
  return v;
}

Weighting ParseWeightingFlag(const std::string& text) {
  const auto g = ParseWeighting(text);
  if (!g) throw Error(ErrorKind::kUsage, "unknown weighting '" + text + "'");
  return *g;
}

std::string Dump(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

struct InputFlags {
  std::string events;
  std::string schema;

  void Register(CLI::App* app) {
    app->add_option("--events", events, "events.jsonl")->required();
    app->add_option("--schema", schema, "schema.json")->required();
  }
  Cohort Load() const { return Ingest(events, schema); }
};

struct FeatureFlags {
  std::string windows = "7,14,21,30";
  std::string pca = "0.9";

  void Register(CLI::App* app) {
    app->add_option("--windows", windows, "feature lookback windows in days")->capture_default_str();
    app->add_option("--pca-components", pca, "component count (integer) or variance fraction")
        ->capture_default_str();
  }
  FeatureConfig Build() const {
    FeatureConfig cfg;
    cfg.lookback_days.clear();
    for (const auto& w : SplitList(windows)) cfg.lookback_days.push_back(ParseInt(w, "window"));
    if (pca.find('.') == std::string::npos) {
      const int k = ParseInt(pca, "pca component count");
      if (k < 1) throw Error(ErrorKind::kUsage, "pca component count must be >= 1");
      cfg.pca_components = ComponentTarget::Count(static_cast<std::size_t>(k));
    } else {
      const double f = std::stod(pca);
      if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorKind::kUsage, "pca fraction must lie in (0, 1]");
      cfg.pca_components = ComponentTarget::Fraction(f);
    }
    cfg.Validate();
    return cfg;
  }
};

struct TrainFlags {
  std::string lookback = "7";
  std::string weighting = "convex";
  std::string features = "in+out+time";
  std::string model_type = "gbdt";
  double target_fraction = 0.3;
  bool carry_weights = false;
  GbdtConfig gbdt;
  LogisticConfig logistic;

  void Register(CLI::App* app) {
    app->add_option("--lookback", lookback, "none, 3, 7, 14 or any positive day count")
        ->capture_default_str();
    app->add_option("--weighting", weighting, "linear, convex or concave")
        ->check(CLI::IsMember({"linear", "convex", "concave"}))
        ->capture_default_str();
    app->add_option("--features", features, "feature blocks, e.g. in+time")->capture_default_str();
    app->add_option("--model-type", model_type, "gbdt or logistic")
        ->check(CLI::IsMember({"gbdt", "logistic"}))
        ->capture_default_str();
    app->add_option("--target-fraction", target_fraction, "positive share after over-sampling")
        ->capture_default_str();
    app->add_flag("--carry-weights", carry_weights, "keep pseudo weights in the loss");
    app->add_option("--n-trees", gbdt.n_trees)->capture_default_str();
    app->add_option("--max-depth", gbdt.max_depth)->capture_default_str();
    app->add_option("--learning-rate", gbdt.learning_rate)->capture_default_str();
    app->add_option("--min-child-weight", gbdt.min_child_weight)->capture_default_str();
    app->add_option("--l2", gbdt.l2_leaf_reg)->capture_default_str();
    app->add_option("--epochs", logistic.epochs, "logistic baseline epochs")->capture_default_str();
    app->add_option("--step", logistic.step, "logistic baseline step size")->capture_default_str();
  }

  TrainOptions Build(const FeatureConfig& features_cfg, std::uint64_t seed, unsigned workers) const {
    TrainOptions o;
    o.features = features_cfg;
    o.blocks = FeatureBlocks::Parse(features);
    if (o.blocks.empty()) throw Error(ErrorKind::kUsage, "no feature blocks selected");
    o.augmentation.lookback_days = ParseLookback(lookback);
    o.augmentation.weighting = ParseWeightingFlag(weighting);
    o.sampler.target_positive_fraction = target_fraction;
    o.sampler.carry_weights = carry_weights;
    o.sampler.seed = SamplerSeed(seed);
    PositiveDrawCount(1, target_fraction);  // validates the fraction
    o.model_type = model_type == "gbdt" ? ModelType::kGbdt : ModelType::kLogistic;
    o.gbdt = gbdt;
    o.gbdt.Validate();
    o.logistic = logistic;
    o.logistic.seed = seed;
    o.workers = workers;
    return o;
  }
};

struct Common {
  std::uint64_t seed = 0;
  unsigned workers = DefaultWorkers();
  std::string out_dir = ".";
};

TrainedModel LoadModel(const std::string& path) {
  try {
    return TrainedModel::FromJson(nlohmann::json::parse(ReadFile(path)));
  } catch (const Error& e) {
    throw ModelError(e.kind(), "model " + path + ": " + e.what());
  } catch (const std::exception& e) {
    throw ModelError(ErrorKind::kSchema, "model " + path + ": " + e.what());
  }
}

Split LoadSplit(const std::string& path) {
  try {
    const auto doc = nlohmann::json::parse(ReadFile(path));
    return {doc.at("train").get<std::vector<std::string>>(),
            doc.at("test").get<std::vector<std::string>>()};
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kParse, "split " + path + ": " + e.what());
  }
}

void Finish(const std::string& subcommand, const std::vector<std::string>& argv,
            const nlohmann::json& config, const std::vector<std::string>& inputs, OutputSet& out) {
  const auto manifest = Manifest(subcommand, argv, config, inputs, out);
  out.Add("manifest.json", Dump(manifest));
  out.Commit();
}

// ---------------------------------------------------------------------------

struct SimulateCmd {
  SimConfig sim;
  std::string intercept;

  void Register(CLI::App* app) {
    app->add_option("--n-students", sim.n_students)->capture_default_str();
    app->add_option("--target-rate", sim.target_dropout_rate)->capture_default_str();
    app->add_option("--tolerance", sim.calibration_tolerance)->capture_default_str();
    app->add_option("--mean-span", sim.mean_span_days)->capture_default_str();
    app->add_option("--gap-min", sim.class_gap_min)->capture_default_str();
    app->add_option("--gap-max", sim.class_gap_max)->capture_default_str();
    app->add_option("--recency-slope", sim.recency_slope)->capture_default_str();
    app->add_option("--engagement-slope", sim.engagement_slope)->capture_default_str();
    app->add_option("--follow-up-relief", sim.follow_up_relief)->capture_default_str();
    app->add_option("--missed-class-shock", sim.missed_class_shock)->capture_default_str();
    app->add_option("--intercept", intercept, "fixed hazard intercept (skips calibration)");
    app->add_option("--teachers", sim.n_teachers)->capture_default_str();
  }

  void Run(const Common& c, const std::vector<std::string>& argv) {
    sim.seed = c.seed;
    if (!intercept.empty()) sim.intercept = std::stod(intercept);
    const auto out = Simulate(sim);

    OutputSet files(c.out_dir);
    std::ostringstream events, schema, truth;
    WriteEvents(out.cohort, events);
    WriteSchema(out.cohort.schema, schema);
    WriteTruth(out.truth, truth);
    files.Add("events.jsonl", events.str());
    files.Add("schema.json", schema.str());
    files.Add("truth.jsonl", truth.str());

    const auto stats = CohortStats(out.cohort);
    nlohmann::json config = {
        {"seed", sim.seed},
        {"n_students", sim.n_students},
        {"target_dropout_rate", sim.target_dropout_rate},
        {"calibration_tolerance", sim.calibration_tolerance},
        {"mean_span_days", sim.mean_span_days},
        {"class_gap_days", {sim.class_gap_min, sim.class_gap_max}},
        {"recency_slope", sim.recency_slope},
        {"engagement_slope", sim.engagement_slope},
        {"follow_up_relief", sim.follow_up_relief},
        {"missed_class_shock", sim.missed_class_shock},
        {"intercept", out.intercept},
        {"realized_dropout_rate", out.realized_dropout_rate},
        {"mean_span_realized", stats.mean_span_days},
        {"total_pairs", stats.total_pairs}};
    Finish("simulate", argv, config, {}, files);
  }
};

struct FeaturizeCmd {
  InputFlags input;
  FeatureFlags features;
  std::string lookback = "none";
  std::string weighting = "convex";

  void Register(CLI::App* app) {
    input.Register(app);
    features.Register(app);
    app->add_option("--lookback", lookback, "also emit pseudo-positive pairs for this lookback")
        ->capture_default_str();
    app->add_option("--weighting", weighting)->check(CLI::IsMember({"linear", "convex", "concave"}))
        ->capture_default_str();
  }

  void Run(const Common& c, const std::vector<std::string>& argv) {
    const auto cfg = features.Build();
    AugmentationConfig aug;
    aug.lookback_days = ParseLookback(lookback);
    aug.weighting = ParseWeightingFlag(weighting);
    const Cohort cohort = input.Load();
    const auto pipeline = FeaturePipeline::Fit(cohort, cfg);

    auto pairs = BuildOriginalPairs(cohort);
    std::vector<TrainingPair> all = std::move(pairs.positives);
    all.insert(all.end(), pairs.negatives.begin(), pairs.negatives.end());
    FeaturizePairs(all, cohort, pipeline, c.workers);
    std::size_t pseudo_count = 0;
    if (aug.enabled()) {
      auto pseudo = Augment(cohort, aug, pipeline, c.workers);
      pseudo_count = pseudo.size();
      all.insert(all.end(), pseudo.begin(), pseudo.end());
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return std::tie(a.student_id, a.day) < std::tie(b.student_id, b.day);
    });

    std::vector<std::pair<std::string, int>> keys;
    std::vector<std::vector<double>> rows;
    for (const auto& p : all) {
      keys.emplace_back(p.student_id, p.day);
      rows.push_back(p.features);
    }
    std::ostringstream fcsv, pcsv;
    WriteFeatureCsv(fcsv, pipeline.names(), keys, rows);
    WritePairsCsv(pcsv, all);

    OutputSet files(c.out_dir);
    files.Add("features.csv", fcsv.str());
    files.Add("pairs.csv", pcsv.str());
    nlohmann::json config = {{"lookback_days", cfg.lookback_days},
                             {"augmentation_lookback", lookback},
                             {"weighting", weighting},
                             {"feature_width", pipeline.width()},
                             {"pairs", all.size()},
                             {"pseudo_pairs", pseudo_count}};
    Finish("featurize", argv, config, {input.events, input.schema}, files);
  }
};

struct TrainCmd {
  InputFlags input;
  FeatureFlags features;
  TrainFlags train;
  double test_fraction = 0.2;

  void Register(CLI::App* app) {
    input.Register(app);
    features.Register(app);
    train.Register(app);
    app->add_option("--test-fraction", test_fraction,
                    "students held out for evaluation; 0 trains on everyone")
        ->capture_default_str();
  }

  void Run(const Common& c, const std::vector<std::string>& argv) {
    const auto opts = train.Build(features.Build(), c.seed, c.workers);
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
      throw Error(ErrorKind::kUsage, "test fraction must lie in [0, 1)");
    const Cohort cohort = input.Load();

    Split split;
    if (test_fraction > 0.0) {
      split = SplitStudents(cohort, test_fraction, c.seed);
    } else {
      for (const auto& [id, s] : cohort.students) split.train.push_back(id);
    }
    const Cohort training = SubsetCohort(cohort, split.train);
    const auto result = Train(training, opts);

    OutputSet files(c.out_dir);
    files.Add("model.json", Dump(result.model.ToJson()));
    files.Add("split.json", Dump({{"seed", c.seed},
                                  {"test_fraction", test_fraction},
                                  {"train", split.train},
                                  {"test", split.test}}));
    auto config = opts.ToJson();
    config["seed"] = c.seed;
    config["test_fraction"] = test_fraction;
    config["model_fingerprint"] = result.model.Fingerprint();
    config["stats"] = {{"students", result.stats.students},
                       {"positive_pairs", result.stats.positives},
                       {"negative_pairs", result.stats.negatives},
                       {"pseudo_pairs", result.stats.pseudo_positives},
                       {"positive_draws", result.stats.positive_draws}};
    if (!result.stats.loss_trace.empty()) {
      config["stats"]["final_training_loss"] = result.stats.loss_trace.back();
    }
    Finish("train", argv, config, {input.events, input.schema}, files);
  }
};

struct EvaluateCmd {
  InputFlags input;
  std::string model_path;
  std::string split_path;
  std::string deltas = "1..14";
  std::string fractions = "0.3";
  std::string grid = "observation";

  void Register(CLI::App* app) {
    input.Register(app);
    app->add_option("--model", model_path, "model.json")->required();
    app->add_option("--split", split_path, "split.json; its test students are evaluated");
    app->add_option("--deltas", deltas, "horizons, e.g. 1..14 or 1,7,14")->capture_default_str();
    app->add_option("--top-fraction", fractions, "flagging fractions, comma separated")
        ->capture_default_str();
    app->add_option("--grid", grid, "query days: observation or daily")
        ->check(CLI::IsMember({"observation", "daily"}))
        ->capture_default_str();
  }

  void Run(const Common& c, const std::vector<std::string>& argv) {
    EvalOptions opt;
    opt.deltas = ParseDeltas(deltas);
    opt.recall_fractions.clear();
    for (const auto& f : SplitList(fractions)) {
      const double v = std::stod(f);
      if (!(v > 0.0 && v <= 1.0)) throw Error(ErrorKind::kUsage, "top fraction must lie in (0, 1]");
      opt.recall_fractions.push_back(v);
    }
    opt.grid = grid == "daily" ? QueryGrid::kDaily : QueryGrid::kObservationDays;
    const auto model = LoadModel(model_path);
    Cohort cohort = input.Load();
    std::vector<std::string> inputs = {input.events, input.schema, model_path};
    if (!split_path.empty()) {
      cohort = SubsetCohort(cohort, LoadSplit(split_path).test);
      inputs.push_back(split_path);
    }
    std::vector<std::string> resolved;
    for (const auto& [id, s] : cohort.students)
      if (s.resolved()) resolved.push_back(id);
    if (resolved.empty()) throw Error(ErrorKind::kEmptyInput, "no resolved students to evaluate");
    cohort = SubsetCohort(cohort, resolved);

    QuerySet queries;
    std::vector<double> scores;
    try {
      queries = BuildQuerySet(cohort, model.pipeline(), c.workers);
      scores = ScoreQueries(model, queries, c.workers);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kSchema) throw ModelError(e.kind(), e.what());
      throw;
    }
    const auto report = Evaluate(queries, scores, opt, model.Fingerprint());

    OutputSet files(c.out_dir);
    files.Add("report.json", Dump(report.ToJson()));
    files.Add("report.csv", report.ToCsv());
    nlohmann::json config = {{"deltas", opt.deltas},
                             {"top_fractions", opt.recall_fractions},
                             {"grid", grid},
                             {"students", cohort.size()},
                             {"model_fingerprint", model.Fingerprint()}};
    Finish("evaluate", argv, config, inputs, files);
  }
};

struct PredictCmd {
  InputFlags input;
  std::string model_path;
  std::optional<int> day;
  double top_fraction = 0.3;

  void Register(CLI::App* app) {
    input.Register(app);
    app->add_option("--model", model_path, "model.json")->required();
    app->add_option("--day", day,
                    "scoring day; default is the latest day in the event log");
    app->add_option("--top-fraction", top_fraction, "share of students flagged as at risk")
        ->capture_default_str();
  }

  void Run(const Common& c, const std::vector<std::string>& argv) {
    if (!(top_fraction > 0.0 && top_fraction <= 1.0))
      throw Error(ErrorKind::kUsage, "top fraction must lie in (0, 1]");
    const auto model = LoadModel(model_path);
    const Cohort cohort = input.Load();
    int at = 0;
    if (day) {
      at = *day;
    } else {
      for (const auto& [id, s] : cohort.students) at = std::max(at, s.last_day());
    }

    // Students enrolled on the scoring day: started on or before it and not
    // resolved by then. Everything after the day is hidden from the model.
    std::vector<const StudentRecord*> active;
    std::vector<StudentRecord> views;
    views.reserve(cohort.size());
    for (const auto& [id, s] : cohort.students) {
      if (s.first_day() > at) continue;
      if (s.resolved() && s.last_day() <= at) continue;
      views.push_back(TruncateAfter(s, at));
    }
    if (views.empty()) throw Error(ErrorKind::kEmptyInput, "no students enrolled on day " + std::to_string(at));
    std::vector<double> scores(views.size());
    try {
      ParallelFor(views.size(), c.workers, [&](std::size_t i) { scores[i] = model.Score(views[i], at); });
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kSchema) throw ModelError(e.kind(), e.what());
      throw;
    }
    std::vector<std::size_t> order(views.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return views[a].student_id < views[b].student_id;
    });
    const std::size_t flagged = FlagCount(views.size(), top_fraction);

    std::ostringstream csv;
    csv << "rank,student_id,day,probability,flagged\n";
    char buf[64];
    for (std::size_t r = 0; r < order.size(); ++r) {
      std::snprintf(buf, sizeof(buf), "%.17g", scores[order[r]]);
      csv << r + 1 << ',' << views[order[r]].student_id << ',' << at << ',' << buf << ','
          << (r < flagged ? 1 : 0) << '\n';
    }
    OutputSet files(c.out_dir);
    files.Add("predictions.csv", csv.str());
    nlohmann::json config = {{"day", at},
                             {"top_fraction", top_fraction},
                             {"students", views.size()},
                             {"flagged", flagged},
                             {"model_fingerprint", model.Fingerprint()}};
    Finish("predict", argv, config, {input.events, input.schema, model_path}, files);
  }
};

struct SweepCmd {
  InputFlags input;
  FeatureFlags features;
  TrainFlags train;
  std::string lookbacks = "none,3,7,14";
  std::string weightings = "linear,convex,concave";
  std::string feature_sets = "in+out+time";
  std::string seeds = "0";
  std::string deltas = "1..14";
  double test_fraction = 0.2;
  double top_fraction = 0.3;

  void Register(CLI::App* app) {
    input.Register(app);
    features.Register(app);
    train.Register(app);
    app->add_option("--lookbacks", lookbacks)->capture_default_str();
    app->add_option("--weightings", weightings)->capture_default_str();
    app->add_option("--feature-sets", feature_sets, "comma separated, e.g. in,time,in+out+time")
        ->capture_default_str();
    app->add_option("--seeds", seeds, "comma separated split seeds")->capture_default_str();
    app->add_option("--deltas", deltas)->capture_default_str();
    app->add_option("--test-fraction", test_fraction)->capture_default_str();
    app->add_option("--top-fraction", top_fraction)->capture_default_str();
  }

  void Run(const Common& c, const std::vector<std::string>& argv) {
    SweepOptions so;
    so.base = train.Build(features.Build(), c.seed, c.workers);
    so.test_fraction = test_fraction;
    so.seeds.clear();
    for (const auto& s : SplitList(seeds)) so.seeds.push_back(static_cast<std::uint64_t>(ParseInt(s, "seed")));
    so.eval.deltas = ParseDeltas(deltas);
    so.eval.recall_fractions = {top_fraction};

    std::vector<std::optional<int>> lbs;
    for (const auto& l : SplitList(lookbacks)) lbs.push_back(ParseLookback(l));
    std::vector<Weighting> gs;
    for (const auto& g : SplitList(weightings)) gs.push_back(ParseWeightingFlag(g));
    std::vector<FeatureBlocks> fs;
    for (const auto& f : SplitList(feature_sets)) fs.push_back(FeatureBlocks::Parse(f));
    const auto cells = GridCells(lbs, gs, fs);

    const Cohort cohort = input.Load();
    const auto report = RunSweep(cohort, cells, so);

    OutputSet files(c.out_dir);
    files.Add("sweep.json", Dump(report.ToJson()));
    files.Add("sweep.csv", report.ToCsv());
    auto config = so.base.ToJson();
    config["seeds"] = so.seeds;
    config["cells"] = cells.size();
    config["deltas"] = so.eval.deltas;
    config["test_fraction"] = test_fraction;
    Finish("sweep", argv, config, {input.events, input.schema}, files);
  }
};

int Dispatch(const std::vector<std::string>& args);

struct ReplayCmd {
  std::string manifest_path;
  std::string out_dir;

  void Register(CLI::App* app) {
    app->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
    app->add_option("--into", out_dir, "write outputs here instead of the recorded --out-dir");
  }

  int Run() {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(ReadFile(manifest_path));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorKind::kParse, "manifest " + manifest_path + ": " + e.what());
    }
    auto args = doc.at("argv").get<std::vector<std::string>>();
    if (!out_dir.empty()) {
      bool replaced = false;
      for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--out-dir") {
          args[i + 1] = out_dir;
          replaced = true;
        }
      }
      if (!replaced) {
        args.push_back("--out-dir");
        args.push_back(out_dir);
      }
    }
    return Dispatch(args);
  }
};

int Dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Early-warning dropout prediction: simulate, featurize, train, predict, evaluate, sweep"};
  app.name("dropwarn");
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "random seed")->capture_default_str();
    sub->add_option("--workers", common.workers, "worker threads (output does not depend on it)")
        ->capture_default_str();
    sub->add_option("--out-dir", common.out_dir, "output directory")->capture_default_str();
  };

  SimulateCmd simulate;
  FeaturizeCmd featurize;
  TrainCmd train;
  EvaluateCmd evaluate;
  PredictCmd predict;
  SweepCmd sweep;
  ReplayCmd replay;
  auto* s_sim = app.add_subcommand("simulate", "generate a synthetic cohort");
  auto* s_feat = app.add_subcommand("featurize", "dump training pairs and their features");
  auto* s_train = app.add_subcommand("train", "train a model on a student split");
  auto* s_eval = app.add_subcommand("evaluate", "per-horizon AUC and top-fraction recall");
  auto* s_pred = app.add_subcommand("predict", "rank enrolled students by dropout probability");
  auto* s_sweep = app.add_subcommand("sweep", "lookback x weighting x feature-set grid");
  auto* s_replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  simulate.Register(s_sim);
  featurize.Register(s_feat);
  train.Register(s_train);
  evaluate.Register(s_eval);
  predict.Register(s_pred);
  sweep.Register(s_sweep);
  replay.Register(s_replay);
  for (auto* sub : {s_sim, s_feat, s_train, s_eval, s_pred, s_sweep}) add_common(sub);

  std::vector<const char*> cargs;
  cargs.push_back("dropwarn");
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ReportError("usage", e.what(), kExitUsage);
    return kExitUsage;
  }
  if (common.workers == 0) common.workers = 1;

  if (s_sim->parsed()) simulate.Run(common, args);
  if (s_feat->parsed()) featurize.Run(common, args);
  if (s_train->parsed()) train.Run(common, args);
  if (s_eval->parsed()) evaluate.Run(common, args);
  if (s_pred->parsed()) predict.Run(common, args);
  if (s_sweep->parsed()) sweep.Run(common, args);
  if (s_replay->parsed()) return replay.Run();
  return 0;
}

}  // namespace
}  // namespace dropwarn::cli

int main(int argc, char** argv) {
  using namespace dropwarn;
  using namespace dropwarn::cli;
  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return Dispatch(args);
  } catch (const ModelError& e) {
    ReportError(std::string(ErrorKindName(e.kind())), e.what(), kExitModel);
    return kExitModel;
  } catch (const Error& e) {
    const int code = ExitCodeFor(e.kind());
    ReportError(std::string(ErrorKindName(e.kind())), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    ReportError("internal", e.what(), kExitData);
    return kExitData;
  }
}
