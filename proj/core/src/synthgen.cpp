#include "dropwarn/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dropwarn/dataset.hpp"
#include "dropwarn/error.hpp"
#include "dropwarn/rng.hpp"

namespace dropwarn {
namespace {

constexpr std::uint64_t kTeacherStream = 1ull << 40;

// In-class loadings on engagement; noise sd 1 per column.
constexpr double kInclassLoadings[] = {0.9, 0.7, 0.8, -0.6, 0.5, 0.4};

struct Trajectory {
  StudentTruth truth;               // dropout fields filled after calibration
  std::vector<Observation> events;  // full planned history, no dropout
  std::vector<int> fu7;
  std::vector<char> missed2;  // a reschedule one or two days earlier
  std::vector<double> uniforms;
};

double Clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

std::string PaddedId(const char* prefix, int index, int count) {
  int width = 1;
  for (int c = count - 1; c >= 10; c /= 10) ++width;
  std::string digits = std::to_string(index);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

Trajectory SimulateTrajectory(const SimConfig& cfg, int index,
                              const std::vector<double>& teacher_quality) {
  Rng rng(MixSeed(cfg.seed, 2 * static_cast<std::uint64_t>(index)));
  Rng hazard_rng(MixSeed(cfg.seed, 2 * static_cast<std::uint64_t>(index) + 1));

  Trajectory t;
  auto& truth = t.truth;
  truth.student_id = PaddedId("s", index, cfg.n_students);
  const int teacher = rng.UniformInt(0, cfg.n_teachers - 1);
  truth.teacher_id = PaddedId("t", teacher, cfg.n_teachers);
  truth.start_day = rng.UniformInt(1, cfg.enrollment_window_days);
  const int half = std::max(1, cfg.mean_span_days / 2);
  truth.planned_end_day = truth.start_day + rng.UniformInt(cfg.mean_span_days - half,
                                                           cfg.mean_span_days + half);
  truth.mean_engagement = cfg.student_spread * rng.Normal() + teacher_quality[static_cast<std::size_t>(teacher)];

  const double rho = cfg.engagement_persistence;
  const double innovation_sd = cfg.engagement_sd * std::sqrt(1.0 - rho * rho);
  double e = truth.mean_engagement + cfg.engagement_sd * rng.Normal();

  auto emit_class = [&](int day) {
    Observation obs;
    obs.day = day;
    obs.kind = EventKind::kClassSession;
    obs.teacher = truth.teacher_id;
    std::vector<double> in;
    for (double loading : kInclassLoadings) in.push_back(loading * e + rng.Normal());
    obs.inclass = std::move(in);
    obs.outclass = std::vector<double>{
        rng.Bernoulli(Sigmoid(e)) ? 1.0 : 0.0,
        rng.Bernoulli(Sigmoid(0.5 + e)) ? 1.0 : 0.0,
        Clamp(0.7 + 0.1 * e + 0.1 * rng.Normal(), 0.0, 1.0),
        Clamp(4.0 + 0.5 * e + 0.6 * rng.Normal(), 1.0, 5.0),
    };
    t.events.push_back(std::move(obs));
  };

  emit_class(truth.start_day);
  int last_class = truth.start_day;
  int next_class = truth.start_day + rng.UniformInt(cfg.class_gap_min, cfg.class_gap_max);
  double follow_up_chance = 0.25;  // for the day after the latest class or reschedule
  int follow_up_day = truth.start_day + 1;
  std::vector<int> follow_up_days;
  int last_missed = -1000;

  for (int day = truth.start_day + 1; day <= truth.planned_end_day; ++day) {
    e = truth.mean_engagement + rho * (e - truth.mean_engagement) + innovation_sd * rng.Normal();

    int fu7 = 0;
    for (int f : follow_up_days)
      if (f >= day - 7) ++fu7;
    truth.days_since_last_class.push_back(day - last_class);
    truth.engagement.push_back(e);
    t.fu7.push_back(fu7);
    t.missed2.push_back(day - last_missed <= 2 ? 1 : 0);
    t.uniforms.push_back(hazard_rng.Uniform());

    if (day == next_class) {
      if (rng.Bernoulli(Sigmoid(0.8 + cfg.attendance_slope * e))) {
        emit_class(day);
        last_class = day;
        follow_up_chance = 0.25;
      } else {
        Observation obs;
        obs.day = day;
        obs.kind = EventKind::kReschedule;
        t.events.push_back(std::move(obs));
        last_missed = day;
        follow_up_chance = 0.7;
      }
      follow_up_day = day + 1;
      next_class = day + rng.UniformInt(cfg.class_gap_min, cfg.class_gap_max);
    } else if (day == follow_up_day) {
      if (rng.Bernoulli(follow_up_chance)) {
        Observation obs;
        obs.day = day;
        obs.kind = EventKind::kFollowUp;
        obs.polarity = e + 0.5 * rng.Normal() > 0.0 ? 1 : -1;
        t.events.push_back(std::move(obs));
        follow_up_days.push_back(day);
      }
    } else if ((day - truth.start_day) % 30 == 0) {
      if (rng.Bernoulli(Sigmoid(1.0 + e))) {
        Observation obs;
        obs.day = day;
        obs.kind = EventKind::kPurchase;
        t.events.push_back(std::move(obs));
      }
    }
  }
  return t;
}

double DailyHazard(const SimConfig& cfg, double intercept, const Trajectory& t, std::size_t k) {
  return Sigmoid(intercept + cfg.recency_slope * t.truth.days_since_last_class[k] -
                 cfg.engagement_slope * t.truth.engagement[k] -
                 cfg.follow_up_relief * t.fu7[k] + cfg.missed_class_shock * t.missed2[k]);
}

// Index of the first day at risk whose uniform falls under the hazard.
std::optional<std::size_t> DropoutIndex(const SimConfig& cfg, double intercept, const Trajectory& t) {
  for (std::size_t k = 0; k < t.uniforms.size(); ++k) {
    if (t.uniforms[k] < DailyHazard(cfg, intercept, t, k)) return k;
  }
  return std::nullopt;
}

double DropoutRate(const SimConfig& cfg, double intercept, const std::vector<Trajectory>& all) {
  std::size_t dropped = 0;
  for (const auto& t : all) dropped += DropoutIndex(cfg, intercept, t).has_value() ? 1 : 0;
  return static_cast<double>(dropped) / static_cast<double>(all.size());
}

}  // namespace

void SimConfig::Validate() const {
  if (n_students < 1) throw Error(ErrorKind::kDomain, "n_students must be >= 1");
  if (!(target_dropout_rate > 0.0 && target_dropout_rate < 1.0))
    throw Error(ErrorKind::kDomain, "target dropout rate must lie in (0, 1)");
  if (mean_span_days < 2) throw Error(ErrorKind::kDomain, "mean span must be >= 2 days");
  if (class_gap_min < 1 || class_gap_max < class_gap_min)
    throw Error(ErrorKind::kDomain, "class gap range must satisfy 1 <= min <= max");
  if (n_teachers < 1) throw Error(ErrorKind::kDomain, "n_teachers must be >= 1");
  if (enrollment_window_days < 1) throw Error(ErrorKind::kDomain, "enrollment window must be >= 1");
  if (!(engagement_persistence >= 0.0 && engagement_persistence < 1.0))
    throw Error(ErrorKind::kDomain, "engagement persistence must lie in [0, 1)");
}

Schema SimSchema() {
  Schema s;
  s.inclass_columns = {"pitch_variance",    "speech_rate",       "talk_time_ratio",
                       "response_latency",  "interaction_count", "positive_sentiment"};
  s.outclass_columns = {"preview_completed", "homework_completed", "homework_score",
                        "class_rating"};
  return s;
}

SimOutput Simulate(const SimConfig& config) {
  config.Validate();
  std::vector<double> teacher_quality;
  Rng teacher_rng(MixSeed(config.seed, kTeacherStream));
  for (int i = 0; i < config.n_teachers; ++i) teacher_quality.push_back(config.teacher_spread * teacher_rng.Normal());

  std::vector<Trajectory> all;
  all.reserve(static_cast<std::size_t>(config.n_students));
  for (int i = 0; i < config.n_students; ++i) all.push_back(SimulateTrajectory(config, i, teacher_quality));

  double intercept = 0.0;
  if (config.intercept) {
    intercept = *config.intercept;
  } else {
    // Realized rate is non-decreasing in the intercept because trajectories and
    // uniforms are fixed; bisect on the step function.
    double lo = -30.0, hi = 30.0;
    const double rate_lo = DropoutRate(config, lo, all);
    const double rate_hi = DropoutRate(config, hi, all);
    if (rate_lo > config.target_dropout_rate || rate_hi < config.target_dropout_rate) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "target dropout rate %.4f outside reachable range [%.4f, %.4f]",
                    config.target_dropout_rate, rate_lo, rate_hi);
      throw Error(ErrorKind::kCalibration, msg);
    }
    for (int iter = 0; iter < 80; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (DropoutRate(config, mid, all) < config.target_dropout_rate) lo = mid;
      else hi = mid;
    }
    const double err_lo = std::abs(DropoutRate(config, lo, all) - config.target_dropout_rate);
    const double err_hi = std::abs(DropoutRate(config, hi, all) - config.target_dropout_rate);
    intercept = err_lo < err_hi ? lo : hi;
  }
  const double realized = DropoutRate(config, intercept, all);
  if (!config.intercept &&
      std::abs(realized - config.target_dropout_rate) > config.calibration_tolerance) {
    char msg[200];
    std::snprintf(msg, sizeof(msg),
                  "closest achievable dropout rate %.4f (intercept %.4f) misses target %.4f "
                  "by more than %.4f over %d students",
                  realized, intercept, config.target_dropout_rate, config.calibration_tolerance,
                  config.n_students);
    throw Error(ErrorKind::kCalibration, msg);
  }

  SimOutput out;
  out.intercept = intercept;
  out.realized_dropout_rate = realized;
  out.cohort.schema = SimSchema();
  for (auto& t : all) {
    StudentRecord record;
    record.student_id = t.truth.student_id;
    record.teacher_id = t.truth.teacher_id;
    const auto drop = DropoutIndex(config, intercept, t);
    std::size_t at_risk = t.uniforms.size();
    if (drop) {
      const int day = t.truth.start_day + 1 + static_cast<int>(*drop);
      t.truth.dropout_day = day;
      at_risk = *drop + 1;
      for (auto& obs : t.events)
        if (obs.day < day) record.observations.push_back(std::move(obs));
      Observation terminal;
      terminal.day = day;
      terminal.kind = EventKind::kDropout;
      record.observations.push_back(std::move(terminal));
      record.final_status = FinalStatus::kDropout;
    } else {
      record.observations = std::move(t.events);
      record.final_status = FinalStatus::kCompletion;
    }
    t.truth.hazard.clear();
    for (std::size_t k = 0; k < at_risk; ++k) t.truth.hazard.push_back(DailyHazard(config, intercept, t, k));
    t.truth.days_since_last_class.resize(at_risk);
    t.truth.engagement.resize(at_risk);
    Validate(record, out.cohort.schema);
    out.cohort.students.emplace(record.student_id, std::move(record));
    out.truth.push_back(std::move(t.truth));
  }
  return out;
}

void WriteTruth(const std::vector<StudentTruth>& truth, std::ostream& out) {
  for (const auto& t : truth) {
    nlohmann::json rec;
    rec["student"] = t.student_id;
    rec["teacher"] = t.teacher_id;
    rec["start_day"] = t.start_day;
    rec["planned_end_day"] = t.planned_end_day;
    rec["mean_engagement"] = t.mean_engagement;
    rec["dropout_day"] = t.dropout_day ? nlohmann::json(*t.dropout_day) : nlohmann::json(nullptr);
    rec["days_since_last_class"] = t.days_since_last_class;
    rec["engagement"] = t.engagement;
    rec["hazard"] = t.hazard;
    out << rec.dump() << '\n';
  }
}

}  // namespace dropwarn
