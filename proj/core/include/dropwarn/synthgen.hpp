#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dropwarn/event_store.hpp"

namespace dropwarn {

// Discrete-time cohort simulator. Each enrolled day a student drops out with
// probability
//   sigmoid(intercept + recency_slope * days_since_last_class
//           - engagement_slope * engagement - follow_up_relief * follow_ups_last_7_days
//           + missed_class_shock * [a class was missed in the previous two days])
// where engagement is a latent AR(1) process that also drives attendance and
// the emitted in-class / out-of-class values.
struct SimConfig {
  int n_students = 500;
  double target_dropout_rate = 0.1616;
  double calibration_tolerance = 0.03;
  int mean_span_days = 86;
  int class_gap_min = 3;
  int class_gap_max = 7;
  double recency_slope = 0.12;
  double engagement_slope = 0.8;
  double follow_up_relief = 0.5;
  double missed_class_shock = 0.75;
  // Fixed intercept; when empty it is calibrated to target_dropout_rate.
  std::optional<double> intercept;
  int n_teachers = 25;
  int enrollment_window_days = 120;
  double engagement_persistence = 0.97;  // daily AR(1) coefficient
  double engagement_sd = 1.0;            // stationary spread around the student mean
  double student_spread = 0.6;           // sd of student means around their teacher
  double teacher_spread = 0.3;           // sd of teacher quality
  double attendance_slope = 1.8;         // log-odds of attending per unit engagement
  std::uint64_t seed = 0;

  void Validate() const;
};

struct StudentTruth {
  std::string student_id;
  std::string teacher_id;
  int start_day = 0;
  int planned_end_day = 0;
  double mean_engagement = 0.0;
  std::optional<int> dropout_day;
  // One entry per day at risk, start_day + 1 .. resolution day.
  std::vector<int> days_since_last_class;
  std::vector<double> engagement;
  std::vector<double> hazard;
};

struct SimOutput {
  Cohort cohort;
  std::vector<StudentTruth> truth;
  double intercept = 0.0;
  double realized_dropout_rate = 0.0;
};

// Throws kCalibration when no intercept brings the realized rate within
// tolerance of the target.
SimOutput Simulate(const SimConfig& config);

Schema SimSchema();

void WriteTruth(const std::vector<StudentTruth>& truth, std::ostream& out);

}  // namespace dropwarn
