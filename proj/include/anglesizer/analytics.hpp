#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anglesizer/core.hpp"

namespace anglesizer::analytics {

/// |result - task| / task. Throws Error{InvalidTask} for task <= 0.
double relative_error(double result, double task);

/// (pre - post) / pre. Throws Error{InvalidBaseline} for pre <= 0.
double improvement(double pre, double post);

double mean(std::span<const double> xs);
/// Sample (n - 1) standard deviation; requires n >= 2.
double sample_sd(std::span<const double> xs);

enum class GroupBy { None, Gesture, Day };

struct GroupStat {
  std::string key;  ///< gesture name, day number, or "all"
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
  bool sd_defined = false;  ///< false for single-record groups, sd reported as 0
};

/// Mean and sample SD of relative_error per group, ordered by key (days
/// numerically, gestures in declaration order). Throws Error{EmptyGroup}
/// when there are no records.
std::vector<GroupStat> mean_relative_error(std::span<const AssessmentRecord> records,
                                           GroupBy group_by);

struct PairedT {
  double t_stat = 0.0;
  int df = 0;
  double mean_diff = 0.0;
  double sd_diff = 0.0;
};

/// t = mean(d) / (sd(d) / sqrt(n)) with d = pre - post, df = n - 1.
/// Throws Error{LengthMismatch} (including n < 2) or Error{DegenerateVariance}.
PairedT paired_t(std::span<const double> pre, std::span<const double> post);

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope x + intercept. Constant y gives
/// r_squared = 0. Throws Error{LengthMismatch} or Error{DegenerateX}.
Regression linear_regression(std::span<const double> x, std::span<const double> y);

struct Cell {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

struct DailyRow {
  int day = 0;
  std::map<GestureKind, Cell> by_gesture;  ///< absent gesture means no records that day
  Cell overall;
};

struct DailyReport {
  std::string participant;
  std::vector<DailyRow> rows;  ///< ascending by day
  /// Least-squares slope of the overall mean against day (0 with one day).
  double trend_per_day = 0.0;
};

/// Day-indexed means for one participant (all records when the participant
/// is empty).
DailyReport daily_report(std::span<const AssessmentRecord> log, const std::string& participant);

std::string render_text(const DailyReport& report);

/// CSV with columns participant,day,gesture,mean_rel_err,sd,n. `day` and
/// `gesture` read "all" where a row aggregates over them.
std::string render_csv(std::span<const AssessmentRecord> log, const std::string& participant,
                       std::optional<GroupBy> group_by);

}  // namespace anglesizer::analytics
