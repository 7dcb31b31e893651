#include "anglesizer/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace anglesizer::analytics {

double relative_error(double result, double task) {
  if (!(task > 0.0)) throw Error(ErrorCode::InvalidTask, "task value must be positive");
  return std::abs(result - task) / task;
}

double improvement(double pre, double post) {
  if (!(pre > 0.0)) throw Error(ErrorCode::InvalidBaseline, "baseline must be positive");
  return (pre - post) / pre;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptyGroup, "mean of an empty set");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) throw Error(ErrorCode::EmptyGroup, "sample sd needs two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace {

Cell cell_of(const std::vector<double>& xs) {
  Cell c;
  c.n = xs.size();
  c.mean = mean(xs);
  c.sd = xs.size() >= 2 ? sample_sd(xs) : 0.0;
  return c;
}

std::string fixed(double v, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

}  // namespace

std::vector<GroupStat> mean_relative_error(std::span<const AssessmentRecord> records,
                                           GroupBy group_by) {
  if (records.empty()) throw Error(ErrorCode::EmptyGroup, "no records to aggregate");
  // Sort key keeps days numeric and gestures in declaration order.
  std::map<int, std::pair<std::string, std::vector<double>>> groups;
  for (const auto& r : records) {
    int key = 0;
    std::string label = "all";
    if (group_by == GroupBy::Gesture) {
      key = static_cast<int>(r.gesture);
      label = std::string(to_string(r.gesture));
    } else if (group_by == GroupBy::Day) {
      key = r.day;
      label = std::to_string(r.day);
    }
    auto& g = groups[key];
    g.first = label;
    g.second.push_back(r.relative_error);
  }
  std::vector<GroupStat> out;
  for (const auto& [key, group] : groups) {
    const Cell c = cell_of(group.second);
    out.push_back({group.first, c.mean, c.sd, c.n, c.n >= 2});
  }
  return out;
}

PairedT paired_t(std::span<const double> pre, std::span<const double> post) {
  if (pre.size() != post.size()) throw Error(ErrorCode::LengthMismatch, "pre/post lengths differ");
  if (pre.size() < 2) throw Error(ErrorCode::LengthMismatch, "paired t needs n >= 2");
  std::vector<double> d(pre.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = pre[i] - post[i];
  PairedT r;
  r.mean_diff = mean(d);
  r.sd_diff = sample_sd(d);
  r.df = static_cast<int>(d.size()) - 1;
  if (!(r.sd_diff > 0.0)) {
    throw Error(ErrorCode::DegenerateVariance, "all differences are equal; t is undefined");
  }
  r.t_stat = r.mean_diff / (r.sd_diff / std::sqrt(static_cast<double>(d.size())));
  return r;
}

Regression linear_regression(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "x/y lengths differ");
  if (x.size() < 2) throw Error(ErrorCode::LengthMismatch, "regression needs n >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::DegenerateX, "all x values are equal");
  Regression r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - (r.intercept + r.slope * x[i]);
      ss_res += e * e;
    }
    r.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return r;
}

DailyReport daily_report(std::span<const AssessmentRecord> log, const std::string& participant) {
  DailyReport report;
  report.participant = participant;
  std::map<int, std::map<GestureKind, std::vector<double>>> by_day;
  std::map<int, std::vector<double>> overall;
  for (const auto& r : log) {
    if (!participant.empty() && r.participant != participant) continue;
    by_day[r.day][r.gesture].push_back(r.relative_error);
    overall[r.day].push_back(r.relative_error);
  }
  std::vector<double> days;
  std::vector<double> means;
  for (const auto& [day, cells] : by_day) {
    DailyRow row;
    row.day = day;
    for (const auto& [g, xs] : cells) row.by_gesture[g] = cell_of(xs);
    row.overall = cell_of(overall[day]);
    days.push_back(day);
    means.push_back(row.overall.mean);
    report.rows.push_back(std::move(row));
  }
  if (days.size() >= 2) report.trend_per_day = linear_regression(days, means).slope;
  return report;
}

std::string render_text(const DailyReport& report) {
  std::ostringstream os;
  os << "participant: " << (report.participant.empty() ? "all" : report.participant) << "\n";
  os << std::left << std::setw(6) << "day";
  for (auto g : kAllGestures) os << std::setw(15) << to_string(g);
  os << "overall\n";
  for (const auto& row : report.rows) {
    os << std::setw(6) << row.day;
    for (auto g : kAllGestures) {
      auto it = row.by_gesture.find(g);
      os << std::setw(15) << (it == row.by_gesture.end() ? "-" : fixed(it->second.mean, 3));
    }
    os << fixed(row.overall.mean, 3) << "\n";
  }
  os << "trend per day: " << fixed(report.trend_per_day, 4) << "\n";
  return os.str();
}

std::string render_csv(std::span<const AssessmentRecord> log, const std::string& participant,
                       std::optional<GroupBy> group_by) {
  std::vector<AssessmentRecord> mine;
  for (const auto& r : log) {
    if (participant.empty() || r.participant == participant) mine.push_back(r);
  }
  const std::string who = participant.empty() ? "all" : participant;
  std::ostringstream os;
  os << "participant,day,gesture,mean_rel_err,sd,n\n";
  auto line = [&](const std::string& day, const std::string& gesture, const Cell& c) {
    os << who << ',' << day << ',' << gesture << ',' << fixed(c.mean, 6) << ','
       << fixed(c.sd, 6) << ',' << c.n << '\n';
  };
  if (mine.empty()) return os.str();

  if (!group_by) {
    for (const auto& row : daily_report(mine, participant).rows) {
      for (const auto& [g, c] : row.by_gesture) {
        line(std::to_string(row.day), std::string(to_string(g)), c);
      }
      line(std::to_string(row.day), "all", row.overall);
    }
    return os.str();
  }
  for (const auto& s : mean_relative_error(mine, *group_by)) {
    const Cell c{s.mean, s.sd, s.n};
    switch (*group_by) {
      case GroupBy::Day: line(s.key, "all", c); break;
      case GroupBy::Gesture: line("all", s.key, c); break;
      case GroupBy::None: line("all", "all", c); break;
    }
  }
  return os.str();
}

}  // namespace anglesizer::analytics
