#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "anglesizer/analytics.hpp"
#include "anglesizer/codec.hpp"
#include "anglesizer/measurement.hpp"
#include "anglesizer/oracle_gen.hpp"
#include "anglesizer/session_service.hpp"
#include "anglesizer/teaching.hpp"
#include "anglesizer/trace_io.hpp"

namespace anglesizer::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kLogFileName = "anglesizer.log.jsonl";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenArgs {
  std::string gesture;
  std::optional<double> value_cm;
  std::optional<double> value_deg;
  double noise = 0.0;
  std::optional<double> start_yaw;
  std::uint64_t seed = 1;
  int outliers = 0;
  double outlier_m = 2.0;
  std::string out;
};

struct ReplayArgs {
  std::string trace;
  std::string gesture;
};

struct AssessArgs {
  std::string tasks;
  std::string trace_dir;
  std::string participant = "anonymous";
  int day = 1;
  std::string log;
};

struct ReportArgs {
  std::string log;
  std::string group_by;
  std::string participant;
  bool csv = false;
};

struct ServeArgs {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765;
  std::string static_dir;
  std::string log;
};

fs::path default_log_path() {
  if (const char* dir = std::getenv("ANGLESIZER_LOG_DIR"); dir && *dir) {
    return fs::path(dir) / kLogFileName;
  }
  return fs::path(kLogFileName);
}

fs::path log_path_or_default(const std::string& flag) {
  return flag.empty() ? default_log_path() : fs::path(flag);
}

GestureKind gesture_flag(const std::string& s) {
  auto g = parse_gesture(s);
  if (!g) throw UsageError("unknown gesture '" + s + "'");
  return *g;
}

std::string fmt(double v, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

std::string task_label(const Task& t) {
  return std::string(to_string(t.gesture)) + " " + short_value(t.value, t.gesture);
}

// ---------------------------------------------------------------------------

int cmd_gen_trace(const GenArgs& a, const Settings& s, std::ostream& out) {
  const GestureKind g = gesture_flag(a.gesture);
  const bool degrees = gesture_spec(g).unit == Unit::Degree;
  if (a.value_cm && a.value_deg) throw UsageError("give only one of --value-cm and --value-deg");
  if (!a.value_cm && !a.value_deg) {
    throw UsageError(degrees ? "missing --value-deg" : "missing --value-cm");
  }
  if (degrees != a.value_deg.has_value()) {
    throw UsageError(std::string(to_string(g)) + " is measured in " +
                     (degrees ? "degrees, use --value-deg" : "centimeters, use --value-cm"));
  }
  if (a.start_yaw && g != GestureKind::BodyRotation) {
    throw UsageError("--start-yaw only applies to body_rotation");
  }
  if (a.outliers > 0 && g != GestureKind::OneHand) {
    throw UsageError("--outliers only applies to one_hand");
  }
  const double value = degrees ? *a.value_deg : *a.value_cm;
  const EngineConfig& cfg = s.config;

  TraceDocument doc;
  switch (g) {
    case GestureKind::OneFinger:
    case GestureKind::TwoFingers:
      doc = oracle::gen_touch_trace(value, s.profile, g == GestureKind::TwoFingers, a.noise,
                                    a.seed, cfg);
      break;
    case GestureKind::OneHand: {
      oracle::PoseOptions opts;
      opts.profile = s.profile;
      const int motion = std::max(10, static_cast<int>(std::ceil(value / 1.5)));
      doc = oracle::gen_pose_trace(value, motion + cfg.stability_window_frames + 5,
                                   a.noise / 100.0, a.outliers, a.outlier_m, a.seed, cfg, opts);
      break;
    }
    case GestureKind::TwoHands: {
      oracle::PalmOptions opts;
      opts.width_noise_px = a.noise;
      doc = oracle::gen_palm_trace(value, s.profile, cfg.stability_window_frames + 5, a.seed,
                                   cfg, opts);
      break;
    }
    case GestureKind::BodyRotation: {
      oracle::RotationOptions opts;
      opts.profile = s.profile;
      opts.yaw_noise_deg = a.noise;
      doc = oracle::gen_rotation_trace(value, a.start_yaw.value_or(0.0), 5.0, a.seed, cfg, opts);
      break;
    }
  }

  fs::path path = a.out;
  if (path.empty()) {
    std::ostringstream name;
    name << to_string(g) << '_' << value << ".trace.jsonl";
    path = name.str();
  }
  write_trace_file(path, doc);
  out << "wrote " << path.string() << "\n";
  out << "ground_truth: " << to_string(g) << ' ' << short_value(value, g) << "\n";
  out << "seed: " << a.seed << "\n";
  out << "frames: " << doc.frames.size() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_replay(const ReplayArgs& a, const Settings& s, std::ostream& out) {
  const TraceDocument doc = read_trace_file(a.trace);
  GestureKind g;
  if (!a.gesture.empty()) {
    g = gesture_flag(a.gesture);
  } else if (doc.ground_truth) {
    g = doc.ground_truth->gesture;
  } else {
    throw UsageError("trace has no ground truth; pass --gesture");
  }

  const MeasurementOutcome o = run_measurement(doc, g, s.config);
  out << "gesture: " << to_string(g) << "\n";
  out << "status: " << to_string(o.status) << "\n";
  if (o.result) {
    out << "value: " << short_value(o.result->value, g) << "\n";
    out << "raw: " << fmt(o.result->raw_value, 4) << "\n";
  }
  out << "frames: " << o.frames_processed << "\n";

  std::map<WarningCode, std::size_t> counts;
  for (const auto& w : o.warnings) ++counts[w.code];
  out << "warnings:";
  if (counts.empty()) out << " none";
  for (const auto& [code, n] : counts) out << ' ' << to_string(code) << '=' << n;
  out << "\n";

  out << "feedback:\n";
  for (const auto& e : o.events) out << "  " << codec::encode(e).dump() << "\n";
  return o.status == MeasurementStatus::Completed ? kOk : kMeasurementFailed;
}

// ---------------------------------------------------------------------------

int cmd_assess(const AssessArgs& a, const Settings& s, std::ostream& out, std::ostream& err) {
  const std::vector<Task> tasks = load_task_list(a.tasks);
  const fs::path dir = a.trace_dir;
  if (!fs::is_directory(dir)) throw UsageError("trace directory not found: " + a.trace_dir);

  std::vector<MeasurementResult> results;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const fs::path p = dir / task_trace_name(i);
    if (!fs::exists(p)) {
      throw UsageError("missing trace for task " + std::to_string(i + 1) + " (" +
                       task_label(tasks[i]) + "): " + p.string());
    }
    const MeasurementOutcome o = run_measurement(read_trace_file(p), tasks[i].gesture, s.config);
    if (!o.result) {
      err << "error: task " << i + 1 << " (" << task_label(tasks[i])
          << "): " << to_string(o.status) << "\n";
      return kMeasurementFailed;
    }
    results.push_back(*o.result);
  }

  const auto records = run_assessment(tasks, results, a.participant, a.day, s.config);
  const fs::path log = log_path_or_default(a.log);
  for (const auto& r : records) append_session_log(r, log);

  out << "participant: " << a.participant << "  day: " << a.day << "\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << "  task " << std::setw(2) << i + 1 << "  " << std::left << std::setw(14)
        << to_string(r.gesture) << std::right << std::setw(10)
        << short_value(r.task, r.gesture) << "  ->" << std::setw(10)
        << short_value(r.result, r.gesture) << "  rel_err " << fmt(r.relative_error, 3) << "\n";
  }
  out << "mean relative error by gesture:\n";
  for (const auto& st : analytics::mean_relative_error(records, analytics::GroupBy::Gesture)) {
    out << "  " << std::left << std::setw(14) << st.key << std::right << fmt(st.mean, 3)
        << "  (n=" << st.n << ")\n";
  }
  const auto overall = analytics::mean_relative_error(records, analytics::GroupBy::None);
  out << "overall: " << fmt(overall.at(0).mean, 3) << "\n";
  out << "appended " << records.size() << " records to " << log.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

std::optional<analytics::GroupBy> group_flag(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "none") return analytics::GroupBy::None;
  if (s == "gesture") return analytics::GroupBy::Gesture;
  if (s == "day") return analytics::GroupBy::Day;
  throw UsageError("unknown --group-by '" + s + "'");
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const fs::path log = log_path_or_default(a.log);
  const auto group_by = group_flag(a.group_by);
  if (!a.log.empty() && !fs::exists(log)) {
    throw Error(ErrorCode::IoFailure, "log not found: " + log.string());
  }
  std::vector<AssessmentRecord> records;
  for (const auto& r : assessment_records(read_session_log(log))) {
    if (a.participant.empty() || r.participant == a.participant) records.push_back(r);
  }
  if (records.empty()) {
    out << "no assessment records in " << log.string() << "\n";
    return kOk;
  }

  if (a.csv) {
    out << analytics::render_csv(records, a.participant, group_by);
    return kOk;
  }
  if (!group_by) {
    out << analytics::render_text(analytics::daily_report(records, a.participant));
    return kOk;
  }
  out << std::left << std::setw(15) << "group" << std::setw(10) << "mean" << std::setw(10)
      << "sd" << "n\n";
  for (const auto& st : analytics::mean_relative_error(records, *group_by)) {
    out << std::setw(15) << st.key << std::setw(10) << fmt(st.mean, 3) << std::setw(10)
        << (st.sd_defined ? fmt(st.sd, 3) : "-") << st.n << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_serve(const ServeArgs& a, const Settings& s, std::ostream& out) {
  ServerOptions opts;
  opts.address = a.address;
  opts.port = a.port;
  opts.config = s.config;
  opts.profile = s.profile;
  opts.log_path = log_path_or_default(a.log);
  if (!a.static_dir.empty()) {
    if (!fs::is_directory(a.static_dir)) {
      throw Error(ErrorCode::IoFailure, "static directory not found: " + a.static_dir);
    }
    opts.static_dir = a.static_dir;
  }
  SessionServer server(opts);
  out << "listening on " << a.address << ":" << server.port() << " (protocol "
      << kProtocolVersion << ", log " << opts.log_path->string() << ")" << std::endl;
  server.run_until_signal();
  out << "stopped" << std::endl;
  return kOk;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::IoFailure: return kEnvironment;
    case ErrorCode::InsufficientHistory: return kMeasurementFailed;
    default: return kUsage;
  }
}

}  // namespace

std::string task_trace_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "task-%02zu.trace.jsonl", index + 1);
  return buf;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trace-driven size and angle measurement and teaching tools", "anglesizer"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file overriding engine settings")
      ->check(CLI::ExistingFile);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-trace", "Write a synthetic trace with known ground truth");
  gen_cmd->add_option("--gesture", gen.gesture, "one-finger, two-fingers, one-hand, two-hands, body-rotation")
      ->required();
  gen_cmd->add_option("--value-cm", gen.value_cm, "Target size in centimeters");
  gen_cmd->add_option("--value-deg", gen.value_deg, "Target angle in degrees");
  gen_cmd->add_option("--noise", gen.noise, "Sensor noise (px for touch and palm, cm for pose, deg for yaw)")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--start-yaw", gen.start_yaw, "Initial heading for body rotation");
  gen_cmd->add_option("--seed", gen.seed, "Noise seed");
  gen_cmd->add_option("--outliers", gen.outliers, "Tracking leaps injected into a one-hand trace")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--outlier-m", gen.outlier_m, "Magnitude of each leap in meters");
  gen_cmd->add_option("--out", gen.out, "Output path");

  ReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("replay", "Measure a recorded trace");
  replay_cmd->add_option("trace", replay.trace)->required();
  replay_cmd->add_option("--gesture", replay.gesture, "Gesture to measure (defaults to the ground truth)");

  AssessArgs assess;
  auto* assess_cmd = app.add_subcommand("assess", "Score a batch of traces against a task list");
  assess_cmd->add_option("tasks", assess.tasks, "JSON task list")->required();
  assess_cmd->add_option("trace_dir", assess.trace_dir, "Directory with task-NN.trace.jsonl files")
      ->required();
  assess_cmd->add_option("--participant", assess.participant);
  assess_cmd->add_option("--day", assess.day)->check(CLI::NonNegativeNumber);
  assess_cmd->add_option("--log", assess.log, "Session log to append to");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Summarize assessment records from a log");
  report_cmd->add_option("log", report.log);
  report_cmd->add_option("--group-by", report.group_by, "none, gesture or day");
  report_cmd->add_option("--participant", report.participant);
  report_cmd->add_flag("--csv", report.csv);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the live session server");
  serve_cmd->add_option("--port", serve.port);
  serve_cmd->add_option("--address", serve.address);
  serve_cmd->add_option("--static-dir", serve.static_dir);
  serve_cmd->add_option("--log", serve.log);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Settings settings;
    if (!config_path.empty()) settings = load_settings(config_path);

    if (*gen_cmd) return cmd_gen_trace(gen, settings, out);
    if (*replay_cmd) return cmd_replay(replay, settings, out);
    if (*assess_cmd) return cmd_assess(assess, settings, out, err);
    if (*report_cmd) return cmd_report(report, out);
    if (*serve_cmd) return cmd_serve(serve, settings, out);
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kEnvironment;
  }
}

}  // namespace anglesizer::cli
