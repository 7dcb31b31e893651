#include <gtest/gtest.h>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>

#include "anglesizer/measurement.hpp"
#include "anglesizer/session_service.hpp"
#include "anglesizer/teaching.hpp"
#include "anglesizer/trace_io.hpp"
#include "cli.hpp"

namespace anglesizer {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("anglesizer_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }

  // One trace per task in `traces/`, each scaled by `factor`.
  void make_batch(const std::vector<Task>& tasks, double factor) const {
    fs::create_directories(dir_ / "traces");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto& t = tasks[i];
      const bool deg = t.gesture == GestureKind::BodyRotation;
      std::ostringstream v;
      v << t.value * factor;
      const auto r = cli({"gen-trace", "--gesture", std::string(to_string(t.gesture)),
                          deg ? "--value-deg" : "--value-cm", v.str(), "--out",
                          (dir_ / "traces" / cli::task_trace_name(i)).string()});
      ASSERT_EQ(r.code, 0) << r.err;
    }
  }

  fs::path dir_;
};

// ---------------------------------------------------------------------------

TEST_F(CliTest, GenTraceOneHandReplaysToTarget) {
  const auto gen = cli({"gen-trace", "--gesture", "one-hand", "--value-cm", "70", "--noise", "0",
                        "--out", path("hand.trace.jsonl")});
  ASSERT_EQ(gen.code, 0) << gen.err;
  EXPECT_NE(gen.out.find("ground_truth: one_hand 70 cm"), std::string::npos);
  EXPECT_NE(gen.out.find("seed: 1"), std::string::npos);

  const auto doc = read_trace_file(path("hand.trace.jsonl"));
  ASSERT_TRUE(doc.ground_truth);
  const auto o = run_measurement(doc, GestureKind::OneHand, EngineConfig{});
  ASSERT_TRUE(o.result);
  EXPECT_EQ(o.result->value, 70.0);
}

TEST_F(CliTest, GenTraceRotationCrossesNorth) {
  const auto gen = cli({"gen-trace", "--gesture", "body-rotation", "--value-deg", "45",
                        "--start-yaw", "350", "--out", path("rot.trace.jsonl")});
  ASSERT_EQ(gen.code, 0) << gen.err;
  bool high = false, low = false;
  for (const auto& f : read_trace_file(path("rot.trace.jsonl")).frames) {
    if (const auto* o = std::get_if<Orientation>(&f.payload)) {
      high |= o->yaw_deg >= 350.0;
      low |= o->yaw_deg < 40.0;
    }
  }
  EXPECT_TRUE(high && low);
  const auto rep = cli({"replay", path("rot.trace.jsonl")});
  EXPECT_EQ(rep.code, 0);
  EXPECT_NE(rep.out.find("value: 45 deg"), std::string::npos);
}

TEST_F(CliTest, GenTraceUsageErrors) {
  EXPECT_EQ(cli({"gen-trace", "--gesture", "one-hand"}).code, 2);
  EXPECT_EQ(cli({"gen-trace", "--gesture", "one-hand", "--value-deg", "30"}).code, 2);
  EXPECT_EQ(cli({"gen-trace", "--gesture", "wave", "--value-cm", "3"}).code, 2);
  EXPECT_EQ(cli({"gen-trace", "--gesture", "one-finger", "--value-cm", "3", "--start-yaw", "5"}).code, 2);
  EXPECT_EQ(cli({"gen-trace", "--gesture", "one-finger", "--value-cm", "40", "--out",
                 path("x.trace.jsonl")}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"dance"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(CliTest, GenTraceIsDeterministicPerSeed) {
  for (const char* name : {"a.trace.jsonl", "b.trace.jsonl"}) {
    ASSERT_EQ(cli({"gen-trace", "--gesture", "two-hands", "--value-cm", "65", "--noise", "0.5",
                   "--seed", "42", "--out", path(name)}).code, 0);
  }
  std::ifstream a(path("a.trace.jsonl")), b(path("b.trace.jsonl"));
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(CliTest, ReplayTouchPrintsValueAndFeedback) {
  ASSERT_EQ(cli({"gen-trace", "--gesture", "one-finger", "--value-cm", "8", "--out",
                 path("f.trace.jsonl")}).code, 0);
  const auto r = cli({"replay", path("f.trace.jsonl"), "--gesture", "one-finger"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("8.0 cm"), std::string::npos);
  EXPECT_NE(r.out.find("\"kind\":\"beep_correct\""), std::string::npos);
  EXPECT_NE(r.out.find("8.0 centimeters"), std::string::npos);

  const auto again = cli({"replay", path("f.trace.jsonl"), "--gesture", "one-finger"});
  EXPECT_EQ(r.out, again.out);
}

TEST_F(CliTest, ReplayWrongGestureIsMeasurementFailure) {
  ASSERT_EQ(cli({"gen-trace", "--gesture", "body-rotation", "--value-deg", "60", "--out",
                 path("r.trace.jsonl")}).code, 0);
  const auto r = cli({"replay", path("r.trace.jsonl"), "--gesture", "one-finger"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("NoActivation"), std::string::npos);
}

TEST_F(CliTest, ReplayOutlierTraceReportsClamping) {
  ASSERT_EQ(cli({"gen-trace", "--gesture", "one-hand", "--value-cm", "70", "--outliers", "1",
                 "--out", path("o.trace.jsonl")}).code, 0);
  const auto r = cli({"replay", path("o.trace.jsonl")});
  EXPECT_EQ(r.code, 0);
  const auto at = r.out.find("delta_clamped=");
  ASSERT_NE(at, std::string::npos) << r.out;
  EXPECT_GE(std::stoi(r.out.substr(at + 14)), 1);
}

TEST_F(CliTest, ReplayParseErrorCarriesLine) {
  write("bad.trace.jsonl",
        "{\"profile\":{\"dpi_x\":160,\"dpi_y\":160,\"screen_w_px\":1080,\"screen_h_px\":2340,"
        "\"palm_width_cm\":8,\"focal_px\":500}}\n"
        "{\"t_ms\":0,\"press\":{\"pressed\":true}}\n"
        "{\"t_ms\":10,\"press\":{}}\n");
  const auto r = cli({"replay", path("bad.trace.jsonl"), "--gesture", "one-hand"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("MalformedFrame"), std::string::npos);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;

  EXPECT_EQ(cli({"replay", path("absent.trace.jsonl"), "--gesture", "one-hand"}).code, 1);
}

TEST_F(CliTest, ConfigOverridesEngineSettings) {
  ASSERT_EQ(cli({"gen-trace", "--gesture", "one-finger", "--value-cm", "4", "--out",
                 path("f.trace.jsonl")}).code, 0);
  // A hold longer than the whole trace keeps the finger from ever arming.
  write("slow.json", R"({"hold_to_start_ms": 600000})");
  const auto r = cli({"--config", path("slow.json"), "replay", path("f.trace.jsonl")});
  EXPECT_EQ(r.code, 3);

  write("bad.json", R"({"no_such_key": 1})");
  EXPECT_EQ(cli({"--config", path("bad.json"), "replay", path("f.trace.jsonl")}).code, 2);
}

// ---------------------------------------------------------------------------

TEST_F(CliTest, AssessPerfectTracesScoreZero) {
  const auto tasks = default_tasks();
  write("tasks.json", write_task_list(tasks));
  make_batch(tasks, 1.0);
  const auto r = cli({"assess", path("tasks.json"), path("traces"), "--participant", "p1",
                      "--day", "1", "--log", path("log.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("overall: 0.000"), std::string::npos);
  const auto records = assessment_records(read_session_log(path("log.jsonl")));
  ASSERT_EQ(records.size(), 20u);
  for (const auto& rec : records) EXPECT_EQ(rec.relative_error, 0.0);
}

TEST_F(CliTest, AssessUniformOvershootScoresTenPercent) {
  // Task values whose 10% overshoot lands on each gesture's reporting grid.
  const std::vector<Task> tasks{
      {GestureKind::OneFinger, 1}, {GestureKind::OneFinger, 4},
      {GestureKind::TwoFingers, 3}, {GestureKind::TwoFingers, 7},
      {GestureKind::OneHand, 20}, {GestureKind::OneHand, 100},
      {GestureKind::TwoHands, 40}, {GestureKind::TwoHands, 90},
      {GestureKind::BodyRotation, 30}, {GestureKind::BodyRotation, 120}};
  write("tasks.json", write_task_list(tasks));
  make_batch(tasks, 1.1);
  const auto r = cli({"assess", path("tasks.json"), path("traces"), "--log", path("log.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("overall: 0.100"), std::string::npos) << r.out;
}

TEST_F(CliTest, AssessMissingTraceNamesTask) {
  const auto tasks = default_tasks();
  write("tasks.json", write_task_list(tasks));
  make_batch(tasks, 1.0);
  fs::remove(dir_ / "traces" / cli::task_trace_name(4));
  const auto r = cli({"assess", path("tasks.json"), path("traces"), "--log", path("log.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("task 5 (two_fingers 3.0 cm)"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("log.jsonl")));
}

TEST_F(CliTest, AssessDefaultsToLogDirFromEnvironment) {
  const std::vector<Task> tasks{{GestureKind::TwoHands, 65}};
  write("tasks.json", write_task_list(tasks));
  make_batch(tasks, 1.0);
  ::setenv("ANGLESIZER_LOG_DIR", dir_.c_str(), 1);
  const auto r = cli({"assess", path("tasks.json"), path("traces")});
  const auto rep = cli({"report"});
  ::unsetenv("ANGLESIZER_LOG_DIR");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(assessment_records(read_session_log(dir_ / "anglesizer.log.jsonl")).size(), 1u);
  EXPECT_EQ(rep.code, 0);
  EXPECT_NE(rep.out.find("trend per day"), std::string::npos);
}

// ---------------------------------------------------------------------------

std::vector<AssessmentRecord> two_day_log() {
  std::vector<AssessmentRecord> log;
  for (int day : {1, 2}) {
    for (auto g : kAllGestures) {
      const double task = gesture_spec(g).unit == Unit::Degree ? 90 : 10;
      const double err = day == 1 ? 0.2 : 0.1;
      log.push_back({"p1", day, g, task, task * (1 + err), err, 0});
    }
  }
  return log;
}

TEST_F(CliTest, ReportDayRows) {
  for (const auto& r : two_day_log()) append_session_log(r, path("log.jsonl"));
  const auto r = cli({"report", path("log.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int day_rows = 0;
  while (std::getline(lines, line)) day_rows += line.rfind("1 ", 0) == 0 || line.rfind("2 ", 0) == 0;
  EXPECT_EQ(day_rows, 2);
  EXPECT_NE(r.out.find("trend per day: -0.1000"), std::string::npos) << r.out;
}

TEST_F(CliTest, ReportGroupByGestureHasFiveRows) {
  for (const auto& r : two_day_log()) append_session_log(r, path("log.jsonl"));
  const auto r = cli({"report", path("log.jsonl"), "--group-by", "gesture"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int rows = -1;  // header
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 5);
  EXPECT_EQ(cli({"report", path("log.jsonl"), "--group-by", "hour"}).code, 2);
}

TEST_F(CliTest, ReportCsvColumns) {
  for (const auto& r : two_day_log()) append_session_log(r, path("log.jsonl"));
  const auto r = cli({"report", path("log.jsonl"), "--csv", "--group-by", "day"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out,
            "participant,day,gesture,mean_rel_err,sd,n\n"
            "all,1,all,0.200000,0.000000,5\n"
            "all,2,all,0.100000,0.000000,5\n");
}

TEST_F(CliTest, ReportEmptyLogIsInformative) {
  write("empty.jsonl", "");
  const auto r = cli({"report", path("empty.jsonl")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("no assessment records"), std::string::npos);
  EXPECT_EQ(cli({"report", path("missing.jsonl")}).code, 1);
}

// ---------------------------------------------------------------------------

namespace net = boost::asio;
namespace http = boost::beast::http;

std::optional<std::string> try_health(std::uint16_t port) {
  try {
    net::io_context ioc;
    net::ip::tcp::socket sock(ioc);
    sock.connect({net::ip::make_address("127.0.0.1"), port});
    http::request<http::empty_body> req{http::verb::get, "/health", 11};
    req.set(http::field::host, "127.0.0.1");
    http::write(sock, req);
    boost::beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(sock, buf, res);
    return res.body();
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::uint16_t free_port() {
  ServerOptions o;
  o.port = 0;
  SessionServer probe(o);
  return probe.port();
}

TEST_F(CliTest, ServeAnswersHealthAndStopsOnInterrupt) {
  const std::uint16_t port = free_port();
  CliRun result{};
  std::thread t([&] {
    result = cli({"serve", "--port", std::to_string(port), "--log", path("server.jsonl")});
  });
  std::optional<std::string> body;
  for (int i = 0; i < 200 && !body; ++i) {
    body = try_health(port);
    if (!body) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ASSERT_TRUE(body);
  EXPECT_NE(body->find("\"protocol_version\":\"1\""), std::string::npos);

  ::kill(::getpid(), SIGINT);
  t.join();
  EXPECT_EQ(result.code, 0) << result.err;
  EXPECT_NE(result.out.find("stopped"), std::string::npos);
}

TEST_F(CliTest, ServeOnTakenPortIsEnvironmentFailure) {
  ServerOptions o;
  o.port = 0;
  SessionServer holder(o);
  const auto r = cli({"serve", "--port", std::to_string(holder.port())});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("IoFailure"), std::string::npos);
}

}  // namespace
}  // namespace anglesizer
