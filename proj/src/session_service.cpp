#include "anglesizer/session_service.hpp"

#include <sys/socket.h>

#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "anglesizer/activation.hpp"
#include "anglesizer/codec.hpp"
#include "anglesizer/measurement.hpp"

namespace anglesizer {

using nlohmann::json;

// ---------------------------------------------------------------------------
// SessionHandler
// ---------------------------------------------------------------------------

struct SessionHandler::Impl {
  using Out = std::vector<std::string>;

  EngineConfig cfg;
  DeviceProfile default_profile;
  SessionLog* log = nullptr;

  bool hello = false;
  bool closed = false;
  int started_count = 0;

  // Current session parameters, set by start_session.
  bool started = false;
  std::string id;
  LearningModule module = LearningModule::GuidedLearning;
  std::optional<GestureKind> gesture;
  ToleranceMode mode = ToleranceMode::Tolerant;
  DeviceProfile profile;
  std::string participant = "anonymous";
  int day = 0;
  std::optional<TeachingSession> session;

  std::optional<MeasurementPipeline> pipeline;
  std::vector<SensorFrame> activation_window;
  Millis last_t = 0;

  void send(Out& out, const json& msg) { out.push_back(msg.dump()); }

  void error(Out& out, std::string_view code, const std::string& message) {
    send(out, {{"type", "error"}, {"code", code}, {"message", message}});
  }

  void violation(Out& out, std::string_view code, const std::string& message) {
    error(out, code, message);
    closed = true;
  }

  void phase(Out& out, TeachingPhase p) {
    send(out, {{"type", "phase"}, {"session", id}, {"phase", to_string(p)}});
  }

  void feedback(Out& out, const std::vector<FeedbackEvent>& events) {
    for (const auto& e : events) {
      send(out, {{"type", "feedback"}, {"session", id}, {"event", codec::encode(e)}});
      if (log != nullptr) log->append(FeedbackEnvelope{id, e});
    }
  }

  void reset_pipeline() {
    pipeline.reset();
    activation_window.clear();
    if (gesture) pipeline.emplace(*gesture, profile, cfg);
  }

  Out handle(std::string_view text) {
    Out out;
    if (closed) return out;
    json msg = json::parse(text.begin(), text.end(), nullptr, false);
    if (msg.is_discarded() || !msg.is_object() || !msg.contains("type") ||
        !msg.at("type").is_string()) {
      violation(out, "ProtocolViolation", "expected a JSON object with a string 'type'");
      return out;
    }
    const std::string type = msg.at("type").get<std::string>();
    if (type == "hello") {
      on_hello(msg, out);
      return out;
    }
    if (!hello) {
      violation(out, "ProtocolViolation", "'" + type + "' before hello");
      return out;
    }
    try {
      if (type == "start_session") {
        on_start(msg, out);
      } else if (type == "frame") {
        on_frame(msg, out);
      } else if (type == "end_attempt") {
        on_end_attempt(out);
      } else {
        violation(out, "ProtocolViolation", "unknown message type '" + type + "'");
      }
    } catch (const Error& e) {
      error(out, to_string(e.code()), e.what());
    }
    return out;
  }

  void on_hello(const json& msg, Out& out) {
    const auto v = msg.find("protocol_version");
    if (v == msg.end() || !v->is_string() || v->get<std::string>() != kProtocolVersion) {
      violation(out, "ProtocolVersion",
                "server speaks protocol " + std::string(kProtocolVersion));
      return;
    }
    hello = true;
    send(out, {{"type", "phase"}, {"session", nullptr}, {"phase", "idle"}});
  }

  static Error bad(const std::string& what) { return Error(ErrorCode::InvalidValue, what); }

  void on_start(const json& msg, Out& out) {
    for (const auto& [key, value] : msg.items()) {
      static const std::set<std::string> known{"type",  "module",      "gesture", "goal",
                                               "mode",  "participant", "day",     "profile"};
      if (!known.count(key)) throw bad("unknown start_session key '" + key + "'");
    }
    if (!msg.contains("module") || !msg.at("module").is_string()) throw bad("module is required");
    const auto m = parse_module(msg.at("module").get<std::string>());
    if (!m) throw bad("unknown module");

    std::optional<GestureKind> g;
    if (msg.contains("gesture") && !msg.at("gesture").is_null()) {
      g = codec::decode_gesture(msg.at("gesture"));
    }
    ToleranceMode tol_mode = ToleranceMode::Tolerant;
    if (msg.contains("mode")) {
      const auto parsed =
          msg.at("mode").is_string() ? parse_tolerance_mode(msg.at("mode").get<std::string>())
                                     : std::nullopt;
      if (!parsed) throw bad("mode must be exact or tolerant");
      tol_mode = *parsed;
    }
    DeviceProfile p = default_profile;
    if (msg.contains("profile")) {
      try {
        p = codec::decode_profile(msg.at("profile"), false, default_profile);
      } catch (const Error& e) {
        throw Error(ErrorCode::InvalidProfile, e.what());
      }
      validate(p);
    }
    std::string who = "anonymous";
    if (msg.contains("participant")) {
      if (!msg.at("participant").is_string()) throw bad("participant must be a string");
      who = msg.at("participant").get<std::string>();
    }
    int d = 0;
    if (msg.contains("day")) {
      if (!msg.at("day").is_number_integer() || msg.at("day").get<int>() < 0) {
        throw bad("day must be a non-negative integer");
      }
      d = msg.at("day").get<int>();
    }

    std::optional<TeachingSession> s;
    std::vector<FeedbackEvent> events;
    const std::string new_id = "session-" + std::to_string(started_count + 1);
    if (*m != LearningModule::FreeExploration) {
      if (!g) throw bad("gesture is required for this module");
      if (!msg.contains("goal") || !msg.at("goal").is_number()) {
        throw Error(ErrorCode::InvalidGoal, "goal is required for this module");
      }
      auto step = session_step(make_session(new_id, *m, *g),
                               StartGoal{msg.at("goal").get<double>(), tol_mode, 0}, cfg);
      s = std::move(step.session);
      events = std::move(step.events);
    }

    // Everything validated: commit.
    ++started_count;
    started = true;
    id = new_id;
    module = *m;
    gesture = g;
    mode = tol_mode;
    profile = p;
    participant = who;
    day = d;
    session = std::move(s);
    last_t = 0;
    reset_pipeline();

    json started_msg{{"type", "session_started"},
                     {"id", id},
                     {"module", to_string(module)},
                     {"gesture", gesture ? json(std::string(to_string(*gesture))) : json(nullptr)}};
    if (session) {
      started_msg["goal"] = session->goal;
      started_msg["tolerance"] = session->tolerance;
      started_msg["instructions"] = instructions_for(session->gesture, session->goal);
    } else {
      started_msg["instructions"] =
          "Perform any gesture; its value becomes your practice goal.";
    }
    send(out, started_msg);
    feedback(out, events);
    phase(out, session ? session->phase : TeachingPhase::Idle);
  }

  void on_frame(const json& msg, Out& out) {
    if (!started) {
      error(out, "NoSession", "start_session before sending frames");
      return;
    }
    for (const auto& [key, value] : msg.items()) {
      if (key != "type" && key != "frame") throw bad("unknown frame message key '" + key + "'");
    }
    if (!msg.contains("frame")) throw Error(ErrorCode::MalformedFrame, "frame is required");
    const SensorFrame frame = codec::decode_frame(msg.at("frame"));
    if (session && session->phase == TeachingPhase::Completed) {
      error(out, "IllegalTransition", "session is completed");
      return;
    }
    last_t = frame.t_ms;

    if (!pipeline) {
      // Free exploration before the first measurement: find out which gesture
      // the user is performing.
      if (!activation_window.empty() && frame.t_ms <= activation_window.back().t_ms) {
        throw Error(ErrorCode::NonMonotonicTime, "frame time went backwards");
      }
      activation_window.push_back(frame);
      const Millis keep = 2 * cfg.hold_to_start_ms;
      while (activation_window.front().t_ms < frame.t_ms - keep) {
        activation_window.erase(activation_window.begin());
      }
      const auto detected = detect_activation(activation_window, cfg);
      if (!detected) return;
      gesture = detected;
      pipeline.emplace(*detected, profile, cfg);
      auto window = std::move(activation_window);
      activation_window.clear();
      for (const auto& f : window) {
        feedback(out, pipeline->feed(f));
        if (pipeline->result()) break;
      }
    } else {
      feedback(out, pipeline->feed(frame));
    }
    if (pipeline && pipeline->result()) on_result(*pipeline->result(), out);
  }

  void on_end_attempt(Out& out) {
    if (!started) {
      error(out, "NoSession", "no session to end an attempt on");
      return;
    }
    if (session && session->phase == TeachingPhase::Completed) {
      error(out, "IllegalTransition", "session is completed");
      return;
    }
    if (!pipeline || !pipeline->activated()) {
      error(out, "NoActivation", "the gesture has not started");
      return;
    }
    if (pipeline->track().size() < static_cast<std::size_t>(cfg.finalize_k_frames)) {
      error(out, to_string(ErrorCode::InsufficientHistory), "not enough frames to finalize");
      return;
    }
    feedback(out, pipeline->force_finalize(last_t));
    if (pipeline->result()) {
      on_result(*pipeline->result(), out);
    } else {
      error(out, "NoActivation", "no attempt in progress");
    }
  }

  void on_result(const MeasurementResult& m, Out& out) {
    send(out, {{"type", "measurement"}, {"session", id}, {"result", codec::encode(m)}});
    if (!session) {
      if (!(m.value > 0.0)) {
        error(out, to_string(ErrorCode::InvalidGoal), "measured zero; try again");
        reset_pipeline();
        return;
      }
      auto step = run_free_exploration(m, cfg, mode, id);
      session = std::move(step.session);
      feedback(out, step.events);
      phase(out, session->phase);
      reset_pipeline();
      return;
    }

    const std::size_t attempts_before = session->attempts.size();
    auto step = session_step(*session, m, cfg);
    session = std::move(step.session);
    feedback(out, step.events);
    if (session->attempts.size() > attempts_before) {
      const Attempt& a = session->attempts.back();
      json r{{"type", "result"},        {"session", id},
             {"value", a.value},        {"goal", session->goal},
             {"signed_error", a.signed_error}, {"passed", a.passed}};
      if (session->goal > 0.0) r["relative_error"] = std::abs(a.signed_error) / session->goal;
      send(out, r);
    }
    phase(out, session->phase);
    if (session->phase == TeachingPhase::Completed) {
      pipeline.reset();
      if (module == LearningModule::AbilityAssessment && log != nullptr) {
        log->append(assessment_record(*session, participant, day));
      }
    } else {
      reset_pipeline();
    }
  }
};

SessionHandler::SessionHandler(EngineConfig cfg, DeviceProfile profile, SessionLog* log)
    : impl_(std::make_unique<Impl>()) {
  validate(cfg);
  validate(profile);
  impl_->cfg = cfg;
  impl_->default_profile = profile;
  impl_->profile = profile;
  impl_->log = log;
}

SessionHandler::~SessionHandler() = default;
SessionHandler::SessionHandler(SessionHandler&&) noexcept = default;
SessionHandler& SessionHandler::operator=(SessionHandler&&) noexcept = default;

std::vector<std::string> SessionHandler::handle(std::string_view message) {
  return impl_->handle(message);
}

bool SessionHandler::closed() const { return impl_->closed; }

const std::optional<TeachingSession>& SessionHandler::session() const { return impl_->session; }

// ---------------------------------------------------------------------------
// SessionServer
// ---------------------------------------------------------------------------

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

std::string_view content_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

std::optional<std::filesystem::path> static_file(const std::filesystem::path& root,
                                                 std::string_view target) {
  std::string path(target.substr(0, target.find('?')));
  if (path.empty() || path.front() != '/') return std::nullopt;
  std::filesystem::path rel = std::filesystem::path(path.substr(1)).lexically_normal();
  for (const auto& part : rel) {
    if (part == "..") return std::nullopt;
  }
  std::filesystem::path full = root / rel;
  std::error_code ec;
  if (std::filesystem::is_directory(full, ec)) full /= "index.html";
  if (!std::filesystem::is_regular_file(full, ec)) return std::nullopt;
  return full;
}

}  // namespace

struct SessionServer::Impl {
  ServerOptions opts;
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
  std::optional<SessionLog> log;

  std::mutex mu;
  std::set<int> open_fds;
  bool stopping = false;
  std::vector<std::thread> workers;

  bool track(int fd) {
    std::lock_guard lock(mu);
    if (stopping) return false;
    open_fds.insert(fd);
    return true;
  }

  void untrack(int fd) {
    std::lock_guard lock(mu);
    open_fds.erase(fd);
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (acceptor.is_open()) accept();
        return;
      }
      workers.emplace_back([this, s = std::move(socket)]() mutable { serve(std::move(s)); });
      accept();
    });
  }

  http::response<http::string_body> respond(const http::request<http::string_body>& req,
                                            http::status status, std::string body,
                                            std::string_view type) {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::content_type, std::string(type));
    res.keep_alive(false);
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  std::string health() const {
    const double uptime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return json{{"protocol_version", kProtocolVersion}, {"uptime_s", uptime}}.dump();
  }

  void serve(tcp::socket socket) {
    const int fd = socket.native_handle();
    if (!track(fd)) return;
    beast::error_code ec;
    beast::flat_buffer buffer;
    http::request<http::string_body> req;
    http::read(socket, buffer, req, ec);
    if (!ec) {
      if (websocket::is_upgrade(req)) {
        if (req.target() == "/session") {
          serve_session(std::move(socket), req);
          untrack(fd);
          return;
        }
        http::write(socket, respond(req, http::status::not_found, "not found\n", "text/plain"), ec);
      } else {
        http::write(socket, route(req), ec);
      }
      socket.shutdown(tcp::socket::shutdown_send, ec);
    }
    untrack(fd);
  }

  http::response<http::string_body> route(const http::request<http::string_body>& req) {
    if (req.method() != http::verb::get && req.method() != http::verb::head) {
      return respond(req, http::status::method_not_allowed, "method not allowed\n", "text/plain");
    }
    if (req.target() == "/health") {
      return respond(req, http::status::ok, health() + "\n", "application/json");
    }
    if (opts.static_dir) {
      if (auto file = static_file(*opts.static_dir, std::string_view(req.target().data(), req.target().size()))) {
        std::ifstream in(*file, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return respond(req, http::status::ok, ss.str(), content_type(*file));
      }
    }
    return respond(req, http::status::not_found, "not found\n", "text/plain");
  }

  void serve_session(tcp::socket socket, const http::request<http::string_body>& req) {
    websocket::stream<tcp::socket> ws(std::move(socket));
    beast::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    SessionHandler handler(opts.config, opts.profile, log ? &*log : nullptr);
    beast::flat_buffer buffer;
    for (;;) {
      buffer.clear();
      ws.read(buffer, ec);
      if (ec) return;
      std::vector<std::string> replies;
      try {
        replies = handler.handle(beast::buffers_to_string(buffer.data()));
      } catch (const std::exception& e) {
        // Log append failures and the like; the connection cannot continue.
        replies.push_back(json{{"type", "error"}, {"code", "Internal"}, {"message", e.what()}}.dump());
        ws.text(true);
        ws.write(net::buffer(replies.back()), ec);
        ws.close(websocket::close_code::internal_error, ec);
        return;
      }
      ws.text(true);
      for (const auto& r : replies) {
        ws.write(net::buffer(r), ec);
        if (ec) return;
      }
      if (handler.closed()) {
        ws.close(websocket::close_code::policy_error, ec);
        return;
      }
    }
  }

  void stop() {
    {
      std::lock_guard lock(mu);
      if (stopping) return;
      stopping = true;
      for (int fd : open_fds) ::shutdown(fd, SHUT_RDWR);
    }
    net::post(ioc, [this] {
      beast::error_code ec;
      acceptor.close(ec);
    });
    ioc.stop();
  }
};

SessionServer::SessionServer(ServerOptions options) : impl_(std::make_unique<Impl>()) {
  validate(options.config);
  validate(options.profile);
  impl_->opts = std::move(options);
  auto& o = impl_->opts;
  if (o.log_path) impl_->log.emplace(*o.log_path);

  beast::error_code ec;
  const auto address = net::ip::make_address(o.address, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "bad address '" + o.address + "'");
  const tcp::endpoint endpoint(address, o.port);
  auto& a = impl_->acceptor;
  a.open(endpoint.protocol(), ec);
  if (!ec) a.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) a.bind(endpoint, ec);
  if (!ec) a.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error(ErrorCode::IoFailure, "cannot listen on " + o.address + ":" +
                                          std::to_string(o.port) + ": " + ec.message());
  }
}

SessionServer::~SessionServer() {
  stop();
  for (auto& t : impl_->workers) {
    if (t.joinable()) t.join();
  }
}

std::uint16_t SessionServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void SessionServer::run() {
  impl_->accept();
  impl_->ioc.run();
  // A connection accepted just before stop() may have registered after the
  // shutdown sweep.
  {
    std::lock_guard lock(impl_->mu);
    for (int fd : impl_->open_fds) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : impl_->workers) {
    if (t.joinable()) t.join();
  }
  impl_->workers.clear();
}

void SessionServer::run_until_signal() {
  net::signal_set signals(impl_->ioc, SIGINT, SIGTERM);
  signals.async_wait([this](const beast::error_code& ec, int) {
    if (!ec) stop();
  });
  run();
}

void SessionServer::stop() { impl_->stop(); }

std::string SessionServer::health_json() const { return impl_->health(); }

}  // namespace anglesizer
