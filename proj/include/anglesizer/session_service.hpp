#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "anglesizer/core.hpp"
#include "anglesizer/teaching.hpp"
#include "anglesizer/trace_io.hpp"

namespace anglesizer {

inline constexpr std::string_view kProtocolVersion = "1";

/// Protocol state for one connection, independent of any transport. Each
/// call consumes one client message (a JSON text) and returns the server
/// messages to send back, in order.
///
/// Client messages:
///   {"type":"hello","protocol_version":"1"}
///   {"type":"start_session","module":..., "gesture":..., "goal":..., "mode":...,
///    "participant":..., "day":..., "profile":{...}}
///   {"type":"frame","frame":{...}}
///   {"type":"end_attempt"}
/// Server messages: session_started, feedback, measurement, phase, result,
/// error. A protocol violation (bad JSON, unknown type, version mismatch,
/// anything before hello) answers with an error and marks the handler closed.
class SessionHandler {
 public:
  SessionHandler(EngineConfig cfg, DeviceProfile profile, SessionLog* log = nullptr);
  ~SessionHandler();
  SessionHandler(SessionHandler&&) noexcept;
  SessionHandler& operator=(SessionHandler&&) noexcept;

  std::vector<std::string> handle(std::string_view message);

  bool closed() const;
  /// The teaching session in progress, if any (FreeExploration has none until
  /// its first measurement).
  const std::optional<TeachingSession>& session() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765;  ///< 0 picks a free port
  EngineConfig config;
  DeviceProfile profile;
  std::optional<std::filesystem::path> log_path;
  std::optional<std::filesystem::path> static_dir;
};

/// WebSocket endpoint `/session` (one SessionHandler per connection) and
/// HTTP `GET /health`. Optional static files for a browser client.
class SessionServer {
 public:
  /// Binds immediately. Throws Error{IoFailure} if the address is unusable.
  explicit SessionServer(ServerOptions options);
  ~SessionServer();

  std::uint16_t port() const;

  /// Serves until stop() is called. Connection threads are joined before
  /// returning.
  void run();
  /// Serves until stop() or SIGINT/SIGTERM.
  void run_until_signal();
  /// Thread-safe; closes the listener and every open connection.
  void stop();

  /// Body of the health response.
  std::string health_json() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace anglesizer
