#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "anglesizer/core.hpp"

namespace anglesizer {

struct GroundTruth {
  GestureKind gesture = GestureKind::OneFinger;
  double value = 0.0;
  bool operator==(const GroundTruth&) const = default;
};

struct TraceDocument {
  DeviceProfile profile;
  std::vector<SensorFrame> frames;
  std::optional<GroundTruth> ground_truth;
  bool operator==(const TraceDocument&) const = default;
};

/// Parses a `.trace.jsonl` document: a header line with the profile (and
/// optional ground truth) followed by one frame per line. Blank lines are
/// ignored but still counted for error line numbers.
///
/// Throws Error with EmptyTrace, NonMonotonicTime or MalformedFrame; the
/// latter two carry the 1-based line number.
TraceDocument parse_trace(std::string_view text);

std::string write_trace(const TraceDocument& doc);

TraceDocument read_trace_file(const std::filesystem::path& path);
void write_trace_file(const std::filesystem::path& path, const TraceDocument& doc);

// ---------------------------------------------------------------------------
// Session log
// ---------------------------------------------------------------------------

struct FeedbackEnvelope {
  std::string session;
  FeedbackEvent event;
  bool operator==(const FeedbackEnvelope&) const = default;
};

using LogRecord = std::variant<AssessmentRecord, FeedbackEnvelope>;

/// Serialized form of one log line, without the trailing newline.
std::string encode_log_line(const LogRecord& record);
LogRecord decode_log_line(std::string_view line);

/// Appends one record as a single line. A torn tail left by an interrupted
/// earlier append is cut back to the last newline before writing, so the
/// file only ever grows by whole lines. Throws Error{IoFailure}.
void append_session_log(const LogRecord& record, const std::filesystem::path& path);

/// Reads every complete line; a trailing fragment without a newline is
/// ignored. A missing file reads as empty.
std::vector<LogRecord> read_session_log(const std::filesystem::path& path);

std::vector<AssessmentRecord> assessment_records(const std::vector<LogRecord>& log);

/// Serializes appends from several threads onto one log file.
class SessionLog {
 public:
  explicit SessionLog(std::filesystem::path path) : path_(std::move(path)) {}

  void append(const LogRecord& record) {
    std::lock_guard lock(mu_);
    append_session_log(record, path_);
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Configuration file
// ---------------------------------------------------------------------------

struct Settings {
  EngineConfig config;
  DeviceProfile profile;
};

/// JSON object with any EngineConfig fields plus an optional "profile"
/// object. Unknown keys are rejected. Throws Error{InvalidConfig} or
/// Error{InvalidProfile}.
Settings parse_settings(std::string_view text);
Settings load_settings(const std::filesystem::path& path);

}  // namespace anglesizer
