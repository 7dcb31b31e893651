#include "anglesizer/trace_io.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "anglesizer/codec.hpp"

namespace anglesizer {

using codec::json;

namespace {

[[noreturn]] void malformed_at(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedFrame, what, line);
}

json parse_json_line(std::string_view text, std::size_t line) {
  json j = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) malformed_at(line, "invalid JSON");
  return j;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TraceDocument parse_header(const json& j, std::size_t line) {
  TraceDocument doc;
  if (!j.is_object() || !j.contains("profile")) malformed_at(line, "header needs a profile");
  for (const auto& [key, value] : j.items()) {
    if (key != "profile" && key != "ground_truth") {
      malformed_at(line, "unknown header key '" + key + "'");
    }
  }
  try {
    doc.profile = codec::decode_profile(j.at("profile"));
    validate(doc.profile);
    if (j.contains("ground_truth")) {
      const json& gt = j.at("ground_truth");
      if (!gt.is_object() || gt.size() != 2 || !gt.contains("gesture") ||
          !gt.contains("value") || !gt.at("value").is_number()) {
        malformed_at(line, "ground_truth needs exactly gesture and value");
      }
      GroundTruth truth{codec::decode_gesture(gt.at("gesture")), gt.at("value").get<double>()};
      if (!validate_range(truth.value, truth.gesture).within) {
        malformed_at(line, "ground truth value outside the gesture range");
      }
      doc.ground_truth = truth;
    }
  } catch (const Error& e) {
    if (e.line()) throw;
    malformed_at(line, e.what());
  }
  return doc;
}

}  // namespace

TraceDocument parse_trace(std::string_view text) {
  std::optional<TraceDocument> doc;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    json j = parse_json_line(line, line_no);
    if (!doc) {
      doc = parse_header(j, line_no);
      continue;
    }
    SensorFrame frame;
    try {
      frame = codec::decode_frame(j);
    } catch (const Error& e) {
      malformed_at(line_no, e.what());
    }
    if (auto why = frame_violation(frame, doc->profile)) malformed_at(line_no, *why);
    if (!doc->frames.empty() && frame.t_ms <= doc->frames.back().t_ms) {
      throw Error(ErrorCode::NonMonotonicTime,
                  "t_ms " + std::to_string(frame.t_ms) + " does not exceed previous " +
                      std::to_string(doc->frames.back().t_ms),
                  line_no);
    }
    doc->frames.push_back(std::move(frame));
  }
  if (!doc) throw Error(ErrorCode::EmptyTrace, "trace has no header");
  if (doc->frames.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no frames");
  return std::move(*doc);
}

std::string write_trace(const TraceDocument& doc) {
  json header{{"profile", codec::encode(doc.profile)}};
  if (doc.ground_truth) {
    header["ground_truth"] = json{{"gesture", std::string(to_string(doc.ground_truth->gesture))},
                                  {"value", doc.ground_truth->value}};
  }
  std::string out = header.dump();
  out += '\n';
  for (const auto& f : doc.frames) {
    out += codec::encode(f).dump();
    out += '\n';
  }
  return out;
}

TraceDocument read_trace_file(const std::filesystem::path& path) {
  return parse_trace(read_file(path));
}

void write_trace_file(const std::filesystem::path& path, const TraceDocument& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << write_trace(doc);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------

std::string encode_log_line(const LogRecord& record) {
  json j;
  if (const auto* a = std::get_if<AssessmentRecord>(&record)) {
    j = codec::encode(*a);
    j["type"] = "assessment";
  } else {
    const auto& f = std::get<FeedbackEnvelope>(record);
    j = json{{"type", "feedback"}, {"session", f.session}, {"event", codec::encode(f.event)}};
  }
  return j.dump();
}

LogRecord decode_log_line(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw Error(ErrorCode::MalformedFrame, "log line needs a JSON object with a type");
  }
  const std::string type = j.at("type").get<std::string>();
  j.erase("type");
  if (type == "assessment") return codec::decode_record(j);
  if (type == "feedback") {
    if (j.size() != 2 || !j.contains("session") || !j.at("session").is_string() ||
        !j.contains("event")) {
      throw Error(ErrorCode::MalformedFrame, "feedback log line needs session and event");
    }
    return FeedbackEnvelope{j.at("session").get<std::string>(),
                            codec::decode_feedback(j.at("event"))};
  }
  throw Error(ErrorCode::MalformedFrame, "unknown log record type '" + type + "'");
}

namespace {

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

[[noreturn]] void io_failure(const std::filesystem::path& path, const char* what) {
  throw Error(ErrorCode::IoFailure,
              std::string(what) + " " + path.string() + ": " + std::strerror(errno));
}

// Offset just past the last newline, i.e. the committed length of the log.
off_t committed_length(int fd, off_t size, const std::filesystem::path& path) {
  char buf[4096];
  off_t end = size;
  while (end > 0) {
    const off_t begin = end > static_cast<off_t>(sizeof buf) ? end - sizeof buf : 0;
    const auto len = static_cast<std::size_t>(end - begin);
    if (::pread(fd, buf, len, begin) != static_cast<ssize_t>(len)) io_failure(path, "read");
    for (std::size_t i = len; i > 0; --i) {
      if (buf[i - 1] == '\n') return begin + static_cast<off_t>(i);
    }
    end = begin;
  }
  return 0;
}

}  // namespace

void append_session_log(const LogRecord& record, const std::filesystem::path& path) {
  const std::string line = encode_log_line(record) + '\n';
  Fd fd(::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644));
  if (fd.get() < 0) io_failure(path, "open");

  struct stat st {};
  if (::fstat(fd.get(), &st) != 0) io_failure(path, "stat");
  off_t offset = st.st_size;
  if (offset > 0) {
    const off_t committed = committed_length(fd.get(), offset, path);
    if (committed != offset) {
      if (::ftruncate(fd.get(), committed) != 0) io_failure(path, "truncate");
      offset = committed;
    }
  }

  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::pwrite(fd.get(), line.data() + written, line.size() - written,
                               offset + static_cast<off_t>(written));
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure(path, "write");
    }
    written += static_cast<std::size_t>(n);
  }
}

std::vector<LogRecord> read_session_log(const std::filesystem::path& path) {
  std::vector<LogRecord> out;
  if (!std::filesystem::exists(path)) return out;
  const std::string text = read_file(path);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (true) {
    const std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) break;  // torn tail, not committed
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    try {
      out.push_back(decode_log_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), line_no);
    }
  }
  return out;
}

std::vector<AssessmentRecord> assessment_records(const std::vector<LogRecord>& log) {
  std::vector<AssessmentRecord> out;
  for (const auto& r : log) {
    if (const auto* a = std::get_if<AssessmentRecord>(&r)) out.push_back(*a);
  }
  return out;
}

// ---------------------------------------------------------------------------

Settings parse_settings(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  }
  Settings s;
  if (j.contains("profile")) {
    try {
      s.profile = codec::decode_profile(j.at("profile"), /*require_all=*/false);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidProfile, e.what());
    }
    j.erase("profile");
  }
  try {
    s.config = codec::decode_config(j);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  validate(s.config);
  validate(s.profile);
  return s;
}

Settings load_settings(const std::filesystem::path& path) {
  return parse_settings(read_file(path));
}

}  // namespace anglesizer
