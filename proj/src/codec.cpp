#include "anglesizer/codec.hpp"

#include <set>
#include <string>

namespace anglesizer::codec {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedFrame, what);
}

// Walks one JSON object, remembering which keys were read so that anything
// left over can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) malformed(context_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& at(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) malformed(context_ + ": missing key '" + key + "'");
    seen_.insert(key);
    return *it;
  }

  double number(const char* key) {
    const json& v = at(key);
    if (!v.is_number()) malformed(context_ + ": '" + key + "' must be a number");
    return v.get<double>();
  }

  std::int64_t integer(const char* key) {
    const json& v = at(key);
    if (!v.is_number_integer()) malformed(context_ + ": '" + key + "' must be an integer");
    return v.get<std::int64_t>();
  }

  bool boolean(const char* key) {
    const json& v = at(key);
    if (!v.is_boolean()) malformed(context_ + ": '" + key + "' must be a boolean");
    return v.get<bool>();
  }

  std::string string(const char* key) {
    const json& v = at(key);
    if (!v.is_string()) malformed(context_ + ": '" + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key) {
    const json& v = at(key);
    if (!v.is_array()) malformed(context_ + ": '" + key + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
      if (!e.is_number()) malformed(context_ + ": '" + key + "' must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  template <std::size_t N>
  std::array<double, N> fixed_numbers(const char* key) {
    auto v = numbers(key);
    if (v.size() != N) {
      malformed(context_ + ": '" + key + "' must have " + std::to_string(N) + " elements");
    }
    std::array<double, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }

  void optional_number(const char* key, double& dst) {
    if (has(key)) dst = number(key);
  }
  void optional_int(const char* key, int& dst) {
    if (has(key)) dst = static_cast<int>(integer(key));
  }
  void optional_int(const char* key, std::int64_t& dst) {
    if (has(key)) dst = integer(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) malformed(context_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace

GestureKind decode_gesture(const json& j) {
  if (!j.is_string()) malformed("gesture must be a string");
  auto g = parse_gesture(j.get<std::string>());
  if (!g) malformed("unknown gesture '" + j.get<std::string>() + "'");
  return *g;
}

// ---------------------------------------------------------------------------

json encode(const DeviceProfile& p) {
  return json{{"dpi_x", p.dpi_x},
              {"dpi_y", p.dpi_y},
              {"screen_w_px", p.screen_w_px},
              {"screen_h_px", p.screen_h_px},
              {"palm_width_cm", p.palm_width_cm},
              {"focal_px", p.focal_px}};
}

DeviceProfile decode_profile(const json& j, bool require_all, const DeviceProfile& base) {
  Reader r(j, "profile");
  DeviceProfile p = base;
  if (require_all) {
    p.dpi_x = r.number("dpi_x");
    p.dpi_y = r.number("dpi_y");
    p.screen_w_px = static_cast<int>(r.integer("screen_w_px"));
    p.screen_h_px = static_cast<int>(r.integer("screen_h_px"));
    p.palm_width_cm = r.number("palm_width_cm");
    p.focal_px = r.number("focal_px");
  } else {
    r.optional_number("dpi_x", p.dpi_x);
    r.optional_number("dpi_y", p.dpi_y);
    r.optional_int("screen_w_px", p.screen_w_px);
    r.optional_int("screen_h_px", p.screen_h_px);
    r.optional_number("palm_width_cm", p.palm_width_cm);
    r.optional_number("focal_px", p.focal_px);
  }
  r.finish();
  return p;
}

json encode(const EngineConfig& c) {
  return json{{"clamp_theta_m", c.clamp_theta_m},
              {"stability_window_frames", c.stability_window_frames},
              {"stability_eps_finger_cm", c.stability_eps_finger_cm},
              {"stability_eps_hand_cm", c.stability_eps_hand_cm},
              {"stability_eps_rotation_deg", c.stability_eps_rotation_deg},
              {"finalize_k_frames", c.finalize_k_frames},
              {"parallel_max_deg", c.parallel_max_deg},
              {"palm_arch_spread_max", c.palm_arch_spread_max},
              {"hold_to_start_ms", c.hold_to_start_ms},
              {"tolerance_rel", c.tolerance_rel},
              {"frame_rate_hz", c.frame_rate_hz},
              {"activation_motion_cm", c.activation_motion_cm},
              {"activation_yaw_deg", c.activation_yaw_deg},
              {"hold_slop_cm", c.hold_slop_cm}};
}

EngineConfig decode_config(const json& j, const EngineConfig& base) {
  Reader r(j, "config");
  EngineConfig c = base;
  r.optional_number("clamp_theta_m", c.clamp_theta_m);
  r.optional_int("stability_window_frames", c.stability_window_frames);
  r.optional_number("stability_eps_finger_cm", c.stability_eps_finger_cm);
  r.optional_number("stability_eps_hand_cm", c.stability_eps_hand_cm);
  r.optional_number("stability_eps_rotation_deg", c.stability_eps_rotation_deg);
  r.optional_int("finalize_k_frames", c.finalize_k_frames);
  r.optional_number("parallel_max_deg", c.parallel_max_deg);
  r.optional_number("palm_arch_spread_max", c.palm_arch_spread_max);
  r.optional_int("hold_to_start_ms", c.hold_to_start_ms);
  r.optional_number("tolerance_rel", c.tolerance_rel);
  r.optional_number("frame_rate_hz", c.frame_rate_hz);
  r.optional_number("activation_motion_cm", c.activation_motion_cm);
  r.optional_number("activation_yaw_deg", c.activation_yaw_deg);
  r.optional_number("hold_slop_cm", c.hold_slop_cm);
  r.finish();
  return c;
}

// ---------------------------------------------------------------------------

namespace {

struct PayloadEncoder {
  json& out;

  void operator()(const Touch& t) const {
    json contacts = json::array();
    for (const auto& c : t.contacts) {
      contacts.push_back(json{{"id", c.id},
                              {"x_px", c.x_px},
                              {"y_px", c.y_px},
                              {"phase", std::string(to_string(c.phase))}});
    }
    out["touch"] = json{{"contacts", contacts}};
  }
  void operator()(const Pose& p) const {
    out["pose"] = json{{"position_m", p.position_m}, {"orientation_q", p.orientation_q}};
  }
  void operator()(const Orientation& o) const {
    out["orientation"] =
        json{{"yaw_deg", o.yaw_deg}, {"pitch_deg", o.pitch_deg}, {"roll_deg", o.roll_deg}};
  }
  void operator()(const Palm& p) const {
    json body{{"detected", p.detected}};
    if (p.detected) {
      body["width_px"] = p.width_px;
      body["arch_depths"] = p.arch_depths;
      body["wrist_depth"] = p.wrist_depth;
    }
    out["palm"] = body;
  }
  void operator()(const Press& p) const { out["press"] = json{{"pressed", p.pressed}}; }
};

Touch decode_touch(const json& j) {
  Reader r(j, "touch");
  const json& arr = r.at("contacts");
  r.finish();
  if (!arr.is_array()) malformed("touch: 'contacts' must be an array");
  Touch t;
  for (const auto& cj : arr) {
    Reader c(cj, "contact");
    Contact contact;
    contact.id = static_cast<int>(c.integer("id"));
    contact.x_px = c.number("x_px");
    contact.y_px = c.number("y_px");
    auto phase = parse_touch_phase(c.string("phase"));
    if (!phase) malformed("contact: phase must be down, move or up");
    contact.phase = *phase;
    c.finish();
    t.contacts.push_back(contact);
  }
  return t;
}

Pose decode_pose(const json& j) {
  Reader r(j, "pose");
  Pose p;
  p.position_m = r.fixed_numbers<3>("position_m");
  p.orientation_q = r.fixed_numbers<4>("orientation_q");
  r.finish();
  return p;
}

Orientation decode_orientation(const json& j) {
  Reader r(j, "orientation");
  Orientation o;
  o.yaw_deg = r.number("yaw_deg");
  o.pitch_deg = r.number("pitch_deg");
  o.roll_deg = r.number("roll_deg");
  r.finish();
  return o;
}

Palm decode_palm(const json& j) {
  Reader r(j, "palm");
  Palm p;
  p.detected = r.boolean("detected");
  if (p.detected) {
    p.width_px = r.number("width_px");
    p.arch_depths = r.numbers("arch_depths");
    p.wrist_depth = r.number("wrist_depth");
  }
  r.finish();
  return p;
}

Press decode_press(const json& j) {
  Reader r(j, "press");
  Press p;
  p.pressed = r.boolean("pressed");
  r.finish();
  return p;
}

}  // namespace

json encode(const SensorFrame& f) {
  json out{{"t_ms", f.t_ms}};
  std::visit(PayloadEncoder{out}, f.payload);
  return out;
}

SensorFrame decode_frame(const json& j) {
  if (!j.is_object()) malformed("frame must be an object");
  SensorFrame f;
  auto t = j.find("t_ms");
  if (t == j.end() || !t->is_number_integer()) malformed("frame needs an integer t_ms");
  f.t_ms = t->get<std::int64_t>();
  if (j.size() != 2) malformed("frame must carry exactly one payload key");
  for (const auto& [key, value] : j.items()) {
    if (key == "t_ms") continue;
    if (key == "touch") f.payload = decode_touch(value);
    else if (key == "pose") f.payload = decode_pose(value);
    else if (key == "orientation") f.payload = decode_orientation(value);
    else if (key == "palm") f.payload = decode_palm(value);
    else if (key == "press") f.payload = decode_press(value);
    else malformed("unknown payload key '" + key + "'");
  }
  return f;
}

// ---------------------------------------------------------------------------

json encode(const Warning& w) {
  return json{{"code", std::string(to_string(w.code))}, {"t_ms", w.t_ms}};
}

Warning decode_warning(const json& j) {
  Reader r(j, "warning");
  auto code = parse_warning_code(r.string("code"));
  if (!code) malformed("warning: unknown code");
  Warning w{*code, r.integer("t_ms")};
  r.finish();
  return w;
}

json encode(const MeasurementResult& m) {
  json warnings = json::array();
  for (const auto& w : m.warnings) warnings.push_back(encode(w));
  return json{{"gesture", std::string(to_string(m.gesture))},
              {"value", m.value},
              {"raw_value", m.raw_value},
              {"started_ms", m.started_ms},
              {"ended_ms", m.ended_ms},
              {"frames_processed", m.frames_processed},
              {"warnings", warnings}};
}

MeasurementResult decode_measurement(const json& j) {
  Reader r(j, "measurement");
  MeasurementResult m;
  m.gesture = decode_gesture(r.at("gesture"));
  m.value = r.number("value");
  m.raw_value = r.number("raw_value");
  m.started_ms = r.integer("started_ms");
  m.ended_ms = r.integer("ended_ms");
  m.frames_processed = static_cast<std::size_t>(r.integer("frames_processed"));
  const json& ws = r.at("warnings");
  if (!ws.is_array()) malformed("measurement: warnings must be an array");
  for (const auto& w : ws) m.warnings.push_back(decode_warning(w));
  r.finish();
  return m;
}

namespace {

struct FeedbackEncoder {
  json& out;
  void operator()(const BeepCorrect&) const { out["kind"] = "beep_correct"; }
  void operator()(const BeepError&) const { out["kind"] = "beep_error"; }
  void operator()(const Speech& s) const {
    out["kind"] = "speech";
    out["text"] = s.text;
  }
  void operator()(const Vibration& v) const {
    out["kind"] = "vibration";
    out["amplitude"] = v.amplitude;
    out["duration_ms"] = v.duration_ms;
  }
};

}  // namespace

json encode(const FeedbackEvent& e) {
  json out{{"t_ms", e.t_ms}};
  std::visit(FeedbackEncoder{out}, e.kind);
  return out;
}

FeedbackEvent decode_feedback(const json& j) {
  Reader r(j, "feedback");
  FeedbackEvent e;
  e.t_ms = r.integer("t_ms");
  const std::string kind = r.string("kind");
  if (kind == "beep_correct") {
    e.kind = BeepCorrect{};
  } else if (kind == "beep_error") {
    e.kind = BeepError{};
  } else if (kind == "speech") {
    e.kind = Speech{r.string("text")};
  } else if (kind == "vibration") {
    Vibration v;
    v.amplitude = r.number("amplitude");
    v.duration_ms = r.integer("duration_ms");
    if (!(v.amplitude > 0.0 && v.amplitude <= 1.0) || v.duration_ms <= 0) {
      malformed("vibration: amplitude must be in (0, 1] and duration positive");
    }
    e.kind = v;
  } else {
    malformed("feedback: unknown kind '" + kind + "'");
  }
  r.finish();
  return e;
}

json encode(const AssessmentRecord& a) {
  return json{{"participant", a.participant},
              {"day", a.day},
              {"gesture", std::string(to_string(a.gesture))},
              {"task", a.task},
              {"result", a.result},
              {"relative_error", a.relative_error},
              {"t_ms", a.t_ms}};
}

AssessmentRecord decode_record(const json& j) {
  Reader r(j, "record");
  AssessmentRecord a;
  a.participant = r.string("participant");
  a.day = static_cast<int>(r.integer("day"));
  a.gesture = decode_gesture(r.at("gesture"));
  a.task = r.number("task");
  a.result = r.number("result");
  a.relative_error = r.number("relative_error");
  a.t_ms = r.integer("t_ms");
  r.finish();
  if (a.day < 0) malformed("record: day must be >= 0");
  if (!(a.task > 0.0)) malformed("record: task must be > 0");
  return a;
}

}  // namespace anglesizer::codec
