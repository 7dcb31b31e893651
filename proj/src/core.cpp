#include "anglesizer/core.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace anglesizer {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidObservation: return "InvalidObservation";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::OffScreen: return "OffScreen";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::InvalidGoal: return "InvalidGoal";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::GestureMismatch: return "GestureMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::InvalidTask: return "InvalidTask";
    case ErrorCode::InvalidBaseline: return "InvalidBaseline";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::DegenerateX: return "DegenerateX";
  }
  return "Unknown";
}

namespace {

std::string with_line(const std::string& message, std::optional<std::size_t> line) {
  if (!line) return message;
  return "line " + std::to_string(*line) + ": " + message;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(with_line(message, line)), code_(code), line_(line) {}

// ---------------------------------------------------------------------------

const GestureSpec& gesture_spec(GestureKind g) {
  static const GestureSpec kFinger{Unit::Centimeter, 0.0, 12.0, 0.1, 1};
  static const GestureSpec kHand{Unit::Centimeter, 0.0, 120.0, 1.0, 0};
  static const GestureSpec kRotation{Unit::Degree, 0.0, 360.0, 1.0, 0};
  switch (g) {
    case GestureKind::OneFinger:
    case GestureKind::TwoFingers: return kFinger;
    case GestureKind::OneHand:
    case GestureKind::TwoHands: return kHand;
    case GestureKind::BodyRotation: return kRotation;
  }
  return kFinger;
}

std::string_view to_string(GestureKind g) {
  switch (g) {
    case GestureKind::OneFinger: return "one_finger";
    case GestureKind::TwoFingers: return "two_fingers";
    case GestureKind::OneHand: return "one_hand";
    case GestureKind::TwoHands: return "two_hands";
    case GestureKind::BodyRotation: return "body_rotation";
  }
  return "unknown";
}

std::string_view to_string(Unit u) { return u == Unit::Centimeter ? "cm" : "deg"; }

std::optional<GestureKind> parse_gesture(std::string_view s) {
  std::string norm(s);
  std::replace(norm.begin(), norm.end(), '-', '_');
  for (auto g : kAllGestures) {
    if (to_string(g) == norm) return g;
  }
  return std::nullopt;
}

namespace {

std::string fixed(double value, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << value;
  return os.str();
}

}  // namespace

std::string spoken_value(double value, GestureKind g) {
  const auto& spec = gesture_spec(g);
  return fixed(value, spec.decimals) +
         (spec.unit == Unit::Centimeter ? " centimeters" : " degrees");
}

std::string short_value(double value, GestureKind g) {
  const auto& spec = gesture_spec(g);
  return fixed(value, spec.decimals) + " " + std::string(to_string(spec.unit));
}

double round_to_resolution(double raw, GestureKind g) {
  if (!std::isfinite(raw)) {
    throw Error(ErrorCode::InvalidValue, "cannot round a non-finite value");
  }
  const double res = gesture_spec(g).resolution;
  // Snap the quotient to a 1e-6 grid first so decimal ties such as
  // 6.35 / 0.1 = 63.4999... resolve as the written tie.
  const double q = std::round(raw / res * 1e6) / 1e6;
  return std::round(q) * res;
}

RangeCheck validate_range(double value, GestureKind g) {
  const auto& spec = gesture_spec(g);
  if (value < spec.min) return {false, spec.min};
  if (value > spec.max) return {false, spec.max};
  return {true, value};
}

// ---------------------------------------------------------------------------

void validate(const DeviceProfile& p) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(p.dpi_x) || !positive(p.dpi_y)) {
    throw Error(ErrorCode::InvalidProfile, "dpi must be positive");
  }
  if (p.screen_w_px <= 0 || p.screen_h_px <= 0) {
    throw Error(ErrorCode::InvalidProfile, "screen size must be positive");
  }
  if (!positive(p.focal_px)) {
    throw Error(ErrorCode::InvalidProfile, "focal length must be positive");
  }
  if (!positive(p.palm_width_cm) || p.palm_width_cm < 5.0 || p.palm_width_cm > 15.0) {
    throw Error(ErrorCode::InvalidProfile, "palm width must lie in [5, 15] cm");
  }
}

std::string_view to_string(TouchPhase p) {
  switch (p) {
    case TouchPhase::Down: return "down";
    case TouchPhase::Move: return "move";
    case TouchPhase::Up: return "up";
  }
  return "move";
}

std::optional<TouchPhase> parse_touch_phase(std::string_view s) {
  if (s == "down") return TouchPhase::Down;
  if (s == "move") return TouchPhase::Move;
  if (s == "up") return TouchPhase::Up;
  return std::nullopt;
}

namespace {

struct ViolationVisitor {
  const DeviceProfile& profile;

  std::optional<std::string> operator()(const Touch& t) const {
    if (t.contacts.size() > 2) return "more than two touch contacts";
    std::set<int> ids;
    for (const auto& c : t.contacts) {
      if (!ids.insert(c.id).second) return "duplicate contact id";
      if (!std::isfinite(c.x_px) || !std::isfinite(c.y_px) || c.x_px < 0.0 ||
          c.y_px < 0.0 || c.x_px > profile.screen_w_px || c.y_px > profile.screen_h_px) {
        return "contact outside screen bounds";
      }
    }
    return std::nullopt;
  }

  std::optional<std::string> operator()(const Pose& p) const {
    for (double v : p.position_m) {
      if (!std::isfinite(v)) return "non-finite position";
    }
    double n2 = 0.0;
    for (double v : p.orientation_q) n2 += v * v;
    if (!std::isfinite(n2) || std::abs(std::sqrt(n2) - 1.0) > 1e-6) {
      return "orientation quaternion is not unit length";
    }
    return std::nullopt;
  }

  std::optional<std::string> operator()(const Orientation& o) const {
    if (!(o.yaw_deg >= 0.0 && o.yaw_deg < 360.0)) return "yaw outside [0, 360)";
    if (!(o.pitch_deg >= -90.0 && o.pitch_deg <= 90.0)) return "pitch outside [-90, 90]";
    if (!(o.roll_deg > -180.0 && o.roll_deg <= 180.0)) return "roll outside (-180, 180]";
    return std::nullopt;
  }

  std::optional<std::string> operator()(const Palm& p) const {
    if (!p.detected) return std::nullopt;
    if (!(std::isfinite(p.width_px) && p.width_px > 0.0)) return "palm width must be positive";
    if (p.arch_depths.size() < 3) return "palm needs at least three arch depths";
    for (double d : p.arch_depths) {
      if (!std::isfinite(d)) return "non-finite arch depth";
    }
    if (!std::isfinite(p.wrist_depth)) return "non-finite wrist depth";
    return std::nullopt;
  }

  std::optional<std::string> operator()(const Press&) const { return std::nullopt; }
};

}  // namespace

std::optional<std::string> frame_violation(const SensorFrame& f, const DeviceProfile& profile) {
  if (f.t_ms < 0) return "negative timestamp";
  return std::visit(ViolationVisitor{profile}, f.payload);
}

// ---------------------------------------------------------------------------

double EngineConfig::stability_eps(GestureKind g) const {
  switch (g) {
    case GestureKind::OneFinger:
    case GestureKind::TwoFingers: return stability_eps_finger_cm;
    case GestureKind::OneHand:
    case GestureKind::TwoHands: return stability_eps_hand_cm;
    case GestureKind::BodyRotation: return stability_eps_rotation_deg;
  }
  return stability_eps_hand_cm;
}

void validate(const EngineConfig& c) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  const bool ok = positive(c.clamp_theta_m) && c.stability_window_frames > 0 &&
                  positive(c.stability_eps_finger_cm) && positive(c.stability_eps_hand_cm) &&
                  positive(c.stability_eps_rotation_deg) && c.finalize_k_frames > 0 &&
                  positive(c.parallel_max_deg) && positive(c.palm_arch_spread_max) &&
                  c.hold_to_start_ms > 0 && positive(c.tolerance_rel) &&
                  positive(c.frame_rate_hz) && positive(c.activation_motion_cm) &&
                  positive(c.activation_yaw_deg) && positive(c.hold_slop_cm);
  if (!ok) throw Error(ErrorCode::InvalidConfig, "all thresholds must be strictly positive");
  if (c.stability_window_frames < 2) {
    throw Error(ErrorCode::InvalidConfig, "stability_window_frames must be at least 2");
  }
  if (c.stability_window_frames < c.finalize_k_frames) {
    throw Error(ErrorCode::InvalidConfig,
                "stability_window_frames must be >= finalize_k_frames");
  }
}

// ---------------------------------------------------------------------------

std::string_view to_string(WarningCode c) {
  switch (c) {
    case WarningCode::PalmNotParallel: return "palm_not_parallel";
    case WarningCode::PhoneNotParallel: return "phone_not_parallel";
    case WarningCode::DeltaClamped: return "delta_clamped";
    case WarningCode::InvalidFrame: return "invalid_frame";
    case WarningCode::OutOfRange: return "out_of_range";
  }
  return "unknown";
}

std::optional<WarningCode> parse_warning_code(std::string_view s) {
  for (auto c : {WarningCode::PalmNotParallel, WarningCode::PhoneNotParallel,
                 WarningCode::DeltaClamped, WarningCode::InvalidFrame,
                 WarningCode::OutOfRange}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::size_t MeasurementResult::warning_count(WarningCode c) const {
  return static_cast<std::size_t>(std::count_if(
      warnings.begin(), warnings.end(), [c](const Warning& w) { return w.code == c; }));
}

}  // namespace anglesizer
