#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "anglesizer/error.hpp"

namespace anglesizer {

using Millis = std::int64_t;
using Vec3 = std::array<double, 3>;
/// Quaternion stored as (w, x, y, z).
using Quat = std::array<double, 4>;

// ---------------------------------------------------------------------------
// Gestures
// ---------------------------------------------------------------------------

enum class GestureKind { OneFinger, TwoFingers, OneHand, TwoHands, BodyRotation };

inline constexpr std::array<GestureKind, 5> kAllGestures = {
    GestureKind::OneFinger, GestureKind::TwoFingers, GestureKind::OneHand,
    GestureKind::TwoHands, GestureKind::BodyRotation};

enum class Unit { Centimeter, Degree };

/// Fixed per-gesture metadata: unit, valid range and reporting resolution.
struct GestureSpec {
  Unit unit;
  double min;
  double max;
  double resolution;
  int decimals;  ///< digits after the point when the value is spoken/printed
};

const GestureSpec& gesture_spec(GestureKind g);

std::string_view to_string(GestureKind g);
std::string_view to_string(Unit u);
/// Accepts snake_case ("one_finger") and kebab-case ("one-finger").
std::optional<GestureKind> parse_gesture(std::string_view s);

/// "6.4 centimeters", "120 degrees".
std::string spoken_value(double value, GestureKind g);
/// "6.4 cm", "120 deg".
std::string short_value(double value, GestureKind g);

/// Nearest multiple of the gesture resolution, ties away from zero.
/// Throws Error{InvalidValue} for non-finite input.
double round_to_resolution(double raw, GestureKind g);

struct RangeCheck {
  bool within;
  double value;  ///< the input when within, the violated boundary otherwise
};

RangeCheck validate_range(double value, GestureKind g);

// ---------------------------------------------------------------------------
// Device profile
// ---------------------------------------------------------------------------

struct DeviceProfile {
  double dpi_x = 160.0;
  double dpi_y = 160.0;
  int screen_w_px = 1080;
  int screen_h_px = 2340;
  double palm_width_cm = 8.0;
  double focal_px = 500.0;

  bool operator==(const DeviceProfile&) const = default;
};

/// Throws Error{InvalidProfile} when a field is non-positive or the palm
/// width falls outside [5, 15] cm.
void validate(const DeviceProfile& p);

// ---------------------------------------------------------------------------
// Sensor frames
// ---------------------------------------------------------------------------

enum class TouchPhase { Down, Move, Up };
std::string_view to_string(TouchPhase p);
std::optional<TouchPhase> parse_touch_phase(std::string_view s);

struct Contact {
  int id = 0;
  double x_px = 0.0;
  double y_px = 0.0;
  TouchPhase phase = TouchPhase::Move;

  bool operator==(const Contact&) const = default;
};

struct Touch {
  std::vector<Contact> contacts;
  bool operator==(const Touch&) const = default;
};

struct Pose {
  Vec3 position_m{0.0, 0.0, 0.0};
  Quat orientation_q{1.0, 0.0, 0.0, 0.0};
  bool operator==(const Pose&) const = default;
};

struct Orientation {
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  bool operator==(const Orientation&) const = default;
};

struct Palm {
  bool detected = false;
  double width_px = 0.0;
  std::vector<double> arch_depths;
  double wrist_depth = 0.0;
  bool operator==(const Palm&) const = default;
};

struct Press {
  bool pressed = false;
  bool operator==(const Press&) const = default;
};

using FramePayload = std::variant<Touch, Pose, Orientation, Palm, Press>;

struct SensorFrame {
  Millis t_ms = 0;
  FramePayload payload;
  bool operator==(const SensorFrame&) const = default;
};

/// Checks the per-frame invariants (contact count and screen bounds,
/// quaternion norm, orientation ranges, palm observation shape). Returns a
/// description of the first violation, or nullopt when the frame is valid.
std::optional<std::string> frame_violation(const SensorFrame& f,
                                           const DeviceProfile& profile);

// ---------------------------------------------------------------------------
// Engine configuration
// ---------------------------------------------------------------------------

struct EngineConfig {
  double clamp_theta_m = 0.20;
  int stability_window_frames = 15;
  double stability_eps_finger_cm = 0.05;
  double stability_eps_hand_cm = 1.0;
  double stability_eps_rotation_deg = 1.0;
  int finalize_k_frames = 10;
  double parallel_max_deg = 10.0;
  double palm_arch_spread_max = 0.15;
  Millis hold_to_start_ms = 3000;
  double tolerance_rel = 0.05;
  double frame_rate_hz = 30.0;
  // Activation liveness floors and the one-finger arming slop.
  double activation_motion_cm = 2.0;
  double activation_yaw_deg = 2.0;
  double hold_slop_cm = 0.3;

  double stability_eps(GestureKind g) const;
  bool operator==(const EngineConfig&) const = default;
};

/// Throws Error{InvalidConfig}.
void validate(const EngineConfig& cfg);

// ---------------------------------------------------------------------------
// Results and feedback
// ---------------------------------------------------------------------------

enum class WarningCode {
  PalmNotParallel,
  PhoneNotParallel,
  DeltaClamped,
  InvalidFrame,
  OutOfRange,
};
std::string_view to_string(WarningCode c);
std::optional<WarningCode> parse_warning_code(std::string_view s);

struct Warning {
  WarningCode code;
  Millis t_ms;
  bool operator==(const Warning&) const = default;
};

struct MeasurementResult {
  GestureKind gesture = GestureKind::OneFinger;
  double value = 0.0;
  double raw_value = 0.0;
  Millis started_ms = 0;
  Millis ended_ms = 0;
  std::size_t frames_processed = 0;
  std::vector<Warning> warnings;

  std::size_t warning_count(WarningCode c) const;
  bool operator==(const MeasurementResult&) const = default;
};

struct BeepCorrect {
  bool operator==(const BeepCorrect&) const = default;
};
struct BeepError {
  bool operator==(const BeepError&) const = default;
};
struct Speech {
  std::string text;
  bool operator==(const Speech&) const = default;
};
struct Vibration {
  double amplitude = 1.0;
  Millis duration_ms = 200;
  bool operator==(const Vibration&) const = default;
};

using FeedbackKind = std::variant<BeepCorrect, BeepError, Speech, Vibration>;

struct FeedbackEvent {
  Millis t_ms = 0;
  FeedbackKind kind;
  bool operator==(const FeedbackEvent&) const = default;
};

/// One scored task: the unit of every analytics computation.
struct AssessmentRecord {
  std::string participant;
  int day = 0;
  GestureKind gesture = GestureKind::OneFinger;
  double task = 0.0;
  double result = 0.0;
  double relative_error = 0.0;
  Millis t_ms = 0;

  bool operator==(const AssessmentRecord&) const = default;
};

template <typename Kind>
std::size_t count_kind(const std::vector<FeedbackEvent>& events) {
  std::size_t n = 0;
  for (const auto& e : events) n += std::holds_alternative<Kind>(e.kind) ? 1 : 0;
  return n;
}

}  // namespace anglesizer
