#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anglesizer/core.hpp"
#include "anglesizer/trace_io.hpp"

namespace anglesizer {

// ---------------------------------------------------------------------------
// Per-gesture primitives
// ---------------------------------------------------------------------------

/// Throws Error{InvalidProfile} when dpi <= 0.
double px_to_cm(double px, double dpi);

double touch_span_cm(const Contact& a, const Contact& b, const DeviceProfile& profile);

/// Rescales `delta` to length `theta` when it is longer, keeping direction.
Vec3 clamp_delta(const Vec3& delta, double theta);

double norm(const Vec3& v);

struct HandTrack {
  std::vector<Vec3> positions;        ///< reconstructed positions, meters
  std::vector<double> estimates_cm;   ///< distance from the first position
  std::vector<std::size_t> clamped;   ///< indices whose incoming delta was clamped
};

/// Rebuilds a pose path from clamped frame-to-frame deltas. Pass an infinite
/// theta to get the unclamped path.
HandTrack one_hand_track(std::span<const Vec3> positions, double theta);
HandTrack one_hand_track(std::span<const Vec3> positions, const EngineConfig& cfg);

/// Pinhole ranging: focal_px * palm_width_cm / width_px.
/// Throws Error{InvalidObservation} when width_px <= 0.
double palm_distance_cm(double width_px, const DeviceProfile& profile);

/// Arch depth spread relative to the wrist, normalized by the palm width.
double palm_arch_spread(std::span<const double> arch_depths, double wrist_depth,
                        double width_px);
/// True while the spread stays within cfg.palm_arch_spread_max (inclusive).
bool palm_parallelism_ok(std::span<const double> arch_depths, double wrist_depth,
                         double width_px, const EngineConfig& cfg);

bool phone_parallel_ok(double pitch_deg, double roll_deg, const EngineConfig& cfg);

/// Shortest signed difference cur - prev in (-180, 180]; an exact half turn
/// counts as +180.
double wrap_delta(double prev_yaw_deg, double cur_yaw_deg);

/// Signed sum of wrap_delta over consecutive samples.
double accumulate_rotation(std::span<const double> yaw_samples);

bool stability_reached(std::span<const double> estimates, GestureKind g,
                       const EngineConfig& cfg);

/// Mean of the last finalize_k_frames estimates.
/// Throws Error{InsufficientHistory}.
double finalize_value(std::span<const double> estimates, const EngineConfig& cfg);

// ---------------------------------------------------------------------------
// Frame pipeline
// ---------------------------------------------------------------------------

enum class PipelinePhase { Armed, Running, Stable };
std::string_view to_string(PipelinePhase p);

/// Incremental frame processor for one gesture execution: validity check,
/// per-gesture estimate, stability check, finalization. Frames unrelated to
/// the gesture are counted but otherwise ignored.
class MeasurementPipeline {
 public:
  MeasurementPipeline(GestureKind gesture, DeviceProfile profile, EngineConfig cfg);

  /// Feeds one frame and returns the feedback it caused. After the
  /// measurement is final, further frames are ignored.
  std::vector<FeedbackEvent> feed(const SensorFrame& frame);

  /// Finalizes early from the current track when at least finalize_k_frames
  /// estimates exist. Returns the feedback emitted, empty if nothing happened.
  std::vector<FeedbackEvent> force_finalize(Millis t_ms);

  GestureKind gesture() const { return gesture_; }
  PipelinePhase phase() const { return phase_; }
  bool activated() const { return ever_running_; }
  const std::optional<MeasurementResult>& result() const { return result_; }
  const std::vector<double>& track() const { return track_; }
  const std::vector<Warning>& warnings() const { return warnings_; }
  std::size_t frames_processed() const { return frames_processed_; }
  /// Signed rotation total; meaningful for BodyRotation only.
  double accumulated_yaw_deg() const { return accumulated_yaw_; }

 private:
  void on_touch(const SensorFrame& f, const Touch& t, std::vector<FeedbackEvent>& events);
  void on_pose(const SensorFrame& f, const Pose& p, std::vector<FeedbackEvent>& events);
  void on_palm(const SensorFrame& f, const Palm& p, std::vector<FeedbackEvent>& events);
  void on_orientation(const SensorFrame& f, const Orientation& o,
                      std::vector<FeedbackEvent>& events);
  void on_press(const Press& p);

  void start_running(Millis t_ms);
  void push_estimate(Millis t_ms, double estimate, std::vector<FeedbackEvent>& events);
  void finalize(Millis t_ms, std::vector<FeedbackEvent>& events);
  void abort_attempt();
  void warn(WarningCode code, Millis t_ms) { warnings_.push_back({code, t_ms}); }
  bool uses_press() const;
  bool motion_gated() const;

  GestureKind gesture_;
  DeviceProfile profile_;
  EngineConfig cfg_;

  PipelinePhase phase_ = PipelinePhase::Armed;
  bool ever_running_ = false;
  std::optional<Millis> last_t_;
  std::size_t frames_processed_ = 0;
  std::vector<double> track_;
  std::vector<Warning> warnings_;
  std::optional<MeasurementResult> result_;
  Millis started_ms_ = 0;
  bool motion_seen_ = false;

  bool pressed_ = false;

  // One finger: contact being held to arm, and its anchor.
  struct Hold {
    int id;
    double x_px, y_px;
    Millis since;
  };
  std::optional<Hold> hold_;
  std::optional<int> cancelled_contact_;

  // One hand: last raw and reconstructed positions plus the anchor.
  Vec3 last_raw_{};
  Vec3 filtered_{};
  Vec3 anchor_{};

  bool palm_parallel_ = true;
  bool phone_parallel_ = true;

  double last_yaw_ = 0.0;
  double accumulated_yaw_ = 0.0;
};

enum class MeasurementStatus { Completed, NoActivation, NeverStable };
std::string_view to_string(MeasurementStatus s);

/// Everything a replay produced; `result` is set only when Completed.
struct MeasurementOutcome {
  MeasurementStatus status = MeasurementStatus::NoActivation;
  std::optional<MeasurementResult> result;
  std::vector<FeedbackEvent> events;
  std::vector<Warning> warnings;
  std::vector<double> track;
  std::size_t frames_processed = 0;
  double signed_rotation_deg = 0.0;
};

MeasurementOutcome run_measurement(const TraceDocument& trace, GestureKind gesture,
                                   const EngineConfig& cfg);

}  // namespace anglesizer
