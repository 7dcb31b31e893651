#include "anglesizer/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace anglesizer {

double px_to_cm(double px, double dpi) {
  if (!(dpi > 0.0)) throw Error(ErrorCode::InvalidProfile, "dpi must be positive");
  return px / dpi * 2.54;
}

double touch_span_cm(const Contact& a, const Contact& b, const DeviceProfile& profile) {
  const double dx = px_to_cm(b.x_px - a.x_px, profile.dpi_x);
  const double dy = px_to_cm(b.y_px - a.y_px, profile.dpi_y);
  return std::hypot(dx, dy);
}

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 clamp_delta(const Vec3& delta, double theta) {
  const double len = norm(delta);
  if (len <= theta) return delta;
  const double s = theta / len;
  return {delta[0] * s, delta[1] * s, delta[2] * s};
}

HandTrack one_hand_track(std::span<const Vec3> positions, double theta) {
  HandTrack out;
  if (positions.empty()) return out;
  out.positions.reserve(positions.size());
  out.estimates_cm.reserve(positions.size());
  out.positions.push_back(positions[0]);
  out.estimates_cm.push_back(0.0);
  for (std::size_t i = 1; i < positions.size(); ++i) {
    const Vec3 raw{positions[i][0] - positions[i - 1][0], positions[i][1] - positions[i - 1][1],
                   positions[i][2] - positions[i - 1][2]};
    const Vec3 d = clamp_delta(raw, theta);
    if (d != raw) out.clamped.push_back(i);
    const Vec3& prev = out.positions.back();
    const Vec3 next{prev[0] + d[0], prev[1] + d[1], prev[2] + d[2]};
    out.positions.push_back(next);
    const Vec3& origin = out.positions.front();
    out.estimates_cm.push_back(
        norm({next[0] - origin[0], next[1] - origin[1], next[2] - origin[2]}) * 100.0);
  }
  return out;
}

HandTrack one_hand_track(std::span<const Vec3> positions, const EngineConfig& cfg) {
  return one_hand_track(positions, cfg.clamp_theta_m);
}

double palm_distance_cm(double width_px, const DeviceProfile& profile) {
  if (!(width_px > 0.0)) {
    throw Error(ErrorCode::InvalidObservation, "palm width in pixels must be positive");
  }
  return profile.focal_px * profile.palm_width_cm / width_px;
}

double palm_arch_spread(std::span<const double> arch_depths, double wrist_depth,
                        double width_px) {
  if (arch_depths.empty() || !(width_px > 0.0)) return 0.0;
  auto [lo, hi] = std::minmax_element(arch_depths.begin(), arch_depths.end());
  // Depths are relative to the wrist; the offset cancels in the spread.
  return ((*hi - wrist_depth) - (*lo - wrist_depth)) / width_px;
}

bool palm_parallelism_ok(std::span<const double> arch_depths, double wrist_depth,
                         double width_px, const EngineConfig& cfg) {
  return palm_arch_spread(arch_depths, wrist_depth, width_px) <= cfg.palm_arch_spread_max;
}

bool phone_parallel_ok(double pitch_deg, double roll_deg, const EngineConfig& cfg) {
  return std::max(std::abs(pitch_deg), std::abs(roll_deg)) <= cfg.parallel_max_deg;
}

double wrap_delta(double prev_yaw_deg, double cur_yaw_deg) {
  double d = std::fmod(cur_yaw_deg - prev_yaw_deg, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  if (d == -180.0) d = 180.0;
  return d;
}

double accumulate_rotation(std::span<const double> yaw_samples) {
  double total = 0.0;
  for (std::size_t i = 1; i < yaw_samples.size(); ++i) {
    total += wrap_delta(yaw_samples[i - 1], yaw_samples[i]);
  }
  return total;
}

bool stability_reached(std::span<const double> estimates, GestureKind g,
                       const EngineConfig& cfg) {
  const auto window = static_cast<std::size_t>(cfg.stability_window_frames);
  if (estimates.size() < window) return false;
  auto tail = estimates.last(window);
  auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  return *hi - *lo <= cfg.stability_eps(g);
}

double finalize_value(std::span<const double> estimates, const EngineConfig& cfg) {
  const auto k = static_cast<std::size_t>(cfg.finalize_k_frames);
  if (estimates.size() < k || k == 0) {
    throw Error(ErrorCode::InsufficientHistory,
                "need " + std::to_string(k) + " estimates, have " +
                    std::to_string(estimates.size()));
  }
  auto tail = estimates.last(k);
  const double base = tail.front();
  double dev = 0.0;
  for (double e : tail) dev += e - base;
  return base + dev / static_cast<double>(k);
}

// ---------------------------------------------------------------------------

std::string_view to_string(PipelinePhase p) {
  switch (p) {
    case PipelinePhase::Armed: return "armed";
    case PipelinePhase::Running: return "running";
    case PipelinePhase::Stable: return "stable";
  }
  return "armed";
}

std::string_view to_string(MeasurementStatus s) {
  switch (s) {
    case MeasurementStatus::Completed: return "Completed";
    case MeasurementStatus::NoActivation: return "NoActivation";
    case MeasurementStatus::NeverStable: return "NeverStable";
  }
  return "NoActivation";
}

MeasurementPipeline::MeasurementPipeline(GestureKind gesture, DeviceProfile profile,
                                         EngineConfig cfg)
    : gesture_(gesture), profile_(profile), cfg_(cfg) {
  validate(profile_);
  validate(cfg_);
}

bool MeasurementPipeline::uses_press() const {
  return gesture_ == GestureKind::OneHand || gesture_ == GestureKind::TwoHands ||
         gesture_ == GestureKind::BodyRotation;
}

// Relative gestures start at zero, so a user who has not started moving yet
// would look "stable". Stability is only considered once the estimate would
// round to a nonzero value or the attempt has been running for hold_to_start_ms.
bool MeasurementPipeline::motion_gated() const {
  return gesture_ == GestureKind::OneFinger || gesture_ == GestureKind::OneHand ||
         gesture_ == GestureKind::BodyRotation;
}

std::vector<FeedbackEvent> MeasurementPipeline::feed(const SensorFrame& frame) {
  std::vector<FeedbackEvent> events;
  if (phase_ == PipelinePhase::Stable) return events;
  ++frames_processed_;

  if (last_t_ && frame.t_ms <= *last_t_) {
    warn(WarningCode::InvalidFrame, frame.t_ms);
    return events;
  }
  if (frame_violation(frame, profile_)) {
    warn(WarningCode::InvalidFrame, frame.t_ms);
    return events;
  }
  last_t_ = frame.t_ms;

  std::visit(
      [&](const auto& payload) {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, Touch>) {
          on_touch(frame, payload, events);
        } else if constexpr (std::is_same_v<T, Pose>) {
          on_pose(frame, payload, events);
        } else if constexpr (std::is_same_v<T, Palm>) {
          on_palm(frame, payload, events);
        } else if constexpr (std::is_same_v<T, Orientation>) {
          on_orientation(frame, payload, events);
        } else {
          on_press(payload);
        }
      },
      frame.payload);
  return events;
}

void MeasurementPipeline::on_press(const Press& p) {
  pressed_ = p.pressed;
  if (!pressed_ && uses_press() && phase_ == PipelinePhase::Running) abort_attempt();
}

void MeasurementPipeline::on_touch(const SensorFrame& f, const Touch& t,
                                   std::vector<FeedbackEvent>& events) {
  if (gesture_ == GestureKind::TwoFingers) {
    const bool two_down = t.contacts.size() == 2 && t.contacts[0].phase != TouchPhase::Up &&
                          t.contacts[1].phase != TouchPhase::Up;
    if (!two_down) {
      if (phase_ == PipelinePhase::Running) abort_attempt();
      return;
    }
    if (phase_ == PipelinePhase::Armed) start_running(f.t_ms);
    push_estimate(f.t_ms, touch_span_cm(t.contacts[0], t.contacts[1], profile_), events);
    return;
  }
  if (gesture_ != GestureKind::OneFinger) return;

  auto find = [&](int id) -> const Contact* {
    for (const auto& c : t.contacts) {
      if (c.id == id) return &c;
    }
    return nullptr;
  };

  if (cancelled_contact_) {
    const Contact* c = find(*cancelled_contact_);
    if (c == nullptr || c->phase == TouchPhase::Up) cancelled_contact_.reset();
  }

  if (phase_ == PipelinePhase::Running) {
    const Contact* c = find(hold_->id);
    if (c == nullptr || c->phase == TouchPhase::Up) {
      abort_attempt();
      return;
    }
    const Contact anchor{hold_->id, hold_->x_px, hold_->y_px, TouchPhase::Down};
    push_estimate(f.t_ms, touch_span_cm(anchor, *c, profile_), events);
    return;
  }

  if (hold_) {
    const Contact* c = find(hold_->id);
    if (c == nullptr || c->phase == TouchPhase::Up) {
      hold_.reset();
      return;
    }
    const Contact anchor{hold_->id, hold_->x_px, hold_->y_px, TouchPhase::Down};
    const double moved = touch_span_cm(anchor, *c, profile_);
    if (moved > cfg_.hold_slop_cm) {
      // Moved before the hold completed: ignore this contact until it lifts.
      cancelled_contact_ = hold_->id;
      hold_.reset();
      return;
    }
    if (f.t_ms - hold_->since >= cfg_.hold_to_start_ms) {
      start_running(f.t_ms);
      push_estimate(f.t_ms, moved, events);
    }
    return;
  }

  std::size_t active = 0;
  const Contact* down = nullptr;
  for (const auto& c : t.contacts) {
    if (c.phase == TouchPhase::Up) continue;
    ++active;
    if (c.phase == TouchPhase::Down && (!cancelled_contact_ || *cancelled_contact_ != c.id)) {
      down = &c;
    }
  }
  if (active == 1 && down != nullptr) hold_ = Hold{down->id, down->x_px, down->y_px, f.t_ms};
}

void MeasurementPipeline::on_pose(const SensorFrame& f, const Pose& p,
                                  std::vector<FeedbackEvent>& events) {
  if (gesture_ != GestureKind::OneHand || !pressed_) return;
  if (phase_ == PipelinePhase::Armed) {
    start_running(f.t_ms);
    anchor_ = filtered_ = last_raw_ = p.position_m;
    push_estimate(f.t_ms, 0.0, events);
    return;
  }
  const Vec3 raw{p.position_m[0] - last_raw_[0], p.position_m[1] - last_raw_[1],
                 p.position_m[2] - last_raw_[2]};
  const Vec3 d = clamp_delta(raw, cfg_.clamp_theta_m);
  if (d != raw) warn(WarningCode::DeltaClamped, f.t_ms);
  last_raw_ = p.position_m;
  for (int i = 0; i < 3; ++i) filtered_[i] += d[i];
  const Vec3 off{filtered_[0] - anchor_[0], filtered_[1] - anchor_[1], filtered_[2] - anchor_[2]};
  push_estimate(f.t_ms, norm(off) * 100.0, events);
}

void MeasurementPipeline::on_palm(const SensorFrame& f, const Palm& p,
                                  std::vector<FeedbackEvent>& events) {
  if (gesture_ != GestureKind::TwoHands || !pressed_ || !p.detected) return;
  const bool parallel = palm_parallelism_ok(p.arch_depths, p.wrist_depth, p.width_px, cfg_);
  if (!parallel && palm_parallel_) {
    warn(WarningCode::PalmNotParallel, f.t_ms);
    events.push_back({f.t_ms, BeepError{}});
  }
  palm_parallel_ = parallel;
  if (phase_ == PipelinePhase::Armed) start_running(f.t_ms);
  push_estimate(f.t_ms, palm_distance_cm(p.width_px, profile_), events);
}

void MeasurementPipeline::on_orientation(const SensorFrame& f, const Orientation& o,
                                         std::vector<FeedbackEvent>& events) {
  if (gesture_ != GestureKind::BodyRotation || !pressed_) return;
  const bool parallel = phone_parallel_ok(o.pitch_deg, o.roll_deg, cfg_);
  if (!parallel && phone_parallel_) {
    warn(WarningCode::PhoneNotParallel, f.t_ms);
    events.push_back({f.t_ms, BeepError{}});
  }
  phone_parallel_ = parallel;
  if (phase_ == PipelinePhase::Armed) {
    start_running(f.t_ms);
    last_yaw_ = o.yaw_deg;
    accumulated_yaw_ = 0.0;
    push_estimate(f.t_ms, 0.0, events);
    return;
  }
  accumulated_yaw_ += wrap_delta(last_yaw_, o.yaw_deg);
  last_yaw_ = o.yaw_deg;
  push_estimate(f.t_ms, std::abs(accumulated_yaw_), events);
}

void MeasurementPipeline::start_running(Millis t_ms) {
  phase_ = PipelinePhase::Running;
  ever_running_ = true;
  started_ms_ = t_ms;
  track_.clear();
  motion_seen_ = false;
}

void MeasurementPipeline::abort_attempt() {
  phase_ = PipelinePhase::Armed;
  track_.clear();
  hold_.reset();
  motion_seen_ = false;
  accumulated_yaw_ = 0.0;
}

void MeasurementPipeline::push_estimate(Millis t_ms, double estimate,
                                        std::vector<FeedbackEvent>& events) {
  track_.push_back(estimate);
  const double start_band = gesture_spec(gesture_).resolution / 2.0;
  if (estimate >= start_band || t_ms - started_ms_ >= cfg_.hold_to_start_ms) motion_seen_ = true;
  if (motion_gated() && !motion_seen_) return;
  if (stability_reached(track_, gesture_, cfg_)) finalize(t_ms, events);
}

void MeasurementPipeline::finalize(Millis t_ms, std::vector<FeedbackEvent>& events) {
  MeasurementResult r;
  r.gesture = gesture_;
  r.raw_value = finalize_value(track_, cfg_);
  const auto range = validate_range(round_to_resolution(r.raw_value, gesture_), gesture_);
  if (!range.within) warn(WarningCode::OutOfRange, t_ms);
  r.value = range.value;
  r.started_ms = started_ms_;
  r.ended_ms = t_ms;
  r.frames_processed = frames_processed_;
  r.warnings = warnings_;
  result_ = r;
  phase_ = PipelinePhase::Stable;
  events.push_back({t_ms, BeepCorrect{}});
  events.push_back({t_ms, Speech{spoken_value(r.value, gesture_)}});
}

std::vector<FeedbackEvent> MeasurementPipeline::force_finalize(Millis t_ms) {
  std::vector<FeedbackEvent> events;
  if (phase_ != PipelinePhase::Running ||
      track_.size() < static_cast<std::size_t>(cfg_.finalize_k_frames) ||
      t_ms <= started_ms_) {
    return events;
  }
  finalize(t_ms, events);
  return events;
}

// ---------------------------------------------------------------------------

MeasurementOutcome run_measurement(const TraceDocument& trace, GestureKind gesture,
                                   const EngineConfig& cfg) {
  MeasurementPipeline pipeline(gesture, trace.profile, cfg);
  MeasurementOutcome out;
  for (const auto& frame : trace.frames) {
    auto events = pipeline.feed(frame);
    out.events.insert(out.events.end(), events.begin(), events.end());
    if (pipeline.result()) break;
  }
  out.result = pipeline.result();
  out.warnings = pipeline.warnings();
  out.track = pipeline.track();
  out.frames_processed = pipeline.frames_processed();
  out.signed_rotation_deg = pipeline.accumulated_yaw_deg();
  if (out.result) {
    out.status = MeasurementStatus::Completed;
  } else if (pipeline.activated()) {
    out.status = MeasurementStatus::NeverStable;
  } else {
    out.status = MeasurementStatus::NoActivation;
  }
  return out;
}

}  // namespace anglesizer
