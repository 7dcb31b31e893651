#include "anglesizer/oracle_gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace anglesizer::oracle {

namespace {

constexpr double kCmPerInch = 2.54;
// Finger speed used when sliding/spreading, and hand speed for poses.
constexpr double kTouchStepCm = 0.5;
constexpr double kHandStepCm = 1.5;
constexpr int kSettleMargin = 5;

[[noreturn]] void bad_params(const std::string& what) { throw Error(ErrorCode::BadParams, what); }

std::size_t frames_for(Millis ms, const EngineConfig& timing) {
  std::size_t i = 0;
  while (frame_time(i, timing) < ms) ++i;
  return i;
}

// Frames to hold at the end of a motion so the engine can settle; a zero
// motion also has to outlast the engine's start-band wait.
std::size_t settle_frames(bool zero_motion, const EngineConfig& timing) {
  std::size_t n = static_cast<std::size_t>(timing.stability_window_frames + kSettleMargin);
  if (zero_motion) n += frames_for(timing.hold_to_start_ms, timing);
  return n;
}

class Timeline {
 public:
  explicit Timeline(const EngineConfig& timing) : timing_(timing) {}

  void add(FramePayload payload) {
    frames_.push_back({frame_time(frames_.size(), timing_), std::move(payload)});
  }
  std::vector<SensorFrame> take() { return std::move(frames_); }

 private:
  const EngineConfig& timing_;
  std::vector<SensorFrame> frames_;
};

double wrap360(double yaw) {
  double y = std::fmod(yaw, 360.0);
  if (y < 0.0) y += 360.0;
  if (y >= 360.0) y -= 360.0;
  return y;
}

}  // namespace

Millis frame_time(std::size_t i, const EngineConfig& timing) {
  return static_cast<Millis>(std::llround(static_cast<double>(i) * 1000.0 / timing.frame_rate_hz));
}

TraceDocument gen_touch_trace(double distance_cm, const DeviceProfile& profile,
                              bool two_fingers, double noise_px, std::uint64_t seed,
                              const EngineConfig& timing) {
  validate(profile);
  if (!(distance_cm >= 0.0 && distance_cm <= 12.0)) bad_params("distance must lie in [0, 12] cm");
  if (!(noise_px >= 0.0)) bad_params("noise must be non-negative");
  const double span_px = distance_cm * profile.dpi_x / kCmPerInch;
  if (span_px + 2.0 * noise_px > profile.screen_w_px) {
    throw Error(ErrorCode::OffScreen, "span does not fit on the screen");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-noise_px, noise_px);
  auto jitter = [&] { return noise_px > 0.0 ? noise(rng) : 0.0; };
  auto on_screen = [&](double x) {
    return std::clamp(x, 0.0, static_cast<double>(profile.screen_w_px));
  };

  const double y = profile.screen_h_px / 2.0;
  const auto n_move = static_cast<std::size_t>(std::ceil(distance_cm / kTouchStepCm));
  const std::size_t n_settle = settle_frames(n_move == 0, timing);
  Timeline tl(timing);

  if (!two_fingers) {
    const double x0 = (profile.screen_w_px - span_px) / 2.0;
    auto touch = [&](double x, TouchPhase phase) {
      return Touch{{Contact{0, x, y, phase}}};
    };
    tl.add(touch(x0, TouchPhase::Down));
    // Hold still long enough to arm.
    const std::size_t arm = frames_for(timing.hold_to_start_ms, timing);
    for (std::size_t i = 1; i <= arm; ++i) tl.add(touch(x0, TouchPhase::Move));
    for (std::size_t j = 1; j <= n_move; ++j) {
      const double x = x0 + span_px * static_cast<double>(j) / static_cast<double>(n_move);
      tl.add(touch(on_screen(x + jitter()), TouchPhase::Move));
    }
    for (std::size_t j = 0; j < n_settle; ++j) {
      tl.add(touch(on_screen(x0 + span_px + jitter()), TouchPhase::Move));
    }
    tl.add(touch(x0 + span_px, TouchPhase::Up));
  } else {
    const double cx = profile.screen_w_px / 2.0;
    auto pair = [&](double half, TouchPhase phase, bool noisy) {
      const double a = noisy ? jitter() : 0.0;
      const double b = noisy ? jitter() : 0.0;
      return Touch{{Contact{0, on_screen(cx - half + a), y, phase},
                    Contact{1, on_screen(cx + half + b), y, phase}}};
    };
    tl.add(pair(0.0, TouchPhase::Down, false));
    for (std::size_t j = 1; j <= n_move; ++j) {
      const double half = span_px / 2.0 * static_cast<double>(j) / static_cast<double>(n_move);
      tl.add(pair(half, TouchPhase::Move, true));
    }
    for (std::size_t j = 0; j < n_settle; ++j) tl.add(pair(span_px / 2.0, TouchPhase::Move, true));
    tl.add(pair(span_px / 2.0, TouchPhase::Up, false));
  }

  TraceDocument doc;
  doc.profile = profile;
  doc.frames = tl.take();
  doc.ground_truth =
      GroundTruth{two_fingers ? GestureKind::TwoFingers : GestureKind::OneFinger, distance_cm};
  return doc;
}

TraceDocument gen_pose_trace(double distance_cm, int n_frames, double jitter_m,
                             int outlier_count, double outlier_mag_m, std::uint64_t seed,
                             const EngineConfig& timing, const PoseOptions& opts) {
  validate(opts.profile);
  if (!(distance_cm >= 0.0 && distance_cm <= 120.0)) bad_params("distance must lie in [0, 120] cm");
  const int hold = timing.stability_window_frames + kSettleMargin;
  if (n_frames < timing.stability_window_frames + 10) {
    bad_params("n_frames must be at least stability_window_frames + 10");
  }
  if (!(jitter_m >= 0.0) || outlier_count < 0 || !(outlier_mag_m >= 0.0)) {
    bad_params("noise parameters must be non-negative");
  }
  const int motion = n_frames - hold;
  if (outlier_count > std::max(0, motion - 1)) bad_params("too many outliers for the motion");

  const double inv = 1.0 / std::sqrt(3.0);
  const Vec3 dir = opts.three_axis ? Vec3{inv, inv, inv} : Vec3{1.0, 0.0, 0.0};
  const std::size_t total =
      distance_cm == 0.0
          ? std::max<std::size_t>(n_frames, settle_frames(true, timing) + 1)
          : static_cast<std::size_t>(n_frames);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Leap frames and orthogonal leap directions.
  std::set<std::size_t> leap_at;
  std::uniform_int_distribution<int> pick(1, std::max(1, motion - 1));
  while (static_cast<int>(leap_at.size()) < outlier_count) {
    leap_at.insert(static_cast<std::size_t>(pick(rng)));
  }
  std::vector<std::pair<std::size_t, Vec3>> leaps;
  for (auto k : leap_at) {
    Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
    const double along = v[0] * dir[0] + v[1] * dir[1] + v[2] * dir[2];
    for (int i = 0; i < 3; ++i) v[i] -= along * dir[i];
    const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (int i = 0; i < 3; ++i) v[i] *= outlier_mag_m / len;
    leaps.emplace_back(k, v);
  }

  Timeline tl(timing);
  tl.add(Press{true});
  Vec3 offset{0.0, 0.0, 0.0};
  auto leap_it = leaps.begin();
  const double d_m = distance_cm / 100.0;
  for (std::size_t k = 0; k < total; ++k) {
    if (leap_it != leaps.end() && leap_it->first == k) {
      for (int i = 0; i < 3; ++i) offset[i] += leap_it->second[i];
      ++leap_it;
    }
    const double frac =
        motion > 0 ? std::min(1.0, static_cast<double>(k) / static_cast<double>(motion)) : 1.0;
    Pose p;
    for (int i = 0; i < 3; ++i) {
      const double j = jitter_m > 0.0 ? jitter_m * gauss(rng) : 0.0;
      p.position_m[i] = d_m * frac * dir[i] + offset[i] + j;
    }
    tl.add(p);
  }
  tl.add(Press{false});

  TraceDocument doc;
  doc.profile = opts.profile;
  doc.frames = tl.take();
  doc.ground_truth = GroundTruth{GestureKind::OneHand, distance_cm};
  return doc;
}

TraceDocument gen_palm_trace(double distance_cm, const DeviceProfile& profile, int hold_frames,
                             std::uint64_t seed, const EngineConfig& timing,
                             const PalmOptions& opts) {
  validate(profile);
  if (!(distance_cm > 0.0 && distance_cm <= 120.0)) bad_params("distance must lie in (0, 120] cm");
  if (hold_frames < timing.stability_window_frames) {
    bad_params("hold_frames must be at least stability_window_frames");
  }
  if (!(opts.tilt_spread >= 0.0) || !(opts.width_noise_px >= 0.0)) {
    bad_params("palm options must be non-negative");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-opts.width_noise_px, opts.width_noise_px);

  const double width = profile.focal_px * profile.palm_width_cm / distance_cm;
  Timeline tl(timing);
  tl.add(Press{true});
  for (int k = 0; k < hold_frames; ++k) {
    Palm p;
    p.detected = true;
    p.width_px = width + (opts.width_noise_px > 0.0 ? noise(rng) : 0.0);
    p.arch_depths = {0.0, 0.0, 0.0, opts.tilt_spread * p.width_px};
    p.wrist_depth = 0.0;
    tl.add(p);
  }
  tl.add(Press{false});

  TraceDocument doc;
  doc.profile = profile;
  doc.frames = tl.take();
  doc.ground_truth = GroundTruth{GestureKind::TwoHands, distance_cm};
  return doc;
}

TraceDocument gen_rotation_trace(double angle_deg, double start_yaw_deg,
                                 double rate_deg_per_frame, std::uint64_t seed,
                                 const EngineConfig& timing, const RotationOptions& opts) {
  validate(opts.profile);
  if (!(std::abs(angle_deg) <= 360.0)) bad_params("|angle| must not exceed 360 deg");
  if (!(rate_deg_per_frame > 0.0 && rate_deg_per_frame < 180.0)) {
    bad_params("rate must lie in (0, 180) deg per frame");
  }
  if (!(start_yaw_deg >= 0.0 && start_yaw_deg < 360.0)) bad_params("start yaw must lie in [0, 360)");
  if (!(opts.pitch_deg >= -90.0 && opts.pitch_deg <= 90.0) || !(opts.yaw_noise_deg >= 0.0)) {
    bad_params("bad rotation options");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-opts.yaw_noise_deg, opts.yaw_noise_deg);

  const double magnitude = std::abs(angle_deg);
  const double sign = angle_deg < 0.0 ? -1.0 : 1.0;
  const auto n_steps = static_cast<std::size_t>(std::ceil(magnitude / rate_deg_per_frame));
  const std::size_t n_settle = settle_frames(n_steps == 0, timing);

  Timeline tl(timing);
  tl.add(Press{true});
  auto orient = [&](double turned, bool noisy) {
    const double yaw = start_yaw_deg + sign * turned + (noisy ? noise(rng) : 0.0);
    return Orientation{wrap360(yaw), opts.pitch_deg, 0.0};
  };
  tl.add(orient(0.0, false));
  for (std::size_t k = 1; k <= n_steps; ++k) {
    tl.add(orient(std::min(magnitude, static_cast<double>(k) * rate_deg_per_frame),
                  opts.yaw_noise_deg > 0.0));
  }
  for (std::size_t k = 0; k < n_settle; ++k) tl.add(orient(magnitude, opts.yaw_noise_deg > 0.0));
  tl.add(Press{false});

  TraceDocument doc;
  doc.profile = opts.profile;
  doc.frames = tl.take();
  doc.ground_truth = GroundTruth{GestureKind::BodyRotation, magnitude};
  return doc;
}

TraceDocument gen_noiseless(GestureKind g, double value, const DeviceProfile& profile,
                            std::uint64_t seed, const EngineConfig& timing) {
  switch (g) {
    case GestureKind::OneFinger:
      return gen_touch_trace(value, profile, false, 0.0, seed, timing);
    case GestureKind::TwoFingers:
      return gen_touch_trace(value, profile, true, 0.0, seed, timing);
    case GestureKind::OneHand: {
      const int motion = std::max(10, static_cast<int>(std::ceil(value / kHandStepCm)));
      PoseOptions opts;
      opts.profile = profile;
      return gen_pose_trace(value, motion + timing.stability_window_frames + kSettleMargin, 0.0,
                            0, 0.0, seed, timing, opts);
    }
    case GestureKind::TwoHands:
      return gen_palm_trace(value, profile, timing.stability_window_frames + kSettleMargin, seed,
                            timing);
    case GestureKind::BodyRotation: {
      RotationOptions opts;
      opts.profile = profile;
      return gen_rotation_trace(value, 0.0, 5.0, seed, timing, opts);
    }
  }
  bad_params("unknown gesture");
}

}  // namespace anglesizer::oracle
