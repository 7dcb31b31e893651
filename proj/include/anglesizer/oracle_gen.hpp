#pragma once

#include <cstdint>

#include "anglesizer/core.hpp"
#include "anglesizer/trace_io.hpp"

// Synthetic traces with known ground truth. The generators share no code with
// the measurement engine; they only use EngineConfig for frame timing (frame
// rate, hold duration, stability window) so that traces are long enough.

namespace anglesizer::oracle {

/// Slide (one finger) or spread (two fingers) along the x axis of the screen.
/// Throws Error{OffScreen} if the span plus noise does not fit, and
/// Error{BadParams} for distances outside [0, 12] cm or negative noise.
TraceDocument gen_touch_trace(double distance_cm, const DeviceProfile& profile,
                              bool two_fingers, double noise_px, std::uint64_t seed,
                              const EngineConfig& timing = {});

struct PoseOptions {
  /// Move along the (1,1,1) diagonal instead of the x axis.
  bool three_axis = false;
  DeviceProfile profile{};
};

/// Press, linear move of distance_cm, hold, release. Each outlier is a
/// persistent coordinate leap of outlier_mag_m orthogonal to the motion,
/// the shape of a tracking-map re-anchoring.
TraceDocument gen_pose_trace(double distance_cm, int n_frames, double jitter_m,
                             int outlier_count, double outlier_mag_m, std::uint64_t seed,
                             const EngineConfig& timing = {}, const PoseOptions& opts = {});

struct PalmOptions {
  /// Normalized arch-depth spread injected into one knuckle (0 = flat palm).
  double tilt_spread = 0.0;
  double width_noise_px = 0.0;
};

TraceDocument gen_palm_trace(double distance_cm, const DeviceProfile& profile, int hold_frames,
                             std::uint64_t seed, const EngineConfig& timing = {},
                             const PalmOptions& opts = {});

struct RotationOptions {
  /// Constant phone pitch, for exercising the parallel-to-ground check.
  double pitch_deg = 0.0;
  double yaw_noise_deg = 0.0;
  DeviceProfile profile{};
};

TraceDocument gen_rotation_trace(double angle_deg, double start_yaw_deg,
                                 double rate_deg_per_frame, std::uint64_t seed,
                                 const EngineConfig& timing = {},
                                 const RotationOptions& opts = {});

/// Convenience dispatcher used by the CLI and the acceptance suite: a
/// noiseless trace of `value` for gesture `g` with default motion settings.
TraceDocument gen_noiseless(GestureKind g, double value, const DeviceProfile& profile,
                            std::uint64_t seed = 1, const EngineConfig& timing = {});

/// Frame timestamp for index i at the configured frame rate.
Millis frame_time(std::size_t i, const EngineConfig& timing);

}  // namespace anglesizer::oracle
