#pragma once

#include <optional>
#include <span>

#include "anglesizer/core.hpp"

namespace anglesizer {

/// Picks the gesture a window of recent frames activates, by strict priority:
///   1. two touch contacts down                       -> TwoFingers
///   2. one contact held since its Down >= hold time  -> OneFinger
///   3. pressed and a palm detected                   -> TwoHands
///   4. pressed, phone flat and yaw turned > floor     -> BodyRotation
///   5. pressed and pose displaced > floor             -> OneHand
/// Press, palm, orientation and touch state are taken from the latest frame
/// of each kind inside the window. Returns nullopt when no rule matches.
std::optional<GestureKind> detect_activation(std::span<const SensorFrame> window,
                                             const EngineConfig& cfg);

}  // namespace anglesizer
