#include "anglesizer/activation.hpp"

#include <cmath>
#include <vector>

#include "anglesizer/measurement.hpp"

namespace anglesizer {

namespace {

template <typename T>
const T* latest(std::span<const SensorFrame> window, Millis* t_out = nullptr) {
  for (auto it = window.rbegin(); it != window.rend(); ++it) {
    if (const auto* p = std::get_if<T>(&it->payload)) {
      if (t_out) *t_out = it->t_ms;
      return p;
    }
  }
  return nullptr;
}

std::vector<const Contact*> active_contacts(const Touch& t) {
  std::vector<const Contact*> out;
  for (const auto& c : t.contacts) {
    if (c.phase != TouchPhase::Up) out.push_back(&c);
  }
  return out;
}

bool one_finger_held(std::span<const SensorFrame> window, const Contact& c, Millis now,
                     const EngineConfig& cfg) {
  for (const auto& f : window) {
    const auto* t = std::get_if<Touch>(&f.payload);
    if (t == nullptr) continue;
    for (const auto& other : t->contacts) {
      if (other.id == c.id && other.phase == TouchPhase::Down) {
        return now - f.t_ms >= cfg.hold_to_start_ms;
      }
    }
  }
  return false;
}

}  // namespace

std::optional<GestureKind> detect_activation(std::span<const SensorFrame> window,
                                             const EngineConfig& cfg) {
  Millis touch_t = 0;
  if (const Touch* touch = latest<Touch>(window, &touch_t)) {
    const auto active = active_contacts(*touch);
    if (active.size() == 2) return GestureKind::TwoFingers;
    if (active.size() == 1 && one_finger_held(window, *active.front(), touch_t, cfg)) {
      return GestureKind::OneFinger;
    }
  }

  const Press* press = latest<Press>(window);
  if (press == nullptr || !press->pressed) return std::nullopt;

  if (const Palm* palm = latest<Palm>(window); palm != nullptr && palm->detected) {
    return GestureKind::TwoHands;
  }

  std::vector<double> yaws;
  for (const auto& f : window) {
    if (const auto* o = std::get_if<Orientation>(&f.payload)) yaws.push_back(o->yaw_deg);
  }
  if (const Orientation* o = latest<Orientation>(window);
      o != nullptr && phone_parallel_ok(o->pitch_deg, o->roll_deg, cfg) &&
      std::abs(accumulate_rotation(yaws)) > cfg.activation_yaw_deg) {
    return GestureKind::BodyRotation;
  }

  const Pose* first = nullptr;
  const Pose* last = nullptr;
  for (const auto& f : window) {
    if (const auto* p = std::get_if<Pose>(&f.payload)) {
      if (first == nullptr) first = p;
      last = p;
    }
  }
  if (first != nullptr && last != first) {
    const Vec3 d{last->position_m[0] - first->position_m[0],
                 last->position_m[1] - first->position_m[1],
                 last->position_m[2] - first->position_m[2]};
    if (norm(d) * 100.0 > cfg.activation_motion_cm) return GestureKind::OneHand;
  }
  return std::nullopt;
}

}  // namespace anglesizer
