#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "anglesizer/activation.hpp"

namespace anglesizer {
namespace {

// Ingredients that each satisfy exactly one activation rule, laid out over a
// window long enough for the one-finger hold.
enum Ingredient { kTwoContacts, kHeldFinger, kPalm, kFlatTurn, kMotion, kCount };

constexpr int kFrames = 100;  // 100 * 33 ms > hold_to_start_ms

std::vector<SensorFrame> window(const std::vector<Ingredient>& parts, bool pressed = true) {
  std::vector<SensorFrame> w;
  for (int i = 0; i < kFrames; ++i) {
    const Millis t = 33 * static_cast<Millis>(i);
    if (i == 0) w.push_back({t, Press{pressed}});
    for (auto p : parts) {
      const Millis tp = t + 1 + static_cast<Millis>(p);
      switch (p) {
        case kTwoContacts:
          w.push_back({tp, Touch{{{0, 100, 500, TouchPhase::Move},
                                  {1, 200.0 + i, 500, TouchPhase::Move}}}});
          break;
        case kHeldFinger:
          w.push_back({tp, Touch{{{0, 300, 600, i == 0 ? TouchPhase::Down : TouchPhase::Move}}}});
          break;
        case kPalm: w.push_back({tp, Palm{true, 120, {0, 0, 0, 0}, 0}}); break;
        case kFlatTurn: w.push_back({tp, Orientation{0.1 * i, 0, 0}}); break;
        case kMotion: w.push_back({tp, Pose{{0.001 * i, 0, 0}, {1, 0, 0, 0}}}); break;
        case kCount: break;
      }
    }
  }
  return w;
}

std::optional<GestureKind> expected_for(const std::vector<Ingredient>& parts, bool pressed) {
  auto has = [&](Ingredient i) { return std::find(parts.begin(), parts.end(), i) != parts.end(); };
  if (has(kTwoContacts)) return GestureKind::TwoFingers;
  if (has(kHeldFinger)) return GestureKind::OneFinger;
  if (!pressed) return std::nullopt;
  if (has(kPalm)) return GestureKind::TwoHands;
  if (has(kFlatTurn)) return GestureKind::BodyRotation;
  if (has(kMotion)) return GestureKind::OneHand;
  return std::nullopt;
}

TEST(DetectActivation, Examples) {
  const EngineConfig cfg;
  EXPECT_EQ(detect_activation(window({kTwoContacts}), cfg), GestureKind::TwoFingers);
  EXPECT_EQ(detect_activation(window({kPalm, kMotion}), cfg), GestureKind::TwoHands);
  EXPECT_EQ(detect_activation(window({kFlatTurn}), cfg), GestureKind::BodyRotation);
  EXPECT_EQ(detect_activation(window({kHeldFinger}), cfg), GestureKind::OneFinger);
  EXPECT_EQ(detect_activation(window({kMotion}), cfg), GestureKind::OneHand);
}

TEST(DetectActivation, NothingMatchesMeansNone) {
  const EngineConfig cfg;
  EXPECT_FALSE(detect_activation(window({}), cfg));
  EXPECT_FALSE(detect_activation(window({kPalm, kFlatTurn, kMotion}, false), cfg));
  EXPECT_FALSE(detect_activation(std::vector<SensorFrame>{}, cfg));
}

TEST(DetectActivation, FingerNotHeldLongEnough) {
  const EngineConfig cfg;
  auto w = window({kHeldFinger});
  w.resize(w.size() / 2);  // ~1.6 s of hold
  EXPECT_FALSE(detect_activation(w, cfg));
}

TEST(DetectActivation, TiltedPhoneDoesNotStartRotation) {
  const EngineConfig cfg;
  std::vector<SensorFrame> w{{0, Press{true}}};
  for (int i = 1; i <= 30; ++i) w.push_back({33 * i, Orientation{0.5 * i, 30, 0}});
  EXPECT_FALSE(detect_activation(w, cfg));
}

TEST(DetectActivation, SmallMotionBelowThreshold) {
  const EngineConfig cfg;
  std::vector<SensorFrame> w{{0, Press{true}}};
  for (int i = 1; i <= 30; ++i) w.push_back({33 * i, Pose{{0.0005 * i, 0, 0}, {1, 0, 0, 0}}});
  EXPECT_FALSE(detect_activation(w, cfg));  // 1.5 cm
  w.push_back({2000, Pose{{0.03, 0, 0}, {1, 0, 0, 0}}});
  EXPECT_EQ(detect_activation(w, cfg), GestureKind::OneHand);
}

TEST(DetectActivation, LiftedContactsDoNotCount) {
  const EngineConfig cfg;
  std::vector<SensorFrame> w{
      {0, Touch{{{0, 10, 10, TouchPhase::Down}, {1, 90, 10, TouchPhase::Down}}}},
      {33, Touch{{{0, 10, 10, TouchPhase::Up}, {1, 90, 10, TouchPhase::Up}}}}};
  EXPECT_FALSE(detect_activation(w, cfg));
}

// Every combination of ingredients resolves to the highest-priority rule.
TEST(DetectActivation, StrictPriorityOverAllCombinations) {
  const EngineConfig cfg;
  for (unsigned mask = 0; mask < (1u << kCount); ++mask) {
    std::vector<Ingredient> parts;
    for (int i = 0; i < kCount; ++i) {
      if (mask & (1u << i)) parts.push_back(static_cast<Ingredient>(i));
    }
    // Both touch ingredients would share one touch stream; keep one.
    if ((mask & 1u) && (mask & 2u)) continue;
    for (bool pressed : {true, false}) {
      const auto w = window(parts, pressed);
      EXPECT_EQ(detect_activation(w, cfg), expected_for(parts, pressed))
          << "mask " << mask << " pressed " << pressed;
      EXPECT_EQ(detect_activation(w, cfg), detect_activation(w, cfg));
    }
  }
}

}  // namespace
}  // namespace anglesizer
