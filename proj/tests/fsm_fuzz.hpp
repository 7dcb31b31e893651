#pragma once

// Randomized event sequences for the teaching state machine. Shared by the
// unit tests and the acceptance runner.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "anglesizer/codec.hpp"
#include "anglesizer/teaching.hpp"

namespace anglesizer::fuzz {

struct Scenario {
  TeachingSession start;
  std::vector<SessionEvent> events;
};

inline Scenario random_scenario(std::mt19937_64& rng, int index) {
  std::uniform_int_distribution<int> pick_module(0, 2);
  std::uniform_int_distribution<std::size_t> pick_gesture(0, kAllGestures.size() - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> length(1, 25);

  const auto module = static_cast<LearningModule>(pick_module(rng));
  const auto gesture = kAllGestures[pick_gesture(rng)];
  const auto& spec = gesture_spec(gesture);
  const double goal =
      std::max(spec.resolution, round_to_resolution(spec.max * (0.05 + 0.9 * u(rng)), gesture));

  Scenario s{make_session("fuzz-" + std::to_string(index), module, gesture), {}};
  const auto mode = u(rng) < 0.5 ? ToleranceMode::Exact : ToleranceMode::Tolerant;
  Millis t = 0;
  // Occasionally lead with an event that is illegal in Idle.
  if (u(rng) < 0.2) s.events.push_back(MeasurementResult{gesture, goal, goal, t, t + 1, 10, {}});
  s.events.push_back(StartGoal{goal, mode, t});

  const int n = length(rng);
  for (int i = 0; i < n; ++i) {
    t += 100 + static_cast<Millis>(900 * u(rng));
    const double r = u(rng);
    if (r < 0.08) {
      s.events.push_back(Tick{t});
    } else if (r < 0.13) {
      s.events.push_back(StartGoal{goal, mode, t});
    } else {
      MeasurementResult m;
      m.gesture = r < 0.17 ? kAllGestures[(pick_gesture(rng) + 1) % kAllGestures.size()] : gesture;
      if (m.gesture == gesture && r < 0.17) m.gesture = kAllGestures[0];
      // Mostly near the goal so both passes and failures are common.
      const double spread = r < 0.6 ? 0.3 : 0.03;
      const double raw = goal * (1.0 + spread * (2.0 * u(rng) - 1.0));
      m.raw_value = raw;
      m.value = validate_range(round_to_resolution(raw, m.gesture), m.gesture).value;
      m.started_ms = t - 50;
      m.ended_ms = t;
      m.frames_processed = 30;
      s.events.push_back(m);
    }
  }
  return s;
}

struct Replay {
  TeachingSession final_state;
  std::vector<FeedbackEvent> events;
  std::vector<std::string> transcript;  ///< one line per event, including rejections
  bool saw_correcting = false;
  bool completed_without_pass = false;
  bool accepted_after_completed = false;
};

inline std::string encode_state(const TeachingSession& s) {
  std::string out = std::string(to_string(s.phase)) + " attempts=" +
                    std::to_string(s.attempts.size());
  for (const auto& a : s.attempts) out += " " + nlohmann::json(a.value).dump();
  return out;
}

inline Replay replay(const Scenario& sc, const EngineConfig& cfg) {
  Replay out;
  TeachingSession s = sc.start;
  for (const auto& e : sc.events) {
    const bool was_completed = s.phase == TeachingPhase::Completed;
    try {
      auto step = session_step(s, e, cfg);
      if (was_completed && std::holds_alternative<MeasurementResult>(e)) {
        out.accepted_after_completed = true;
      }
      s = std::move(step.session);
      std::string line = encode_state(s);
      for (const auto& fe : step.events) line += " " + codec::encode(fe).dump();
      out.transcript.push_back(line);
      out.events.insert(out.events.end(), step.events.begin(), step.events.end());
    } catch (const Error& err) {
      out.transcript.push_back(std::string("rejected ") + std::string(to_string(err.code())));
    }
    for (auto p : s.history) {
      if (p == TeachingPhase::Correcting) out.saw_correcting = true;
    }
    if (s.phase == TeachingPhase::Completed && s.module != LearningModule::AbilityAssessment &&
        (s.attempts.empty() || !s.attempts.back().passed)) {
      out.completed_without_pass = true;
    }
  }
  out.final_state = s;
  return out;
}

}  // namespace anglesizer::fuzz
