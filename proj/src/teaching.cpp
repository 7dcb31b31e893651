#include "anglesizer/teaching.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "anglesizer/analytics.hpp"
#include "anglesizer/codec.hpp"

namespace anglesizer {

std::string_view to_string(LearningModule m) {
  switch (m) {
    case LearningModule::GuidedLearning: return "guided_learning";
    case LearningModule::FreeExploration: return "free_exploration";
    case LearningModule::AbilityAssessment: return "ability_assessment";
  }
  return "guided_learning";
}

std::string_view to_string(TeachingPhase p) {
  switch (p) {
    case TeachingPhase::Idle: return "idle";
    case TeachingPhase::GoalSet: return "goal_set";
    case TeachingPhase::Trying: return "trying";
    case TeachingPhase::Evaluating: return "evaluating";
    case TeachingPhase::Correcting: return "correcting";
    case TeachingPhase::Completed: return "completed";
  }
  return "idle";
}

std::string_view to_string(ToleranceMode m) {
  return m == ToleranceMode::Exact ? "exact" : "tolerant";
}

std::optional<LearningModule> parse_module(std::string_view s) {
  std::string norm(s);
  std::replace(norm.begin(), norm.end(), '-', '_');
  for (auto m : {LearningModule::GuidedLearning, LearningModule::FreeExploration,
                 LearningModule::AbilityAssessment}) {
    if (to_string(m) == norm) return m;
  }
  return std::nullopt;
}

std::optional<ToleranceMode> parse_tolerance_mode(std::string_view s) {
  if (s == "exact") return ToleranceMode::Exact;
  if (s == "tolerant") return ToleranceMode::Tolerant;
  return std::nullopt;
}

TeachingSession make_session(std::string id, LearningModule module, GestureKind gesture) {
  TeachingSession s;
  s.id = std::move(id);
  s.module = module;
  s.gesture = gesture;
  return s;
}

double tolerance_for(double goal, GestureKind g, ToleranceMode mode, const EngineConfig& cfg) {
  if (!(goal > 0.0)) throw Error(ErrorCode::InvalidGoal, "goal must be positive");
  const double res = gesture_spec(g).resolution;
  if (mode == ToleranceMode::Exact) return res;
  return std::max(res, cfg.tolerance_rel * goal);
}

AttemptEvaluation evaluate_attempt(double result, double goal, double tol) {
  const double e = result - goal;
  return {std::abs(e) <= tol + 1e-9, e};
}

namespace {

std::string direction_phrase(GestureKind g, bool too_small, bool far_off) {
  const char* amount = far_off ? "much" : "a little";
  std::string verb;
  switch (g) {
    case GestureKind::TwoFingers:
    case GestureKind::TwoHands:
      return too_small ? std::string("open ") + amount + " more"
                       : std::string("close ") + amount;
    case GestureKind::OneFinger:
    case GestureKind::OneHand: verb = too_small ? "move further" : "move back"; break;
    case GestureKind::BodyRotation: verb = too_small ? "turn further" : "turn back"; break;
  }
  return verb + ", " + amount;
}

void enter(TeachingSession& s, TeachingPhase p) {
  s.phase = p;
  s.history.push_back(p);
}

[[noreturn]] void illegal(const TeachingSession& s, const char* event) {
  throw Error(ErrorCode::IllegalTransition, std::string(event) + " is not accepted in phase " +
                                                std::string(to_string(s.phase)));
}

}  // namespace

std::vector<FeedbackEvent> correction_feedback(double current, double goal, double tol,
                                               GestureKind g, Millis t_ms) {
  const double err = current - goal;
  if (std::abs(err) <= tol + 1e-9) {
    return {{t_ms, BeepCorrect{}}, {t_ms, Speech{"remember this feeling, try again"}}};
  }
  const double amplitude = std::min(1.0, std::abs(err) / (4.0 * tol));
  const std::string text = spoken_value(current, g) + ", target " + spoken_value(goal, g) +
                           ", " + direction_phrase(g, err < 0.0, amplitude >= 1.0);
  return {{t_ms, Vibration{amplitude, 200}}, {t_ms, Speech{text}}};
}

std::string instructions_for(GestureKind g, double goal) {
  std::string how;
  switch (g) {
    case GestureKind::OneFinger:
      how = "Place one finger on the screen and keep it still for 3 seconds, then slide it "
            "by the target distance and hold.";
      break;
    case GestureKind::TwoFingers:
      how = "Place two fingers on the screen and spread them to the target distance, then hold.";
      break;
    case GestureKind::OneHand:
      how = "Press the screen, move the phone by the target distance, then hold.";
      break;
    case GestureKind::TwoHands:
      how = "Press the screen and hold your other palm facing the front camera at the target "
            "distance, parallel to the screen.";
      break;
    case GestureKind::BodyRotation:
      how = "Hold the phone flat, press the screen and turn your body by the target angle, "
            "then hold.";
      break;
  }
  return "Target " + spoken_value(goal, g) + ". " + how;
}

StepResult session_step(const TeachingSession& session, const SessionEvent& event,
                        const EngineConfig& cfg) {
  StepResult out{session, {}};
  TeachingSession& s = out.session;

  if (std::holds_alternative<Tick>(event)) return out;

  if (const auto* start = std::get_if<StartGoal>(&event)) {
    if (s.phase != TeachingPhase::Idle) illegal(s, "StartGoal");
    if (!validate_range(start->goal, s.gesture).within) {
      throw Error(ErrorCode::InvalidGoal, "goal outside the gesture range");
    }
    s.goal = start->goal;
    s.mode = start->mode;
    s.tolerance = tolerance_for(s.goal, s.gesture, s.mode, cfg);
    enter(s, TeachingPhase::GoalSet);
    out.events.push_back({start->t_ms, Speech{instructions_for(s.gesture, s.goal)}});
    enter(s, TeachingPhase::Trying);
    return out;
  }

  const auto& m = std::get<MeasurementResult>(event);
  if (s.phase != TeachingPhase::Trying && s.phase != TeachingPhase::Correcting) {
    illegal(s, "MeasurementResult");
  }
  if (m.gesture != s.gesture) {
    throw Error(ErrorCode::IllegalTransition, "measurement is for " +
                                                  std::string(to_string(m.gesture)) +
                                                  ", session expects " +
                                                  std::string(to_string(s.gesture)));
  }
  const Millis t = m.ended_ms;
  const auto eval = evaluate_attempt(m.value, s.goal, s.tolerance);

  if (s.phase == TeachingPhase::Correcting) {
    out.events = correction_feedback(m.value, s.goal, s.tolerance, s.gesture, t);
    if (eval.passed) enter(s, TeachingPhase::Trying);
    return out;
  }

  enter(s, TeachingPhase::Evaluating);
  s.attempts.push_back({m.value, eval.signed_error, eval.passed, t});
  if (eval.passed) {
    enter(s, TeachingPhase::Completed);
    out.events.push_back({t, BeepCorrect{}});
    out.events.push_back({t, Speech{spoken_value(m.value, s.gesture)}});
  } else if (s.module == LearningModule::AbilityAssessment) {
    enter(s, TeachingPhase::Completed);
    out.events.push_back({t, Speech{"result recorded"}});
  } else {
    enter(s, TeachingPhase::Correcting);
    out.events = correction_feedback(m.value, s.goal, s.tolerance, s.gesture, t);
  }
  return out;
}

StepResult run_free_exploration(const MeasurementResult& measurement, const EngineConfig& cfg,
                                ToleranceMode mode, std::string id) {
  StepResult out{make_session(std::move(id), LearningModule::FreeExploration,
                              measurement.gesture),
                 {}};
  TeachingSession& s = out.session;
  s.goal = measurement.value;
  s.mode = mode;
  s.tolerance = tolerance_for(s.goal, s.gesture, mode, cfg);
  enter(s, TeachingPhase::GoalSet);
  enter(s, TeachingPhase::Trying);
  out.events.push_back({measurement.ended_ms,
                        Speech{spoken_value(s.goal, s.gesture) + ". Now reproduce it."}});
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Task> default_tasks() {
  using G = GestureKind;
  return {{G::OneFinger, 1},     {G::OneFinger, 2},     {G::OneFinger, 4},
          {G::OneFinger, 8},     {G::TwoFingers, 3},    {G::TwoFingers, 5},
          {G::TwoFingers, 6},    {G::TwoFingers, 7},    {G::OneHand, 25},
          {G::OneHand, 35},      {G::OneHand, 70},      {G::OneHand, 100},
          {G::TwoHands, 45},     {G::TwoHands, 65},     {G::TwoHands, 85},
          {G::TwoHands, 100},    {G::BodyRotation, 30}, {G::BodyRotation, 45},
          {G::BodyRotation, 60}, {G::BodyRotation, 120}};
}

std::vector<Task> parse_task_list(std::string_view text) {
  using nlohmann::json;
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_array()) {
    throw Error(ErrorCode::MalformedFrame, "task list must be a JSON array");
  }
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    if (!e.is_object() || e.size() != 2 || !e.contains("gesture") || !e.contains("value") ||
        !e.at("value").is_number()) {
      throw Error(ErrorCode::MalformedFrame,
                  "task " + std::to_string(i) + " needs exactly gesture and value");
    }
    Task t{codec::decode_gesture(e.at("gesture")), e.at("value").get<double>()};
    if (!(t.value > 0.0) || !validate_range(t.value, t.gesture).within) {
      throw Error(ErrorCode::InvalidTask, "task " + std::to_string(i) + " value out of range");
    }
    tasks.push_back(t);
  }
  return tasks;
}

std::vector<Task> load_task_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_task_list(ss.str());
}

std::string write_task_list(const std::vector<Task>& tasks) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& t : tasks) {
    j.push_back({{"gesture", std::string(to_string(t.gesture))}, {"value", t.value}});
  }
  return j.dump(2) + "\n";
}

AssessmentRecord assessment_record(const TeachingSession& session,
                                   const std::string& participant, int day) {
  if (session.attempts.empty()) {
    throw Error(ErrorCode::IllegalTransition, "session has no attempt to record");
  }
  const Attempt& a = session.attempts.front();
  AssessmentRecord r;
  r.participant = participant;
  r.day = day;
  r.gesture = session.gesture;
  r.task = session.goal;
  r.result = a.value;
  r.relative_error = analytics::relative_error(a.value, session.goal);
  r.t_ms = a.t_ms;
  return r;
}

std::vector<AssessmentRecord> run_assessment(const std::vector<Task>& tasks,
                                             const std::vector<MeasurementResult>& measurements,
                                             const std::string& participant, int day,
                                             const EngineConfig& cfg) {
  if (tasks.size() != measurements.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(tasks.size()) + " tasks but " +
                                               std::to_string(measurements.size()) +
                                               " measurements");
  }
  std::vector<AssessmentRecord> records;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (measurements[i].gesture != tasks[i].gesture) {
      throw Error(ErrorCode::GestureMismatch, "task " + std::to_string(i) + " expects " +
                                                  std::string(to_string(tasks[i].gesture)));
    }
    auto s = make_session("assessment-" + std::to_string(i), LearningModule::AbilityAssessment,
                          tasks[i].gesture);
    s = session_step(s, StartGoal{tasks[i].value, ToleranceMode::Tolerant, 0}, cfg).session;
    s = session_step(s, measurements[i], cfg).session;
    records.push_back(assessment_record(s, participant, day));
  }
  return records;
}

}  // namespace anglesizer
