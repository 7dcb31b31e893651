#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "anglesizer/core.hpp"

namespace anglesizer {

enum class LearningModule { GuidedLearning, FreeExploration, AbilityAssessment };
enum class TeachingPhase { Idle, GoalSet, Trying, Evaluating, Correcting, Completed };
enum class ToleranceMode { Exact, Tolerant };

std::string_view to_string(LearningModule m);
std::string_view to_string(TeachingPhase p);
std::string_view to_string(ToleranceMode m);
std::optional<LearningModule> parse_module(std::string_view s);
std::optional<ToleranceMode> parse_tolerance_mode(std::string_view s);

struct Attempt {
  double value = 0.0;
  double signed_error = 0.0;
  bool passed = false;
  Millis t_ms = 0;
  bool operator==(const Attempt&) const = default;
};

/// One goal being taught. A plain value: transitions produce a new session.
struct TeachingSession {
  std::string id;
  LearningModule module = LearningModule::GuidedLearning;
  GestureKind gesture = GestureKind::OneFinger;
  double goal = 0.0;
  ToleranceMode mode = ToleranceMode::Exact;
  double tolerance = 0.0;
  TeachingPhase phase = TeachingPhase::Idle;
  std::vector<Attempt> attempts;
  /// Every phase entered, in order, starting with Idle.
  std::vector<TeachingPhase> history{TeachingPhase::Idle};

  bool operator==(const TeachingSession&) const = default;
};

TeachingSession make_session(std::string id, LearningModule module, GestureKind gesture);

struct StartGoal {
  double goal = 0.0;
  ToleranceMode mode = ToleranceMode::Exact;
  Millis t_ms = 0;
};

struct Tick {
  Millis t_ms = 0;
};

using SessionEvent = std::variant<StartGoal, MeasurementResult, Tick>;

struct StepResult {
  TeachingSession session;
  std::vector<FeedbackEvent> events;
};

/// Exact: the gesture resolution. Tolerant: max(resolution, tolerance_rel * goal).
/// Throws Error{InvalidGoal} for goal <= 0.
double tolerance_for(double goal, GestureKind g, ToleranceMode mode, const EngineConfig& cfg);

struct AttemptEvaluation {
  bool passed;
  double signed_error;
};

/// passed iff |result - goal| <= tol, with 1e-9 slack for values that sit on
/// the resolution grid.
AttemptEvaluation evaluate_attempt(double result, double goal, double tol);

/// Outside tolerance: a Vibration whose amplitude grows linearly with the
/// error (saturating at 4 tol) plus a spoken value and direction. Inside
/// tolerance: BeepCorrect and a prompt to retry independently.
std::vector<FeedbackEvent> correction_feedback(double current, double goal, double tol,
                                               GestureKind g, Millis t_ms = 0);

/// Spoken instructions for performing `g` toward `goal`.
std::string instructions_for(GestureKind g, double goal);

/// Pure transition function. Throws Error{IllegalTransition} when the event is
/// not accepted in the current phase (or the measurement is for another
/// gesture).
StepResult session_step(const TeachingSession& session, const SessionEvent& event,
                        const EngineConfig& cfg);

/// Turns a measurement into a practice goal: announces the value and leaves
/// the session in Trying.
StepResult run_free_exploration(const MeasurementResult& measurement, const EngineConfig& cfg,
                                ToleranceMode mode = ToleranceMode::Tolerant,
                                std::string id = "free-exploration");

struct Task {
  GestureKind gesture = GestureKind::OneFinger;
  double value = 0.0;
  bool operator==(const Task&) const = default;
};

/// The twenty evaluation tasks, four per gesture.
std::vector<Task> default_tasks();

/// JSON array of {"gesture": ..., "value": ...}.
std::vector<Task> parse_task_list(std::string_view text);
std::vector<Task> load_task_list(const std::filesystem::path& path);
std::string write_task_list(const std::vector<Task>& tasks);

/// Runs each task through an AbilityAssessment session and scores it.
/// Throws Error{LengthMismatch} or Error{GestureMismatch}.
std::vector<AssessmentRecord> run_assessment(const std::vector<Task>& tasks,
                                             const std::vector<MeasurementResult>& measurements,
                                             const std::string& participant, int day,
                                             const EngineConfig& cfg);

/// Record for a completed assessment session (its single attempt).
AssessmentRecord assessment_record(const TeachingSession& session,
                                   const std::string& participant, int day);

}  // namespace anglesizer
