#include <gtest/gtest.h>

#include <random>

#include "anglesizer/teaching.hpp"
#include "fsm_fuzz.hpp"

namespace anglesizer {
namespace {

MeasurementResult result_of(GestureKind g, double v, Millis t = 1000) {
  MeasurementResult m;
  m.gesture = g;
  m.value = v;
  m.raw_value = v;
  m.started_ms = t - 500;
  m.ended_ms = t;
  m.frames_processed = 40;
  return m;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidValue;
}

TEST(ToleranceFor, Examples) {
  const EngineConfig cfg;
  EXPECT_DOUBLE_EQ(tolerance_for(4, GestureKind::OneFinger, ToleranceMode::Exact, cfg), 0.1);
  EXPECT_DOUBLE_EQ(tolerance_for(80, GestureKind::TwoHands, ToleranceMode::Tolerant, cfg), 4.0);
  EXPECT_DOUBLE_EQ(tolerance_for(30, GestureKind::BodyRotation, ToleranceMode::Tolerant, cfg), 1.5);
  EXPECT_DOUBLE_EQ(tolerance_for(10, GestureKind::OneHand, ToleranceMode::Tolerant, cfg), 1.0);
  EXPECT_EQ(code_of([&] { tolerance_for(0, GestureKind::OneHand, ToleranceMode::Exact, cfg); }),
            ErrorCode::InvalidGoal);
}

TEST(ToleranceFor, MonotoneInGoal) {
  const EngineConfig cfg;
  for (auto g : kAllGestures) {
    double prev_t = 0;
    for (double goal = 0.1; goal <= gesture_spec(g).max; goal += 0.7) {
      const double t = tolerance_for(goal, g, ToleranceMode::Tolerant, cfg);
      EXPECT_GE(t, prev_t);
      prev_t = t;
      EXPECT_EQ(tolerance_for(goal, g, ToleranceMode::Exact, cfg), gesture_spec(g).resolution);
    }
  }
}

TEST(EvaluateAttempt, Examples) {
  auto a = evaluate_attempt(30.9, 30, 1.0);
  EXPECT_TRUE(a.passed);
  EXPECT_NEAR(a.signed_error, 0.9, 1e-12);
  auto b = evaluate_attempt(6, 6, 0.1);
  EXPECT_TRUE(b.passed);
  EXPECT_EQ(b.signed_error, 0.0);
  auto c = evaluate_attempt(3.5, 3.0, 0.15);
  EXPECT_FALSE(c.passed);
  EXPECT_NEAR(c.signed_error, 0.5, 1e-12);
  // On-grid boundary values pass despite binary representation.
  EXPECT_TRUE(evaluate_attempt(6.1, 6.0, 0.1).passed);
}

TEST(EvaluateAttempt, SymmetricPassRegion) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 5000; ++i) {
    const double g = u(rng) + 1, d = u(rng) / 4, tol = u(rng) / 5 + 0.01;
    EXPECT_EQ(evaluate_attempt(g + d, g, tol).passed, evaluate_attempt(g - d, g, tol).passed);
  }
}

TEST(CorrectionFeedback, FarBelowGoalSaturates) {
  auto ev = correction_feedback(2, 6, 0.5, GestureKind::TwoFingers);
  ASSERT_EQ(ev.size(), 2u);
  const auto& v = std::get<Vibration>(ev[0].kind);
  EXPECT_EQ(v.amplitude, 1.0);
  EXPECT_EQ(v.duration_ms, 200);
  const auto& text = std::get<Speech>(ev[1].kind).text;
  EXPECT_NE(text.find("6"), std::string::npos);
  EXPECT_NE(text.find("open"), std::string::npos);
}

TEST(CorrectionFeedback, InsideToleranceBeeps) {
  auto ev = correction_feedback(6.4, 6, 0.5, GestureKind::TwoFingers);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<BeepCorrect>(ev[0].kind));
  EXPECT_EQ(std::get<Speech>(ev[1].kind).text, "remember this feeling, try again");
  EXPECT_EQ(count_kind<Vibration>(ev), 0u);
}

TEST(CorrectionFeedback, AmplitudeLinearBelowCap) {
  const double a = std::get<Vibration>(correction_feedback(7.0, 6, 0.5, GestureKind::OneFinger)[0].kind).amplitude;
  const double b = std::get<Vibration>(correction_feedback(6.5 + 0.25, 6, 0.5, GestureKind::OneFinger)[0].kind).amplitude;
  EXPECT_NEAR(a, 0.5, 1e-12);
  EXPECT_NEAR(b, 0.375, 1e-12);
  const double c = std::get<Vibration>(correction_feedback(6.0 + 0.6, 6, 0.5, GestureKind::OneFinger)[0].kind).amplitude;
  const double d = std::get<Vibration>(correction_feedback(6.0 + 1.2, 6, 0.5, GestureKind::OneFinger)[0].kind).amplitude;
  EXPECT_NEAR(d, 2 * c, 1e-12);
}

TEST(SessionStep, GuidedLearningScript) {
  const EngineConfig cfg;
  auto s = make_session("g", LearningModule::GuidedLearning, GestureKind::TwoFingers);
  std::vector<FeedbackEvent> all;
  auto step = [&](const SessionEvent& e) {
    auto r = session_step(s, e, cfg);
    s = r.session;
    all.insert(all.end(), r.events.begin(), r.events.end());
  };
  step(StartGoal{6, ToleranceMode::Tolerant, 0});
  EXPECT_EQ(s.phase, TeachingPhase::Trying);
  EXPECT_DOUBLE_EQ(s.tolerance, 0.3);
  step(result_of(GestureKind::TwoFingers, 4.0, 1000));
  EXPECT_EQ(s.phase, TeachingPhase::Correcting);
  step(result_of(GestureKind::TwoFingers, 5.0, 1500));
  EXPECT_EQ(s.phase, TeachingPhase::Correcting);
  step(result_of(GestureKind::TwoFingers, 5.9, 2000));
  EXPECT_EQ(s.phase, TeachingPhase::Trying);
  step(result_of(GestureKind::TwoFingers, 6.1, 3000));
  EXPECT_EQ(s.phase, TeachingPhase::Completed);

  EXPECT_GE(count_kind<Vibration>(all), 1u);
  ASSERT_GE(all.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<BeepCorrect>(all[all.size() - 2].kind));
  EXPECT_EQ(std::get<Speech>(all.back().kind).text, "6.1 centimeters");
  EXPECT_EQ(s.attempts.size(), 2u);
  EXPECT_FALSE(s.attempts[0].passed);
  EXPECT_TRUE(s.attempts[1].passed);
  const std::vector<TeachingPhase> expected{
      TeachingPhase::Idle,       TeachingPhase::GoalSet,    TeachingPhase::Trying,
      TeachingPhase::Evaluating, TeachingPhase::Correcting, TeachingPhase::Trying,
      TeachingPhase::Evaluating, TeachingPhase::Completed};
  EXPECT_EQ(s.history, expected);
}

TEST(SessionStep, AssessmentFailureRecordsWithoutCorrection) {
  const EngineConfig cfg;
  auto s = make_session("a", LearningModule::AbilityAssessment, GestureKind::TwoFingers);
  auto r1 = session_step(s, StartGoal{6, ToleranceMode::Tolerant, 0}, cfg);
  auto r2 = session_step(r1.session, result_of(GestureKind::TwoFingers, 4), cfg);
  EXPECT_EQ(r2.session.phase, TeachingPhase::Completed);
  EXPECT_EQ(count_kind<Vibration>(r2.events), 0u);
  const auto rec = assessment_record(r2.session, "p1", 2);
  EXPECT_NEAR(rec.relative_error, 1.0 / 3.0, 1e-12);
  EXPECT_EQ(rec.task, 6);
  EXPECT_EQ(rec.result, 4);
  EXPECT_EQ(rec.day, 2);
}

TEST(SessionStep, IllegalTransitions) {
  const EngineConfig cfg;
  auto s = make_session("x", LearningModule::GuidedLearning, GestureKind::OneHand);
  EXPECT_EQ(code_of([&] { session_step(s, result_of(GestureKind::OneHand, 5), cfg); }),
            ErrorCode::IllegalTransition);
  auto t = session_step(s, StartGoal{50, ToleranceMode::Exact, 0}, cfg).session;
  EXPECT_EQ(code_of([&] { session_step(t, StartGoal{50, ToleranceMode::Exact, 0}, cfg); }),
            ErrorCode::IllegalTransition);
  EXPECT_EQ(code_of([&] { session_step(t, result_of(GestureKind::TwoHands, 50), cfg); }),
            ErrorCode::IllegalTransition);
  EXPECT_EQ(code_of([&] { session_step(s, StartGoal{500, ToleranceMode::Exact, 0}, cfg); }),
            ErrorCode::InvalidGoal);
  auto done = session_step(t, result_of(GestureKind::OneHand, 50), cfg).session;
  EXPECT_EQ(done.phase, TeachingPhase::Completed);
  EXPECT_EQ(code_of([&] { session_step(done, result_of(GestureKind::OneHand, 50), cfg); }),
            ErrorCode::IllegalTransition);
  EXPECT_EQ(session_step(done, Tick{9}, cfg).session, done);
}

TEST(FreeExploration, MeasuredValueBecomesGoal) {
  const EngineConfig cfg;
  auto r = run_free_exploration(result_of(GestureKind::OneHand, 35), cfg);
  EXPECT_EQ(r.session.goal, 35);
  EXPECT_EQ(r.session.module, LearningModule::FreeExploration);
  EXPECT_EQ(r.session.phase, TeachingPhase::Trying);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(std::get<Speech>(r.events[0].kind).text.rfind("35 centimeters", 0), 0u);

  auto rot = run_free_exploration(result_of(GestureKind::BodyRotation, 120), cfg);
  EXPECT_EQ(rot.session.gesture, GestureKind::BodyRotation);
  EXPECT_EQ(rot.session.goal, 120);

  auto clipped = run_free_exploration(result_of(GestureKind::BodyRotation, 360), cfg);
  EXPECT_EQ(clipped.session.goal, 360);
}

TEST(Assessment, PerfectTableTasks) {
  const auto tasks = default_tasks();
  ASSERT_EQ(tasks.size(), 20u);
  std::vector<MeasurementResult> ms;
  for (const auto& t : tasks) ms.push_back(result_of(t.gesture, t.value));
  const auto recs = run_assessment(tasks, ms, "p", 1, EngineConfig{});
  ASSERT_EQ(recs.size(), 20u);
  for (const auto& r : recs) EXPECT_EQ(r.relative_error, 0.0);
}

TEST(Assessment, RelativeErrorExamplesAndErrors) {
  const EngineConfig cfg;
  auto recs = run_assessment({{GestureKind::OneFinger, 1}, {GestureKind::BodyRotation, 45}},
                             {result_of(GestureKind::OneFinger, 1.2),
                              result_of(GestureKind::BodyRotation, 43.7)},
                             "p", 0, cfg);
  EXPECT_NEAR(recs[0].relative_error, 0.2, 1e-12);
  EXPECT_NEAR(recs[1].relative_error, 0.0289, 5e-5);
  EXPECT_EQ(code_of([&] { run_assessment({{GestureKind::OneFinger, 1}}, {}, "p", 0, cfg); }),
            ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([&] {
              run_assessment({{GestureKind::OneFinger, 1}}, {result_of(GestureKind::OneHand, 1)},
                             "p", 0, cfg);
            }),
            ErrorCode::GestureMismatch);
}

TEST(TaskList, DefaultValues) {
  std::vector<double> values;
  for (const auto& t : default_tasks()) values.push_back(t.value);
  const std::vector<double> expected{1,  2,  4,  8,  3,  5,  6,  7,  25, 35,
                                     70, 100, 45, 65, 85, 100, 30, 45, 60, 120};
  EXPECT_EQ(values, expected);
  EXPECT_EQ(parse_task_list(write_task_list(default_tasks())), default_tasks());
}

TEST(TaskList, Rejections) {
  EXPECT_EQ(code_of([] { parse_task_list("{}"); }), ErrorCode::MalformedFrame);
  EXPECT_EQ(code_of([] { parse_task_list(R"([{"gesture":"one_hand"}])"); }),
            ErrorCode::MalformedFrame);
  EXPECT_EQ(code_of([] { parse_task_list(R"([{"gesture":"one_hand","value":0}])"); }),
            ErrorCode::InvalidTask);
  EXPECT_EQ(code_of([] { parse_task_list(R"([{"gesture":"one_finger","value":13}])"); }),
            ErrorCode::InvalidTask);
  EXPECT_EQ(parse_task_list(R"([{"gesture":"body-rotation","value":90}])")[0].gesture,
            GestureKind::BodyRotation);
}

TEST(Names, RoundTrip) {
  for (auto m : {LearningModule::GuidedLearning, LearningModule::FreeExploration,
                 LearningModule::AbilityAssessment}) {
    EXPECT_EQ(parse_module(to_string(m)), m);
  }
  EXPECT_EQ(parse_module("ability-assessment"), LearningModule::AbilityAssessment);
  EXPECT_EQ(parse_tolerance_mode("exact"), ToleranceMode::Exact);
  EXPECT_FALSE(parse_tolerance_mode("loose"));
}

TEST(FsmFuzz, InvariantsOverRandomSequences) {
  const EngineConfig cfg;
  std::mt19937_64 rng(20240601);
  int assessments = 0, guided_completed = 0;
  for (int i = 0; i < 300; ++i) {
    const auto sc = fuzz::random_scenario(rng, i);
    const auto a = fuzz::replay(sc, cfg);
    const auto b = fuzz::replay(sc, cfg);
    EXPECT_EQ(a.transcript, b.transcript);
    EXPECT_EQ(a.final_state, b.final_state);
    EXPECT_FALSE(a.completed_without_pass) << i;
    EXPECT_FALSE(a.accepted_after_completed) << i;
    if (sc.start.module == LearningModule::AbilityAssessment) {
      ++assessments;
      EXPECT_EQ(count_kind<Vibration>(a.events), 0u) << i;
      EXPECT_FALSE(a.saw_correcting) << i;
      EXPECT_LE(a.final_state.attempts.size(), 1u);
    } else if (a.final_state.phase == TeachingPhase::Completed) {
      ++guided_completed;
    }
  }
  EXPECT_GT(assessments, 50);
  EXPECT_GT(guided_completed, 20);
}

}  // namespace
}  // namespace anglesizer
