#include "aerocap/engine.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace aerocap;

namespace {

ScenarioConfig scenario(const std::string& name) {
    std::ifstream in(std::filesystem::path(AEROCAP_SCENARIO_DIR) / (name + ".yaml"));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

const SimLog& nominal(const std::string& name) {
    static std::map<std::string, SimLog> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, run_scenario(scenario(name))).first;
    return it->second;
}

std::vector<MissionPhase> phases_of(const SimLog& log, DroneId who) {
    std::vector<MissionPhase> seq{MissionPhase::idle};
    for (const auto& tr : log.transitions())
        if (tr.drone == who) seq.push_back(tr.to);
    return seq;
}

std::optional<double> phase_entry(const SimLog& log, DroneId who, MissionPhase p) {
    for (const auto& tr : log.transitions())
        if (tr.drone == who && tr.to == p) return tr.t;
    return std::nullopt;
}

int grab_confirmed_sends(const SimLog& log) {
    int n = 0;
    for (const auto* m : log.all<MessageRecord>())
        n += m->msg.kind == MessageKind::grab_confirmed && m->event != "delivered";
    return n;
}

void expect_trace_invariants(const SimLog& log) {
    const auto trace_issue = validate_trace(log.transitions());
    EXPECT_FALSE(trace_issue) << *trace_issue;
    EXPECT_LE(grab_confirmed_sends(log), 1);
    EXPECT_FALSE(check_stream_monotonicity(log));
    if (const auto done = phase_entry(log, DroneId::tracker, MissionPhase::done)) {
        ASSERT_TRUE(log.capture_time);
        EXPECT_GE(*done, *log.capture_time);
    }
}

}  // namespace

TEST(Engine, OneSecondIsFourHundredSteps) {
    ScenarioConfig c;
    c.duration = 1.0;
    const SimLog log = run_scenario(c);
    EXPECT_EQ(log.dynamics_steps, 400);
    EXPECT_DOUBLE_EQ(log.end_time, 1.0);
    const auto truth = log.all<TruthRecord>();
    ASSERT_EQ(truth.size(), 400u);
    EXPECT_EQ(truth.front()->step, 1);
    EXPECT_EQ(truth.back()->step, 400);
    EXPECT_EQ(log.verdict, Verdict::timeout);

    const auto& meta = log.header.at("meta");
    EXPECT_EQ(meta.at("vision_every_steps"), 13);
    EXPECT_EQ(meta.at("control_every_steps"), 20);
    EXPECT_DOUBLE_EQ(meta.at("dt").get<double>(), 0.0025);

    int grabber_cmds = 0;
    for (const auto* cmd : log.all<CommandRecord>()) grabber_cmds += cmd->drone == DroneId::grabber;
    EXPECT_EQ(grabber_cmds, 20);
    std::set<double> vision_times;
    for (const auto* r : log.all<TrackRecord>()) vision_times.insert(r->t);
    for (const auto* r : log.all<DetectionRecord>()) vision_times.insert(r->t);
    for (double t : vision_times) {
        const double k = t / 0.0025;
        EXPECT_NEAR(std::fmod(std::round(k), 13.0), 0.0, 0.0) << t;
    }
}

TEST(Engine, TickDivisor) {
    EXPECT_EQ(tick_divisor(400.0, 30.0), 13);
    EXPECT_EQ(tick_divisor(400.0, 20.0), 20);
    EXPECT_EQ(tick_divisor(400.0, 400.0), 1);
    EXPECT_EQ(tick_divisor(400.0, 1000.0), 1);
}

TEST(Engine, RerunIsByteIdentical) {
    ScenarioConfig c = scenario("default_collaborative");
    c.duration = 30.0;
    c.seed = 11;
    EXPECT_EQ(log_to_string(run_scenario(c)), log_to_string(run_scenario(c)));
    c.seed = 12;
    const std::string a = log_to_string(run_scenario(c));
    c.seed = 11;
    EXPECT_NE(a, log_to_string(run_scenario(c)));
}

TEST(Engine, LoggedCommandsReplayTruth) {
    const SimLog& log = nominal("moving_nominal");
    ScenarioConfig cfg = scenario("moving_nominal");
    const double dt = 1.0 / cfg.rates.dynamics;
    const TargetTrajectory target(cfg.target);

    std::map<DroneId, std::vector<const CommandRecord*>> cmds;
    for (const auto* c : log.all<CommandRecord>()) cmds[c->drone].push_back(c);
    std::map<DroneId, std::size_t> next{{DroneId::tracker, 0}, {DroneId::grabber, 0}};
    std::map<DroneId, VelocityCommand> held{{DroneId::tracker, VelocityCommand::zero()},
                                            {DroneId::grabber, VelocityCommand::zero()}};
    UavState tracker{cfg.tracker.initial_position, Vec3::Zero(), wrap_angle(cfg.tracker.initial_yaw), 0.0};
    UavState grabber{cfg.grabber.initial_position, Vec3::Zero(), wrap_angle(cfg.grabber.initial_yaw), 0.0};
    BallState ball;

    const auto truth = log.all<TruthRecord>();
    ASSERT_FALSE(truth.empty());
    double worst_uav = 0.0, worst_ball = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const double t = static_cast<double>(k) * dt;
        for (auto& [who, list] : cmds)
            while (next[who] < list.size() && list[next[who]]->t <= t + 1e-12) held[who] = list[next[who]++]->cmd;
        const Vec3 accel = target.at(t).acceleration;
        tracker = step_uav(tracker, held[DroneId::tracker], cfg.tracker.plant, dt);
        grabber = step_uav(grabber, held[DroneId::grabber], cfg.grabber.plant, dt);
        const TruthRecord& tr = *truth[k];
        ASSERT_EQ(tr.step, static_cast<std::int64_t>(k + 1));
        ASSERT_TRUE(tr.tracker);
        worst_uav = std::max({worst_uav, (tracker.position - tr.tracker->position).norm(),
                              (grabber.position - tr.grabber.position).norm(), std::abs(grabber.yaw - tr.grabber.yaw)});
        EXPECT_LT((target.at(t + dt).position - tr.target_position).norm(), 1e-9);
        if (ball.attached && tr.ball.attached) {
            ball = step_ball(ball, accel, tr.wind, cfg.world.pendulum, dt);
            worst_ball = std::max({worst_ball, std::abs(ball.theta - tr.ball.theta), std::abs(ball.phi - tr.ball.phi),
                                   std::abs(ball.theta_dot - tr.ball.theta_dot)});
        }
    }
    EXPECT_LT(worst_uav, 1e-9);
    EXPECT_LT(worst_ball, 1e-9);
}

TEST(Engine, StaticNominalCaptures) {
    const SimLog& log = nominal("static_nominal");
    EXPECT_EQ(log.verdict, Verdict::captured) << log.failure_cause;
    EXPECT_TRUE(log.failure_cause.empty());
    EXPECT_EQ(phases_of(log, DroneId::grabber).back(), MissionPhase::done);
    expect_trace_invariants(log);
}

TEST(Engine, MovingNominalPhaseSequence) {
    const SimLog& log = nominal("moving_nominal");
    ASSERT_EQ(log.verdict, Verdict::captured) << log.failure_cause;
    using P = MissionPhase;
    EXPECT_EQ(phases_of(log, DroneId::grabber),
              (std::vector<P>{P::idle, P::takeoff, P::approach_handoff, P::servo_ball, P::grab, P::retreat_land, P::done}));
    EXPECT_EQ(phases_of(log, DroneId::tracker).back(), P::done);
    expect_trace_invariants(log);
}

TEST(Engine, DepthNonIncreasingBeforeCapture) {
    for (const char* name : {"static_nominal", "moving_nominal"}) {
        const SimLog& log = nominal(name);
        ASSERT_TRUE(log.capture_time) << name;
        std::vector<double> depth;
        for (const auto* d : log.all<DetectionRecord>())
            if (d->drone == DroneId::grabber && d->det.cls == ObjectClass::ball && d->t >= *log.capture_time - 2.0 &&
                d->t <= *log.capture_time)
                depth.push_back(d->range);
        ASSERT_GE(depth.size(), 30u) << name;
        for (std::size_t i = 1; i < depth.size(); ++i) EXPECT_LE(depth[i], depth[i - 1]) << name << " sample " << i;
    }
}

TEST(Engine, ClosedLoopPixelErrorSettles) {
    const SimLog& log = nominal("moving_nominal");
    ASSERT_TRUE(log.capture_time);
    const auto lock = phase_entry(log, DroneId::grabber, MissionPhase::servo_ball);
    ASSERT_TRUE(lock);
    const double cx = 320.0, cy = 240.0;
    int checked = 0;
    for (const auto* r : log.all<TrackRecord>()) {
        if (r->drone != DroneId::grabber || r->cls != ObjectClass::ball || r->status == TrackStatus::uninitialized) continue;
        if (r->t < *lock + 10.0 || r->t > *log.capture_time) continue;
        EXPECT_LT(std::hypot(r->state[0] - cx, r->state[1] - cy), 10.0) << "t=" << r->t;
        ++checked;
    }
    EXPECT_GT(checked, 0);
}

TEST(Engine, ExactlyOneDetachOnCapture) {
    for (const char* name : {"static_nominal", "moving_nominal"}) {
        const SimLog& log = nominal(name);
        const auto detach = log.events("detach");
        ASSERT_EQ(detach.size(), 1u) << name;
        EXPECT_EQ(detach.front()->t, *log.capture_time);
        const auto grabs = log.events("grab");
        ASSERT_FALSE(grabs.empty());
        EXPECT_EQ(grabs.front()->phase, MissionPhase::grab);
        // Ball rides in the basket afterwards.
        for (const auto* tr : log.all<TruthRecord>()) {
            if (tr->t >= *log.capture_time) {
                EXPECT_FALSE(tr->ball.attached);
            }
        }
    }
}

TEST(Engine, DefaultRunsSatisfyTraceInvariants) {
    for (const char* name : {"default_collaborative", "default_single", "figure_eight"}) {
        ScenarioConfig c = scenario(name);
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            c.seed = seed;
            const SimLog log = run_scenario(c, RunOptions{false, false});
            SCOPED_TRACE(std::string(name) + " seed " + std::to_string(seed));
            expect_trace_invariants(log);
            EXPECT_EQ(log.verdict == Verdict::captured, log.failure_cause.empty());
            if (log.verdict == Verdict::captured) EXPECT_EQ(log.events("detach").size(), 1u);
            else EXPECT_TRUE(log.events("detach").empty());
        }
    }
}

TEST(Engine, SingleModeHasNoTracker) {
    ScenarioConfig c = scenario("default_single");
    c.duration = 2.0;
    const SimLog log = run_scenario(c);
    for (const auto* tr : log.all<TruthRecord>()) EXPECT_FALSE(tr->tracker);
    for (const auto& tr : log.transitions()) EXPECT_EQ(tr.drone, DroneId::grabber);
    EXPECT_TRUE(log.all<MessageRecord>().empty());
}

TEST(Engine, InvalidConfigThrows) {
    ScenarioConfig c;
    c.duration = -1.0;
    EXPECT_THROW(run_scenario(c), ConfigError);
}

TEST(Engine, RngStreamsAreIndependent) {
    ScenarioConfig a = scenario("default_collaborative");
    a.duration = 20.0;
    ScenarioConfig b = a;
    b.channel.drop_probability = 0.5;
    b.camera.noise.sigma_center = 5.0;
    const SimLog la = run_scenario(a);
    const SimLog lb = run_scenario(b);
    const auto ta = la.all<TruthRecord>();
    const auto tb = lb.all<TruthRecord>();
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) ASSERT_EQ(ta[i]->wind, tb[i]->wind) << i;
}

TEST(MonteCarlo, SingleRunMatchesRunScenario) {
    ScenarioConfig c = scenario("default_single");
    const auto mc = monte_carlo(c, 1, 9, 1);
    c.seed = 9;
    const SimLog log = run_scenario(c);
    ASSERT_EQ(mc.runs.size(), 1u);
    EXPECT_EQ(mc.runs[0].seed, 9u);
    EXPECT_EQ(mc.runs[0].verdict, log.verdict);
    EXPECT_EQ(mc.runs[0].capture_time, log.capture_time);
    EXPECT_EQ(mc.runs[0].failure_cause, log.failure_cause);
    EXPECT_EQ(mc.runs[0].end_time, log.end_time);
}

TEST(MonteCarlo, InvariantToThreadCount) {
    const ScenarioConfig c = scenario("default_single");
    const auto one = monte_carlo(c, 6, 100, 1);
    const auto four = monte_carlo(c, 6, 100, 4);
    EXPECT_EQ(summary_json(one).dump(), summary_json(four).dump());
    for (std::size_t i = 0; i < one.runs.size(); ++i) {
        EXPECT_EQ(one.runs[i].seed, 100u + i);
        EXPECT_EQ(one.runs[i].capture_time, four.runs[i].capture_time);
        EXPECT_EQ(one.runs[i].end_time, four.runs[i].end_time);
    }
}

TEST(MonteCarlo, NoiseFreeScenariosAlwaysCapture) {
    const auto s = monte_carlo(scenario("static_nominal"), 3, 1);
    EXPECT_EQ(s.success_rate, 1.0);
    EXPECT_TRUE(s.failure_taxonomy.empty());
    EXPECT_GT(s.capture_time_mean, 0.0);
}

TEST(MonteCarlo, SummaryStatistics) {
    std::vector<RunResult> runs(4);
    runs[0] = {1, Verdict::captured, 10.0, "", 10.0};
    runs[1] = {2, Verdict::captured, 14.0, "", 14.0};
    runs[2] = {3, Verdict::timeout, std::nullopt, "terminal_track_loss", 300.0};
    runs[3] = {4, Verdict::timeout, std::nullopt, "terminal_track_loss", 300.0};
    const auto s = summarize(runs);
    EXPECT_EQ(s.success_rate, 0.5);
    EXPECT_EQ(s.capture_time_mean, 12.0);
    EXPECT_NEAR(s.capture_time_std, std::sqrt(8.0), 1e-12);
    EXPECT_EQ(s.failure_taxonomy.at("terminal_track_loss"), 2);
    EXPECT_THROW(monte_carlo(ScenarioConfig{}, 0, 1), InputError);
}

TEST(Summary, RunSummaryListsPhases) {
    const SimLog& log = nominal("static_nominal");
    const auto j = run_summary_json(log);
    EXPECT_EQ(j.at("verdict"), "captured");
    EXPECT_EQ(j.at("phases").at("grabber").front(), "idle");
    EXPECT_EQ(j.at("phases").at("grabber").back(), "done");
    EXPECT_EQ(j.at("events").at("detach"), 1);
    const std::string csv = timeseries_csv(log);
    const auto rows = std::count(csv.begin(), csv.end(), '\n') - 1;
    EXPECT_EQ(rows, static_cast<long>(log.all<CommandRecord>().size()));
}
