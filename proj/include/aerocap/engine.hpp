#pragma once

// Scenario runner. Owns time and the multirate schedule: dynamics every step,
// vision and control on fixed step divisors, the channel on the control tick.
// Also the Monte Carlo batch driver and the failure taxonomy.

#include "aerocap/camera.hpp"
#include "aerocap/config.hpp"
#include "aerocap/coordination.hpp"
#include "aerocap/guidance.hpp"
#include "aerocap/perception.hpp"
#include "aerocap/rng.hpp"
#include "aerocap/simlog.hpp"
#include "aerocap/world.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace aerocap {

struct RunOptions {
    bool record_truth = true;
    bool record_sensing = true;  // detections and tracks
};

/// Dynamics steps between ticks of a rate, rounded to the nearest step.
inline std::int64_t tick_divisor(double dynamics_rate, double rate) {
    return std::max<std::int64_t>(1, std::llround(dynamics_rate / rate));
}

namespace detail {

struct DroneSim {
    DroneId id;
    DroneConfig cfg;
    DroneRig rig;
    UavState state;
    RngStream camera_rng;
    TrackEstimate drone_track;
    TrackEstimate ball_track;
    TargetSelection selection;
    VelocityCommand held = VelocityCommand::zero();
    std::vector<DroneMessage> inbox;
    MissionPhase phase = MissionPhase::idle;
    double vision_yaw = 0.0;  // own yaw at the previous vision tick
};

inline std::string classify_failure(const SimLog& log) {
    if (log.verdict == Verdict::captured) return "";
    if (!log.events("collision").empty()) return "collision";
    if (!log.events("non_finite").empty()) return "non_finite";
    const EventRecord* last = nullptr;
    for (const auto* e : log.all<EventRecord>()) {
        if (e->drone != DroneId::grabber) continue;
        const bool terminal_loss =
            e->kind == "track_loss" && (e->phase == MissionPhase::servo_ball || e->phase == MissionPhase::grab);
        if (terminal_loss || e->kind == "grab_miss") last = e;
    }
    if (last) return last->kind == "grab_miss" ? "wind_displacement" : "terminal_track_loss";
    for (const auto& tr : log.transitions())
        if (tr.drone == DroneId::grabber && tr.to == MissionPhase::servo_ball) return "timeout_other";
    return "no_acquisition";
}

}  // namespace detail

/// Runs one scenario to completion: both drones terminal, an invalid state,
/// or the configured duration.
inline SimLog run_scenario(const ScenarioConfig& config, const RunOptions& opts = {}) {
    if (const auto issues = validate(config); !issues.empty())
        throw ConfigError(issues.front().field, 0, issues.front().message);

    ScenarioConfig cfg = config;
    cfg.mission.collaborative = cfg.collaborative();
    cfg.camera.intrinsics.frame_rate = cfg.rates.vision;

    const double dt = 1.0 / cfg.rates.dynamics;
    const std::int64_t steps = std::llround(cfg.duration * cfg.rates.dynamics);
    const std::int64_t vision_every = tick_divisor(cfg.rates.dynamics, cfg.rates.vision);
    const std::int64_t control_every = tick_divisor(cfg.rates.dynamics, cfg.rates.control);

    SimLog log;
    log.header = {{"type", "header"},
                  {"schema", kLogSchema},
                  {"version", kLogSchemaVersion},
                  {"config", config_to_json(cfg)},
                  {"meta",
                   {{"dt", dt},
                    {"planned_steps", steps},
                    {"vision_every_steps", vision_every},
                    {"vision_rate_effective", cfg.rates.dynamics / static_cast<double>(vision_every)},
                    {"control_every_steps", control_every},
                    {"control_rate_effective", cfg.rates.dynamics / static_cast<double>(control_every)},
                    {"drones", cfg.collaborative() ? nlohmann::ordered_json::array({"tracker", "grabber"})
                                                   : nlohmann::ordered_json::array({"grabber"})}}}};

    const TargetTrajectory target(cfg.target);
    const PendulumParams& pend = cfg.world.pendulum;
    WindProcess wind(cfg.world.wind, RngStream(cfg.seed, "wind"));
    Channel channel(cfg.channel, RngStream(cfg.seed, "channel"));

    auto make_drone = [&](DroneId id, const DroneConfig& dc) {
        detail::DroneSim d{id, dc, DroneRig{cfg.camera.intrinsics, dc.mount, cfg.gains, cfg.limits, cfg.perception,
                                            cfg.world.ball_diameter},
                           UavState{dc.initial_position, Vec3::Zero(), wrap_angle(dc.initial_yaw), 0.0},
                           RngStream(cfg.seed, std::string("camera.") + std::string(to_string(id))),
                           {}, {}, {}, VelocityCommand::zero(), {}, MissionPhase::idle};
        d.drone_track.cls = ObjectClass::drone;
        d.ball_track.cls = ObjectClass::ball;
        d.selection.switch_range = cfg.switch_range;
        d.vision_yaw = d.state.yaw;
        return d;
    };

    std::vector<detail::DroneSim> drones;
    if (cfg.collaborative()) drones.push_back(make_drone(DroneId::tracker, cfg.tracker));
    drones.push_back(make_drone(DroneId::grabber, cfg.grabber));
    detail::DroneSim& grabber = drones.back();
    detail::DroneSim* tracker = cfg.collaborative() ? &drones.front() : nullptr;

    std::optional<TrackerFsm> tracker_fsm;
    if (tracker) tracker_fsm.emplace(tracker->rig, cfg.mission, cfg.explore);
    GrabberFsm grabber_fsm(grabber.rig, cfg.mission, cfg.explore, cfg.grabber.initial_position);

    BallState ball;
    TargetKinematics tk = target.at(0.0);
    bool captured = false;
    bool invalid = false;
    bool swing_flagged = false;

    auto add_event = [&](double t, std::string kind, std::optional<DroneId> who = std::nullopt,
                         std::optional<MissionPhase> phase = std::nullopt) {
        log.records.emplace_back(EventRecord{t, std::move(kind), who, phase});
    };

    auto ball_position = [&]() { return ball.attached ? ball_world_position(tk.position, ball, pend.length) : ball.free_position; };

    auto vision_tick = [&](detail::DroneSim& d, double t) {
        const WorldSnapshot snap{t, tk.position, ball_position(), cfg.world.ball_diameter, cfg.world.drone_span};
        const auto& intr = cfg.camera.intrinsics;
        const auto drone_det = synth_detection(snap, d.state, d.cfg.mount, intr, cfg.camera.noise, cfg.camera.detection,
                                               ObjectClass::drone, std::nullopt, d.camera_rng);
        std::optional<PixelBox> gate;
        if (!d.ball_track.alive() && drone_det)
            gate = ball_search_gate(*drone_det, cfg.world.drone_span, pend.length, cfg.world.ball_search_margin);
        const auto ball_det = synth_detection(snap, d.state, d.cfg.mount, intr, cfg.camera.noise, cfg.camera.detection,
                                              ObjectClass::ball, gate, d.camera_rng);

        const double yaw_change = wrap_angle(d.state.yaw - d.vision_yaw);
        d.vision_yaw = d.state.yaw;
        auto process = [&](TrackEstimate& track, const std::optional<ImageDetection>& det, double size) {
            track = compensate_yaw(track, yaw_change, intr);
            std::optional<double> range;
            if (det) {
                range = estimate_range(*det, intr, size);
                if (opts.record_sensing) log.records.emplace_back(DetectionRecord{t, d.id, *det, *range});
            }
            const bool was_alive = track.alive();
            const auto step = track_lifecycle(track, det, range, t, cfg.perception);
            track = step.track;
            if (step.lost) add_event(t, std::string("track_lost_") + std::string(to_string(track.cls)), d.id, d.phase);
            if (opts.record_sensing && (was_alive || track.alive()))
                log.records.emplace_back(TrackRecord{t, d.id, track.cls, track.status, track.state, step.mahalanobis2, step.rejected});
        };
        process(d.drone_track, drone_det, cfg.world.drone_span);
        process(d.ball_track, ball_det, cfg.world.ball_diameter);
        d.selection = select_target(d.drone_track, d.ball_track, d.selection);
    };

    auto record_phase = [&](detail::DroneSim& d, MissionPhase next, double t) {
        if (next == d.phase) return;
        log.records.emplace_back(PhaseRecord{PhaseTransition{t, d.id, d.phase, next}});
        d.phase = next;
    };

    auto handle_output = [&](detail::DroneSim& d, const FsmOutput& out, double t, std::vector<DroneMessage>& outbox) {
        for (const auto& e : out.events) add_event(t, e.kind, d.id, e.phase);
        record_phase(d, out.phase, t);
        d.held = out.command;
        log.records.emplace_back(CommandRecord{t, d.id, d.held});
        for (const auto& m : out.outbox) outbox.push_back(m);
    };

    auto route = [&](const std::vector<DroneMessage>& delivered, double t) {
        for (const auto& m : delivered) {
            log.records.emplace_back(MessageRecord{t, "delivered", m});
            for (auto& d : drones)
                if (d.id != m.sender) d.inbox.push_back(m);
        }
    };

    std::int64_t k = 0;
    double t = 0.0;
    for (; k < steps; ++k) {
        t = static_cast<double>(k) * dt;

        if (k % vision_every == 0)
            for (auto& d : drones) vision_tick(d, t);

        if (k % control_every == 0) {
            route(channel.deliver(t), t);
            std::vector<DroneMessage> outbox;
            if (tracker) {
                const PerceptionView view{tracker->drone_track, tracker->ball_track, tracker->selection};
                handle_output(*tracker, tracker_fsm->step(view, tracker->state, tracker->inbox, t), t, outbox);
                tracker->inbox.clear();
            }
            {
                const PerceptionView view{grabber.drone_track, grabber.ball_track, grabber.selection};
                handle_output(grabber, grabber_fsm.step(view, grabber.state, grabber.inbox, captured, t), t, outbox);
                grabber.inbox.clear();
            }
            const auto cs = channel.step(outbox, t);
            for (const auto& [m, outcome] : cs.sent) log.records.emplace_back(MessageRecord{t, std::string(to_string(outcome)), m});
            route(cs.delivered, t);

            bool all_terminal = true;
            for (const auto& d : drones) all_terminal = all_terminal && is_terminal(d.phase);
            if (all_terminal) break;
        }

        // Dynamics.
        const TargetKinematics tk_prev = tk;
        const Vec3 wind_force = wind.step(dt);
        tk = target.at(t + dt);
        if (ball.attached) {
            ball = step_ball(ball, tk_prev.acceleration, wind_force, pend, dt);
        } else if (captured) {
            // Held in the basket below.
        } else {
            ball = step_ball(ball, Vec3::Zero(), wind_force, pend, dt);
        }
        for (auto& d : drones) d.state = step_uav(d.state, d.held, d.cfg.plant, dt);
        const double t_next = static_cast<double>(k + 1) * dt;

        if (captured) {
            ball.free_position = camera_position(grabber.state, grabber.cfg.mount);
            ball.free_velocity = grabber.state.velocity;
        } else if (grabber.phase == MissionPhase::grab && ball.attached) {
            const Vec3 gripper = camera_position(grabber.state, grabber.cfg.mount);
            const Vec3 gripper_vel = grabber.state.velocity;  // yaw-rate lever arm neglected
            const Vec3 bp = ball_world_position(tk.position, ball, pend.length);
            const Vec3 bv = ball_world_velocity(tk.velocity, ball, pend.length);
            if (grab_detect(bp, bv, gripper, gripper_vel, grabber.state.yaw, cfg.capture)) {
                add_event(t_next, "grab", DroneId::grabber, MissionPhase::grab);
                if (detach_check(cfg.world.claw_pull_force, cfg.world.detach_threshold)) {
                    ball = release_ball(ball, tk.position, tk.velocity, pend.length);
                    add_event(t_next, "detach", DroneId::grabber, MissionPhase::grab);
                    captured = true;
                    log.capture_time = t_next;
                    ball.free_position = gripper;
                    ball.free_velocity = gripper_vel;
                }
            }
        }

        if (is_invalid_swing(ball) && !swing_flagged) {
            add_event(t_next, "invalid_swing");
            swing_flagged = true;
        } else if (!is_invalid_swing(ball)) {
            swing_flagged = false;
        }

        bool finite = tk.position.allFinite() && ball_position().allFinite();
        for (const auto& d : drones) {
            finite = finite && d.state.position.allFinite() && d.state.velocity.allFinite() && std::isfinite(d.state.yaw);
            if ((d.state.position - tk.position).norm() < cfg.world.keep_out_radius) {
                add_event(t_next, "collision", d.id, d.phase);
                invalid = true;
            }
        }
        if (!finite) {
            add_event(t_next, "non_finite");
            invalid = true;
        }

        if (opts.record_truth) {
            TruthRecord tr;
            tr.step = k + 1;
            tr.t = t_next;
            if (tracker) tr.tracker = tracker->state;
            tr.grabber = grabber.state;
            tr.target_position = tk.position;
            tr.target_velocity = tk.velocity;
            tr.ball = ball;
            tr.ball_position = ball_position();
            tr.wind = wind_force;
            log.records.emplace_back(std::move(tr));
        }
        if (invalid) {
            ++k;
            t = t_next;
            break;
        }
        t = t_next;
    }

    log.dynamics_steps = k;
    log.end_time = static_cast<double>(k) * dt;
    log.verdict = invalid ? Verdict::invalid : captured ? Verdict::captured : Verdict::timeout;
    log.failure_cause = detail::classify_failure(log);
    return log;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct RunResult {
    std::uint64_t seed = 0;
    Verdict verdict = Verdict::timeout;
    std::optional<double> capture_time;
    std::string failure_cause;
    double end_time = 0.0;
};

struct MonteCarloSummary {
    std::vector<RunResult> runs;  // ordered by seed
    double success_rate = 0.0;
    double capture_time_mean = 0.0;
    double capture_time_std = 0.0;
    std::map<std::string, int> failure_taxonomy;
};

inline MonteCarloSummary summarize(std::vector<RunResult> runs) {
    MonteCarloSummary s;
    s.runs = std::move(runs);
    std::vector<double> times;
    for (const auto& r : s.runs) {
        if (r.verdict == Verdict::captured && r.capture_time) times.push_back(*r.capture_time);
        else ++s.failure_taxonomy[r.failure_cause];
    }
    if (!s.runs.empty()) s.success_rate = static_cast<double>(times.size()) / static_cast<double>(s.runs.size());
    if (!times.empty()) {
        double sum = 0.0;
        for (double x : times) sum += x;
        s.capture_time_mean = sum / static_cast<double>(times.size());
        double ss = 0.0;
        for (double x : times) ss += (x - s.capture_time_mean) * (x - s.capture_time_mean);
        s.capture_time_std = times.size() > 1 ? std::sqrt(ss / static_cast<double>(times.size() - 1)) : 0.0;
    }
    return s;
}

/// Runs seeds seed_base .. seed_base + n - 1. Results are keyed by seed, so the
/// summary does not depend on `threads`.
inline MonteCarloSummary monte_carlo(const ScenarioConfig& config, int n_runs, std::uint64_t seed_base,
                                     unsigned threads = 0) {
    if (n_runs < 1) throw InputError("monte_carlo: n_runs must be >= 1");
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(n_runs));

    std::vector<RunResult> results(static_cast<std::size_t>(n_runs));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n_runs; i = next++) {
            ScenarioConfig c = config;
            c.seed = seed_base + static_cast<std::uint64_t>(i);
            const auto log = run_scenario(c, RunOptions{false, false});
            results[static_cast<std::size_t>(i)] = {c.seed, log.verdict, log.capture_time, log.failure_cause, log.end_time};
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    return summarize(std::move(results));
}

inline nlohmann::ordered_json summary_json(const MonteCarloSummary& s) {
    nlohmann::ordered_json j;
    j["runs"] = s.runs.size();
    j["success_rate"] = s.success_rate;
    j["capture_time_mean"] = s.capture_time_mean;
    j["capture_time_std"] = s.capture_time_std;
    j["failure_taxonomy"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.failure_taxonomy) j["failure_taxonomy"][k] = v;
    return j;
}

/// Per-run summary document written next to a run log.
inline nlohmann::ordered_json run_summary_json(const SimLog& log) {
    nlohmann::ordered_json j;
    j["verdict"] = to_string(log.verdict);
    j["capture_time"] = log.capture_time ? nlohmann::ordered_json(*log.capture_time) : nlohmann::ordered_json(nullptr);
    j["failure_cause"] = log.failure_cause;
    j["end_time"] = log.end_time;
    j["dynamics_steps"] = log.dynamics_steps;
    j["seed"] = log.header.at("config").at("seed");
    nlohmann::ordered_json phases = nlohmann::ordered_json::object();
    for (const auto& tr : log.transitions()) {
        auto& seq = phases[std::string(to_string(tr.drone))];
        if (seq.is_null()) seq = nlohmann::ordered_json::array({"idle"});
        seq.push_back(to_string(tr.to));
    }
    j["phases"] = phases;
    std::map<std::string, int> counts;
    for (const auto* e : log.all<EventRecord>()) ++counts[e->kind];
    j["events"] = nlohmann::ordered_json::object();
    for (const auto& [kind, n] : counts) j["events"][kind] = n;
    return j;
}

/// Control-tick time series for plotting: one row per grabber command.
/// Pixel columns are the grabber's filtered ball center, empty without a track.
inline std::string timeseries_csv(const SimLog& log) {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return std::string(buf);
    };
    std::ostringstream os;
    os << "t,phase,grabber_x,grabber_y,grabber_z,grabber_yaw,ball_x,ball_y,ball_z,ball_px,ball_py,ball_range,"
          "cmd_vx,cmd_vy,cmd_vz,cmd_yaw_rate,tracker_phase,tracker_x,tracker_y,tracker_z\n";
    const TruthRecord* truth = nullptr;
    const TrackRecord* track = nullptr;
    std::map<DroneId, MissionPhase> phase{{DroneId::grabber, MissionPhase::idle}, {DroneId::tracker, MissionPhase::idle}};
    const bool with_tracker = log.header.contains("meta") && log.header["meta"].contains("drones") &&
                              log.header["meta"]["drones"].size() > 1;
    for (const auto& r : log.records) {
        if (const auto* tr = std::get_if<TruthRecord>(&r)) truth = tr;
        if (const auto* p = std::get_if<PhaseRecord>(&r)) phase[p->transition.drone] = p->transition.to;
        if (const auto* k = std::get_if<TrackRecord>(&r); k && k->drone == DroneId::grabber && k->cls == ObjectClass::ball)
            track = k->status == TrackStatus::uninitialized ? nullptr : k;
        const auto* c = std::get_if<CommandRecord>(&r);
        if (!c || c->drone != DroneId::grabber) continue;
        os << num(c->t) << ',' << to_string(phase[DroneId::grabber]);
        if (truth) {
            const auto& g = truth->grabber;
            os << ',' << num(g.position.x()) << ',' << num(g.position.y()) << ',' << num(g.position.z()) << ',' << num(g.yaw)
               << ',' << num(truth->ball_position.x()) << ',' << num(truth->ball_position.y()) << ','
               << num(truth->ball_position.z());
        } else {
            os << ",,,,,,,";
        }
        if (track) os << ',' << num(track->state[0]) << ',' << num(track->state[1]) << ',' << num(track->state[4]);
        else os << ",,,";
        os << ',' << num(c->cmd.velocity.x()) << ',' << num(c->cmd.velocity.y()) << ',' << num(c->cmd.velocity.z()) << ','
           << num(c->cmd.yaw_rate);
        if (with_tracker) {
            os << ',' << to_string(phase[DroneId::tracker]);
            if (truth && truth->tracker) {
                const auto& p = truth->tracker->position;
                os << ',' << num(p.x()) << ',' << num(p.y()) << ',' << num(p.z());
            } else {
                os << ",,,";
            }
        } else {
            os << ",,,,";
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace aerocap
