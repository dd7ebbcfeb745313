#pragma once

// Mission logic for the two own drones: the tracker keeps the ball in view and
// broadcasts its world position, the grabber flies to the handoff point,
// servos onto the ball and grabs it. Also the lossy message channel between
// them and the geometric capture test standing in for the basket.

#include "aerocap/camera.hpp"
#include "aerocap/guidance.hpp"
#include "aerocap/perception.hpp"
#include "aerocap/rng.hpp"
#include "aerocap/world.hpp"

#include <array>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aerocap {

// ---------------------------------------------------------------------------
// Phases
// ---------------------------------------------------------------------------

enum class MissionPhase { idle, takeoff, explore, track_drone, approach_handoff, servo_ball, grab, retreat_land, done, failed };

inline constexpr std::array kAllPhases{MissionPhase::idle,       MissionPhase::takeoff,          MissionPhase::explore,
                                       MissionPhase::track_drone, MissionPhase::approach_handoff, MissionPhase::servo_ball,
                                       MissionPhase::grab,       MissionPhase::retreat_land,     MissionPhase::done,
                                       MissionPhase::failed};

inline std::string_view to_string(MissionPhase p) {
    switch (p) {
        case MissionPhase::idle: return "idle";
        case MissionPhase::takeoff: return "takeoff";
        case MissionPhase::explore: return "explore";
        case MissionPhase::track_drone: return "track_drone";
        case MissionPhase::approach_handoff: return "approach_handoff";
        case MissionPhase::servo_ball: return "servo_ball";
        case MissionPhase::grab: return "grab";
        case MissionPhase::retreat_land: return "retreat_land";
        case MissionPhase::done: return "done";
        case MissionPhase::failed: return "failed";
    }
    return "?";
}

inline std::optional<MissionPhase> phase_from_string(std::string_view s) {
    for (auto p : kAllPhases)
        if (to_string(p) == s) return p;
    return std::nullopt;
}

inline bool is_terminal(MissionPhase p) { return p == MissionPhase::done || p == MissionPhase::failed; }

/// Edges of the mission graph. Any non-terminal phase may also go to failed.
inline bool is_allowed_transition(MissionPhase from, MissionPhase to) {
    using P = MissionPhase;
    if (is_terminal(from)) return false;
    if (to == P::failed) return true;
    static constexpr std::pair<P, P> edges[] = {
        {P::idle, P::takeoff},
        {P::takeoff, P::explore},
        {P::takeoff, P::approach_handoff},
        {P::takeoff, P::done},
        {P::explore, P::track_drone},
        {P::explore, P::done},
        {P::track_drone, P::explore},
        {P::track_drone, P::servo_ball},
        {P::track_drone, P::done},
        {P::approach_handoff, P::servo_ball},
        {P::servo_ball, P::grab},
        {P::servo_ball, P::approach_handoff},
        {P::servo_ball, P::explore},
        {P::grab, P::retreat_land},
        {P::grab, P::servo_ball},
        {P::grab, P::approach_handoff},
        {P::grab, P::explore},
        {P::retreat_land, P::done},
    };
    for (auto [a, b] : edges)
        if (a == from && b == to) return true;
    return false;
}

enum class DroneId { tracker, grabber };

inline std::string_view to_string(DroneId d) { return d == DroneId::tracker ? "tracker" : "grabber"; }

inline std::optional<DroneId> drone_from_string(std::string_view s) {
    if (s == "tracker") return DroneId::tracker;
    if (s == "grabber") return DroneId::grabber;
    return std::nullopt;
}

struct PhaseTransition {
    double t = 0.0;
    DroneId drone = DroneId::grabber;
    MissionPhase from = MissionPhase::idle;
    MissionPhase to = MissionPhase::idle;
};

/// Checks every transition against the mission graph and that each drone's
/// transitions chain (from == previous to). Returns the first violation.
inline std::optional<std::string> validate_trace(const std::vector<PhaseTransition>& trace) {
    std::map<DroneId, MissionPhase> current;
    for (const auto& tr : trace) {
        auto it = current.find(tr.drone);
        const MissionPhase expected = it == current.end() ? MissionPhase::idle : it->second;
        if (tr.from != expected)
            return std::string(to_string(tr.drone)) + ": transition from " + std::string(to_string(tr.from)) +
                   " but drone was in " + std::string(to_string(expected));
        if (!is_allowed_transition(tr.from, tr.to))
            return std::string(to_string(tr.drone)) + ": illegal transition " + std::string(to_string(tr.from)) +
                   " -> " + std::string(to_string(tr.to));
        current[tr.drone] = tr.to;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Messages and channel
// ---------------------------------------------------------------------------

enum class MessageKind { ball_sighting, grab_confirmed };

inline std::string_view to_string(MessageKind k) { return k == MessageKind::ball_sighting ? "ball_sighting" : "grab_confirmed"; }

struct SightingPayload {
    Vec3 position = Vec3::Zero();    // m, world
    Mat3 covariance = Mat3::Zero();  // m^2
};

struct DroneMessage {
    DroneId sender = DroneId::tracker;
    double t_sent = 0.0;
    MessageKind kind = MessageKind::ball_sighting;
    std::optional<SightingPayload> payload;  // present iff ball_sighting

    static DroneMessage sighting(DroneId sender, double t, SightingPayload p) {
        return {sender, t, MessageKind::ball_sighting, std::move(p)};
    }
    static DroneMessage grab_confirmed(DroneId sender, double t) {
        return {sender, t, MessageKind::grab_confirmed, std::nullopt};
    }
};

struct ChannelModel {
    double latency = 0.1;           // s
    double drop_probability = 0.05;
    double rate_limit = 5.0;        // Hz, per sender and message kind
};

enum class SendOutcome { queued, dropped, rate_limited };

inline std::string_view to_string(SendOutcome o) {
    switch (o) {
        case SendOutcome::queued: return "queued";
        case SendOutcome::dropped: return "dropped";
        case SendOutcome::rate_limited: return "rate_limited";
    }
    return "?";
}

struct ChannelStep {
    std::vector<std::pair<DroneMessage, SendOutcome>> sent;
    std::vector<DroneMessage> delivered;
};

/// Point-to-point link with fixed latency, random loss and a send-side rate
/// limit. Delivery is FIFO. grab_confirmed is treated as an acknowledged
/// message and is never dropped.
class Channel {
public:
    static constexpr double kTimeEpsilon = 1e-9;

    Channel(ChannelModel model, RngStream rng) : model_(model), rng_(std::move(rng)) {
        if (!(model_.latency >= 0.0)) throw InputError("channel: latency must be >= 0");
        if (!(model_.drop_probability >= 0.0 && model_.drop_probability <= 1.0))
            throw InputError("channel: drop probability must be in [0, 1]");
        if (!(model_.rate_limit > 0.0)) throw InputError("channel: rate limit must be > 0");
    }

    const ChannelModel& model() const { return model_; }

    /// Whether a message of this kind from this sender would pass the rate limit at t.
    bool can_send(DroneId sender, MessageKind kind, double t) const {
        auto it = last_sent_.find({sender, kind});
        return it == last_sent_.end() || t - it->second >= 1.0 / model_.rate_limit - kTimeEpsilon;
    }

    SendOutcome send(const DroneMessage& msg) {
        if (!can_send(msg.sender, msg.kind, msg.t_sent)) return SendOutcome::rate_limited;
        last_sent_[{msg.sender, msg.kind}] = msg.t_sent;
        const double u = rng_.uniform();
        if (msg.kind == MessageKind::ball_sighting && u < model_.drop_probability) return SendOutcome::dropped;
        queue_.push_back({msg, msg.t_sent + model_.latency});
        return SendOutcome::queued;
    }

    std::vector<DroneMessage> deliver(double t) {
        std::vector<DroneMessage> out;
        while (!queue_.empty() && queue_.front().second <= t + kTimeEpsilon) {
            out.push_back(queue_.front().first);
            queue_.pop_front();
        }
        return out;
    }

    /// Sends the outbox at time t, then delivers everything due by t.
    ChannelStep step(const std::vector<DroneMessage>& outbox, double t) {
        ChannelStep s;
        for (const auto& m : outbox) s.sent.emplace_back(m, send(m));
        s.delivered = deliver(t);
        return s;
    }

private:
    ChannelModel model_;
    RngStream rng_;
    std::deque<std::pair<DroneMessage, double>> queue_;
    std::map<std::pair<DroneId, MessageKind>, double> last_sent_;
};

// ---------------------------------------------------------------------------
// Capture volume
// ---------------------------------------------------------------------------

struct CaptureGeometry {
    double radius = 0.25;              // m
    double cone_half_angle_deg = 45.0;
    double rel_speed_max = 1.5;        // m/s
};

/// Ball inside the basket: within radius of the gripper point, inside the
/// forward cone, and slow enough relative to the gripper. All bounds inclusive.
inline bool grab_detect(const Vec3& ball_position, const Vec3& ball_velocity, const Vec3& gripper_position,
                        const Vec3& gripper_velocity, double gripper_yaw, const CaptureGeometry& geom) {
    const Vec3 rel = ball_position - gripper_position;
    const double dist = rel.norm();
    if (dist > geom.radius) return false;
    if ((ball_velocity - gripper_velocity).norm() > geom.rel_speed_max) return false;
    if (dist == 0.0) return true;
    const Vec3 axis(std::cos(gripper_yaw), std::sin(gripper_yaw), 0.0);
    const double cos_angle = std::clamp(rel.dot(axis) / dist, -1.0, 1.0);
    return std::acos(cos_angle) <= geom.cone_half_angle_deg * kPi / 180.0 + 1e-12;
}

// ---------------------------------------------------------------------------
// Mission state machines
// ---------------------------------------------------------------------------

struct MissionParams {
    bool collaborative = true;
    double takeoff_altitude = 5.0;   // m
    double climb_gain = 1.0;         // 1/s
    double mission_budget = 150.0;   // s
    double tracker_grace = 1.0;      // s past the budget before the tracker gives up
    double grab_budget = 8.0;        // s
    double r_standoff = 2.5;         // m, servo_ball hold distance
    double grab_ramp_rate = 0.75;    // m/s, r_des ramp during grab
    double grab_r_final = -0.5;      // m, ramp end; below zero aims past the ball
    double r_drone_approach = 4.5;   // m, standoff while servoing on the drone
    double r_tracker = 6.0;          // m, tracker's hold distance from the ball
    double align_pixel_threshold = 20.0;  // px
    double align_range_tolerance = 0.75;  // m
    double align_hold = 0.5;              // s
    double approach_standoff = 3.5;  // m short of the handed-off point
    double approach_speed = 2.5;     // m/s
    double land_speed = 0.5;         // m/s
    double home_radius = 0.5;        // m
    double sighting_rate = 5.0;      // Hz
};

/// Everything one drone knows about its own sensing and control setup.
struct DroneRig {
    CameraIntrinsics intrinsics;
    CameraMount mount;
    GuidanceGains gains;
    CommandLimits limits;
    TrackerParams tracker;
    double ball_diameter = 0.18;
};

struct PerceptionView {
    const TrackEstimate& drone;
    const TrackEstimate& ball;
    TargetSelection selection;
};

struct MissionEvent {
    std::string kind;
    MissionPhase phase = MissionPhase::idle;
};

struct FsmOutput {
    MissionPhase phase = MissionPhase::idle;
    VelocityCommand command = VelocityCommand::zero();
    std::vector<DroneMessage> outbox;
    std::vector<MissionEvent> events;
};

/// World-frame ball position reconstructed from a track and the observer
/// pose, with the first-order covariance of (x, y, r) pushed through.
inline SightingPayload reconstruct_ball(const TrackEstimate& track, const UavState& own, const DroneRig& rig) {
    const auto& intr = rig.intrinsics;
    const double f = intr.focal_length;
    const double r = track.range();
    SightingPayload p;
    p.position = unproject(track.x(), track.y(), r, own, rig.mount, intr);
    Eigen::Matrix3d jac;  // d(camera point)/d(x, y, r)
    jac << 0.0, 0.0, 1.0,
           -r / f, 0.0, -(track.x() - intr.cx()) / f,
           0.0, -r / f, -(track.y() - intr.cy()) / f;
    Eigen::Matrix3d sigma;
    const int idx[3] = {TrackEstimate::kX, TrackEstimate::kY, TrackEstimate::kR};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) sigma(i, j) = track.covariance(idx[i], idx[j]);
    const Mat3 rot = yaw_rotation(own.yaw);
    p.covariance = rot * jac * sigma * jac.transpose() * rot.transpose();
    return p;
}

namespace detail {

inline VelocityCommand servo_world(const TrackEstimate& track, const UavState& own, const DroneRig& rig, double r_des) {
    GuidanceGains g = rig.gains;
    g.r_des = r_des;
    const auto cam = servo_command(track, rig.intrinsics, g);
    return saturate(camera_to_vehicle(cam, rig.mount, own.yaw), rig.limits);
}

inline VelocityCommand climb_to(const UavState& own, double altitude, double gain, const CommandLimits& limits) {
    VelocityCommand c;
    c.velocity.z() = gain * (altitude - own.position.z());
    return saturate(c, limits);
}

inline bool inbox_has(const std::vector<DroneMessage>& inbox, MessageKind kind) {
    for (const auto& m : inbox)
        if (m.kind == kind) return true;
    return false;
}

}  // namespace detail

/// The tracker searches, closes on the target drone, switches to the ball and
/// holds a long standoff while broadcasting world-frame sightings. It finishes
/// only once the grabber confirms the capture.
class TrackerFsm {
public:
    TrackerFsm(DroneRig rig, MissionParams params, ExploreParams explore)
        : rig_(std::move(rig)), params_(params), explorer_(std::move(explore)) {}

    MissionPhase phase() const { return phase_; }

    FsmOutput step(const PerceptionView& view, const UavState& own, const std::vector<DroneMessage>& inbox, double t) {
        FsmOutput out;
        if (is_terminal(phase_)) {
            out.phase = phase_;
            return out;
        }
        if (detail::inbox_has(inbox, MessageKind::grab_confirmed)) {
            phase_ = MissionPhase::done;
            out.phase = phase_;
            return out;
        }
        if (t > params_.mission_budget + params_.tracker_grace) {
            phase_ = MissionPhase::failed;
            out.phase = phase_;
            out.events.push_back({"mission_budget", MissionPhase::failed});
            return out;
        }

        switch (phase_) {
            case MissionPhase::idle:
                phase_ = MissionPhase::takeoff;
                out.command = detail::climb_to(own, params_.takeoff_altitude, params_.climb_gain, rig_.limits);
                break;
            case MissionPhase::takeoff:
                if (std::abs(own.position.z() - params_.takeoff_altitude) < 0.2) phase_ = MissionPhase::explore;
                out.command = detail::climb_to(own, params_.takeoff_altitude, params_.climb_gain, rig_.limits);
                break;
            case MissionPhase::explore:
                if (view.drone.alive() || view.ball.alive()) phase_ = MissionPhase::track_drone;
                out.command = saturate(explore_command(t, explorer_, own), rig_.limits);
                break;
            case MissionPhase::track_drone: {
                const TrackEstimate* servo = nullptr;
                double r_des = params_.r_drone_approach;
                if (view.selection.active == ObjectClass::ball && view.ball.alive()) {
                    servo = &view.ball;
                    r_des = params_.r_tracker;
                } else if (view.drone.alive()) {
                    servo = &view.drone;
                } else if (view.ball.alive()) {
                    servo = &view.ball;
                    r_des = params_.r_tracker;
                }
                if (!servo) {
                    out.events.push_back({"track_loss", MissionPhase::track_drone});
                    phase_ = MissionPhase::explore;
                    out.command = saturate(explore_command(t, explorer_, own), rig_.limits);
                    break;
                }
                out.command = detail::servo_world(*servo, own, rig_, r_des);
                if (view.ball.status == TrackStatus::tracking && t - last_sighting_ >= 1.0 / params_.sighting_rate - 1e-9) {
                    out.outbox.push_back(DroneMessage::sighting(DroneId::tracker, t, reconstruct_ball(view.ball, own, rig_)));
                    last_sighting_ = t;
                }
                break;
            }
            default:
                throw ContractError("tracker: unexpected phase " + std::string(to_string(phase_)));
        }
        out.phase = phase_;
        return out;
    }

private:
    DroneRig rig_;
    MissionParams params_;
    Explorer explorer_;
    MissionPhase phase_ = MissionPhase::idle;
    double last_sighting_ = -std::numeric_limits<double>::infinity();
};

/// The grabber. Collaborative: waits for a sighting, flies to it, servos onto
/// the ball, grabs, returns home and lands. Single-drone: searches on its own
/// and falls back to search whenever the ball track is lost.
class GrabberFsm {
public:
    GrabberFsm(DroneRig rig, MissionParams params, ExploreParams explore, Vec3 home)
        : rig_(std::move(rig)), params_(params), explorer_(std::move(explore)), home_(std::move(home)) {}

    MissionPhase phase() const { return phase_; }
    const std::optional<SightingPayload>& latest_sighting() const { return sighting_; }
    bool confirmed() const { return confirmed_; }

    FsmOutput step(const PerceptionView& view, const UavState& own, const std::vector<DroneMessage>& inbox,
                   bool grabbed, double t) {
        for (const auto& m : inbox)
            if (m.kind == MessageKind::ball_sighting && m.payload) sighting_ = m.payload;

        FsmOutput out;
        if (is_terminal(phase_)) {
            out.phase = phase_;
            return out;
        }
        if (!grabbed_ && grabbed) {
            grabbed_ = true;
            if (phase_ != MissionPhase::grab) throw ContractError("grabber: capture reported outside the grab phase");
            phase_ = MissionPhase::retreat_land;
            if (params_.collaborative && !confirmed_) {
                out.outbox.push_back(DroneMessage::grab_confirmed(DroneId::grabber, t));
                confirmed_ = true;
            }
        }
        if (!grabbed_ && t > params_.mission_budget) {
            phase_ = MissionPhase::failed;
            out.phase = phase_;
            out.events.push_back({"mission_budget", MissionPhase::failed});
            return out;
        }

        switch (phase_) {
            case MissionPhase::idle:
                if (params_.collaborative && !sighting_) break;
                phase_ = MissionPhase::takeoff;
                out.command = detail::climb_to(own, takeoff_altitude(), params_.climb_gain, rig_.limits);
                break;
            case MissionPhase::takeoff: {
                const double alt = takeoff_altitude();
                if (std::abs(own.position.z() - alt) >= 0.2) {
                    out.command = detail::climb_to(own, alt, params_.climb_gain, rig_.limits);
                    break;
                }
                phase_ = params_.collaborative ? MissionPhase::approach_handoff : MissionPhase::explore;
                out.command = params_.collaborative ? approach(own) : saturate(explore_command(t, explorer_, own), rig_.limits);
                break;
            }
            case MissionPhase::explore:
                if (view.drone.alive() || view.ball.alive()) {
                    phase_ = MissionPhase::track_drone;
                    out.command = track_target(view, own);
                } else {
                    out.command = saturate(explore_command(t, explorer_, own), rig_.limits);
                }
                break;
            case MissionPhase::track_drone:
                if (view.selection.active == ObjectClass::ball && view.ball.status == TrackStatus::tracking) {
                    enter_servo(t);
                    out.command = detail::servo_world(view.ball, own, rig_, params_.r_standoff);
                } else if (view.drone.alive() || view.ball.alive()) {
                    out.command = track_target(view, own);
                } else {
                    out.events.push_back({"track_loss", MissionPhase::track_drone});
                    phase_ = MissionPhase::explore;
                    explorer_.restart();
                    out.command = saturate(explore_command(t, explorer_, own), rig_.limits);
                }
                break;
            case MissionPhase::approach_handoff:
                if (view.ball.status == TrackStatus::tracking) {
                    enter_servo(t);
                    out.command = detail::servo_world(view.ball, own, rig_, params_.r_standoff);
                } else {
                    out.command = approach(own);
                }
                break;
            case MissionPhase::servo_ball:
                if (!view.ball.alive()) {
                    out.events.push_back({"track_loss", MissionPhase::servo_ball});
                    fall_back(own, t, out);
                    break;
                }
                if (aligned(view.ball)) {
                    if (!aligned_since_) aligned_since_ = t;
                } else {
                    aligned_since_.reset();
                }
                if (aligned_since_ && t - *aligned_since_ >= params_.align_hold - 1e-9) {
                    phase_ = MissionPhase::grab;
                    grab_start_ = t;
                    out.command = detail::servo_world(view.ball, own, rig_, grab_r_des(t));
                } else {
                    out.command = detail::servo_world(view.ball, own, rig_, params_.r_standoff);
                }
                break;
            case MissionPhase::grab:
                if (!view.ball.alive()) {
                    out.events.push_back({"track_loss", MissionPhase::grab});
                    fall_back(own, t, out);
                    break;
                }
                if (t - grab_start_ > params_.grab_budget) {
                    out.events.push_back({"grab_miss", MissionPhase::grab});
                    if (params_.collaborative && sighting_) {
                        phase_ = MissionPhase::approach_handoff;
                        out.command = approach(own);
                    } else {
                        enter_servo(t);
                        out.command = detail::servo_world(view.ball, own, rig_, params_.r_standoff);
                    }
                    break;
                }
                out.command = detail::servo_world(view.ball, own, rig_, grab_r_des(t));
                break;
            case MissionPhase::retreat_land:
                out.command = retreat(own);
                if (own.position.z() <= 0.05 && horizontal_distance(own.position, home_) <= params_.home_radius)
                    phase_ = MissionPhase::done;
                break;
            default:
                throw ContractError("grabber: unexpected phase " + std::string(to_string(phase_)));
        }
        out.phase = phase_;
        return out;
    }

private:
    double takeoff_altitude() const {
        return params_.collaborative && sighting_ ? sighting_->position.z() : params_.takeoff_altitude;
    }

    static double horizontal_distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x() - b.x(), a.y() - b.y()); }

    double grab_r_des(double t) const {
        return std::max(params_.grab_r_final, params_.r_standoff - params_.grab_ramp_rate * (t - grab_start_));
    }

    bool aligned(const TrackEstimate& ball) const {
        const auto& intr = rig_.intrinsics;
        return std::abs(ball.x() - intr.cx()) < params_.align_pixel_threshold &&
               std::abs(ball.y() - intr.cy()) < params_.align_pixel_threshold &&
               std::abs(ball.range() - params_.r_standoff) < params_.align_range_tolerance;
    }

    void enter_servo(double /*t*/) {
        phase_ = MissionPhase::servo_ball;
        aligned_since_.reset();
    }

    // Track lost while servoing or grabbing: back to the handoff point when a
    // tracker is feeding sightings, otherwise search again from scratch.
    void fall_back(const UavState& own, double t, FsmOutput& out) {
        if (params_.collaborative && sighting_) {
            phase_ = MissionPhase::approach_handoff;
            out.command = approach(own);
        } else {
            phase_ = MissionPhase::explore;
            explorer_.restart();
            out.command = saturate(explore_command(t, explorer_, own), rig_.limits);
        }
    }

    VelocityCommand track_target(const PerceptionView& view, const UavState& own) const {
        if (view.selection.active == ObjectClass::ball && view.ball.alive())
            return detail::servo_world(view.ball, own, rig_, params_.r_standoff);
        if (view.drone.alive()) return detail::servo_world(view.drone, own, rig_, params_.r_drone_approach);
        return detail::servo_world(view.ball, own, rig_, params_.r_standoff);
    }

    VelocityCommand approach(const UavState& own) const {
        const Vec3 p = sighting_->position;
        Vec3 away = own.position - p;
        away.z() = 0.0;
        const double d = away.norm();
        const Vec3 dir = d > 1e-6 ? Vec3(away / d) : Vec3(-std::cos(own.yaw), -std::sin(own.yaw), 0.0);
        const Vec3 goal = p + params_.approach_standoff * dir;
        return saturate(goto_command(own, goal, params_.approach_speed, 1.0, 1.5, p), rig_.limits);
    }

    VelocityCommand retreat(const UavState& own) const {
        VelocityCommand c;
        if (horizontal_distance(own.position, home_) > params_.home_radius) {
            Vec3 goal = home_;
            goal.z() = std::max(own.position.z(), params_.takeoff_altitude * 0.5);
            c = goto_command(own, goal, params_.approach_speed, 1.0, 1.5);
        } else {
            c.velocity.z() = -params_.land_speed;
        }
        return saturate(c, rig_.limits);
    }

    DroneRig rig_;
    MissionParams params_;
    Explorer explorer_;
    Vec3 home_;
    MissionPhase phase_ = MissionPhase::idle;
    std::optional<SightingPayload> sighting_;
    std::optional<double> aligned_since_;
    double grab_start_ = 0.0;
    bool grabbed_ = false;
    bool confirmed_ = false;
};

/// Free-function forms of the state machine steps.
inline FsmOutput tracker_step(TrackerFsm& fsm, const PerceptionView& view, const UavState& own,
                              const std::vector<DroneMessage>& inbox, double t) {
    return fsm.step(view, own, inbox, t);
}

inline FsmOutput grabber_step(GrabberFsm& fsm, const PerceptionView& view, const std::vector<DroneMessage>& inbox,
                              const UavState& own, bool grabbed, double t) {
    return fsm.step(view, own, inbox, grabbed, t);
}

}  // namespace aerocap
