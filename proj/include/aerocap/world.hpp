#pragma once

// Plant models: own UAVs as first-order velocity-lag kinematic vehicles, the
// target drone flying a scripted pattern, and the ball hanging from it on a
// rigid rod (spherical pendulum with a moving pivot).

#include "aerocap/core.hpp"
#include "aerocap/rng.hpp"

#include <string>
#include <string_view>
#include <utility>

namespace aerocap {

// ---------------------------------------------------------------------------
// Own UAVs
// ---------------------------------------------------------------------------

struct UavState {
    Vec3 position = Vec3::Zero();  // m, world ENU
    Vec3 velocity = Vec3::Zero();  // m/s, world
    double yaw = 0.0;              // rad, (-pi, pi]
    double yaw_rate = 0.0;         // rad/s
};

enum class Frame { camera, vehicle, world };

inline std::string_view to_string(Frame f) {
    switch (f) {
        case Frame::camera: return "camera";
        case Frame::vehicle: return "vehicle";
        case Frame::world: return "world";
    }
    return "?";
}

/// Desired velocity and yaw rate. Components are (forward/x, left/y, up/z)
/// in the tagged frame.
struct VelocityCommand {
    Vec3 velocity = Vec3::Zero();
    double yaw_rate = 0.0;
    Frame frame = Frame::world;

    bool finite() const { return velocity.allFinite() && std::isfinite(yaw_rate); }

    static VelocityCommand zero(Frame f = Frame::world) { return {Vec3::Zero(), 0.0, f}; }
};

struct UavParams {
    double tau = 0.4;           // s, velocity lag time constant
    double v_max_h = 3.0;       // m/s, horizontal speed limit
    double v_max_z = 1.5;       // m/s, vertical speed limit
    double yaw_rate_max = 1.0;  // rad/s
};

/// Scales the horizontal pair to `v_max_h` (preserving direction) and clamps z.
inline Vec3 limit_velocity(const Vec3& v, double v_max_h, double v_max_z) {
    Vec3 out = v;
    const double h = std::hypot(v.x(), v.y());
    if (h > v_max_h && h > 0.0) {
        const double s = v_max_h / h;
        out.x() *= s;
        out.y() *= s;
    }
    out.z() = std::clamp(v.z(), -v_max_z, v_max_z);
    return out;
}

/// One semi-implicit Euler step of the velocity-lag vehicle.
///
/// Velocity relaxes toward the command, v' = v + (dt/tau)(v_cmd - v), is
/// saturated, and then integrates position. Yaw follows the rate-limited yaw
/// rate command. The vehicle cannot descend through the ground plane z = 0.
inline UavState step_uav(const UavState& state, const VelocityCommand& cmd, const UavParams& params,
                         double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("step_uav: dt must be positive and finite");
    if (!cmd.finite()) throw InputError("step_uav: non-finite velocity command");
    if (cmd.frame == Frame::camera)
        throw ContractError("step_uav: camera-frame command must be transformed before integration");

    const Vec3 v_cmd = cmd.frame == Frame::vehicle ? Vec3(yaw_rotation(state.yaw) * cmd.velocity) : cmd.velocity;
    const double alpha = std::min(1.0, dt / params.tau);

    UavState next = state;
    next.velocity = limit_velocity(state.velocity + alpha * (v_cmd - state.velocity), params.v_max_h, params.v_max_z);
    next.position = state.position + dt * next.velocity;
    if (next.position.z() < 0.0) {
        next.position.z() = 0.0;
        if (next.velocity.z() < 0.0) next.velocity.z() = 0.0;
    }
    next.yaw_rate = std::clamp(cmd.yaw_rate, -params.yaw_rate_max, params.yaw_rate_max);
    next.yaw = wrap_angle(state.yaw + dt * next.yaw_rate);
    return next;
}

// ---------------------------------------------------------------------------
// Target drone
// ---------------------------------------------------------------------------

enum class PatternKind { static_hover, straight_line, figure_eight };

inline std::string_view to_string(PatternKind k) {
    switch (k) {
        case PatternKind::static_hover: return "static_hover";
        case PatternKind::straight_line: return "straight_line";
        case PatternKind::figure_eight: return "figure_eight";
    }
    return "?";
}

struct TrajectoryPattern {
    PatternKind kind = PatternKind::static_hover;
    Vec3 center = Vec3(25.0, 5.0, 6.0);
    double heading = 0.0;  // rad
    double speed = 0.5;    // m/s (mean path speed for figure_eight)
    double extent = 5.0;   // m, lemniscate half-width
};

struct TargetKinematics {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Vec3 acceleration = Vec3::Zero();
};

/// Arc length of one lap of the unit Gerono lemniscate (x = sin u, y = sin u cos u).
inline double gerono_unit_lap_length() {
    // Composite Simpson; the integrand is smooth and periodic.
    constexpr int n = 4096;
    const double h = 2.0 * kPi / n;
    auto f = [](double u) {
        const double a = std::cos(u);
        const double b = std::cos(2.0 * u);
        return std::sqrt(a * a + b * b);
    };
    double sum = f(0.0) + f(2.0 * kPi);
    for (int i = 1; i < n; ++i) sum += f(i * h) * ((i % 2) ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// Precomputed trajectory of the target drone. Validates its pattern once.
class TargetTrajectory {
public:
    explicit TargetTrajectory(TrajectoryPattern pattern) : pattern_(std::move(pattern)) {
        if (!pattern_.center.allFinite()) throw InputError("target pattern: center must be finite");
        if (!(pattern_.speed >= 0.0)) throw InputError("target pattern: speed must be >= 0");
        if (pattern_.kind == PatternKind::figure_eight && !(pattern_.extent > 0.0))
            throw InputError("target pattern: extent must be > 0 for figure_eight");
        if (pattern_.kind == PatternKind::figure_eight)
            omega_ = 2.0 * kPi * pattern_.speed / (pattern_.extent * gerono_unit_lap_length());
    }

    const TrajectoryPattern& pattern() const { return pattern_; }

    /// Lap period of the figure-eight; 0 for the other patterns or zero speed.
    double period() const { return omega_ > 0.0 ? 2.0 * kPi / omega_ : 0.0; }

    TargetKinematics at(double t) const {
        TargetKinematics k;
        const Mat3 r = yaw_rotation(pattern_.heading);
        switch (pattern_.kind) {
            case PatternKind::static_hover:
                k.position = pattern_.center;
                break;
            case PatternKind::straight_line: {
                const Vec3 dir = r * Vec3::UnitX();
                k.position = pattern_.center + pattern_.speed * t * dir;
                k.velocity = pattern_.speed * dir;
                break;
            }
            case PatternKind::figure_eight: {
                const double a = pattern_.extent;
                const double w = omega_;
                const double s = std::sin(w * t);
                const double s2 = std::sin(2.0 * w * t);
                const double c = std::cos(w * t);
                const double c2 = std::cos(2.0 * w * t);
                const Vec3 p(a * s, 0.5 * a * s2, 0.0);
                const Vec3 v(a * w * c, a * w * c2, 0.0);
                const Vec3 acc(-a * w * w * s, -2.0 * a * w * w * s2, 0.0);
                k.position = pattern_.center + r * p;
                k.velocity = r * v;
                k.acceleration = r * acc;
                break;
            }
        }
        return k;
    }

private:
    TrajectoryPattern pattern_;
    double omega_ = 0.0;
};

/// Position and velocity of the target drone at time t >= 0.
inline std::pair<Vec3, Vec3> target_pose(const TrajectoryPattern& pattern, double t) {
    const auto k = TargetTrajectory(pattern).at(t);
    return {k.position, k.velocity};
}

// ---------------------------------------------------------------------------
// Suspended ball
// ---------------------------------------------------------------------------

/// theta is the deflection from straight down, phi the azimuth of the
/// deflection measured from world +x.
struct BallState {
    double theta = 0.0;
    double phi = 0.0;
    double theta_dot = 0.0;
    double phi_dot = 0.0;
    bool attached = true;
    Vec3 free_position = Vec3::Zero();
    Vec3 free_velocity = Vec3::Zero();
};

struct PendulumParams {
    double length = 1.5;    // m
    double mass = 0.1;      // kg
    double damping = 0.05;  // 1/s, linear on angular rates
    double gravity = kGravity;
};

/// Unit rod direction (pivot to bob) and its rate.
struct RodKinematics {
    Vec3 n = Vec3(0.0, 0.0, -1.0);
    Vec3 n_dot = Vec3::Zero();
};

inline RodKinematics rod_from_angles(const BallState& b) {
    const double st = std::sin(b.theta), ct = std::cos(b.theta);
    const double sp = std::sin(b.phi), cp = std::cos(b.phi);
    const Vec3 e_theta(ct * cp, ct * sp, st);
    const Vec3 e_phi(-sp, cp, 0.0);
    return {Vec3(st * cp, st * sp, -ct), b.theta_dot * e_theta + st * b.phi_dot * e_phi};
}

inline void angles_from_rod(const RodKinematics& rod, BallState& b) {
    const Vec3& n = rod.n;
    const double horiz = std::hypot(n.x(), n.y());
    b.theta = std::atan2(horiz, -n.z());
    if (horiz > 1e-12) {
        b.phi = std::atan2(n.y(), n.x());
        const double st = std::sin(b.theta), ct = std::cos(b.theta);
        const double sp = std::sin(b.phi), cp = std::cos(b.phi);
        b.theta_dot = rod.n_dot.dot(Vec3(ct * cp, ct * sp, st));
        b.phi_dot = rod.n_dot.dot(Vec3(-sp, cp, 0.0)) / st;
    } else {
        // At the bottom the azimuth is free: align it with the motion so the
        // whole rate lands in theta_dot.
        const double sweep = std::hypot(rod.n_dot.x(), rod.n_dot.y());
        b.theta = 0.0;
        b.phi = sweep > 0.0 ? std::atan2(rod.n_dot.y(), rod.n_dot.x()) : b.phi;
        b.theta_dot = sweep;
        b.phi_dot = 0.0;
    }
}

/// Ball center for an attached ball: support + L (sin th cos ph, sin th sin ph, -cos th).
inline Vec3 ball_world_position(const Vec3& support, const BallState& ball, double length) {
    const double st = std::sin(ball.theta);
    return support + length * Vec3(st * std::cos(ball.phi), st * std::sin(ball.phi), -std::cos(ball.theta));
}

inline Vec3 ball_world_velocity(const Vec3& support_velocity, const BallState& ball, double length) {
    return support_velocity + length * rod_from_angles(ball).n_dot;
}

namespace detail {

struct RodDerivative {
    Vec3 dn;
    Vec3 dn_dot;
};

// n'' = (I - n n^T) a / L - |n'|^2 n - c n', with a = g + F/m - a_support.
inline RodDerivative rod_rhs(const Vec3& n, const Vec3& n_dot, const Vec3& accel, const PendulumParams& p) {
    const Vec3 tangential = accel - n.dot(accel) * n;
    return {n_dot, tangential / p.length - n_dot.squaredNorm() * n - p.damping * n_dot};
}

}  // namespace detail

/// One step of the ball. Attached: RK4 on the rod direction with the moving
/// pivot, wind force at the bob and linear damping, renormalized onto the unit
/// sphere. Detached: ballistic flight under gravity and wind, stopping on the
/// ground plane.
inline BallState step_ball(const BallState& ball, const Vec3& support_accel, const Vec3& wind_force,
                           const PendulumParams& p, double dt) {
    if (!(dt > 0.0)) throw InputError("step_ball: dt must be positive");
    BallState out = ball;
    const Vec3 gravity(0.0, 0.0, -p.gravity);

    if (!ball.attached) {
        const Vec3 a = gravity + wind_force / p.mass;
        out.free_position = ball.free_position + dt * ball.free_velocity + 0.5 * dt * dt * a;
        out.free_velocity = ball.free_velocity + dt * a;
        if (out.free_position.z() <= 0.0) {
            out.free_position.z() = 0.0;
            out.free_velocity.setZero();
        }
        return out;
    }

    const Vec3 accel = gravity + wind_force / p.mass - support_accel;
    const RodKinematics r0 = rod_from_angles(ball);
    const auto k1 = detail::rod_rhs(r0.n, r0.n_dot, accel, p);
    const auto k2 = detail::rod_rhs(r0.n + 0.5 * dt * k1.dn, r0.n_dot + 0.5 * dt * k1.dn_dot, accel, p);
    const auto k3 = detail::rod_rhs(r0.n + 0.5 * dt * k2.dn, r0.n_dot + 0.5 * dt * k2.dn_dot, accel, p);
    const auto k4 = detail::rod_rhs(r0.n + dt * k3.dn, r0.n_dot + dt * k3.dn_dot, accel, p);

    RodKinematics r1;
    r1.n = r0.n + dt / 6.0 * (k1.dn + 2.0 * k2.dn + 2.0 * k3.dn + k4.dn);
    r1.n_dot = r0.n_dot + dt / 6.0 * (k1.dn_dot + 2.0 * k2.dn_dot + 2.0 * k3.dn_dot + k4.dn_dot);
    r1.n.normalize();
    r1.n_dot -= r1.n.dot(r1.n_dot) * r1.n;
    angles_from_rod(r1, out);
    return out;
}

/// The rod has swung to or above horizontal.
inline bool is_invalid_swing(const BallState& ball) {
    return ball.attached && std::abs(ball.theta) >= kPi / 2.0;
}

/// Inclusive threshold: a pull equal to the threshold detaches.
inline bool detach_check(double pull_force, double threshold) {
    if (!(pull_force >= 0.0)) throw InputError("detach_check: pull force must be >= 0");
    return pull_force >= threshold;
}

/// Frees the ball, seeding the ballistic state from its current kinematics.
inline BallState release_ball(const BallState& ball, const Vec3& support, const Vec3& support_velocity,
                              double length) {
    BallState out = ball;
    if (!ball.attached) return out;
    out.free_position = ball_world_position(support, ball, length);
    out.free_velocity = ball_world_velocity(support_velocity, ball, length);
    out.attached = false;
    return out;
}

// ---------------------------------------------------------------------------
// Wind
// ---------------------------------------------------------------------------

/// Per-axis Ornstein-Uhlenbeck force on the ball.
struct WindModel {
    Vec3 mean = Vec3::Zero();   // N
    Vec3 sigma = Vec3::Zero();  // N, stationary standard deviation
    double correlation_time = 2.0;  // s
};

class WindProcess {
public:
    WindProcess(WindModel model, RngStream rng) : model_(std::move(model)), rng_(std::move(rng)) {
        force_ = model_.mean;
        for (int i = 0; i < 3; ++i) force_[i] += rng_.normal(0.0, model_.sigma[i]);
    }

    const Vec3& force() const { return force_; }

    /// Exact OU discretization over dt.
    const Vec3& step(double dt) {
        const double decay = std::exp(-dt / model_.correlation_time);
        const double diffusion = std::sqrt(1.0 - decay * decay);
        for (int i = 0; i < 3; ++i)
            force_[i] = model_.mean[i] + decay * (force_[i] - model_.mean[i]) + rng_.normal(0.0, model_.sigma[i] * diffusion);
        return force_;
    }

private:
    WindModel model_;
    RngStream rng_;
    Vec3 force_;
};

}  // namespace aerocap
