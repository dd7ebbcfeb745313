#pragma once

// Image-based guidance: PD laws on the tracked pixel center and range, the
// camera-to-world command transform, saturation, and a lawnmower search.

#include "aerocap/camera.hpp"
#include "aerocap/perception.hpp"
#include "aerocap/world.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace aerocap {

struct GuidanceGains {
    double kp_psi = 0.005;  // rad/s per px
    double kd_psi = 0.002;  // rad/s per px/s
    double kp_z = 0.004;    // m/s per px
    double kd_z = 0.001;    // m/s per px/s
    double kp_r = 0.8;      // 1/s
    double kd_r = 0.3;
    double r_des = 2.5;     // m
};

struct CommandLimits {
    double v_max_h = 3.0;       // m/s, horizontal norm
    double v_max_z = 1.5;       // m/s
    double yaw_rate_max = 1.0;  // rad/s
};

/// Visual-servoing command in the camera frame:
///
///   yaw_rate   = kp_psi (W/2 - x) - kd_psi x_dot
///   climb      = kp_z   (H/2 - y) - kd_z   y_dot
///   range_rate = kp_r (r_des - r) - kd_r   r_dot
///
/// `range_rate` is the desired rate of change of range. Flying forward along
/// the optical axis shrinks range, so the forward velocity is its negation:
/// positive (toward the target) when r > r_des. No lateral component; azimuth
/// is handled by yaw.
inline VelocityCommand servo_command(const TrackEstimate& track, const CameraIntrinsics& intr,
                                     const GuidanceGains& g) {
    if (!track.alive()) throw NoCommand("servo_command: no estimate to servo on");
    VelocityCommand cmd;
    cmd.frame = Frame::camera;
    cmd.yaw_rate = g.kp_psi * (intr.cx() - track.x()) + g.kd_psi * (-track.x_dot());
    cmd.velocity.z() = g.kp_z * (intr.cy() - track.y()) + g.kd_z * (-track.y_dot());
    cmd.velocity.x() = -(g.kp_r * (g.r_des - track.range()) + g.kd_r * (-track.range_rate()));
    cmd.velocity.y() = 0.0;
    return cmd;
}

/// Camera axes coincide with the vehicle's (forward mount, level flight), so
/// the command only needs rotating by yaw into the world frame.
inline VelocityCommand camera_to_vehicle(const VelocityCommand& cmd, const CameraMount& /*mount*/, double vehicle_yaw) {
    if (cmd.frame != Frame::camera) throw ContractError("camera_to_vehicle: expected a camera-frame command");
    VelocityCommand out = cmd;
    out.velocity = yaw_rotation(vehicle_yaw) * cmd.velocity;
    out.frame = Frame::world;
    return out;
}

/// Clamps a command. The horizontal pair is scaled as a vector so its
/// direction survives.
inline VelocityCommand saturate(const VelocityCommand& cmd, const CommandLimits& limits) {
    VelocityCommand out = cmd;
    out.velocity = limit_velocity(cmd.velocity, limits.v_max_h, limits.v_max_z);
    out.yaw_rate = std::clamp(cmd.yaw_rate, -limits.yaw_rate_max, limits.yaw_rate_max);
    return out;
}

// ---------------------------------------------------------------------------
// Exploration
// ---------------------------------------------------------------------------

struct SearchArea {
    double x_min = 0.0;
    double x_max = 40.0;
    double y_min = -15.0;
    double y_max = 15.0;
};

struct ExploreParams {
    SearchArea area;
    double lane_spacing = 10.0;  // m
    double altitude = 5.0;       // m
    double speed = 2.0;          // m/s
    double capture_radius = 0.5; // m, waypoint advance
    double position_gain = 1.0;  // 1/s
    double yaw_gain = 1.5;       // 1/s
};

/// Boustrophedon waypoints along x, lanes spaced at most `lane_spacing` apart
/// and inset half a spacing from the y edges.
inline std::vector<Vec3> lawnmower_waypoints(const ExploreParams& p) {
    const auto& a = p.area;
    if (!(a.x_max > a.x_min) || !(a.y_max > a.y_min) || !(p.lane_spacing > 0.0))
        throw InputError("lawnmower_waypoints: degenerate search area");
    const double height = a.y_max - a.y_min;
    const int lanes = std::max(1, static_cast<int>(std::ceil(height / p.lane_spacing - 1e-9)));
    const double step = height / lanes;
    std::vector<Vec3> wps;
    for (int i = 0; i < lanes; ++i) {
        const double y = a.y_min + (i + 0.5) * step;
        const bool forward = i % 2 == 0;
        wps.emplace_back(forward ? a.x_min : a.x_max, y, p.altitude);
        wps.emplace_back(forward ? a.x_max : a.x_min, y, p.altitude);
    }
    return wps;
}

/// Goes to `goal` at up to `speed`, yawing toward the direction of travel (or
/// toward `face` when given).
inline VelocityCommand goto_command(const UavState& current, const Vec3& goal, double speed, double position_gain,
                                    double yaw_gain, const std::optional<Vec3>& face = std::nullopt) {
    VelocityCommand cmd;
    cmd.frame = Frame::world;
    const Vec3 err = goal - current.position;
    const double dist = err.norm();
    if (dist > 0.0) cmd.velocity = err / dist * std::min(speed, position_gain * dist);
    const Vec3 look = face ? Vec3(*face - current.position) : err;
    if (std::hypot(look.x(), look.y()) > 0.25)
        cmd.yaw_rate = yaw_gain * wrap_angle(std::atan2(look.y(), look.x()) - current.yaw);
    return cmd;
}

/// Stateful lawnmower search. The pattern repeats once finished.
class Explorer {
public:
    explicit Explorer(ExploreParams p) : params_(std::move(p)), waypoints_(lawnmower_waypoints(params_)) {}

    const std::vector<Vec3>& waypoints() const { return waypoints_; }
    std::size_t active() const { return index_; }
    void restart() { index_ = 0; }

    VelocityCommand command(const UavState& current) {
        if ((waypoints_[index_] - current.position).norm() <= params_.capture_radius)
            index_ = (index_ + 1) % waypoints_.size();
        return goto_command(current, waypoints_[index_], params_.speed, params_.position_gain, params_.yaw_gain);
    }

private:
    ExploreParams params_;
    std::vector<Vec3> waypoints_;
    std::size_t index_ = 0;
};

/// Search command at time t. The time argument is informational; progress is
/// carried by the explorer's waypoint index.
inline VelocityCommand explore_command(double /*t*/, Explorer& explorer, const UavState& current) {
    return explorer.command(current);
}

}  // namespace aerocap
