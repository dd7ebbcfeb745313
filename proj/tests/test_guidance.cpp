#include "aerocap/guidance.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace aerocap;

namespace {

TrackEstimate track_at(double x, double y, double r, double xd = 0.0, double yd = 0.0, double rd = 0.0) {
    TrackEstimate t;
    t.state << x, y, xd, yd, r, rd;
    t.status = TrackStatus::tracking;
    return t;
}

double point_segment_distance(double px, double py, const Vec3& a, const Vec3& b) {
    const double dx = b.x() - a.x(), dy = b.y() - a.y();
    const double len2 = dx * dx + dy * dy;
    double s = len2 > 0.0 ? ((px - a.x()) * dx + (py - a.y()) * dy) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return std::hypot(px - (a.x() + s * dx), py - (a.y() + s * dy));
}

}  // namespace

TEST(ServoCommand, ZeroAtSetpoint) {
    const CameraIntrinsics intr;
    const GuidanceGains g;
    const auto cmd = servo_command(track_at(intr.cx(), intr.cy(), g.r_des), intr, g);
    EXPECT_EQ(cmd.frame, Frame::camera);
    EXPECT_EQ(cmd.velocity.x(), 0.0);
    EXPECT_EQ(cmd.velocity.y(), 0.0);
    EXPECT_EQ(cmd.velocity.z(), 0.0);
    EXPECT_EQ(cmd.yaw_rate, 0.0);
    const auto world = camera_to_vehicle(cmd, CameraMount{}, 1.234);
    EXPECT_EQ(world.velocity.norm(), 0.0);
    EXPECT_EQ(world.yaw_rate, 0.0);
}

TEST(ServoCommand, YawHandValue) {
    CameraIntrinsics intr;
    intr.width = 640;
    GuidanceGains g;
    g.kp_psi = 0.005;
    const auto cmd = servo_command(track_at(420.0, intr.cy(), g.r_des), intr, g);
    EXPECT_NEAR(cmd.yaw_rate, -0.5, 1e-15);
}

TEST(ServoCommand, RangeHandValue) {
    const CameraIntrinsics intr;
    GuidanceGains g;
    g.kp_r = 0.8;
    g.r_des = 2.0;
    const auto cmd = servo_command(track_at(intr.cx(), intr.cy(), 5.0), intr, g);
    EXPECT_NEAR(cmd.velocity.x(), 2.4, 1e-15);
    EXPECT_EQ(cmd.velocity.y(), 0.0);
}

TEST(ServoCommand, FiniteDifferenceSignsAndMagnitudes) {
    const CameraIntrinsics intr;
    const GuidanceGains g;
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> ux(0.0, 640.0), uy(0.0, 480.0), ur(0.5, 25.0), urate(-50.0, 50.0),
        urr(-3.0, 3.0);
    const double h = 1e-3;
    for (int i = 0; i < 100; ++i) {
        const double x = ux(gen), y = uy(gen), r = ur(gen), xd = urate(gen), yd = urate(gen), rd = urr(gen);
        const auto c = servo_command(track_at(x, y, r, xd, yd, rd), intr, g);

        // Hand-evaluated laws; the range law is a desired range rate, flown
        // as the negated forward velocity.
        const double yaw = g.kp_psi * (intr.cx() - x) + g.kd_psi * (-xd);
        const double climb = g.kp_z * (intr.cy() - y) + g.kd_z * (-yd);
        const double range_rate = g.kp_r * (g.r_des - r) + g.kd_r * (-rd);
        EXPECT_NEAR(c.yaw_rate, yaw, 1e-12);
        EXPECT_NEAR(c.velocity.z(), climb, 1e-12);
        EXPECT_NEAR(-c.velocity.x(), range_rate, 1e-12);

        const auto dx = servo_command(track_at(x + h, y, r, xd, yd, rd), intr, g);
        const auto dy = servo_command(track_at(x, y + h, r, xd, yd, rd), intr, g);
        const auto dr = servo_command(track_at(x, y, r + h, xd, yd, rd), intr, g);
        const auto dxd = servo_command(track_at(x, y, r, xd + h, yd, rd), intr, g);
        const double d_yaw_dx = (dx.yaw_rate - c.yaw_rate) / h;
        const double d_climb_dy = (dy.velocity.z() - c.velocity.z()) / h;
        const double d_rate_dr = (-dr.velocity.x() + c.velocity.x()) / h;
        EXPECT_LT(d_yaw_dx, 0.0);
        EXPECT_LT(d_climb_dy, 0.0);
        EXPECT_LT(d_rate_dr, 0.0);
        EXPECT_GT((dr.velocity.x() - c.velocity.x()) / h, 0.0);  // farther -> faster forward
        EXPECT_LT((dxd.yaw_rate - c.yaw_rate) / h, 0.0);
        EXPECT_NEAR(d_yaw_dx, -g.kp_psi, 1e-9);
        EXPECT_NEAR(d_climb_dy, -g.kp_z, 1e-9);
        EXPECT_NEAR(d_rate_dr, -g.kp_r, 1e-9);
    }
}

TEST(ServoCommand, DerivativeActionOpposesPixelMotion) {
    const CameraIntrinsics intr;
    const GuidanceGains g;
    EXPECT_LT(servo_command(track_at(intr.cx(), intr.cy(), g.r_des, 10.0), intr, g).yaw_rate, 0.0);
    EXPECT_LT(servo_command(track_at(intr.cx(), intr.cy(), g.r_des, 0.0, 10.0), intr, g).velocity.z(), 0.0);
    // Range shrinking fast: back off.
    EXPECT_LT(servo_command(track_at(intr.cx(), intr.cy(), g.r_des, 0.0, 0.0, -1.0), intr, g).velocity.x(), 0.0);
}

TEST(ServoCommand, BallAboveCenterClimbs) {
    const CameraIntrinsics intr;
    const GuidanceGains g;
    const auto c = camera_to_vehicle(servo_command(track_at(intr.cx(), 100.0, g.r_des), intr, g), CameraMount{}, 0.4);
    EXPECT_GT(c.velocity.z(), 0.0);
}

TEST(ServoCommand, NeedsAnEstimate) {
    const CameraIntrinsics intr;
    EXPECT_THROW(servo_command(TrackEstimate{}, intr, GuidanceGains{}), NoCommand);
    TrackEstimate coasting = track_at(300.0, 200.0, 3.0);
    coasting.status = TrackStatus::coasting;
    EXPECT_NO_THROW(servo_command(coasting, intr, GuidanceGains{}));
}

TEST(CameraToVehicle, Rotations) {
    VelocityCommand c{Vec3(1.0, 0.0, 0.2), 0.1, Frame::camera};
    const auto w0 = camera_to_vehicle(c, CameraMount{}, 0.0);
    EXPECT_EQ(w0.frame, Frame::world);
    EXPECT_NEAR((w0.velocity - Vec3(1.0, 0.0, 0.2)).norm(), 0.0, 1e-15);
    EXPECT_EQ(w0.yaw_rate, 0.1);

    c = VelocityCommand{Vec3(1.0, 0.0, 0.0), 0.0, Frame::camera};
    const auto w90 = camera_to_vehicle(c, CameraMount{}, kPi / 2.0);
    EXPECT_NEAR((w90.velocity - Vec3(0.0, 1.0, 0.0)).norm(), 0.0, 1e-15);

    EXPECT_THROW(camera_to_vehicle(VelocityCommand::zero(Frame::world), CameraMount{}, 0.0), ContractError);
}

TEST(Saturate, ScalesHorizontalPair) {
    CommandLimits lim;
    lim.v_max_h = 2.5;
    lim.v_max_z = 1.0;
    lim.yaw_rate_max = 1.0;
    VelocityCommand c{Vec3(4.0, 3.0, 0.5), 2.0, Frame::world};
    const auto s = saturate(c, lim);
    EXPECT_NEAR(s.velocity.x(), 2.0, 1e-15);
    EXPECT_NEAR(s.velocity.y(), 1.5, 1e-15);
    EXPECT_EQ(s.velocity.z(), 0.5);
    EXPECT_EQ(s.yaw_rate, 1.0);
    EXPECT_EQ(saturate(VelocityCommand{Vec3(0.0, 0.0, -3.0), -4.0, Frame::world}, lim).velocity.z(), -1.0);

    const VelocityCommand within{Vec3(1.0, -1.0, 0.3), 0.2, Frame::world};
    const auto same = saturate(within, lim);
    EXPECT_EQ(same.velocity, within.velocity);
    EXPECT_EQ(same.yaw_rate, within.yaw_rate);
}

TEST(Lawnmower, CoversTheArea) {
    ExploreParams p;
    p.area = SearchArea{0.0, 40.0, -15.0, 15.0};
    p.lane_spacing = 10.0;
    const auto wps = lawnmower_waypoints(p);
    ASSERT_GE(wps.size(), 2u);
    double worst = 0.0;
    for (double x = p.area.x_min; x <= p.area.x_max; x += 0.5)
        for (double y = p.area.y_min; y <= p.area.y_max; y += 0.25) {
            double best = INFINITY;
            for (std::size_t i = 0; i + 1 < wps.size(); ++i)
                best = std::min(best, point_segment_distance(x, y, wps[i], wps[i + 1]));
            worst = std::max(worst, best);
        }
    EXPECT_LE(worst, p.lane_spacing / 2.0 + 1e-9);
    for (const auto& w : wps) EXPECT_EQ(w.z(), p.altitude);
}

TEST(Lawnmower, UnevenAreaStillCovered) {
    ExploreParams p;
    p.area = SearchArea{-5.0, 12.0, 0.0, 23.0};
    p.lane_spacing = 7.0;
    const auto wps = lawnmower_waypoints(p);
    double worst = 0.0;
    for (double x = p.area.x_min; x <= p.area.x_max; x += 0.5)
        for (double y = p.area.y_min; y <= p.area.y_max; y += 0.25) {
            double best = INFINITY;
            for (std::size_t i = 0; i + 1 < wps.size(); ++i)
                best = std::min(best, point_segment_distance(x, y, wps[i], wps[i + 1]));
            worst = std::max(worst, best);
        }
    EXPECT_LE(worst, p.lane_spacing / 2.0 + 1e-9);
    p.area.y_max = p.area.y_min;
    EXPECT_THROW(lawnmower_waypoints(p), InputError);
}

TEST(Explore, AdvancesPastReachedWaypoint) {
    ExploreParams p;
    Explorer e(p);
    UavState s;
    s.position = e.waypoints()[0];
    const auto cmd = explore_command(0.0, e, s);
    EXPECT_EQ(e.active(), 1u);
    const Vec3 to_second = e.waypoints()[1] - s.position;
    EXPECT_GT(cmd.velocity.dot(to_second), 0.0);
    EXPECT_NEAR(cmd.velocity.normalized().dot(to_second.normalized()), 1.0, 1e-12);
}

TEST(Explore, CommandStaysWithinLimits) {
    ExploreParams p;
    CommandLimits lim;
    Explorer e(p);
    UavState s;
    s.position = Vec3(-30.0, 40.0, 0.0);
    for (int k = 0; k < 20000; ++k) {
        const auto cmd = saturate(explore_command(k * 0.05, e, s), lim);
        ASSERT_LE(std::hypot(cmd.velocity.x(), cmd.velocity.y()), lim.v_max_h + 1e-12);
        ASSERT_LE(std::abs(cmd.velocity.z()), lim.v_max_z + 1e-12);
        ASSERT_LE(std::abs(cmd.yaw_rate), lim.yaw_rate_max + 1e-12);
        s = step_uav(s, cmd, UavParams{}, 0.05);
    }
    // After enough time the whole pattern has been flown at least once.
    EXPECT_NE(e.active(), 0u);
}

TEST(GotoCommand, PointsAtGoalAndFaces) {
    UavState s;
    s.position = Vec3(1.0, 1.0, 5.0);
    s.yaw = 0.0;
    const Vec3 goal(1.0, 11.0, 5.0);
    const auto c = goto_command(s, goal, 2.0, 1.0, 1.5);
    EXPECT_NEAR((c.velocity - Vec3(0.0, 2.0, 0.0)).norm(), 0.0, 1e-12);
    EXPECT_NEAR(c.yaw_rate, 1.5 * kPi / 2.0, 1e-12);
    const auto near = goto_command(s, s.position + Vec3(0.5, 0.0, 0.0), 2.0, 1.0, 1.5);
    EXPECT_NEAR(near.velocity.norm(), 0.5, 1e-12);
    const auto facing = goto_command(s, goal, 2.0, 1.0, 1.5, Vec3(-10.0, 1.0, 5.0));
    EXPECT_NEAR(std::abs(facing.yaw_rate), 1.5 * kPi, 1e-12);
}
