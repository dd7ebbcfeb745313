#pragma once

// Image-plane tracking: a constant-velocity Kalman filter over pixel center
// and known-size range, a track lifecycle (init, coast, reacquire, drop), and
// the drone-to-ball attention switch.

#include "aerocap/camera.hpp"
#include "aerocap/core.hpp"

#include <cmath>
#include <optional>
#include <string_view>

namespace aerocap {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

enum class TrackStatus { uninitialized, tracking, coasting };

inline std::string_view to_string(TrackStatus s) {
    switch (s) {
        case TrackStatus::uninitialized: return "uninitialized";
        case TrackStatus::tracking: return "tracking";
        case TrackStatus::coasting: return "coasting";
    }
    return "?";
}

/// State layout: (x, y, x_dot, y_dot, r, r_dot) in (px, px, px/s, px/s, m, m/s).
struct TrackEstimate {
    enum Index { kX = 0, kY = 1, kXDot = 2, kYDot = 3, kR = 4, kRDot = 5 };

    Vec6 state = Vec6::Zero();
    Mat6 covariance = Mat6::Identity();
    TrackStatus status = TrackStatus::uninitialized;
    double t = 0.0;            // time the state refers to
    double last_update = 0.0;  // time of the last accepted measurement
    ObjectClass cls = ObjectClass::ball;

    double x() const { return state[kX]; }
    double y() const { return state[kY]; }
    double x_dot() const { return state[kXDot]; }
    double y_dot() const { return state[kYDot]; }
    double range() const { return state[kR]; }
    double range_rate() const { return state[kRDot]; }
    int rejections = 0;        // consecutive gated-out detections
    bool alive() const { return status != TrackStatus::uninitialized; }
};

struct TrackerParams {
    double q_pixel = 200.0;  // px^2/s^3
    double q_range = 2.0;    // m^2/s^3
    double sigma_pixel = 2.0;    // px, measurement noise on the center
    double sigma_size = 0.5;     // px, box-width noise, propagated into range
    double min_sigma_range = 0.02;  // m
    double gate = 9.21;          // chi^2, 2 dof on the pixel innovation
    double init_sigma_velocity = 100.0;    // px/s
    double init_sigma_range_rate = 2.0;    // m/s
    double init_range = 6.0;        // m, ball tracks start only this close
    double drone_init_range = 25.0; // m
    double loss_timeout = 0.8;      // s
    int reseed_after = 3;           // consecutive rejections before re-seeding; 0 disables

    double init_range_for(ObjectClass c) const { return c == ObjectClass::ball ? init_range : drone_init_range; }
};

namespace detail {

// Discrete constant-velocity block [[dt^3/3, dt^2/2], [dt^2/2, dt]] * q.
inline Eigen::Matrix2d cv_process_noise(double q, double dt) {
    Eigen::Matrix2d m;
    m << dt * dt * dt / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt;
    return q * m;
}

inline void symmetrize(Mat6& p) { p = 0.5 * (p + p.transpose()).eval(); }

}  // namespace detail

inline Mat6 transition_matrix(double dt) {
    Mat6 f = Mat6::Identity();
    f(TrackEstimate::kX, TrackEstimate::kXDot) = dt;
    f(TrackEstimate::kY, TrackEstimate::kYDot) = dt;
    f(TrackEstimate::kR, TrackEstimate::kRDot) = dt;
    return f;
}

inline Mat6 process_noise(const TrackerParams& p, double dt) {
    using T = TrackEstimate;
    Mat6 q = Mat6::Zero();
    const auto qp = detail::cv_process_noise(p.q_pixel, dt);
    const auto qr = detail::cv_process_noise(p.q_range, dt);
    for (auto [pos, vel] : {std::pair{T::kX, T::kXDot}, std::pair{T::kY, T::kYDot}}) {
        q(pos, pos) = qp(0, 0);
        q(pos, vel) = q(vel, pos) = qp(0, 1);
        q(vel, vel) = qp(1, 1);
    }
    q(T::kR, T::kR) = qr(0, 0);
    q(T::kR, T::kRDot) = q(T::kRDot, T::kR) = qr(0, 1);
    q(T::kRDot, T::kRDot) = qr(1, 1);
    return q;
}

/// Measurement matrix picking (x, y, r).
inline Eigen::Matrix<double, 3, 6> measurement_matrix() {
    Eigen::Matrix<double, 3, 6> h = Eigen::Matrix<double, 3, 6>::Zero();
    h(0, TrackEstimate::kX) = 1.0;
    h(1, TrackEstimate::kY) = 1.0;
    h(2, TrackEstimate::kR) = 1.0;
    return h;
}

/// Range noise from box-width noise: sigma_r = r * sigma_w / w.
inline double range_sigma(double range, double box_width, const TrackerParams& p) {
    return std::max(p.min_sigma_range, range * p.sigma_size / std::max(box_width, 1e-9));
}

inline Eigen::Matrix3d measurement_noise(double sigma_range, const TrackerParams& p) {
    const double sp2 = p.sigma_pixel * p.sigma_pixel;
    return Eigen::Vector3d(sp2, sp2, sigma_range * sigma_range).asDiagonal();
}

/// Constant-velocity prediction by dt.
inline TrackEstimate kf_predict(const TrackEstimate& track, double dt, const TrackerParams& p) {
    if (track.status == TrackStatus::uninitialized) throw ContractError("kf_predict: track is uninitialized");
    if (!(dt > 0.0)) throw InputError("kf_predict: dt must be positive");
    const Mat6 f = transition_matrix(dt);
    TrackEstimate out = track;
    out.state = f * track.state;
    out.covariance = f * track.covariance * f.transpose() + process_noise(p, dt);
    detail::symmetrize(out.covariance);
    out.t = track.t + dt;
    return out;
}

struct KfUpdate {
    TrackEstimate track;
    bool accepted = false;
    double mahalanobis2 = 0.0;  // pixel innovation, 2 dof
};

/// Linear update on (x, y, r) with a chi-square gate on the pixel innovation.
/// A rejected measurement leaves the estimate untouched and the track coasting.
inline KfUpdate kf_update(const TrackEstimate& track, const ImageDetection& det, double range, double sigma_range,
                          const TrackerParams& p) {
    if (track.status == TrackStatus::uninitialized) throw ContractError("kf_update: track is uninitialized");
    if (!std::isfinite(det.x) || !std::isfinite(det.y) || !std::isfinite(range) || !std::isfinite(sigma_range))
        throw InputError("kf_update: non-finite measurement");

    const auto h = measurement_matrix();
    const Eigen::Vector3d z(det.x, det.y, range);
    const Eigen::Vector3d innovation = z - h * track.state;
    const Eigen::Matrix3d s = h * track.covariance * h.transpose() + measurement_noise(sigma_range, p);

    KfUpdate result{track, false, 0.0};
    const Eigen::Vector2d pix = innovation.head<2>();
    result.mahalanobis2 = pix.dot(s.topLeftCorner<2, 2>().ldlt().solve(pix));
    if (result.mahalanobis2 > p.gate) {
        result.track.status = TrackStatus::coasting;
        return result;
    }

    const Eigen::Matrix<double, 6, 3> k = track.covariance * h.transpose() * s.inverse();
    const Mat6 i_kh = Mat6::Identity() - k * h;
    result.track.state = track.state + k * innovation;
    // Joseph form keeps the covariance PSD.
    result.track.covariance = i_kh * track.covariance * i_kh.transpose() +
                              k * measurement_noise(sigma_range, p) * k.transpose();
    detail::symmetrize(result.track.covariance);
    result.track.status = TrackStatus::tracking;
    result.track.last_update = det.t;
    result.accepted = true;
    return result;
}

/// Fresh track at a detection: zero rates, configured initial covariance.
inline TrackEstimate init_track(const ImageDetection& det, double range, double sigma_range, const TrackerParams& p) {
    TrackEstimate t;
    t.cls = det.cls;
    t.state << det.x, det.y, 0.0, 0.0, range, 0.0;
    const double sp2 = p.sigma_pixel * p.sigma_pixel;
    const double sv2 = p.init_sigma_velocity * p.init_sigma_velocity;
    Vec6 diag;
    diag << sp2, sp2, sv2, sv2, sigma_range * sigma_range, p.init_sigma_range_rate * p.init_sigma_range_rate;
    t.covariance = diag.asDiagonal();
    t.status = TrackStatus::tracking;
    t.t = det.t;
    t.last_update = det.t;
    return t;
}

struct LifecycleStep {
    TrackEstimate track;
    bool initialized = false;
    bool rejected = false;
    bool lost = false;
    bool reseeded = false;
    double mahalanobis2 = 0.0;
};

/// Shifts a track's pixel center and range for a known yaw change of the
/// observing camera between two frames. Leaves rates and covariance alone.
inline TrackEstimate compensate_yaw(const TrackEstimate& track, double yaw_change, const CameraIntrinsics& intr) {
    if (!track.alive() || yaw_change == 0.0) return track;
    const double f = intr.focal_length;
    const double bearing = std::atan((intr.cx() - track.x()) / f);
    const double bearing_new = bearing - yaw_change;
    if (std::abs(bearing_new) > 1.4) return track;
    const double scale = std::cos(bearing) / std::cos(bearing_new);
    TrackEstimate out = track;
    out.state[TrackEstimate::kX] = intr.cx() - f * std::tan(bearing_new);
    out.state[TrackEstimate::kY] = intr.cy() + (track.y() - intr.cy()) * scale;
    out.state[TrackEstimate::kR] = track.range() / scale;
    return out;
}

/// Advances a track to time t given at most one detection (with its range).
///
///   uninitialized + detection within init range -> tracking
///   tracking/coasting + gated detection         -> tracking
///   tracking + nothing usable                   -> coasting
///   coasting longer than loss_timeout           -> uninitialized
///
/// Repeated gate rejections of an in-range detection re-seed the track.
inline LifecycleStep track_lifecycle(const TrackEstimate& track, const std::optional<ImageDetection>& det,
                                     std::optional<double> range, double t, const TrackerParams& p) {
    LifecycleStep out{track};
    if (!track.alive()) {
        if (det && range && *range <= p.init_range_for(det->cls)) {
            ImageDetection d = *det;
            d.t = t;
            out.track = init_track(d, *range, range_sigma(*range, d.w, p), p);
            out.initialized = true;
        }
        return out;
    }
    if (t < track.t) throw InputError("track_lifecycle: time went backwards");

    TrackEstimate predicted = t > track.t ? kf_predict(track, t - track.t, p) : track;
    if (det && range) {
        ImageDetection d = *det;
        d.t = t;
        const auto upd = kf_update(predicted, d, *range, range_sigma(*range, d.w, p), p);
        out.track = upd.track;
        out.mahalanobis2 = upd.mahalanobis2;
        out.rejected = !upd.accepted;
        out.track.rejections = upd.accepted ? 0 : track.rejections + 1;
        if (p.reseed_after > 0 && out.track.rejections >= p.reseed_after && *range <= p.init_range_for(d.cls)) {
            out.track = init_track(d, *range, range_sigma(*range, d.w, p), p);
            out.reseeded = true;
        }
    } else {
        out.track = predicted;
        out.track.status = TrackStatus::coasting;
    }
    if (out.track.status == TrackStatus::coasting && t - out.track.last_update > p.loss_timeout) {
        out.track = TrackEstimate{};
        out.track.cls = track.cls;
        out.track.t = t;
        out.lost = true;
    }
    return out;
}

struct TargetSelection {
    ObjectClass active = ObjectClass::drone;
    double switch_range = 8.0;  // m
};

/// Attention switch: the drone until it is within switch range and the ball is
/// being tracked, then the ball for as long as its track stays alive.
inline TargetSelection select_target(const TrackEstimate& drone_track, const TrackEstimate& ball_track,
                                     const TargetSelection& selection) {
    TargetSelection out = selection;
    if (selection.active == ObjectClass::ball && ball_track.alive()) return out;
    const bool drone_close = drone_track.alive() && drone_track.range() <= selection.switch_range;
    out.active = drone_close && ball_track.status == TrackStatus::tracking ? ObjectClass::ball : ObjectClass::drone;
    return out;
}

}  // namespace aerocap
