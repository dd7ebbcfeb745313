#pragma once

// Figures derived from a run log. Each figure is built from a PlotTable, and
// the table is written next to the SVG as CSV so the figure can be redrawn
// from the CSV alone.

#include "aerocap/simlog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace aerocap {

enum class PlotKind { depth_profile, trajectory_3d, pixel_error, phase_timeline };

inline std::string_view to_string(PlotKind k) {
    switch (k) {
        case PlotKind::depth_profile: return "depth_profile";
        case PlotKind::trajectory_3d: return "trajectory_3d";
        case PlotKind::pixel_error: return "pixel_error";
        case PlotKind::phase_timeline: return "phase_timeline";
    }
    return "?";
}

inline std::optional<PlotKind> plot_kind_from_string(std::string_view s) {
    for (auto k : {PlotKind::depth_profile, PlotKind::trajectory_3d, PlotKind::pixel_error, PlotKind::phase_timeline})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

/// The log lacks a record stream the figure needs.
class MissingStream : public InputError {
public:
    explicit MissingStream(const std::string& record_type)
        : InputError("log has no " + record_type + " records for this plot"), record_type_(record_type) {}
    const std::string& record_type() const { return record_type_; }

private:
    std::string record_type_;
};

struct PlotTable {
    PlotKind kind = PlotKind::depth_profile;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw InputError("plot table: no column " + std::string(name));
    }
    double number(std::size_t row, std::size_t col) const { return std::stod(rows[row][col]); }
};

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Tables from logs
// ---------------------------------------------------------------------------

/// Grabber camera depth to the ball, per detection, up to the capture.
inline PlotTable depth_profile_table(const SimLog& log) {
    PlotTable t{PlotKind::depth_profile, {"t", "depth", "marker"}, {}};
    const double end = log.capture_time.value_or(std::numeric_limits<double>::infinity());
    for (const auto* d : log.all<DetectionRecord>()) {
        if (d->drone != DroneId::grabber || d->det.cls != ObjectClass::ball || d->t > end) continue;
        t.rows.push_back({format_number(d->t), format_number(d->range), ""});
    }
    if (t.rows.empty()) throw MissingStream("detection");
    if (log.capture_time) t.rows.push_back({format_number(*log.capture_time), t.rows.back()[1], "capture"});
    return t;
}

inline PlotTable trajectory_table(const SimLog& log) {
    const auto truth = log.all<TruthRecord>();
    if (truth.empty()) throw MissingStream("truth");
    const bool with_tracker = truth.front()->tracker.has_value();
    PlotTable t{PlotKind::trajectory_3d, {"t", "grabber_x", "grabber_y", "grabber_z"}, {}};
    if (with_tracker) t.columns.insert(t.columns.end(), {"tracker_x", "tracker_y", "tracker_z"});
    t.columns.insert(t.columns.end(), {"ball_x", "ball_y", "ball_z"});
    auto push = [](std::vector<std::string>& row, const Vec3& v) {
        for (int i = 0; i < 3; ++i) row.push_back(format_number(v[i]));
    };
    // One row per 0.1 s keeps the figure readable; endpoints always included.
    const std::int64_t stride = std::max<std::int64_t>(1, std::llround(0.1 / log.header["meta"].value("dt", 0.0025)));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto* r = truth[i];
        if (i != 0 && i + 1 != truth.size() && r->step % stride != 0) continue;
        std::vector<std::string> row{format_number(r->t)};
        push(row, r->grabber.position);
        if (with_tracker) push(row, r->tracker ? r->tracker->position : Vec3::Zero());
        push(row, r->ball_position);
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Grabber's filtered ball center relative to the image center.
inline PlotTable pixel_error_table(const SimLog& log) {
    const auto& cam = log.header.at("config").at("camera");
    const double cx = cam.at("width").get<double>() / 2.0;
    const double cy = cam.at("height").get<double>() / 2.0;
    PlotTable t{PlotKind::pixel_error, {"t", "ex", "ey"}, {}};
    for (const auto* r : log.all<TrackRecord>()) {
        if (r->drone != DroneId::grabber || r->cls != ObjectClass::ball || r->status == TrackStatus::uninitialized) continue;
        t.rows.push_back({format_number(r->t), format_number(r->state[0] - cx), format_number(r->state[1] - cy)});
    }
    if (t.rows.empty()) throw MissingStream("track");
    return t;
}

/// One band per phase visit.
inline PlotTable phase_timeline_table(const SimLog& log) {
    const auto transitions = log.transitions();
    if (transitions.empty()) throw MissingStream("phase");
    PlotTable t{PlotKind::phase_timeline, {"drone", "phase", "t_start", "t_end"}, {}};
    std::map<DroneId, std::pair<MissionPhase, double>> open;
    std::vector<DroneId> order;
    for (const auto& tr : transitions) {
        auto it = open.find(tr.drone);
        if (it == open.end()) {
            order.push_back(tr.drone);
            if (tr.t > 0.0) t.rows.push_back({std::string(to_string(tr.drone)), std::string(to_string(tr.from)), "0", format_number(tr.t)});
        } else {
            t.rows.push_back({std::string(to_string(tr.drone)), std::string(to_string(it->second.first)),
                              format_number(it->second.second), format_number(tr.t)});
        }
        open[tr.drone] = {tr.to, tr.t};
    }
    for (DroneId d : order) {
        const auto& [phase, start] = open[d];
        t.rows.push_back({std::string(to_string(d)), std::string(to_string(phase)), format_number(start),
                          format_number(std::max(start, log.end_time))});
    }
    return t;
}

inline PlotTable plot_table(PlotKind kind, const SimLog& log) {
    switch (kind) {
        case PlotKind::depth_profile: return depth_profile_table(log);
        case PlotKind::trajectory_3d: return trajectory_table(log);
        case PlotKind::pixel_error: return pixel_error_table(log);
        case PlotKind::phase_timeline: return phase_timeline_table(log);
    }
    throw InputError("unknown plot kind");
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string table_to_csv(const PlotTable& t) {
    std::ostringstream os;
    os << "# kind=" << to_string(t.kind) << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
    return os.str();
}

inline PlotTable table_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) out.push_back(cell);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    PlotTable t;
    if (!std::getline(is, line) || line.rfind("# kind=", 0) != 0) throw InputError("plot csv: missing kind line");
    const auto kind = plot_kind_from_string(line.substr(7));
    if (!kind) throw InputError("plot csv: unknown kind " + line.substr(7));
    t.kind = *kind;
    if (!std::getline(is, line)) throw InputError("plot csv: missing column line");
    t.columns = split(line);
    while (std::getline(is, line)) {
        auto row = split(line);
        row.resize(t.columns.size());
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace detail {

struct Axis {
    double lo = 0.0, hi = 1.0;
    double pix_lo = 0.0, pix_hi = 1.0;
    double map(double v) const { return pix_lo + (v - lo) / (hi - lo) * (pix_hi - pix_lo); }
};

inline Axis make_axis(double lo, double hi, double pix_lo, double pix_hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad, pix_lo, pix_hi};
}

inline double nice_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) return m * mag;
    return 10.0 * mag;
}

class Svg {
public:
    Svg(int w, int h) : w_(w), h_(h) {}

    void text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12) {
        body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << size << "\" text-anchor=\""
              << anchor << "\">" << s << "</text>\n";
    }
    void line(double x1, double y1, double x2, double y2, const char* stroke = "#000", double width = 1.0) {
        body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\"" << fmt(y2)
              << "\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(width) << "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke) {
        body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) body_ << (i ? " " : "") << fmt(pts[i].first) << ',' << fmt(pts[i].second);
        body_ << "\"/>\n";
    }
    void circle(double x, double y, double r, const char* fill) {
        body_ << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r) << "\" fill=\"" << fill << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const char* fill) {
        body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
              << "\" fill=\"" << fill << "\" stroke=\"#333\" stroke-width=\"0.5\"/>\n";
    }

    void axes(const Axis& x, const Axis& y, const std::string& xlabel, const std::string& ylabel) {
        line(x.pix_lo, y.pix_lo, x.pix_hi, y.pix_lo);
        line(x.pix_lo, y.pix_lo, x.pix_lo, y.pix_hi);
        const double xs = nice_step(x.hi - x.lo);
        for (double v = std::ceil(x.lo / xs) * xs; v <= x.hi; v += xs) {
            line(x.map(v), y.pix_lo, x.map(v), y.pix_lo + 4);
            text(x.map(v), y.pix_lo + 16, fmt(v));
        }
        const double ys = nice_step(y.hi - y.lo);
        for (double v = std::ceil(y.lo / ys) * ys; v <= y.hi; v += ys) {
            line(x.pix_lo - 4, y.map(v), x.pix_lo, y.map(v));
            text(x.pix_lo - 6, y.map(v) + 4, fmt(v), "end");
        }
        text((x.pix_lo + x.pix_hi) / 2, y.pix_lo + 34, xlabel);
        body_ << "<text x=\"14\" y=\"" << fmt((y.pix_lo + y.pix_hi) / 2) << "\" font-size=\"12\" text-anchor=\"middle\" "
              << "transform=\"rotate(-90 14 " << fmt((y.pix_lo + y.pix_hi) / 2) << ")\">" << ylabel << "</text>\n";
    }

    std::string str(const std::string& title) const {
        std::ostringstream os;
        os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_ << "\" viewBox=\"0 0 "
           << w_ << ' ' << h_ << "\" font-family=\"sans-serif\">\n"
           << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n"
           << "<text x=\"" << w_ / 2 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">" << title << "</text>\n"
           << body_.str() << "</svg>\n";
        return os.str();
    }

    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", std::abs(v) < 1e-12 ? 0.0 : v);
        return buf;
    }

private:
    int w_, h_;
    std::ostringstream body_;
};

inline const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};

inline std::string series_svg(const PlotTable& t, const std::vector<std::string>& ys, const std::string& title,
                              const std::string& ylabel) {
    const std::size_t tc = t.column("t");
    double t_lo = 1e300, t_hi = -1e300, v_lo = 1e300, v_hi = -1e300;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        t_lo = std::min(t_lo, t.number(r, tc));
        t_hi = std::max(t_hi, t.number(r, tc));
        for (const auto& y : ys) {
            v_lo = std::min(v_lo, t.number(r, t.column(y)));
            v_hi = std::max(v_hi, t.number(r, t.column(y)));
        }
    }
    Svg svg(720, 420);
    const Axis ax = make_axis(t_lo, t_hi, 70, 700);
    const Axis ay = make_axis(v_lo, v_hi, 370, 40);
    svg.axes(ax, ay, "time [s]", ylabel);
    for (std::size_t k = 0; k < ys.size(); ++k) {
        std::vector<std::pair<double, double>> pts;
        const std::size_t c = t.column(ys[k]);
        for (std::size_t r = 0; r < t.rows.size(); ++r) pts.emplace_back(ax.map(t.number(r, tc)), ay.map(t.number(r, c)));
        svg.polyline(pts, kPalette[k % 9]);
        svg.text(690, 50 + 16.0 * k, ys[k], "end");
        svg.line(600, 46 + 16.0 * k, 620, 46 + 16.0 * k, kPalette[k % 9], 2.0);
    }
    if (std::find(t.columns.begin(), t.columns.end(), "marker") != t.columns.end()) {
        const std::size_t mc = t.column("marker");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            if (t.rows[r][mc].empty()) continue;
            const double x = ax.map(t.number(r, tc));
            svg.line(x, ay.pix_lo, x, ay.pix_hi, "#888", 1.0);
            svg.circle(x, ay.map(t.number(r, t.column(ys.front()))), 4, "#d62728");
            svg.text(x, ay.pix_hi - 4, t.rows[r][mc]);
        }
    }
    return svg.str(title);
}

inline std::string trajectory_svg(const PlotTable& t) {
    // Oblique projection: x right, y receding up-right, z up.
    const double c = std::cos(kPi / 6) * 0.5, s = std::sin(kPi / 6) * 0.5;
    std::vector<std::string> bodies;
    for (const char* b : {"grabber", "tracker", "ball"})
        if (std::find(t.columns.begin(), t.columns.end(), std::string(b) + "_x") != t.columns.end()) bodies.push_back(b);
    auto proj = [&](std::size_t r, const std::string& b) {
        const double x = t.number(r, t.column(b + "_x")), y = t.number(r, t.column(b + "_y")), z = t.number(r, t.column(b + "_z"));
        return std::pair<double, double>(x + c * y, z + s * y);
    };
    double u_lo = 1e300, u_hi = -1e300, v_lo = 1e300, v_hi = -1e300;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (const auto& b : bodies) {
            const auto [u, v] = proj(r, b);
            u_lo = std::min(u_lo, u), u_hi = std::max(u_hi, u), v_lo = std::min(v_lo, v), v_hi = std::max(v_hi, v);
        }
    Svg svg(720, 520);
    const Axis au = make_axis(u_lo, u_hi, 70, 700);
    const Axis av = make_axis(v_lo, v_hi, 470, 40);
    svg.axes(au, av, "x + 0.43 y [m]", "z + 0.25 y [m]");
    for (std::size_t k = 0; k < bodies.size(); ++k) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto [u, v] = proj(r, bodies[k]);
            pts.emplace_back(au.map(u), av.map(v));
        }
        svg.polyline(pts, kPalette[k]);
        svg.circle(pts.front().first, pts.front().second, 4, "#2ca02c");
        svg.circle(pts.back().first, pts.back().second, 4, "#000");
        svg.text(690, 50 + 16.0 * k, bodies[k], "end");
        svg.line(600, 46 + 16.0 * k, 620, 46 + 16.0 * k, kPalette[k], 2.0);
    }
    return svg.str("UAV and ball trajectories (green: start, black: end)");
}

inline std::string timeline_svg(const PlotTable& t) {
    const std::size_t dc = t.column("drone"), pc = t.column("phase"), sc = t.column("t_start"), ec = t.column("t_end");
    std::vector<std::string> drones;
    double t_hi = 0.0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (std::find(drones.begin(), drones.end(), t.rows[r][dc]) == drones.end()) drones.push_back(t.rows[r][dc]);
        t_hi = std::max(t_hi, t.number(r, ec));
    }
    Svg svg(720, 120 + 60 * static_cast<int>(drones.size()));
    const Axis ax = make_axis(0.0, t_hi, 90, 700);
    const double bottom = 60.0 + 60.0 * static_cast<double>(drones.size());
    svg.line(ax.pix_lo, bottom, ax.pix_hi, bottom);
    const double xs = nice_step(ax.hi - ax.lo);
    for (double v = std::ceil(ax.lo / xs) * xs; v <= ax.hi; v += xs) {
        svg.line(ax.map(v), bottom, ax.map(v), bottom + 4);
        svg.text(ax.map(v), bottom + 16, Svg::fmt(v));
    }
    svg.text((ax.pix_lo + ax.pix_hi) / 2, bottom + 34, "time [s]");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto lane = std::find(drones.begin(), drones.end(), t.rows[r][dc]) - drones.begin();
        const double y = 40.0 + 60.0 * static_cast<double>(lane);
        const auto phase = phase_from_string(t.rows[r][pc]);
        const int color = phase ? static_cast<int>(*phase) : 8;
        const double x0 = ax.map(t.number(r, sc)), x1 = ax.map(t.number(r, ec));
        svg.rect(x0, y, std::max(x1 - x0, 0.5), 30, kPalette[color % 9]);
        if (x1 - x0 > 40) svg.text((x0 + x1) / 2, y + 19, t.rows[r][pc], "middle", 10);
        if (r == 0 || t.rows[r][dc] != t.rows[r - 1][dc]) svg.text(84, y + 19, t.rows[r][dc], "end");
    }
    return svg.str("Mission phases");
}

}  // namespace detail

inline std::string render_svg(const PlotTable& t) {
    switch (t.kind) {
        case PlotKind::depth_profile:
            return detail::series_svg(t, {"depth"}, "Ball depth from the grabber camera", "depth [m]");
        case PlotKind::pixel_error:
            return detail::series_svg(t, {"ex", "ey"}, "Ball pixel error from image center", "error [px]");
        case PlotKind::trajectory_3d: return detail::trajectory_svg(t);
        case PlotKind::phase_timeline: return detail::timeline_svg(t);
    }
    return {};
}

/// Sidecar CSV path for a figure path: the extension is replaced by ".csv".
inline std::string sidecar_path(const std::string& figure) {
    const auto slash = figure.find_last_of('/');
    const auto dot = figure.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return figure + ".csv";
    return figure.substr(0, dot) + ".csv";
}

}  // namespace aerocap
