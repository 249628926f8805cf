#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "tsl/error.hpp"

namespace tsl {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 left_normal(double heading) { return {-std::sin(heading), std::cos(heading)}; }

/// Position along a path: arclength s and signed lateral offset d,
/// positive to the left of the travel direction.
struct FrenetPose {
    double s = 0.0;
    double d = 0.0;
};

class Polyline {
public:
    explicit Polyline(std::vector<Vec2> pts) : pts_(std::move(pts)) {
        if (pts_.size() < 2) throw InvalidInput("polyline needs at least two points");
        s_.reserve(pts_.size());
        s_.push_back(0.0);
        for (std::size_t i = 1; i < pts_.size(); ++i) {
            const double len = norm(pts_[i] - pts_[i - 1]);
            if (!(len > 0.0)) throw InvalidInput("polyline has repeated vertices");
            s_.push_back(s_.back() + len);
        }
    }

    const std::vector<Vec2>& points() const noexcept { return pts_; }
    const std::vector<double>& arclengths() const noexcept { return s_; }
    double length() const noexcept { return s_.back(); }
    std::size_t size() const noexcept { return pts_.size(); }

    /// Point at arclength s, clamped to the ends.
    Vec2 at(double s) const {
        const auto [i, t] = locate(s);
        return pts_[i] + t * (pts_[i + 1] - pts_[i]);
    }

    /// Unit tangent of the segment containing s.
    Vec2 tangent(double s) const {
        const auto [i, t] = locate(s);
        (void)t;
        const Vec2 v = pts_[i + 1] - pts_[i];
        return (1.0 / norm(v)) * v;
    }

    Polyline reversed() const {
        std::vector<Vec2> r(pts_.rbegin(), pts_.rend());
        return Polyline(std::move(r));
    }

private:
    std::pair<std::size_t, double> locate(double s) const {
        s = std::clamp(s, 0.0, length());
        auto it = std::upper_bound(s_.begin(), s_.end(), s);
        std::size_t i = it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
        if (i + 1 >= pts_.size()) i = pts_.size() - 2;
        return {i, (s - s_[i]) / (s_[i + 1] - s_[i])};
    }

    std::vector<Vec2> pts_;
    std::vector<double> s_;
};

/// Closest-point projection onto a polyline. The offset d is measured
/// perpendicular to the segment of the projection point, so points beyond
/// an end clamp to s = 0 or s = length. Equidistant candidates resolve to
/// the smallest s.
inline FrenetPose frenet_project(const Polyline& line, Vec2 p) {
    const auto& pts = line.points();
    const auto& ss = line.arclengths();
    double best = std::numeric_limits<double>::infinity();
    FrenetPose out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i], v = pts[i + 1] - pts[i];
        const double len2 = dot(v, v);
        const double t = std::clamp(dot(p - a, v) / len2, 0.0, 1.0);
        const Vec2 q = a + t * v;
        const double dist = norm(p - q);
        if (dist < best - 1e-12) {
            best = dist;
            const double len = std::sqrt(len2);
            out.s = ss[i] + t * len;
            out.d = cross((1.0 / len) * v, p - q);
        }
    }
    return out;
}

/// Parameter pair (t along a, u along b) where segments a0-a1 and b0-b1
/// intersect, or nothing when they are parallel or disjoint.
inline std::optional<std::pair<double, double>> segment_intersection(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
    const Vec2 r = a1 - a0, q = b1 - b0;
    const double den = cross(r, q);
    if (std::abs(den) < 1e-15) return std::nullopt;
    const double t = cross(b0 - a0, q) / den;
    const double u = cross(b0 - a0, r) / den;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return std::pair{t, u};
}

/// One planView primitive of a reference line.
struct RefLineSegment {
    enum class Kind { Line, Arc };
    Kind kind = Kind::Line;
    double s0 = 0.0;  // start arclength on the road
    Vec2 origin;
    double heading = 0.0;
    double length = 0.0;
    double curvature = 0.0;

    /// Position at local arclength u in [0, length].
    Vec2 position(double u) const {
        if (kind == Kind::Line) return origin + u * Vec2{std::cos(heading), std::sin(heading)};
        const double k = curvature;
        return {origin.x + (std::sin(heading + k * u) - std::sin(heading)) / k,
                origin.y - (std::cos(heading + k * u) - std::cos(heading)) / k};
    }

    double heading_at(double u) const { return kind == Kind::Line ? heading : heading + curvature * u; }
};

}  // namespace tsl
