#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "abflux/errors.hpp"

namespace abflux {

using Vec2 = Eigen::Vector2d;

/// Convex obstacle (disk or counterclockwise convex polygon) translating
/// rigidly along a path phi(t) with phi(0) = 0.
class Obstacle {
  public:
    static Obstacle disk(const Vec2& center, double radius);
    static Obstacle polygon(std::vector<Vec2> ccw_vertices);

    Obstacle& set_motion(std::function<Vec2(double)> path);
    Obstacle& set_motion(std::function<Vec2(double)> path, std::function<Vec2(double)> velocity);

    bool is_disk() const { return is_disk_; }
    double radius() const { return radius_; }
    const std::vector<Vec2>& vertices() const { return vertices_; }

    Vec2 offset(double t) const;
    Vec2 velocity(double t) const;
    /// Reference centroid translated to time t.
    Vec2 center(double t) const;
    /// Radius of the smallest disk about the centroid covering the shape.
    double bounding_radius() const;

    /// Negative inside, positive outside (exact for disks, exact for convex
    /// polygons outside, inner distance is to the nearest edge).
    double signed_distance(const Vec2& x, double t) const;
    bool contains(const Vec2& x, double t) const { return signed_distance(x, t) < 0.0; }

    /// Nearest intersection of the ray origin + s*dir (s > eps) with the
    /// obstacle boundary at time t; returns (distance, outward normal).
    std::optional<std::pair<double, Vec2>> ray_hit(const Vec2& origin, const Vec2& dir, double t,
                                                   double corner_tol = 1e-9) const;

  private:
    Obstacle() = default;
    bool is_disk_ = true;
    Vec2 center0_ = Vec2::Zero();
    double radius_ = 0.0;
    std::vector<Vec2> vertices_;  // reference-frame, ccw
    std::function<Vec2(double)> path_;
    std::function<Vec2(double)> velocity_;
};

/// Outer region: disk or axis-aligned rectangle.
struct OuterRegion {
    static OuterRegion disk(const Vec2& center, double radius);
    static OuterRegion rectangle(const Vec2& lo, const Vec2& hi);

    bool is_disk = true;
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
    Vec2 lo = Vec2::Zero(), hi = Vec2::Zero();

    bool contains(const Vec2& x) const;
    /// Distance from x (inside) to the outer boundary along dir, with the
    /// outward normal at the exit point.
    std::pair<double, Vec2> ray_exit(const Vec2& origin, const Vec2& dir) const;
    double boundary_distance(const Vec2& x) const;
};

struct Domain {
    OuterRegion outer;
    std::vector<Obstacle> obstacles;
    double t_end = 1.0;

    /// Checks the containment/disjointness invariants on sampled times;
    /// throws DegenerateGeometry on violation.
    void validate(int time_samples = 33) const;
    bool inside(const Vec2& x, double t) const;
};

struct Hit {
    Vec2 point;
    Vec2 normal;      // outward unit normal of the hit surface
    int obstacle;     // index, or -1 for the outer boundary
    double distance;
};

struct RayLeg {
    Vec2 start;
    Vec2 dir;  // unit
    double length;
    double entry_arclength;
};

struct Reflection {
    Vec2 point;
    Vec2 normal;
    int obstacle;
};

struct BrokenRay {
    double t0 = 0.0;
    std::vector<RayLeg> legs;
    std::vector<Reflection> reflections;

    double total_length() const;
    Vec2 point_at(double s) const;
    Vec2 exit_point() const;
    Vec2 exit_direction() const;
};

/// Specular reflection of theta in the unit normal n.
Vec2 reflect_direction(const Vec2& theta, const Vec2& n, double tangency_tol = 1e-6);

std::optional<Hit> first_hit(const Vec2& origin, const Vec2& dir, const Domain& domain, double t0);

BrokenRay trace_broken_ray(const Vec2& origin, const Vec2& omega, double t0, const Domain& domain,
                           int max_reflections = 64, double tangency_tol = 1e-6);

/// One closed, positively oriented polyline loop per obstacle, each keeping
/// distance >= clearance from its obstacle snapshot at t0.
std::vector<std::vector<Vec2>> generator_loops(const Domain& domain, double t0, double clearance,
                                               int segments = 256);

/// Winding number of a closed polyline about a point, by angle summation.
double polyline_winding(const std::vector<Vec2>& loop, const Vec2& about);

}  // namespace abflux
