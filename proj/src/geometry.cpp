#include "abflux/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace abflux {

namespace {
constexpr double kBoundaryEps = 1e-12;
}

// ---------------------------------------------------------------------------
// Obstacle

Obstacle Obstacle::disk(const Vec2& center, double radius) {
    if (radius <= 0.0) throw DegenerateGeometry("disk obstacle needs positive radius");
    Obstacle o;
    o.is_disk_ = true;
    o.center0_ = center;
    o.radius_ = radius;
    return o;
}

Obstacle Obstacle::polygon(std::vector<Vec2> ccw_vertices) {
    if (ccw_vertices.size() < 3) throw DegenerateGeometry("polygon needs >= 3 vertices");
    const int n = static_cast<int>(ccw_vertices.size());
    Vec2 centroid = Vec2::Zero();
    for (const auto& v : ccw_vertices) centroid += v;
    centroid /= n;
    // strict convexity, ccw orientation
    for (int i = 0; i < n; ++i) {
        const Vec2& a = ccw_vertices[i];
        const Vec2& b = ccw_vertices[(i + 1) % n];
        const Vec2& c = ccw_vertices[(i + 2) % n];
        const double cross = (b - a).x() * (c - b).y() - (b - a).y() * (c - b).x();
        if (cross <= 0.0) throw DegenerateGeometry("polygon vertices must be strictly convex ccw");
    }
    Obstacle o;
    o.is_disk_ = false;
    o.vertices_ = std::move(ccw_vertices);
    o.center0_ = centroid;
    double r = 0.0;
    for (const auto& v : o.vertices_) r = std::max(r, (v - centroid).norm());
    o.radius_ = r;
    return o;
}

Obstacle& Obstacle::set_motion(std::function<Vec2(double)> path) {
    path_ = std::move(path);
    velocity_ = nullptr;
    return *this;
}

Obstacle& Obstacle::set_motion(std::function<Vec2(double)> path,
                               std::function<Vec2(double)> velocity) {
    path_ = std::move(path);
    velocity_ = std::move(velocity);
    return *this;
}

Vec2 Obstacle::offset(double t) const { return path_ ? path_(t) : Vec2::Zero(); }

Vec2 Obstacle::velocity(double t) const {
    if (!path_) return Vec2::Zero();
    if (velocity_) return velocity_(t);
    const double h = 1e-6;
    return (path_(t + h) - path_(t - h)) / (2.0 * h);
}

Vec2 Obstacle::center(double t) const { return center0_ + offset(t); }

double Obstacle::bounding_radius() const { return radius_; }

double Obstacle::signed_distance(const Vec2& x, double t) const {
    const Vec2 p = x - offset(t);
    if (is_disk_) return (p - center0_).norm() - radius_;
    const int n = static_cast<int>(vertices_.size());
    double max_plane = -std::numeric_limits<double>::infinity();
    double min_edge = std::numeric_limits<double>::infinity();
    bool inside = true;
    for (int i = 0; i < n; ++i) {
        const Vec2& a = vertices_[i];
        const Vec2& b = vertices_[(i + 1) % n];
        const Vec2 e = b - a;
        const Vec2 nrm = Vec2(e.y(), -e.x()).normalized();  // outward for ccw
        const double d = nrm.dot(p - a);
        max_plane = std::max(max_plane, d);
        if (d > 0.0) inside = false;
        // distance to the edge segment
        const double tt = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
        min_edge = std::min(min_edge, (p - (a + tt * e)).norm());
    }
    return inside ? max_plane : min_edge;
}

std::optional<std::pair<double, Vec2>> Obstacle::ray_hit(const Vec2& origin, const Vec2& dir,
                                                         double t, double corner_tol) const {
    const Vec2 p = origin - offset(t);
    if (is_disk_) {
        const Vec2 oc = p - center0_;
        const double b = oc.dot(dir);
        const double c = oc.squaredNorm() - radius_ * radius_;
        const double disc = b * b - c;
        if (disc <= 0.0) return std::nullopt;
        const double sq = std::sqrt(disc);
        double s = -b - sq;
        if (s < kBoundaryEps) s = -b + sq;
        if (s < kBoundaryEps) return std::nullopt;
        const Vec2 hit = p + s * dir;
        return std::make_pair(s, Vec2((hit - center0_).normalized()));
    }
    const int n = static_cast<int>(vertices_.size());
    double best = std::numeric_limits<double>::infinity();
    Vec2 best_normal = Vec2::Zero();
    bool corner = false;
    for (int i = 0; i < n; ++i) {
        const Vec2& a = vertices_[i];
        const Vec2& b = vertices_[(i + 1) % n];
        const Vec2 e = b - a;
        const double denom = dir.x() * e.y() - dir.y() * e.x();
        if (std::abs(denom) < 1e-15) continue;
        const Vec2 d0 = a - p;
        const double s = (d0.x() * e.y() - d0.y() * e.x()) / denom;
        const double u = (dir.y() * d0.x() - dir.x() * d0.y()) / denom;
        if (s < kBoundaryEps || u < 0.0 || u > 1.0) continue;
        if (s < best) {
            best = s;
            best_normal = Vec2(e.y(), -e.x()).normalized();
            corner = (u * e.norm() < corner_tol) || ((1.0 - u) * e.norm() < corner_tol);
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    if (corner) throw TangentialHit("ray hits a polygon corner");
    return std::make_pair(best, best_normal);
}

// ---------------------------------------------------------------------------
// OuterRegion

OuterRegion OuterRegion::disk(const Vec2& center, double radius) {
    OuterRegion r;
    r.is_disk = true;
    r.center = center;
    r.radius = radius;
    return r;
}

OuterRegion OuterRegion::rectangle(const Vec2& lo, const Vec2& hi) {
    OuterRegion r;
    r.is_disk = false;
    r.lo = lo;
    r.hi = hi;
    r.center = 0.5 * (lo + hi);
    return r;
}

bool OuterRegion::contains(const Vec2& x) const {
    if (is_disk) return (x - center).norm() < radius;
    return x.x() > lo.x() && x.x() < hi.x() && x.y() > lo.y() && x.y() < hi.y();
}

double OuterRegion::boundary_distance(const Vec2& x) const {
    if (is_disk) return radius - (x - center).norm();
    return std::min(std::min(x.x() - lo.x(), hi.x() - x.x()),
                    std::min(x.y() - lo.y(), hi.y() - x.y()));
}

std::pair<double, Vec2> OuterRegion::ray_exit(const Vec2& origin, const Vec2& dir) const {
    if (is_disk) {
        const Vec2 oc = origin - center;
        const double b = oc.dot(dir);
        const double c = oc.squaredNorm() - radius * radius;
        const double s = -b + std::sqrt(std::max(0.0, b * b - c));
        const Vec2 hit = origin + s * dir;
        return {s, (hit - center).normalized()};
    }
    double best = std::numeric_limits<double>::infinity();
    Vec2 nrm = Vec2::Zero();
    auto consider = [&](double s, const Vec2& n) {
        if (s > kBoundaryEps && s < best) {
            best = s;
            nrm = n;
        }
    };
    if (dir.x() > 1e-15) consider((hi.x() - origin.x()) / dir.x(), Vec2(1, 0));
    if (dir.x() < -1e-15) consider((lo.x() - origin.x()) / dir.x(), Vec2(-1, 0));
    if (dir.y() > 1e-15) consider((hi.y() - origin.y()) / dir.y(), Vec2(0, 1));
    if (dir.y() < -1e-15) consider((lo.y() - origin.y()) / dir.y(), Vec2(0, -1));
    if (!std::isfinite(best)) throw DegenerateGeometry("ray does not leave the outer rectangle");
    return {best, nrm};
}

// ---------------------------------------------------------------------------
// Domain

void Domain::validate(int time_samples) const {
    if (t_end <= 0.0) throw DegenerateGeometry("t_end must be positive");
    for (int k = 0; k < time_samples; ++k) {
        const double t = t_end * k / (time_samples - 1);
        for (size_t i = 0; i < obstacles.size(); ++i) {
            const Vec2 c = obstacles[i].center(t);
            const double r = obstacles[i].bounding_radius();
            if (outer.boundary_distance(c) <= r)
                throw DegenerateGeometry("obstacle leaves the outer region");
            for (size_t j = i + 1; j < obstacles.size(); ++j) {
                const double gap = (c - obstacles[j].center(t)).norm() - r -
                                   obstacles[j].bounding_radius();
                if (gap <= 0.0) throw DegenerateGeometry("obstacle snapshots intersect");
            }
        }
    }
}

bool Domain::inside(const Vec2& x, double t) const {
    if (!outer.contains(x)) return false;
    for (const auto& o : obstacles)
        if (o.signed_distance(x, t) <= 0.0) return false;
    return true;
}

// ---------------------------------------------------------------------------
// BrokenRay

double BrokenRay::total_length() const {
    double s = 0.0;
    for (const auto& l : legs) s += l.length;
    return s;
}

Vec2 BrokenRay::point_at(double s) const {
    for (const auto& l : legs) {
        if (s <= l.length || &l == &legs.back()) return l.start + std::min(s, l.length) * l.dir;
        s -= l.length;
    }
    throw DegenerateGeometry("point_at on empty ray");
}

Vec2 BrokenRay::exit_point() const {
    const auto& l = legs.back();
    return l.start + l.length * l.dir;
}

Vec2 BrokenRay::exit_direction() const { return legs.back().dir; }

// ---------------------------------------------------------------------------
// Operations

Vec2 reflect_direction(const Vec2& theta, const Vec2& n, double tangency_tol) {
    if (std::abs(theta.norm() - 1.0) > 1e-12 || std::abs(n.norm() - 1.0) > 1e-12)
        throw DegenerateGeometry("reflect_direction expects unit vectors");
    const double nd = n.dot(theta);
    if (std::abs(nd) <= tangency_tol) throw TangentialHit("grazing incidence");
    return theta - 2.0 * nd * n;
}

namespace {

// validate_origin = false is used by the tracing loop, whose leg origins sit
// exactly on the surface they just reflected off
std::optional<Hit> first_hit_impl(const Vec2& origin, const Vec2& dir, const Domain& domain,
                                  double t0, bool validate_origin) {
    if (validate_origin) {
        if (!domain.outer.contains(origin))
            throw DegenerateGeometry("ray origin outside outer region");
        for (const auto& o : domain.obstacles)
            if (std::abs(o.signed_distance(origin, t0)) < kBoundaryEps)
                throw DegenerateGeometry("ray origin on an obstacle boundary");
        if (domain.outer.boundary_distance(origin) < kBoundaryEps)
            throw DegenerateGeometry("ray origin on the outer boundary");
    }

    double best = std::numeric_limits<double>::infinity();
    Vec2 normal = Vec2::Zero();
    int idx = -2;
    for (size_t i = 0; i < domain.obstacles.size(); ++i) {
        auto h = domain.obstacles[i].ray_hit(origin, dir, t0);
        if (h && h->first < best) {
            best = h->first;
            normal = h->second;
            idx = static_cast<int>(i);
        }
    }
    auto [s_out, n_out] = domain.outer.ray_exit(origin, dir);
    if (s_out < best) {
        best = s_out;
        normal = n_out;
        idx = -1;
    }
    if (idx == -2) return std::nullopt;
    return Hit{origin + best * dir, normal, idx, best};
}

}  // namespace

std::optional<Hit> first_hit(const Vec2& origin, const Vec2& dir, const Domain& domain,
                             double t0) {
    return first_hit_impl(origin, dir, domain, t0, /*validate_origin=*/true);
}

BrokenRay trace_broken_ray(const Vec2& origin, const Vec2& omega, double t0, const Domain& domain,
                           int max_reflections, double tangency_tol) {
    Vec2 pos = origin;
    Vec2 dir = omega.normalized();
    // allow launch points on/outside the outer boundary, entering the slice
    if (!domain.outer.contains(pos) || domain.outer.boundary_distance(pos) < kBoundaryEps) {
        if (domain.outer.is_disk) {
            const Vec2 oc = pos - domain.outer.center;
            const double b = oc.dot(dir);
            const double c = oc.squaredNorm() - domain.outer.radius * domain.outer.radius;
            const double disc = b * b - c;
            if (disc <= 0.0) throw DegenerateGeometry("launch ray misses the outer region");
            const double s_in = -b - std::sqrt(disc);
            pos = pos + (std::max(s_in, 0.0) + 1e-9) * dir;
        } else {
            // step just inside along dir
            pos = pos + 1e-9 * dir;
            if (!domain.outer.contains(pos))
                throw DegenerateGeometry("launch point does not enter the rectangle");
        }
    }

    BrokenRay ray;
    ray.t0 = t0;
    double arclength = 0.0;
    for (int bounce = 0;; ++bounce) {
        auto h = first_hit_impl(pos, dir, domain, t0, /*validate_origin=*/bounce == 0);
        if (!h) throw DegenerateGeometry("ray lost inside domain");
        ray.legs.push_back({pos, dir, h->distance, arclength});
        arclength += h->distance;
        if (h->obstacle < 0) break;  // reached the outer boundary
        if (bounce >= max_reflections)
            throw TrappedRay("reflection count exceeds max_reflections");
        dir = reflect_direction(dir, h->normal, tangency_tol);
        ray.reflections.push_back({h->point, h->normal, h->obstacle});
        pos = h->point;
    }
    return ray;
}

std::vector<std::vector<Vec2>> generator_loops(const Domain& domain, double t0, double clearance,
                                               int segments) {
    if (clearance <= 0.0) throw ClearanceTooLarge("clearance must be positive");
    std::vector<std::vector<Vec2>> loops;
    for (size_t i = 0; i < domain.obstacles.size(); ++i) {
        const Vec2 c = domain.obstacles[i].center(t0);
        const double r = domain.obstacles[i].bounding_radius() + clearance;
        if (domain.outer.boundary_distance(c) <= r)
            throw ClearanceTooLarge("offset loop reaches the outer boundary");
        for (size_t j = 0; j < domain.obstacles.size(); ++j) {
            if (j == i) continue;
            const double gap = (c - domain.obstacles[j].center(t0)).norm() -
                               domain.obstacles[j].bounding_radius();
            if (gap <= r) throw ClearanceTooLarge("offset loop reaches another obstacle");
        }
        std::vector<Vec2> loop;
        loop.reserve(segments + 1);
        for (int k = 0; k <= segments; ++k) {
            const double a = 2.0 * M_PI * k / segments;
            loop.emplace_back(c + r * Vec2(std::cos(a), std::sin(a)));
        }
        loop.back() = loop.front();
        loops.push_back(std::move(loop));
    }
    return loops;
}

double polyline_winding(const std::vector<Vec2>& loop, const Vec2& about) {
    double total = 0.0;
    for (size_t i = 0; i + 1 < loop.size(); ++i) {
        const Vec2 a = loop[i] - about;
        const Vec2 b = loop[i + 1] - about;
        total += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
    }
    return total / (2.0 * M_PI);
}

}  // namespace abflux
