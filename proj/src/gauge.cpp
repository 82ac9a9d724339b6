#include "abflux/gauge.hpp"

#include <cmath>

namespace abflux {

namespace {

double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a < -M_PI) a += 2.0 * M_PI;
    return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// GaugeElement

GaugeElement GaugeElement::identity() {
    GaugeElement c;
    c.psi = [](const Vec2&, double) { return 0.0; };
    c.dpsi_dx = [](const Vec2&, double) { return Vec2::Zero(); };
    c.dpsi_dt = [](const Vec2&, double) { return 0.0; };
    c.boundary_trivial = true;
    return c;
}

GaugeElement GaugeElement::smooth(std::function<double(const Vec2&, double)> psi,
                                  std::function<Vec2(const Vec2&, double)> dpsi_dx,
                                  std::function<double(const Vec2&, double)> dpsi_dt) {
    GaugeElement c;
    c.psi = std::move(psi);
    c.dpsi_dx = std::move(dpsi_dx);
    c.dpsi_dt = std::move(dpsi_dt);
    return c;
}

GaugeElement GaugeElement::winding(const Domain& domain, std::vector<int> m) {
    GaugeElement c;
    c.psi = [](const Vec2&, double) { return 0.0; };
    c.dpsi_dx = [](const Vec2&, double) { return Vec2::Zero(); };
    c.dpsi_dt = [](const Vec2&, double) { return 0.0; };
    c.windings = std::move(m);
    c.domain = &domain;
    return c;
}

Vec2 GaugeElement::phase_gradient(const Vec2& x, double t) const {
    Vec2 g = Vec2::Zero();
    if (dpsi_dx) {
        g = dpsi_dx(x, t);
    } else if (psi) {
        const double h = fd_step;
        g = Vec2((psi(x + Vec2(h, 0), t) - psi(x - Vec2(h, 0), t)) / (2 * h),
                 (psi(x + Vec2(0, h), t) - psi(x - Vec2(0, h), t)) / (2 * h));
    }
    for (size_t j = 0; j < windings.size(); ++j) {
        if (windings[j] == 0) continue;
        const Vec2 y = x - domain->obstacles[j].center(t);
        const double r2 = y.squaredNorm();
        if (r2 < 1e-300) throw SingularGauge("winding phase evaluated at an obstacle center");
        g += windings[j] * Vec2(-y.y(), y.x()) / r2;
    }
    return g;
}

double GaugeElement::phase_dt(const Vec2& x, double t) const {
    double d = 0.0;
    if (dpsi_dt) {
        d = dpsi_dt(x, t);
    } else if (psi) {
        const double h = fd_step;
        d = (psi(x, t + h) - psi(x, t - h)) / (2 * h);
    }
    for (size_t j = 0; j < windings.size(); ++j) {
        if (windings[j] == 0) continue;
        const Vec2 y = x - domain->obstacles[j].center(t);
        const Vec2 cdot = domain->obstacles[j].velocity(t);
        const double r2 = y.squaredNorm();
        if (r2 < 1e-300) throw SingularGauge("winding phase evaluated at an obstacle center");
        // d/dt atan2(y2, y1) with y = x - c(t)
        d += windings[j] * (y.y() * cdot.x() - y.x() * cdot.y()) / r2;
    }
    return d;
}

Complex GaugeElement::value(const Vec2& x, double t) const {
    double phase = psi ? psi(x, t) : 0.0;
    for (size_t j = 0; j < windings.size(); ++j) {
        if (windings[j] == 0) continue;
        const Vec2 y = x - domain->obstacles[j].center(t);
        if (y.squaredNorm() < 1e-300)
            throw SingularGauge("gauge value at an obstacle center");
        phase += windings[j] * std::atan2(y.y(), y.x());
    }
    return std::polar(1.0, phase);
}

// ---------------------------------------------------------------------------

EmPotential apply_gauge(const EmPotential& p, const GaugeElement& c) {
    EmPotential q;
    q.support_radius = p.support_radius;
    q.fd_step = p.fd_step;
    q.A = [p, c](const Vec2& x, double t) -> Vec2 { return p.A(x, t) - c.phase_gradient(x, t); };
    q.V = [p, c](const Vec2& x, double t) { return p.V(x, t) + c.phase_dt(x, t); };
    // partials fall back to finite differences of the gauged evaluators
    return q;
}

Complex holonomy(const EmPotential& p, const SpacetimePath& loop, const QuadratureConfig& quad) {
    loop.validate();
    if (!loop.closed) throw DegenerateGeometry("holonomy needs a closed loop");
    return std::polar(1.0, -line_integral_em(p, loop, quad));
}

int winding_number(const std::vector<Complex>& c_samples) {
    if (c_samples.size() < 3) throw UndersampledLoop("need at least 3 samples");
    double total = 0.0;
    for (size_t i = 0; i + 1 < c_samples.size(); ++i) {
        if (std::abs(c_samples[i]) < 1e-9 || std::abs(c_samples[i + 1]) < 1e-9)
            throw SingularGauge("vanishing gauge sample");
        const double jump = wrap_angle(std::arg(c_samples[i + 1]) - std::arg(c_samples[i]));
        if (std::abs(jump) >= M_PI - 0.1) throw UndersampledLoop("phase jump too large");
        total += jump;
    }
    // close the loop
    const double jump = wrap_angle(std::arg(c_samples.front()) - std::arg(c_samples.back()));
    if (std::abs(jump) >= M_PI - 0.1) throw UndersampledLoop("phase jump too large");
    total += jump;
    return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

// ---------------------------------------------------------------------------
// paths avoiding obstacles

namespace {

bool segment_clear(const Domain& domain, const Vec2& a, const Vec2& b, double t, double pad) {
    const int n = 64;
    for (int k = 0; k <= n; ++k) {
        const Vec2 x = a + (b - a) * (static_cast<double>(k) / n);
        if (!domain.outer.contains(x)) return false;
        for (const auto& o : domain.obstacles)
            if (o.signed_distance(x, t) < pad) return false;
    }
    return true;
}

void route_spatial(const Domain& domain, const Vec2& a, const Vec2& b, double t, double pad,
                   int depth, std::vector<Vec2>& out) {
    if (depth > 8) throw PathBlocked("spatial routing budget exceeded");
    if (segment_clear(domain, a, b, t, pad)) {
        out.push_back(b);
        return;
    }
    // detour around the obstacle nearest to the segment midpoint
    int blocker = -1;
    double best = std::numeric_limits<double>::infinity();
    const Vec2 mid = 0.5 * (a + b);
    for (size_t j = 0; j < domain.obstacles.size(); ++j) {
        const double d = domain.obstacles[j].signed_distance(mid, t);
        if (d < best) {
            best = d;
            blocker = static_cast<int>(j);
        }
    }
    if (blocker < 0) throw PathBlocked("segment blocked but no obstacle found");
    const Obstacle& o = domain.obstacles[blocker];
    const Vec2 c = o.center(t);
    const double r = o.bounding_radius() + 2.0 * pad;
    Vec2 dir = (b - a).normalized();
    Vec2 perp(-dir.y(), dir.x());
    // deterministic side choice: lexicographically smaller waypoint first
    Vec2 w1 = c + r * perp;
    Vec2 w2 = c - r * perp;
    if (std::make_pair(w2.x(), w2.y()) < std::make_pair(w1.x(), w1.y())) std::swap(w1, w2);
    for (const Vec2& w : {w1, w2}) {
        if (!domain.outer.contains(w)) continue;
        bool ok = true;
        for (const auto& ob : domain.obstacles)
            if (ob.signed_distance(w, t) < pad) ok = false;
        if (!ok) continue;
        std::vector<Vec2> trial;
        try {
            route_spatial(domain, a, w, t, pad, depth + 1, trial);
            route_spatial(domain, w, b, t, pad, depth + 1, trial);
            for (const auto& v : trial) out.push_back(v);
            return;
        } catch (const PathBlocked&) {
            continue;
        }
    }
    throw PathBlocked("no detour found");
}

bool sweep_clear(const Domain& domain, const Vec2& x, double t0, double t1, double pad) {
    const int n = 64;
    for (int k = 0; k <= n; ++k) {
        const double t = t0 + (t1 - t0) * (static_cast<double>(k) / n);
        for (const auto& o : domain.obstacles)
            if (o.signed_distance(x, t) < pad) return false;
    }
    return true;
}

}  // namespace

SpacetimePath gauge_path(const Domain& domain, const Vec3& base, const Vec3& target,
                         double clearance) {
    const double pad = 0.5 * clearance;
    const Vec2 x0(base.x(), base.y());
    const Vec2 x1(target.x(), target.y());
    const double t0 = base.z();
    const double t1 = target.z();

    SpacetimePath path;
    path.samples.emplace_back(base);
    auto append_spatial = [&](const Vec2& a, const Vec2& b, double t) {
        std::vector<Vec2> pts;
        route_spatial(domain, a, b, t, pad, 0, pts);
        for (const auto& v : pts) path.samples.emplace_back(v.x(), v.y(), t);
    };

    if (sweep_clear(domain, x1, std::min(t0, t1), std::max(t0, t1), pad)) {
        append_spatial(x0, x1, t0);
        if (t1 != t0) path.samples.emplace_back(x1.x(), x1.y(), t1);
        return path;
    }
    // an obstacle sweeps through the target position: move the time leg to a
    // safe waypoint, then walk spatially at the target time
    for (double scale : {1.0, 2.0, 3.0, 4.0, 6.0}) {
        for (const Vec2& dir :
             {Vec2(0, 1), Vec2(0, -1), Vec2(1, 0), Vec2(-1, 0)}) {
            const Vec2 xs = x1 + scale * clearance * dir;
            if (!domain.outer.contains(xs)) continue;
            if (!sweep_clear(domain, xs, std::min(t0, t1), std::max(t0, t1), pad)) continue;
            try {
                append_spatial(x0, xs, t0);
                path.samples.emplace_back(xs.x(), xs.y(), t1);
                append_spatial(xs, x1, t1);
                return path;
            } catch (const PathBlocked&) {
                path.samples.clear();
                path.samples.emplace_back(base);
                continue;
            }
        }
    }
    throw PathBlocked("no sweep-safe waypoint found for the time leg");
}

// ---------------------------------------------------------------------------
// equivalence decision

namespace {

EmPotential difference_connection(const EmPotential& pa, const EmPotential& pb) {
    EmPotential d;
    d.support_radius = std::max(pa.support_radius, pb.support_radius);
    d.A = [pa, pb](const Vec2& x, double t) -> Vec2 { return pb.A(x, t) - pa.A(x, t); };
    d.V = [pa, pb](const Vec2& x, double t) { return pb.V(x, t) - pa.V(x, t); };
    return d;
}

}  // namespace

EquivalenceVerdict test_gauge_equivalence(const EmPotential& pa, const EmPotential& pb,
                                          const Domain& domain,
                                          const std::vector<double>& t_samples, double clearance,
                                          const EquivalenceOptions& opt) {
    if (t_samples.empty()) throw DegenerateGeometry("need at least one time sample");
    const EmPotential diff = difference_connection(pa, pb);

    EquivalenceVerdict verdict;
    auto check_loop = [&](const SpacetimePath& loop) -> bool {
        const Complex r = holonomy(diff, loop, opt.quad);
        if (std::abs(r - 1.0) > opt.tol_h) {
            verdict.equivalent = false;
            verdict.witness = loop;
            verdict.witness_holonomy = r;
            return false;
        }
        return true;
    };

    // spatial generator loops at every sampled time
    std::vector<std::vector<Vec2>> loops0;
    for (size_t ti = 0; ti < t_samples.size(); ++ti) {
        auto loops = generator_loops(domain, t_samples[ti], clearance, opt.loop_segments);
        if (ti == 0) loops0 = loops;
        for (const auto& lp : loops) {
            if (!check_loop(SpacetimePath::spatial_polyline(lp, t_samples[ti], true)))
                return verdict;
        }
    }

    // time-direction rectangles linking consecutive samples
    for (size_t ti = 0; ti + 1 < t_samples.size(); ++ti) {
        const double ta = t_samples[ti];
        const double tb = t_samples[ti + 1];
        for (size_t j = 0; j < domain.obstacles.size(); ++j) {
            const Obstacle& o = domain.obstacles[j];
            const double r = o.bounding_radius() + clearance;
            Vec2 anchor = Vec2::Zero();
            bool found = false;
            for (int k = 0; k < 16 && !found; ++k) {
                const double a = 2.0 * M_PI * k / 16;
                const Vec2 q = o.center(ta) + r * Vec2(std::cos(a), std::sin(a));
                if (domain.outer.contains(q) && sweep_clear(domain, q, ta, tb, 0.5 * clearance)) {
                    anchor = q;
                    found = true;
                }
            }
            if (!found) throw PathBlocked("no sweep-safe anchor for the time rectangle");
            const Vec2 base_pt =
                domain.outer.center +
                (anchor - domain.outer.center).normalized() *
                    (domain.outer.is_disk ? domain.outer.radius - clearance
                                          : 0.45 * (domain.outer.hi - domain.outer.lo).minCoeff());
            SpacetimePath rect;
            rect.closed = true;
            auto add_spatial = [&](const Vec2& a, const Vec2& b, double t) {
                const int n = 32;
                for (int k = 1; k <= n; ++k)
                    rect.samples.emplace_back(a.x() + (b.x() - a.x()) * k / n,
                                              a.y() + (b.y() - a.y()) * k / n, t);
            };
            rect.samples.emplace_back(base_pt.x(), base_pt.y(), ta);
            add_spatial(base_pt, anchor, ta);
            rect.samples.emplace_back(anchor.x(), anchor.y(), tb);
            add_spatial(anchor, base_pt, tb);
            rect.samples.emplace_back(base_pt.x(), base_pt.y(), ta);
            if (!check_loop(rect)) return verdict;
        }
    }

    // equivalent: recover windings from the generator loops at t_samples[0]
    verdict.equivalent = true;
    for (const auto& lp : loops0) {
        const SpacetimePath loop = SpacetimePath::spatial_polyline(lp, t_samples.front(), true);
        const double phase = line_integral_em(diff, loop, opt.quad);
        verdict.windings.push_back(static_cast<int>(std::lround(phase / (2.0 * M_PI))));
    }

    const Vec3 base(domain.outer.is_disk
                        ? domain.outer.center.x() + domain.outer.radius - clearance
                        : 0.5 * (domain.outer.lo.x() + domain.outer.hi.x()),
                    domain.outer.center.y(), t_samples.front());
    const double quad_tol = opt.quad.abs_tol;
    EmPotential diff_copy = diff;
    Domain dom_copy = domain;
    verdict.gauge = [diff_copy, dom_copy, base, clearance, quad_tol](const Vec2& x,
                                                                     double t) -> Complex {
        SpacetimePath path = gauge_path(dom_copy, base, Vec3(x.x(), x.y(), t), clearance);
        QuadratureConfig q;
        q.abs_tol = quad_tol;
        return std::polar(1.0, -line_integral_em(diff_copy, path, q));
    };
    return verdict;
}

std::vector<Complex> construct_gauge_function(const EmPotential& pa, const EmPotential& pb,
                                              const Domain& domain, const Vec3& base,
                                              const std::vector<Vec3>& targets, double clearance,
                                              bool equivalence_checked,
                                              const QuadratureConfig& quad) {
    if (!equivalence_checked)
        throw PreconditionViolated("generator-loop holonomy check must run first");
    const EmPotential diff = difference_connection(pa, pb);
    std::vector<Complex> out;
    out.reserve(targets.size());
    for (const auto& tgt : targets) {
        const SpacetimePath path = gauge_path(domain, base, tgt, clearance);
        out.push_back(std::polar(1.0, -line_integral_em(diff, path, quad)));
    }
    return out;
}

}  // namespace abflux
