#include "abflux/fields.hpp"

#include <array>
#include <cmath>

namespace abflux {

// ---------------------------------------------------------------------------
// smooth step S(u): exactly 0 for u <= 0, exactly 1 for u >= 1, C-infinity.
// S = f/(f+g) with f = exp(-1/u), g = exp(-1/(1-u)); closed-form derivatives.

namespace {

struct StepEval {
    double s, s1, s2;  // S, S', S''
};

StepEval smooth_step(double u) {
    if (u <= 0.0) return {0.0, 0.0, 0.0};
    if (u >= 1.0) return {1.0, 0.0, 0.0};
    const double v = 1.0 - u;
    const double f = std::exp(-1.0 / u);
    const double g = std::exp(-1.0 / v);
    const double fp = f / (u * u);
    const double gp = -g / (v * v);
    const double fpp = f * (1.0 / (u * u * u * u) - 2.0 / (u * u * u));
    const double gpp = g * (1.0 / (v * v * v * v) - 2.0 / (v * v * v));
    const double D = f + g;
    const double num = fp * g - f * gp;
    const double S = f / D;
    const double S1 = num / (D * D);
    const double S2 = (fpp * g - f * gpp) / (D * D) - 2.0 * num * (fp + gp) / (D * D * D);
    return {S, S1, S2};
}

// 32-point Gauss-Legendre nodes/weights on [-1, 1]
const std::array<double, 16> kGLx = {
    0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745, 0.3318686022821276497,
    0.4213512761306353454, 0.5068999089322293900, 0.5877157572407623290, 0.6630442669302152010,
    0.7321821187402896804, 0.7944837959679424069, 0.8493676137325699701, 0.8963211557660521240,
    0.9349060759377396892, 0.9647622555875064307, 0.9856115115452683354, 0.9972638618494815635};
const std::array<double, 16> kGLw = {
    0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654, 0.0911738786957638847,
    0.0876520930044038111, 0.0833119242269467552, 0.0781938957870703065, 0.0723457941088485062,
    0.0658222227763618468, 0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
    0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706, 0.0070186100094700966};

double gauss32(const std::function<double(double)>& f, double a, double b) {
    if (b <= a) return 0.0;
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < 16; ++i) {
        sum += kGLw[i] * (f(c - h * kGLx[i]) + f(c + h * kGLx[i]));
    }
    return h * sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// Mollifier

Mollifier::Mollifier(double width) : width_(width), norm_(1.0) {
    if (width <= 0.0) throw InvalidScenario("mollifier width must be positive");
}

double Mollifier::operator()(double s) const {
    const double u = (s + width_) / (2.0 * width_);
    return smooth_step(u).s1 / (2.0 * width_);
}

double Mollifier::derivative(double s) const {
    const double u = (s + width_) / (2.0 * width_);
    return smooth_step(u).s2 / (4.0 * width_ * width_);
}

double Mollifier::antiderivative(double s) const {
    const double u = (s + width_) / (2.0 * width_);
    return smooth_step(u).s;
}

// ---------------------------------------------------------------------------
// EmPotential partials

Eigen::Matrix2d EmPotential::jacobian_A(const Vec2& x, double t) const {
    if (dA_dx) return dA_dx(x, t);
    Eigen::Matrix2d J;
    const double h = fd_step;
    for (int j = 0; j < 2; ++j) {
        Vec2 dx = Vec2::Zero();
        dx[j] = h;
        J.col(j) = (A(x + dx, t) - A(x - dx, t)) / (2.0 * h);
    }
    return J;
}

Vec2 EmPotential::time_derivative_A(const Vec2& x, double t) const {
    if (dA_dt) return dA_dt(x, t);
    const double h = fd_step;
    return (A(x, t + h) - A(x, t - h)) / (2.0 * h);
}

Vec2 EmPotential::gradient_V(const Vec2& x, double t) const {
    if (dV_dx) return dV_dx(x, t);
    const double h = fd_step;
    return Vec2((V(x + Vec2(h, 0), t) - V(x - Vec2(h, 0), t)) / (2.0 * h),
                (V(x + Vec2(0, h), t) - V(x - Vec2(0, h), t)) / (2.0 * h));
}

FieldStrength derived_fields(const EmPotential& p) {
    FieldStrength f;
    f.B3 = [p](const Vec2& x, double t) {
        const Eigen::Matrix2d J = p.jacobian_A(x, t);
        return J(1, 0) - J(0, 1);
    };
    f.E = [p](const Vec2& x, double t) -> Vec2 {
        return -p.gradient_V(x, t) - p.time_derivative_A(x, t);
    };
    return f;
}

// ---------------------------------------------------------------------------
// SpacetimePath

SpacetimePath SpacetimePath::spatial_polyline(const std::vector<Vec2>& pts, double t,
                                              bool closed) {
    SpacetimePath p;
    p.closed = closed;
    p.samples.reserve(pts.size());
    for (const auto& x : pts) p.samples.emplace_back(x.x(), x.y(), t);
    return p;
}

void SpacetimePath::validate() const {
    if (samples.size() < 2) throw DegenerateGeometry("path needs at least two samples");
    if (closed && (samples.front() - samples.back()).norm() > 1e-12)
        throw DegenerateGeometry("closed path must end where it starts");
}

Vec3 SpacetimePath::centroid() const {
    Vec3 c = Vec3::Zero();
    const size_t n = closed ? samples.size() - 1 : samples.size();
    for (size_t i = 0; i < n; ++i) c += samples[i];
    return c / static_cast<double>(n);
}

double line_integral_em(const EmPotential& p, const SpacetimePath& path,
                        const QuadratureConfig& quad) {
    path.validate();
    const size_t nseg = path.samples.size() - 1;
    QuadratureConfig seg_cfg = quad;
    seg_cfg.abs_tol = quad.abs_tol / static_cast<double>(nseg);
    double total = 0.0;
    for (size_t i = 0; i < nseg; ++i) {
        const Vec3 a = path.samples[i];
        const Vec3 d = path.samples[i + 1] - a;
        const Vec2 dx(d.x(), d.y());
        auto integrand = [&](double lam) {
            const Vec2 x(a.x() + lam * d.x(), a.y() + lam * d.y());
            const double t = a.z() + lam * d.z();
            return p.A(x, t).dot(dx) - p.V(x, t) * d.z();
        };
        total += integrate(integrand, 0.0, 1.0, seg_cfg);
    }
    return total;
}

// ---------------------------------------------------------------------------
// surface_flux

namespace {

double triangle_form(const FieldStrength& f, const Vec3& p0, const Vec3& p1, const Vec3& p2,
                     const Vec3& q) {
    const Vec3 u = p1 - p0;
    const Vec3 v = p2 - p0;
    const double w12 = u.x() * v.y() - u.y() * v.x();   // dx1 ^ dx2
    const double w1t = u.x() * v.z() - u.z() * v.x();   // dx1 ^ dt
    const double w2t = u.y() * v.z() - u.z() * v.y();   // dx2 ^ dt
    const Vec2 x(q.x(), q.y());
    const Vec2 e = f.E(x, q.z());
    return f.B3(x, q.z()) * w12 + e.x() * w1t + e.y() * w2t;
}

double triangle_estimate(const FieldStrength& f, const Vec3& p0, const Vec3& p1, const Vec3& p2) {
    // degree-5 seven-point rule on the flat triangle; the high degree keeps
    // the adaptive subdivision gaining accuracy much faster than the 4-way
    // tolerance split spends it
    static const double wc = 0.225;
    static const double a1 = 0.059715871789770, b1 = 0.470142064105115,
                        w1 = 0.132394152788506;
    static const double a2 = 0.797426985353087, b2 = 0.101286507323456,
                        w2 = 0.125939180544827;
    auto at = [&](double l0, double l1, double l2) {
        return triangle_form(f, p0, p1, p2, l0 * p0 + l1 * p1 + l2 * p2);
    };
    const double sum = wc * at(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0) +
                       w1 * (at(a1, b1, b1) + at(b1, a1, b1) + at(b1, b1, a1)) +
                       w2 * (at(a2, b2, b2) + at(b2, a2, b2) + at(b2, b2, a2));
    // triangle_form carries the full parallelogram wedge; the simplex is half
    return 0.5 * sum;
}

double triangle_adapt(const FieldStrength& f, const Vec3& p0, const Vec3& p1, const Vec3& p2,
                      double whole, double tol, int depth, int max_depth) {
    const Vec3 m01 = 0.5 * (p0 + p1);
    const Vec3 m12 = 0.5 * (p1 + p2);
    const Vec3 m20 = 0.5 * (p2 + p0);
    const double q0 = triangle_estimate(f, p0, m01, m20);
    const double q1 = triangle_estimate(f, m01, p1, m12);
    const double q2 = triangle_estimate(f, m20, m12, p2);
    const double q3 = triangle_estimate(f, m01, m12, m20);
    const double refined = q0 + q1 + q2 + q3;
    if (std::abs(refined - whole) <= 15.0 * tol || depth >= max_depth) {
        if (depth >= max_depth && std::abs(refined - whole) > 15.0 * tol)
            throw QuadratureNonconvergent("triangle flux quadrature depth limit reached");
        return refined + (refined - whole) / 15.0;
    }
    return triangle_adapt(f, p0, m01, m20, q0, tol / 4.0, depth + 1, max_depth) +
           triangle_adapt(f, m01, p1, m12, q1, tol / 4.0, depth + 1, max_depth) +
           triangle_adapt(f, m20, m12, p2, q2, tol / 4.0, depth + 1, max_depth) +
           triangle_adapt(f, m01, m12, m20, q3, tol / 4.0, depth + 1, max_depth);
}

}  // namespace

double surface_flux(const FieldStrength& f, const SurfacePatch& patch,
                    const QuadratureConfig& quad) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SpatialDiskPatch>) {
                // polar coordinates: smooth integrand, no sqrt edge kinks
                auto integrand = [&](double r, double a) {
                    return r * f.B3(p.center + r * Vec2(std::cos(a), std::sin(a)), p.t);
                };
                return integrate2d(integrand, 0.0, p.radius,
                                   [](double) { return 0.0; },
                                   [](double) { return 2.0 * M_PI; }, quad);
            } else if constexpr (std::is_same_v<T, FixedX1RectPatch>) {
                auto integrand = [&](double t, double x2) {
                    return f.E(Vec2(p.x1, x2), t).y();
                };
                return integrate2d(integrand, p.t_lo, p.t_hi,
                                   [&](double) { return p.x2_lo; },
                                   [&](double) { return p.x2_hi; }, quad);
            } else {
                double total = 0.0;
                const double tol = quad.abs_tol / std::max<size_t>(1, p.triangles.size());
                for (const auto& tri : p.triangles) {
                    const Vec3& a = p.vertices[tri[0]];
                    const Vec3& b = p.vertices[tri[1]];
                    const Vec3& c = p.vertices[tri[2]];
                    const double whole = triangle_estimate(f, a, b, c);
                    total += triangle_adapt(f, a, b, c, whole, tol, 0, quad.max_depth);
                }
                return total;
            }
        },
        patch);
}

TriangulatedPatch fan_patch(const SpacetimePath& loop, const Vec3& apex) {
    loop.validate();
    if (!loop.closed) throw DegenerateGeometry("fan_patch needs a closed loop");
    TriangulatedPatch patch;
    patch.vertices.push_back(apex);
    for (const auto& s : loop.samples) patch.vertices.push_back(s);
    const int n = static_cast<int>(loop.samples.size()) - 1;
    for (int i = 0; i < n; ++i) {
        patch.triangles.push_back({0, i + 1, i + 2});
    }
    return patch;
}

// ---------------------------------------------------------------------------
// vortex potential

EmPotential vortex_potential(std::function<double(double)> b, std::function<double(double)> db_dt,
                             std::function<Vec2(double)> center,
                             std::function<Vec2(double)> center_velocity, double core_radius,
                             double support_radius) {
    if (core_radius <= 0.0) throw InvalidScenario("vortex core radius must be positive");
    const double delta = core_radius;
    // radial mass M(rho) = S(rho/delta); g(rho) = M/rho^2
    auto mass = [delta](double rho) { return smooth_step(rho / delta).s; };
    auto mass1 = [delta](double rho) { return smooth_step(rho / delta).s1 / delta; };

    EmPotential p;
    p.support_radius = support_radius;
    p.fd_step = 1e-6;
    p.A = [=](const Vec2& x, double t) -> Vec2 {
        const Vec2 y = x - center(t);
        const double rho2 = y.squaredNorm();
        if (rho2 < 1e-300) return Vec2::Zero();
        const double g = mass(std::sqrt(rho2)) / rho2;
        return (b(t) / (2.0 * M_PI)) * g * Vec2(-y.y(), y.x());
    };
    p.V = [](const Vec2&, double) { return 0.0; };
    p.dA_dx = [=](const Vec2& x, double t) -> Eigen::Matrix2d {
        const Vec2 y = x - center(t);
        const double rho = y.norm();
        Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
        if (rho < 1e-12) return J;
        const double g = mass(rho) / (rho * rho);
        const double gp = mass1(rho) / (rho * rho) - 2.0 * mass(rho) / (rho * rho * rho);
        const double k = b(t) / (2.0 * M_PI);
        J(0, 0) = k * (gp * y.x() / rho * (-y.y()));
        J(0, 1) = k * (gp * y.y() / rho * (-y.y()) - g);
        J(1, 0) = k * (gp * y.x() / rho * y.x() + g);
        J(1, 1) = k * (gp * y.y() / rho * y.x());
        return J;
    };
    p.dA_dt = [=](const Vec2& x, double t) -> Vec2 {
        const Vec2 y = x - center(t);
        const double rho = y.norm();
        if (rho < 1e-12) return Vec2::Zero();
        const Vec2 cdot = center_velocity ? center_velocity(t) : Vec2::Zero();
        const double g = mass(rho) / (rho * rho);
        const double gp = mass1(rho) / (rho * rho) - 2.0 * mass(rho) / (rho * rho * rho);
        const double drho_dt = -y.dot(cdot) / rho;
        const Vec2 perp(-y.y(), y.x());
        const Vec2 dperp_dt(cdot.y(), -cdot.x());
        return (db_dt(t) / (2.0 * M_PI)) * g * perp +
               (b(t) / (2.0 * M_PI)) * (gp * drho_dt * perp + g * dperp_dt);
    };
    p.dV_dx = [](const Vec2&, double) -> Vec2 { return Vec2::Zero(); };
    return p;
}

// ---------------------------------------------------------------------------
// shielded scenarios

ShieldedScenario build_shielded_scenario(ShieldedKind kind, std::function<double(double)> profile,
                                         std::function<double(double)> profile_dt, double v0,
                                         double r1, double delta, double outer_radius,
                                         double t_end) {
    if (delta > r1 / 4.0) throw InvalidScenario("mollifier exceeds shielding bound (delta > r1/4)");
    if (kind == ShieldedKind::Electric && v0 <= 0.0)
        throw InvalidScenario("electric scenario needs v0 > 0");
    if (std::abs(v0) * t_end + r1 >= outer_radius)
        throw InvalidScenario("obstacle exits the outer region during [0, T]");

    ShieldedScenario sc;
    sc.kind = kind;
    sc.v0 = v0;
    sc.r1 = r1;
    sc.delta = delta;
    sc.profile = profile;

    sc.domain.outer = OuterRegion::disk(Vec2::Zero(), outer_radius);
    sc.domain.t_end = t_end;
    Obstacle obs = Obstacle::disk(Vec2::Zero(), r1);
    obs.set_motion([v0](double t) { return Vec2(v0 * t, 0.0); },
                   [v0](double) { return Vec2(v0, 0.0); });
    sc.domain.obstacles.push_back(obs);

    if (kind == ShieldedKind::Magnetic) {
        sc.potential = vortex_potential(
            profile, profile_dt, [v0](double t) { return Vec2(v0 * t, 0.0); },
            [v0](double) { return Vec2(v0, 0.0); }, delta, outer_radius);
        sc.fields = derived_fields(sc.potential);
        sc.fields.B3 = [profile, v0, delta](const Vec2& x, double t) {
            const Vec2 y = x - Vec2(v0 * t, 0.0);
            const double rho = y.norm();
            if (rho >= delta) return 0.0;
            const double s1 = smooth_step(rho / delta).s1 / delta;
            return rho < 1e-12 ? 0.0 : profile(t) * s1 / (2.0 * M_PI * rho);
        };
        return sc;
    }

    // electric: A = (0, A2), V = 0 with
    //   A2(x, t) = (psi(x2)/v0) * Int_{-inf}^{x1 - v0 t} phi(u) e((x1-u)/v0) du
    // so E = (0, phi(x1-v0t) psi(x2) e(t)) exactly and B3 = dA2/dx1.
    Mollifier phi(delta), psi(delta);
    auto inner = [phi, v0, delta](double x1, double t,
                                  const std::function<double(double)>& prof) {
        const double hi = std::min(delta, x1 - v0 * t);
        if (hi <= -delta) return 0.0;
        return gauss32([&](double u) { return phi(u) * prof((x1 - u) / v0); }, -delta, hi);
    };

    EmPotential p;
    p.support_radius = outer_radius;
    p.A = [=](const Vec2& x, double t) -> Vec2 {
        const double ps = psi(x.y());
        if (ps == 0.0) return Vec2::Zero();
        return Vec2(0.0, ps / v0 * inner(x.x(), t, profile));
    };
    p.V = [](const Vec2&, double) { return 0.0; };
    p.dA_dx = [=](const Vec2& x, double t) -> Eigen::Matrix2d {
        Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
        const double ps = psi(x.y());
        const double dps = psi.derivative(x.y());
        if (ps == 0.0 && dps == 0.0) return J;
        J(1, 0) = ps / v0 * (phi(x.x() - v0 * t) * profile(t) +
                             inner(x.x(), t, profile_dt) / v0);
        J(1, 1) = dps / v0 * inner(x.x(), t, profile);
        return J;
    };
    p.dA_dt = [=](const Vec2& x, double t) -> Vec2 {
        return Vec2(0.0, -psi(x.y()) * phi(x.x() - v0 * t) * profile(t));
    };
    p.dV_dx = [](const Vec2&, double) -> Vec2 { return Vec2::Zero(); };
    sc.potential = p;

    sc.fields.E = [=](const Vec2& x, double t) -> Vec2 {
        return Vec2(0.0, psi(x.y()) * phi(x.x() - v0 * t) * profile(t));
    };
    sc.fields.B3 = [=](const Vec2& x, double t) {
        const double ps = psi(x.y());
        if (ps == 0.0) return 0.0;
        return ps / v0 *
               (phi(x.x() - v0 * t) * profile(t) + inner(x.x(), t, profile_dt) / v0);
    };
    return sc;
}

}  // namespace abflux
