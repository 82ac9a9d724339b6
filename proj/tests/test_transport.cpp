#include <cmath>
#include <complex>
#include <doctest.h>

#include "abflux/gauge.hpp"
#include "abflux/transport.hpp"

using namespace abflux;
using Cplx = std::complex<double>;

namespace {

const Cplx kI{0.0, 1.0};

Matrix pauli(int k) {
    Matrix s(2, 2);
    switch (k) {
        case 1: s << 0, 1, 1, 0; break;
        case 2: s << 0, -kI, kI, 0; break;
        default: s << 1, 0, 0, -1; break;
    }
    return s;
}

// exp(i M) for self-adjoint 2x2 M, via M = a I + b.sigma
Matrix expi(const Matrix& m) {
    const Cplx a = 0.5 * (m(0, 0) + m(1, 1));
    Matrix b = m - a * Matrix::Identity(2, 2);
    const double bn = std::sqrt(std::norm(b(0, 0)) + std::norm(b(0, 1)));
    Matrix out = std::cos(bn) * Matrix::Identity(2, 2);
    out += (bn < 1e-14 ? kI : kI * std::sin(bn) / bn) * b;
    return (std::exp(kI * a) * out).eval();
}

// midpoint product integral with a fine fixed step: independent oracle
Matrix product_integral(const YmPotential& p, const Line& line, double h) {
    const int n = std::max(1, static_cast<int>(std::ceil(line.length / h)));
    const double dh = line.length / n;
    Matrix c = Matrix::Identity(p.m, p.m);
    for (int k = 0; k < n; ++k) {
        const Vec2 x = line.start + (k + 0.5) * dh * line.omega;
        const Matrix m =
            dh * (p.A1(x, line.t) * line.omega(0) + p.A2(x, line.t) * line.omega(1));
        c = (expi(m) * c).eval();
    }
    return c;
}

double bump(double u) { return u < 1.0 ? std::exp(-1.0 / (1.0 - u)) : 0.0; }  // u = rho^2 scaled

YmPotential demo_field() {
    YmPotential p;
    p.m = 2;
    p.support_radius = 1.0;
    p.A1 = [](const Vec2& x, double t) {
        return ((0.8 + 0.1 * t) * bump(x.squaredNorm()) * pauli(1)).eval();
    };
    p.A2 = [](const Vec2& x, double) {
        return (0.6 * bump(x.squaredNorm()) * pauli(2)).eval();
    };
    p.V = [](const Vec2& x, double) { return (0.5 * bump(x.squaredNorm()) * pauli(3)).eval(); };
    return p;
}

BrokenRay straight_ray(const Vec2& start, const Vec2& dir, double length, double t0 = 0.0) {
    BrokenRay r;
    r.t0 = t0;
    r.legs.push_back({start, dir, length, 0.0});
    return r;
}

}  // namespace

TEST_CASE("abelian ray transforms") {
    SUBCASE("constant A over a straight leg") {
        EmPotential p;
        p.A = [](const Vec2&, double) { return Vec2(0.3, 0.0); };
        p.V = [](const Vec2&, double) { return 0.0; };
        CHECK(magnetic_ray_transform(p, straight_ray(Vec2(0, 0), Vec2(1, 0), 2.0)) ==
              doctest::Approx(0.6).epsilon(1e-12));
    }
    SUBCASE("constant V over a two-leg ray of length 7") {
        EmPotential p;
        p.A = [](const Vec2&, double) { return Vec2(0, 0); };
        p.V = [](const Vec2&, double) { return 0.5; };
        BrokenRay r;
        r.legs.push_back({Vec2(-3, 0), Vec2(1, 0), 3.0, 0.0});
        r.legs.push_back({Vec2(0, 0), Vec2(0, 1), 4.0, 3.0});
        CHECK(electric_ray_transform(p, r) == doctest::Approx(3.5).epsilon(1e-12));
    }
    SUBCASE("gaussian V along a diameter") {
        EmPotential p;
        p.A = [](const Vec2&, double) { return Vec2(0, 0); };
        p.V = [](const Vec2& x, double) { return std::exp(-x.squaredNorm()); };
        CHECK(electric_ray_transform(p, straight_ray(Vec2(-3, 0), Vec2(1, 0), 6.0)) ==
              doctest::Approx(std::sqrt(M_PI) * std::erf(3.0)).epsilon(1e-10));
    }
    SUBCASE("retroreflecting ray sees zero magnetic transform") {
        Domain d;
        d.outer = OuterRegion::disk(Vec2(0, 0), 5.0);
        d.obstacles.push_back(Obstacle::disk(Vec2(0, 0), 1.0));
        d.t_end = 1.0;
        const BrokenRay r = trace_broken_ray(Vec2(-5, 0), Vec2(1, 0), 0.0, d);
        REQUIRE(r.reflections.size() == 1);
        const EmPotential p = vortex_potential(
            [](double) { return 2.0 * M_PI; }, [](double) { return 0.0; },
            [](double) { return Vec2(0, 0); }, [](double) { return Vec2(0, 0); }, 0.4, 10.0);
        CHECK(std::abs(magnetic_ray_transform(p, r)) <= 1e-10);
    }
    SUBCASE("additivity and reversal antisymmetry") {
        EmPotential p;
        p.A = [](const Vec2& x, double t) {
            return Vec2(std::sin(x.y() + t), 0.2 * x.x() * x.x());
        };
        p.V = [](const Vec2&, double) { return 0.0; };
        const BrokenRay whole = straight_ray(Vec2(-1, 0.3), Vec2(0.6, 0.8), 2.5, 0.4);
        BrokenRay split = whole;
        split.legs.clear();
        split.legs.push_back({Vec2(-1, 0.3), Vec2(0.6, 0.8), 1.1, 0.0});
        split.legs.push_back({Vec2(-1, 0.3) + 1.1 * Vec2(0.6, 0.8), Vec2(0.6, 0.8), 1.4, 1.1});
        CHECK(std::abs(magnetic_ray_transform(p, whole) - magnetic_ray_transform(p, split)) <=
              1e-12);

        BrokenRay rev = whole;
        rev.legs.clear();
        rev.legs.push_back({Vec2(-1, 0.3) + 2.5 * Vec2(0.6, 0.8), Vec2(-0.6, -0.8), 2.5, 0.0});
        CHECK(std::abs(magnetic_ray_transform(p, whole) + magnetic_ray_transform(p, rev)) <=
              1e-10);
    }
}

TEST_CASE("nonabelian transport") {
    SUBCASE("zero field transports the identity") {
        const YmPotential p = YmPotential::zero(3, 1.0);
        const auto r = nonabelian_transport(p, Line{Vec2(-2, 0), Vec2(1, 0), 4.0, 0.0}, 1e-2);
        CHECK((r.endpoint - Matrix::Identity(3, 3)).norm() <= 1e-14);
    }
    SUBCASE("constant diagonal field has closed-form transport") {
        YmPotential p;
        p.m = 2;
        p.support_radius = 5.0;
        p.A1 = [](const Vec2&, double) {
            Matrix d(2, 2);
            d << 0.5, 0, 0, -0.25;
            return d;
        };
        p.A2 = [](const Vec2&, double) { return Matrix::Zero(2, 2).eval(); };
        p.V = [](const Vec2&, double) { return Matrix::Zero(2, 2).eval(); };
        const auto r = nonabelian_transport(p, Line{Vec2(0, 0), Vec2(1, 0), 2.0, 0.0}, 1e-3);
        CHECK(std::abs(r.endpoint(0, 0) - std::polar(1.0, 1.0)) <= 1e-10);
        CHECK(std::abs(r.endpoint(1, 1) - std::polar(1.0, -0.5)) <= 1e-10);
        CHECK(std::abs(r.endpoint(0, 1)) <= 1e-13);
        CHECK(std::abs(r.endpoint(1, 0)) <= 1e-13);
    }
    SUBCASE("noncommuting field matches the product-integral oracle") {
        const YmPotential p = demo_field();
        const Line line{Vec2(-2, 0.15), Vec2(1, 0), 4.0, 0.3};
        const Matrix oracle = product_integral(p, line, 1e-5);
        const auto r = nonabelian_transport(p, line, 1e-3);
        CHECK((r.endpoint - oracle).norm() <= 1e-8);
        CHECK((r.endpoint.adjoint() * r.endpoint - Matrix::Identity(2, 2)).norm() <= 1e-8);
    }
    SUBCASE("fourth-order convergence") {
        const YmPotential p = demo_field();
        const Line line{Vec2(-2, 0.15), Vec2(1, 0), 4.0, 0.3};
        // h = 0.2 / 0.1 is the asymptotic window for this field; finer steps
        // super-converge because the bump's high derivatives dominate
        const Matrix oracle = product_integral(p, line, 1e-5);
        const double e1 = (nonabelian_transport(p, line, 0.2).endpoint - oracle).norm();
        const double e2 = (nonabelian_transport(p, line, 0.1).endpoint - oracle).norm();
        CHECK(e1 / e2 >= 12.0);
        CHECK(e1 / e2 <= 20.0);
    }
    SUBCASE("coarse step on a strong field is rejected") {
        YmPotential p;
        p.m = 2;
        p.support_radius = 10.0;
        p.A1 = [](const Vec2&, double) { return (6.0 * pauli(1)).eval(); };
        p.A2 = [](const Vec2&, double) { return Matrix::Zero(2, 2).eval(); };
        p.V = [](const Vec2&, double) { return Matrix::Zero(2, 2).eval(); };
        CHECK_THROWS_AS(nonabelian_transport(p, Line{Vec2(-5, 0), Vec2(1, 0), 10.0, 0.0}, 2.0),
                        StepTooLarge);
    }
    SUBCASE("recorded trace stays unitary") {
        const YmPotential p = demo_field();
        const auto r =
            nonabelian_transport(p, Line{Vec2(-2, 0.1), Vec2(1, 0), 4.0, 0.0}, 1e-3, true);
        REQUIRE(!r.trace.empty());
        for (size_t k = 0; k < r.trace.size(); k += 400)
            CHECK((r.trace[k].second.adjoint() * r.trace[k].second - Matrix::Identity(2, 2))
                      .norm() <= 1e-8);
    }
}

TEST_CASE("nonabelian radon transform") {
    const std::vector<double> offsets = {-0.6, -0.2, 0.0, 0.35, 0.7};
    SUBCASE("zero field gives identities") {
        const YmPotential p = YmPotential::zero(2, 1.0);
        for (const Matrix& r : nonabelian_radon(p, Vec2(1, 0), offsets, 0.0, 1e-3))
            CHECK((r - Matrix::Identity(2, 2)).norm() <= 1e-14);
    }
    SUBCASE("diagonal field integrates per channel") {
        YmPotential p;
        p.m = 2;
        p.support_radius = 1.0;
        p.A1 = [](const Vec2& x, double) {
            Matrix d(2, 2);
            d << 0.7 * bump(x.squaredNorm()), 0, 0, -0.4 * bump(x.squaredNorm());
            return d;
        };
        p.A2 = [](const Vec2&, double) { return Matrix::Zero(2, 2).eval(); };
        p.V = [](const Vec2&, double) { return Matrix::Zero(2, 2).eval(); };
        const auto rs = nonabelian_radon(p, Vec2(1, 0), offsets, 0.0, 1e-3);
        for (size_t k = 0; k < offsets.size(); ++k) {
            const double y = offsets[k];
            const double ii = integrate(
                [&](double s) { return bump(Vec2(s, y).squaredNorm()); }, -2.0, 2.0);
            CHECK(std::abs(rs[k](0, 0) - std::polar(1.0, 0.7 * ii)) <= 1e-8);
            CHECK(std::abs(rs[k](1, 1) - std::polar(1.0, -0.4 * ii)) <= 1e-8);
        }
    }
    SUBCASE("compactly supported gauge leaves the radon data fixed") {
        const YmPotential p = demo_field();
        YmGauge g;
        auto phi = [](const Vec2& x) { return 0.7 * bump(x.squaredNorm() / 0.64); };
        auto dphi = [](const Vec2& x) -> Vec2 {
            const double u = x.squaredNorm() / 0.64;
            if (u >= 1.0) return Vec2::Zero();
            const double du = -0.7 * bump(u) / ((1.0 - u) * (1.0 - u));
            return du * 2.0 * x / 0.64;
        };
        g.g = [phi](const Vec2& x, double) { return expi((phi(x) * pauli(3)).eval()); };
        g.dg_dx1 = [phi, dphi](const Vec2& x, double) {
            return (kI * dphi(x).x() * pauli(3) * expi((phi(x) * pauli(3)).eval())).eval();
        };
        g.dg_dx2 = [phi, dphi](const Vec2& x, double) {
            return (kI * dphi(x).y() * pauli(3) * expi((phi(x) * pauli(3)).eval())).eval();
        };
        g.dg_dt = [](const Vec2&, double) { return Matrix::Zero(2, 2).eval(); };
        const YmPotential q = apply_gauge(p, g);
        for (const Vec2& omega : {Vec2(1, 0), Vec2(0.6, 0.8)}) {
            const auto ra = nonabelian_radon(p, omega, offsets, 0.2, 1e-3);
            const auto rb = nonabelian_radon(q, omega, offsets, 0.2, 1e-3);
            for (size_t k = 0; k < ra.size(); ++k) CHECK((ra[k] - rb[k]).norm() <= 1e-7);
        }
    }
}

TEST_CASE("weighted potential transform") {
    const Line line{Vec2(-2, 0.1), Vec2(1, 0), 4.0, 0.0};
    SUBCASE("equal potentials give zero") {
        const YmPotential p = demo_field();
        CHECK(weighted_potential_transform(p, p, line, 1e-3).norm() <= 1e-14);
    }
    SUBCASE("free transport reduces to a plain integral") {
        YmPotential p1 = YmPotential::zero(2, 1.0);
        YmPotential p4 = YmPotential::zero(2, 1.0);
        p1.V = [](const Vec2& x, double) {
            return (bump(x.squaredNorm()) * pauli(1)).eval();
        };
        const double ii = integrate(
            [&](double s) { return bump(Vec2(-2 + s, 0.1).squaredNorm()); }, 0.0, 4.0);
        const Matrix w = weighted_potential_transform(p1, p4, line, 1e-3);
        CHECK((w - ii * pauli(1)).norm() <= 1e-8);
    }
    SUBCASE("self-consistency under step refinement") {
        const YmPotential p1 = demo_field();
        YmPotential p4 = YmPotential::zero(2, 1.0);
        const Matrix coarse = weighted_potential_transform(p1, p4, line, 1e-3);
        const Matrix fine = weighted_potential_transform(p1, p4, line, 1e-5);
        CHECK((coarse - fine).norm() <= 1e-7);
    }
}

TEST_CASE("leading geometric-optics amplitude") {
    EmPotential p;
    p.A = [](const Vec2& x, double t) {
        return Vec2(std::sin(2.0 * x.x() + x.y() + 0.3 * t), 0.25 * std::cos(x.x()));
    };
    p.V = [](const Vec2&, double) { return 0.0; };
    const CutoffProfile cut(0.8, 0.5, 0.1);
    GoAmplitude a = go_amplitude(p, Vec2(-1, 0), Vec2(1, 0), -2.0, cut);
    a.quad.abs_tol = 1e-14;  // keep quadrature noise below the FD truncation error

    SUBCASE("cutoff is L2 normalized") {
        CHECK(integrate([&](double t) { return cut.chi1(t) * cut.chi1(t); }, -0.5, 1.5) ==
              doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("modulus is the product of the cutoffs") {
        for (double s : {-0.5, 0.0, 0.8}) {
            for (double tau : {0.0, 0.2}) {
                CHECK(std::abs(a(s, tau, 0.4)) ==
                      doctest::Approx(cut.chi1(0.4) * cut.chi2(tau)).epsilon(1e-13));
            }
        }
    }
    SUBCASE("transport equation holds to second order in the FD step") {
        auto residual = [&](double h) {
            double worst = 0.0;
            for (const Vec2& x : {Vec2(-0.4, 0.12), Vec2(0.3, 0.05), Vec2(0.9, 0.18)}) {
                const double t = 0.45;
                const Cplx d = (a.at_point(x + h * Vec2(1, 0), t) -
                                a.at_point(x - h * Vec2(1, 0), t)) /
                               (2.0 * h);
                const Cplx r = -kI * d - p.A(x, t).x() * a.at_point(x, t);
                worst = std::max(worst, std::abs(r));
            }
            return worst;
        };
        const double r1 = residual(1e-4);
        const double r2 = residual(5e-5);
        CHECK(r1 <= 1e-6);
        CHECK(r1 / r2 >= 3.0);
        CHECK(r1 / r2 <= 5.0);
    }
}

TEST_CASE("transform dataset discrepancies") {
    Domain d;
    d.outer = OuterRegion::disk(Vec2(0, 0), 3.0);
    d.obstacles.push_back(Obstacle::disk(Vec2(0, 0), 0.6));
    d.t_end = 1.0;

    std::vector<BrokenRay> rays;
    for (int k = 0; k < 12; ++k) {
        const double a = 0.07 + 2.0 * M_PI * k / 12.0;
        const Vec2 entry = 3.0 * Vec2(std::cos(a), std::sin(a));
        const Vec2 dir = (Vec2(0.15 * std::sin(3.0 * a), 0.1 * std::cos(2.0 * a)) - entry)
                             .normalized();
        rays.push_back(trace_broken_ray(entry, dir, 0.1 * k / 12.0, d));
    }

    EmPotential pa;
    pa.A = [](const Vec2& x, double t) {
        return Vec2(0.2 * std::sin(x.y()), 0.3 * std::cos(x.x() + t));
    };
    pa.V = [](const Vec2& x, double) { return 0.1 * x.y(); };
    pa.support_radius = 3.0;

    SUBCASE("identical potentials give exact zeros") {
        const auto rep = transform_dataset(pa, pa, rays);
        CHECK(rep.max_mag_defect == 0.0);
        CHECK(rep.max_elec == 0.0);
        CHECK(rep.rows.size() == rays.size());
    }
    SUBCASE("static interior gauge is invisible") {
        const GaugeElement c = GaugeElement::smooth(
            [](const Vec2& x, double) {
                const double u = (x - Vec2(1.2, 0.5)).squaredNorm() / 1.2;
                return u < 1.0 ? 0.9 * std::exp(-1.0 / (1.0 - u)) : 0.0;
            });
        const EmPotential pb = apply_gauge(pa, c);
        const auto rep = transform_dataset(pa, pb, rays);
        CHECK(rep.max_mag_defect <= 1e-6);
        CHECK(rep.max_elec <= 1e-6);
    }
}
