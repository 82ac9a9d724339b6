#include <cmath>
#include <complex>
#include <doctest.h>

#include "abflux/schrodinger.hpp"

using namespace abflux;
using Cplx = std::complex<double>;

namespace {

const Cplx kI{0.0, 1.0};

Domain rect_domain(double half, double t_end) {
    Domain d;
    d.outer = OuterRegion::rectangle(Vec2(-half, -half), Vec2(half, half));
    d.t_end = t_end;
    return d;
}

EmPotential zero_potential() {
    EmPotential p;
    p.A = [](const Vec2&, double) { return Vec2(0, 0); };
    p.V = [](const Vec2&, double) { return 0.0; };
    return p;
}

// free evolution of exp(-|x|^2/(2 sigma^2) + i k.x) under i u_t = -Lap u,
// separable per coordinate
Cplx free_gaussian(const Vec2& x, double t, double sigma, const Vec2& k) {
    auto dim = [&](double xd, double kd) {
        const Cplx denom = sigma * sigma + 2.0 * kI * t;
        const Cplx b = sigma * sigma * kd + kI * xd;
        return sigma / std::sqrt(denom) *
               std::exp(b * b / (2.0 * denom) - sigma * sigma * kd * kd / 2.0);
    };
    return dim(x.x(), k.x()) * dim(x.y(), k.y());
}

}  // namespace

TEST_CASE("grid validation") {
    GridSpec g;
    g.lo = Vec2(-1, -1);
    g.hi = Vec2(1, 1);
    g.nx = 8;
    CHECK_THROWS_AS(g.validate(), ConfigInvalid);
    g.nx = 32;
    g.ny = 32;
    g.dt = -1.0;
    CHECK_THROWS_AS(g.validate(), ConfigInvalid);
    g.dt = 1e-3;
    g.hi = Vec2(-2, 1);
    CHECK_THROWS_AS(g.validate(), ConfigInvalid);
}

TEST_CASE("zero data evolves to the zero solution") {
    const Domain d = rect_domain(1.0, 0.02);
    GridSpec g;
    g.lo = Vec2(-1, -1);
    g.hi = Vec2(1, 1);
    g.nx = g.ny = 24;
    g.dt = 1e-3;
    g.nt = 20;
    const WaveField w = solve_ibvp(zero_potential(), d, g, nullptr, nullptr);
    REQUIRE(static_cast<int>(w.snapshots.size()) == g.nt + 1);
    for (int k = 0; k <= g.nt; ++k) CHECK(w.l2_norm(k) <= 1e-14);
}

TEST_CASE("norm is conserved for real potentials without drive") {
    const Domain d = rect_domain(1.0, 0.1);
    GridSpec g;
    g.lo = Vec2(-1, -1);
    g.hi = Vec2(1, 1);
    g.nx = g.ny = 48;
    g.dt = 1e-3;
    g.nt = 100;
    EmPotential p = zero_potential();
    p.V = [](const Vec2& x, double) { return 3.0 * std::exp(-8.0 * x.squaredNorm()); };
    SolveOptions opt;
    opt.rel_residual = 1e-12;
    opt.potentials_static = true;
    const WaveField w = solve_ibvp(
        p, d, g, nullptr,
        [](const Vec2& x) {
            return std::exp(-x.squaredNorm() / 0.08) * std::exp(kI * (3.0 * x.x()));
        },
        opt);
    const double n0 = w.l2_norm(0);
    REQUIRE(n0 > 0.1);
    for (int k = 1; k <= g.nt; ++k) CHECK(std::abs(w.l2_norm(k) - n0) / n0 <= 1e-8);
}

TEST_CASE("free gaussian packet matches the analytic solution") {
    const Domain d = rect_domain(3.0, 0.01);
    GridSpec g;
    g.lo = Vec2(-3, -3);
    g.hi = Vec2(3, 3);
    g.nx = g.ny = 64;
    g.dt = 2e-4;
    g.nt = 50;
    const double sigma = 0.3;
    const Vec2 k0(2.0, 0.0);
    SolveOptions opt;
    opt.potentials_static = true;
    const WaveField w = solve_ibvp(
        zero_potential(), d, g, nullptr,
        [&](const Vec2& x) { return free_gaussian(x, 0.0, sigma, k0); }, opt);

    double num = 0.0, den = 0.0;
    const double T = g.t_end();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Cplx exact = free_gaussian(g.node(i, j), T, sigma, k0);
            num += std::norm(w.snapshots.back()(g.index(i, j)) - exact);
            den += std::norm(exact);
        }
    CHECK(std::sqrt(num / den) <= 0.05);
}

TEST_CASE("masked obstacle nodes stay exactly zero") {
    Domain d = rect_domain(1.0, 0.05);
    d.obstacles.push_back(
        Obstacle::disk(Vec2(0, 0), 0.3)
            .set_motion([](double t) { return Vec2(2.0 * t, 0.0); },
                        [](double) { return Vec2(2.0, 0.0); }));
    GridSpec g;
    g.lo = Vec2(-1, -1);
    g.hi = Vec2(1, 1);
    g.nx = g.ny = 32;
    g.dt = 1e-3;
    g.nt = 50;
    const WaveField w = solve_ibvp(
        zero_potential(), d, g, nullptr,
        [](const Vec2& x) { return std::exp(-(x - Vec2(-0.5, 0.4)).squaredNorm() / 0.05); });
    REQUIRE(w.masks.size() == w.snapshots.size());
    for (size_t k = 0; k < w.snapshots.size(); ++k) {
        bool any_masked = false;
        for (int id = 0; id < g.size(); ++id)
            if (w.masks[k][id]) {
                any_masked = true;
                CHECK(std::abs(w.snapshots[k](id)) == 0.0);
            }
        CHECK(any_masked);
    }
}

TEST_CASE("boundary data of the zero field vanishes") {
    const Domain d = rect_domain(1.0, 0.01);
    GridSpec g;
    g.lo = Vec2(-1, -1);
    g.hi = Vec2(1, 1);
    g.nx = g.ny = 24;
    g.dt = 1e-3;
    g.nt = 10;
    const WaveField w = solve_ibvp(zero_potential(), d, g, nullptr, nullptr);
    const BoundaryData bd = boundary_data(w, zero_potential());
    CHECK(static_cast<int>(bd.nodes.size()) == 2 * (g.nx + g.ny) - 4);
    CHECK(bd.f1.cwiseAbs().maxCoeff() == 0.0);
    CHECK(bd.f2.cwiseAbs().maxCoeff() == 0.0);
    CHECK(bd.f3_x.cwiseAbs().maxCoeff() == 0.0);
    CHECK(bd.f3_y.cwiseAbs().maxCoeff() == 0.0);

    // perimeter bookkeeping: unit normals and increasing arclength
    for (size_t b = 1; b < bd.nodes.size(); ++b) {
        CHECK(bd.nodes[b].normal.norm() == doctest::Approx(1.0));
        CHECK(bd.nodes[b].arc > bd.nodes[b - 1].arc);
    }
}

TEST_CASE("dtn map basics") {
    const Domain d = rect_domain(1.0, 0.05);
    GridSpec g;
    g.lo = Vec2(-1, -1);
    g.hi = Vec2(1, 1);
    g.nx = g.ny = 24;
    g.dt = 2.5e-3;
    g.nt = 20;
    const EmPotential p = zero_potential();
    const BoundaryFn f = [](const Vec2& x, double t) -> Cplx {
        return std::exp(-4.0 * (x - Vec2(1.0, 0.0)).squaredNorm()) *
               std::sin(40.0 * M_PI * t);
    };

    SUBCASE("zero drive gives a zero map") {
        const DtnData l = dtn_apply(p, d, g, nullptr);
        CHECK(l.lambda.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("conjugation by the identity changes nothing") {
        const DtnData l1 = dtn_apply(p, d, g, f);
        const DtnData l2 = dtn_conjugate(p, d, g, f,
                                         [](const Vec2&, double) { return Cplx(1.0, 0.0); });
        CHECK((l1.lambda - l2.lambda).cwiseAbs().maxCoeff() <= 1e-13);
        CHECK(l1.lambda.cwiseAbs().maxCoeff() > 1e-6);  // the drive actually excites the field
    }
    SUBCASE("constant phases commute with the map") {
        const DtnData l1 = dtn_apply(p, d, g, f);
        const DtnData l2 = dtn_conjugate(p, d, g, f,
                                         [](const Vec2&, double) { return std::polar(1.0, 0.7); });
        CHECK((l1.lambda - l2.lambda).cwiseAbs().maxCoeff() <= 1e-8);
    }
    SUBCASE("vanishing boundary gauge is singular") {
        CHECK_THROWS_AS(
            dtn_conjugate(p, d, g, f, [](const Vec2&, double) { return Cplx(0.0, 0.0); }),
            SingularGauge);
    }
}
