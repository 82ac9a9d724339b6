#include "abflux/schrodinger.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <cmath>
#include <cstdio>

#include "abflux/errors.hpp"

namespace abflux {

using Complex = std::complex<double>;
using SparseC = Eigen::SparseMatrix<Complex>;
using VecC = Eigen::VectorXcd;

namespace {
constexpr Complex kI{0.0, 1.0};

double smooth_ramp(double u) {
    // C-infinity step: 0 at u <= 0, 1 at u >= 1.
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double f = std::exp(-1.0 / u);
    const double g = std::exp(-1.0 / (1.0 - u));
    return f / (f + g);
}

std::vector<BoundaryNode> perimeter_nodes(const GridSpec& g) {
    std::vector<BoundaryNode> out;
    out.reserve(2 * (g.nx + g.ny) - 4);
    double arc = 0.0;
    auto push = [&](int i, int j, const Vec2& n) {
        out.push_back({i, j, g.node(i, j), n, arc});
    };
    for (int i = 0; i < g.nx; ++i, arc += g.hx()) push(i, 0, {0, -1});
    arc -= g.hx();
    for (int j = 1; j < g.ny; ++j) {
        arc += g.hy();
        push(g.nx - 1, j, {1, 0});
    }
    for (int i = g.nx - 2; i >= 0; --i) {
        arc += g.hx();
        push(i, g.ny - 1, {0, 1});
    }
    for (int j = g.ny - 2; j >= 1; --j) {
        arc += g.hy();
        push(0, j, {-1, 0});
    }
    return out;
}

std::vector<uint8_t> compute_mask(const GridSpec& g, const Domain& domain, double t) {
    std::vector<uint8_t> mask(g.size(), 0);
    const bool disk_outer = domain.outer.is_disk;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Vec2 x = g.node(i, j);
            bool dead = false;
            if (disk_outer && !domain.outer.contains(x)) dead = true;
            for (const Obstacle& ob : domain.obstacles)
                if (!dead && ob.contains(x, t)) dead = true;
            if (dead) mask[g.index(i, j)] = 1;
        }
    return mask;
}

/// M = I + i (dt/2) H with identity rows at constrained nodes; H uses the
/// symmetrized magnetic stencil so the unconstrained block is Hermitian for
/// real V.
SparseC assemble_step_matrix(const GridSpec& g, const EmPotential& p, double t_mid,
                             const std::vector<uint8_t>& constrained) {
    const double hx = g.hx(), hy = g.hy();
    const double ax = 1.0 / (hx * hx), ay = 1.0 / (hy * hy);
    const Complex lam = kI * (g.dt / 2.0);
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<size_t>(g.size()) * 5);

    // cache A, V on the grid at the midpoint time
    std::vector<double> A1(g.size()), A2(g.size()), V(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int id = g.index(i, j);
            const Vec2 a = p.A(g.node(i, j), t_mid);
            A1[id] = a(0);
            A2[id] = a(1);
            V[id] = p.V(g.node(i, j), t_mid);
        }

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int id = g.index(i, j);
            if (constrained[id]) {
                trips.emplace_back(id, id, Complex{1.0, 0.0});
                continue;
            }
            const Complex diag =
                1.0 + lam * Complex{2.0 * ax + 2.0 * ay + A1[id] * A1[id] + A2[id] * A2[id] + V[id],
                                    0.0};
            trips.emplace_back(id, id, diag);
            const int ip = g.index(i + 1, j), im = g.index(i - 1, j);
            const int jp = g.index(i, j + 1), jm = g.index(i, j - 1);
            trips.emplace_back(id, ip, lam * (-ax + kI * (A1[id] + A1[ip]) / (2.0 * hx)));
            trips.emplace_back(id, im, lam * (-ax - kI * (A1[id] + A1[im]) / (2.0 * hx)));
            trips.emplace_back(id, jp, lam * (-ay + kI * (A2[id] + A2[jp]) / (2.0 * hy)));
            trips.emplace_back(id, jm, lam * (-ay - kI * (A2[id] + A2[jm]) / (2.0 * hy)));
        }
    SparseC m(g.size(), g.size());
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

/// (I - i (dt/2) H) u with H as above, skipping constrained rows (they are
/// overwritten with Dirichlet/zero values afterwards).
VecC apply_explicit_half(const GridSpec& g, const EmPotential& p, double t_mid,
                         const std::vector<uint8_t>& constrained, const VecC& u) {
    const double hx = g.hx(), hy = g.hy();
    const double ax = 1.0 / (hx * hx), ay = 1.0 / (hy * hy);
    const Complex lam = -kI * (g.dt / 2.0);
    VecC out(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int id = g.index(i, j);
            if (constrained[id]) {
                out(id) = u(id);
                continue;
            }
            const Vec2 x = g.node(i, j);
            const Vec2 a = p.A(x, t_mid);
            const double v = p.V(x, t_mid);
            const int ip = g.index(i + 1, j), im = g.index(i - 1, j);
            const int jp = g.index(i, j + 1), jm = g.index(i, j - 1);
            const double a1p = p.A(g.node(i + 1, j), t_mid)(0);
            const double a1m = p.A(g.node(i - 1, j), t_mid)(0);
            const double a2p = p.A(g.node(i, j + 1), t_mid)(1);
            const double a2m = p.A(g.node(i, j - 1), t_mid)(1);
            Complex h = (2.0 * ax + 2.0 * ay + a.squaredNorm() + v) * u(id);
            h += (-ax + kI * (a(0) + a1p) / (2.0 * hx)) * u(ip);
            h += (-ax - kI * (a(0) + a1m) / (2.0 * hx)) * u(im);
            h += (-ay + kI * (a(1) + a2p) / (2.0 * hy)) * u(jp);
            h += (-ay - kI * (a(1) + a2m) / (2.0 * hy)) * u(jm);
            out(id) = u(id) + lam * h;
        }
    return out;
}
}  // namespace

void GridSpec::validate() const {
    if (nx < 16 || ny < 16) throw ConfigInvalid("GridSpec: nx, ny must be >= 16");
    if (dt <= 0.0 || nt < 1) throw ConfigInvalid("GridSpec: need dt > 0 and nt >= 1");
    if (hi(0) <= lo(0) || hi(1) <= lo(1)) throw ConfigInvalid("GridSpec: empty rectangle");
    if (std::abs(hx() - hy()) > 1e-12 * std::max(hx(), hy()))
        std::fprintf(stderr, "abflux: GridSpec warning: hx != hy (%.3e vs %.3e)\n", hx(), hy());
}

double WaveField::l2_norm(int k) const {
    return std::sqrt(grid.hx() * grid.hy() * snapshots.at(k).squaredNorm());
}

WaveField solve_ibvp(const EmPotential& p, const Domain& domain, const GridSpec& grid,
                     const BoundaryFn& f, const InitialFn& u0, const SolveOptions& opt) {
    grid.validate();
    WaveField w;
    w.grid = grid;
    w.boundary = perimeter_nodes(grid);
    w.cfl_advisory = grid.dt > std::max(grid.hx(), grid.hy()) * std::max(grid.hx(), grid.hy());
    if (w.cfl_advisory)
        std::fprintf(stderr, "abflux: advisory: dt > h^2; Crank-Nicolson stays stable but "
                             "accuracy may suffer\n");

    const double t_total = grid.t_end();
    const double ramp_end = opt.ramp_fraction * t_total;
    auto ramp = [&](double t) {
        return opt.ramp_fraction <= 0.0 ? 1.0 : smooth_ramp(t / ramp_end);
    };
    auto f_at = [&](const Vec2& x, double t) -> Complex {
        return f ? ramp(t) * f(x, t) : Complex{0.0, 0.0};
    };

    auto constrained_at = [&](double t) {
        std::vector<uint8_t> c = compute_mask(grid, domain, t);
        for (const BoundaryNode& b : w.boundary) c[grid.index(b.i, b.j)] |= 2;
        return c;
    };

    std::vector<uint8_t> cons = constrained_at(0.0);
    VecC u = VecC::Zero(grid.size());
    if (u0)
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i)
                if (!cons[grid.index(i, j)]) u(grid.index(i, j)) = u0(grid.node(i, j));
    for (const BoundaryNode& b : w.boundary)
        if (!(cons[grid.index(b.i, b.j)] & 1)) u(grid.index(b.i, b.j)) = f_at(b.x, 0.0);

    w.snapshots.push_back(u);
    w.masks.push_back(compute_mask(grid, domain, 0.0));

    Eigen::BiCGSTAB<SparseC> solver;
    solver.setTolerance(opt.rel_residual);
    solver.setMaxIterations(opt.max_iterations);

    SparseC mat;
    bool have_matrix = false;
    std::vector<uint8_t> matrix_cons;

    for (int k = 0; k < grid.nt; ++k) {
        const double t_mid = (k + 0.5) * grid.dt;
        const double t_next = (k + 1) * grid.dt;
        std::vector<uint8_t> cons_next = constrained_at(t_next);

        const bool reuse = have_matrix && opt.cache_matrix && opt.potentials_static &&
                           cons_next == matrix_cons;
        if (!reuse) {
            mat = assemble_step_matrix(grid, p, t_mid, cons_next);
            solver.compute(mat);
            matrix_cons = cons_next;
            have_matrix = true;
        }

        VecC rhs = apply_explicit_half(grid, p, t_mid, cons_next, u);
        for (int id = 0; id < grid.size(); ++id)
            if (cons_next[id] & 1) rhs(id) = 0.0;
        for (const BoundaryNode& b : w.boundary) {
            const int id = grid.index(b.i, b.j);
            if (!(cons_next[id] & 1)) rhs(id) = f_at(b.x, t_next);
        }

        VecC guess = u;
        for (int id = 0; id < grid.size(); ++id)
            if (cons_next[id]) guess(id) = rhs(id);
        u = solver.solveWithGuess(rhs, guess);
        if (solver.info() != Eigen::Success)
            throw LinearSolveFailure("solve_ibvp: BiCGSTAB did not reach tolerance at step " +
                                     std::to_string(k + 1) + " (error " +
                                     std::to_string(solver.error()) + ")");

        w.snapshots.push_back(u);
        w.masks.push_back(compute_mask(grid, domain, t_next));
    }
    return w;
}

namespace {
/// d/dx_axis of field at (i, j): centered inside, one-sided second order at
/// the grid edge.
Complex grid_deriv(const GridSpec& g, const VecC& u, int i, int j, int axis) {
    const double h = axis == 0 ? g.hx() : g.hy();
    auto at = [&](int di, int dj) { return u(g.index(i + di, j + dj)); };
    const int n = axis == 0 ? g.nx : g.ny;
    const int idx = axis == 0 ? i : j;
    const int s0 = axis == 0 ? 1 : 0, s1 = axis == 0 ? 0 : 1;
    if (idx > 0 && idx < n - 1) return (at(s0, s1) - at(-s0, -s1)) / (2.0 * h);
    if (idx == 0)
        return (-3.0 * at(0, 0) + 4.0 * at(s0, s1) - at(2 * s0, 2 * s1)) / (2.0 * h);
    return (3.0 * at(0, 0) - 4.0 * at(-s0, -s1) + at(-2 * s0, -2 * s1)) / (2.0 * h);
}
}  // namespace

BoundaryData boundary_data(const WaveField& w, const EmPotential& p) {
    const GridSpec& g = w.grid;
    const int nb = static_cast<int>(w.boundary.size());
    const int nt1 = static_cast<int>(w.snapshots.size());
    BoundaryData bd;
    bd.nodes = w.boundary;
    bd.f1.resize(nb, nt1);
    bd.f2.resize(nb, nt1);
    bd.f3_x.resize(nb, nt1);
    bd.f3_y.resize(nb, nt1);

    for (int k = 0; k < nt1; ++k) {
        const VecC& u = w.snapshots[k];
        const double t = k * g.dt;
        for (int b = 0; b < nb; ++b) {
            const BoundaryNode& node = w.boundary[b];
            const int di = -static_cast<int>(node.normal(0));
            const int dj = -static_cast<int>(node.normal(1));
            const double h = node.normal(0) != 0 ? g.hx() : g.hy();
            const Complex u0 = u(g.index(node.i, node.j));
            const Complex u1 = u(g.index(node.i + di, node.j + dj));
            const Complex u2 = u(g.index(node.i + 2 * di, node.j + 2 * dj));
            const double r0 = std::norm(u0), r1 = std::norm(u1), r2 = std::norm(u2);
            bd.f1(b, k) = r0;
            bd.f2(b, k) = (3.0 * r0 - 4.0 * r1 + r2) / (2.0 * h);
            // current at the boundary-adjacent node
            const int ai = node.i + di, aj = node.j + dj;
            const Complex ua = u(g.index(ai, aj));
            const Vec2 a = p.A(g.node(ai, aj), t);
            const Complex dx = grid_deriv(g, u, ai, aj, 0);
            const Complex dy = grid_deriv(g, u, ai, aj, 1);
            bd.f3_x(b, k) = std::imag((dx - kI * a(0) * ua) * std::conj(ua));
            bd.f3_y(b, k) = std::imag((dy - kI * a(1) * ua) * std::conj(ua));
        }
    }
    return bd;
}

DtnData dtn_apply(const EmPotential& p, const Domain& domain, const GridSpec& grid,
                  const BoundaryFn& f, const SolveOptions& opt) {
    WaveField w = solve_ibvp(p, domain, grid, f, nullptr, opt);
    const GridSpec& g = w.grid;
    DtnData d;
    d.nodes = w.boundary;
    const int nb = static_cast<int>(w.boundary.size());
    const int nt1 = static_cast<int>(w.snapshots.size());
    d.lambda.resize(nb, nt1);
    for (int k = 0; k < nt1; ++k) {
        const VecC& u = w.snapshots[k];
        const double t = k * g.dt;
        for (int b = 0; b < nb; ++b) {
            const BoundaryNode& node = w.boundary[b];
            const int di = -static_cast<int>(node.normal(0));
            const int dj = -static_cast<int>(node.normal(1));
            const double h = node.normal(0) != 0 ? g.hx() : g.hy();
            const Complex u0 = u(g.index(node.i, node.j));
            const Complex u1 = u(g.index(node.i + di, node.j + dj));
            const Complex u2 = u(g.index(node.i + 2 * di, node.j + 2 * dj));
            const Complex dnu = (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * h);
            d.lambda(b, k) = dnu - kI * p.A(node.x, t).dot(node.normal) * u0;
        }
    }
    return d;
}

DtnData dtn_conjugate(const EmPotential& p, const Domain& domain, const GridSpec& grid,
                      const BoundaryFn& f,
                      const std::function<Complex(const Vec2&, double)>& c0,
                      const SolveOptions& opt) {
    BoundaryFn cf = [&](const Vec2& x, double t) { return c0(x, t) * f(x, t); };
    DtnData d = dtn_apply(p, domain, grid, cf, opt);
    for (int k = 0; k < d.lambda.cols(); ++k)
        for (int b = 0; b < d.lambda.rows(); ++b) {
            const Complex c = c0(d.nodes[b].x, k * grid.dt);
            if (std::abs(c) < 1e-12)
                throw SingularGauge("dtn_conjugate: vanishing boundary gauge trace");
            d.lambda(b, k) /= c;
        }
    return d;
}

}  // namespace abflux
