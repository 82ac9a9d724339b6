#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "abflux/fields.hpp"
#include "abflux/geometry.hpp"

namespace abflux {

/// Uniform tensor grid on [lo, hi] with nx x ny nodes (boundary included);
/// nt time steps of size dt cover [0, nt*dt].
struct GridSpec {
    Vec2 lo, hi;
    int nx = 64, ny = 64;
    double dt = 1e-3;
    int nt = 100;

    double hx() const { return (hi(0) - lo(0)) / (nx - 1); }
    double hy() const { return (hi(1) - lo(1)) / (ny - 1); }
    Vec2 node(int i, int j) const { return {lo(0) + i * hx(), lo(1) + j * hy()}; }
    int index(int i, int j) const { return j * nx + i; }
    int size() const { return nx * ny; }
    double t_end() const { return nt * dt; }
    void validate() const;
};

/// Outer-boundary node: grid indices, position, outward normal, arclength
/// position along the positively oriented perimeter.
struct BoundaryNode {
    int i, j;
    Vec2 x;
    Vec2 normal;
    double arc;
};

struct SolveOptions {
    double ramp_fraction = 0.05;  // smooth Dirichlet ramp over the first steps
    double rel_residual = 1e-10;
    int max_iterations = 2000;
    /// Assemble the step matrix once (valid when potentials and masks do not
    /// depend on t); detected automatically for motionless obstacles unless
    /// forced off.
    bool cache_matrix = true;
    bool potentials_static = false;
};

struct WaveField {
    GridSpec grid;
    std::vector<BoundaryNode> boundary;
    std::vector<Eigen::VectorXcd> snapshots;      // nt+1 frames, index = j*nx + i
    std::vector<std::vector<uint8_t>> masks;      // 1 = constrained-to-zero node
    bool cfl_advisory = false;                    // dt > h^2 (accuracy warning)

    double l2_norm(int k) const;  // sqrt(hx*hy * sum |u|^2)
};

using BoundaryFn = std::function<std::complex<double>(const Vec2&, double)>;
using InitialFn = std::function<std::complex<double>(const Vec2&)>;

/// Crank-Nicolson for i du/dt = [sum_j (-i d_j - A_j)^2 + V] u with Dirichlet
/// f on the grid rectangle perimeter and zero on masked nodes (obstacle
/// interiors, and the exterior of a disk outer region).
WaveField solve_ibvp(const EmPotential& p, const Domain& domain, const GridSpec& grid,
                     const BoundaryFn& f, const InitialFn& u0, const SolveOptions& opt = {});

/// Gauge-invariant boundary triple: f1 = |u|^2 on boundary nodes, f2 its
/// one-sided second-order outward normal derivative, f3 the probability
/// current Im[(grad u - iAu) conj(u)] at boundary-adjacent nodes.
struct BoundaryData {
    std::vector<BoundaryNode> nodes;
    Eigen::MatrixXd f1;    // nodes x (nt+1)
    Eigen::MatrixXd f2;
    Eigen::MatrixXd f3_x;  // current components, evaluated one node inward
    Eigen::MatrixXd f3_y;
};

BoundaryData boundary_data(const WaveField& w, const EmPotential& p);

struct DtnData {
    std::vector<BoundaryNode> nodes;
    Eigen::MatrixXcd lambda;  // nodes x (nt+1): du/dnu - i (A.nu) u
};

DtnData dtn_apply(const EmPotential& p, const Domain& domain, const GridSpec& grid,
                  const BoundaryFn& f, const SolveOptions& opt = {});

/// Lambda' = c0^{-1} Lambda c0: recomputes dtn_apply on c0*f and multiplies by
/// c0^{-1} pointwise. Throws SingularGauge when |c0| < 1e-12 at a node.
DtnData dtn_conjugate(const EmPotential& p, const Domain& domain, const GridSpec& grid,
                      const BoundaryFn& f,
                      const std::function<std::complex<double>(const Vec2&, double)>& c0,
                      const SolveOptions& opt = {});

}  // namespace abflux
