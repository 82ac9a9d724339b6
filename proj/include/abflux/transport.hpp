#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "abflux/fields.hpp"
#include "abflux/geometry.hpp"

namespace abflux {

using Matrix = Eigen::MatrixXcd;

// --- abelian broken-ray transforms ----------------------------------------

/// Sum over legs of Int A(x_0^(j) + s theta_j, t0) . theta_j ds.
double magnetic_ray_transform(const EmPotential& p, const BrokenRay& ray,
                              const QuadratureConfig& quad = {});

/// Arclength integral of V along the broken ray at its time slice.
double electric_ray_transform(const EmPotential& p, const BrokenRay& ray,
                              const QuadratureConfig& quad = {});

// --- matrix (Yang-Mills) potentials ---------------------------------------

struct YmPotential {
    int m = 1;
    std::function<Matrix(const Vec2&, double)> A1, A2;  // self-adjoint
    std::function<Matrix(const Vec2&, double)> V;
    double support_radius = 0.0;

    static YmPotential zero(int m, double support_radius);
};

/// Smooth invertible matrix gauge with analytic partials.
struct YmGauge {
    std::function<Matrix(const Vec2&, double)> g;
    std::function<Matrix(const Vec2&, double)> dg_dx1, dg_dx2, dg_dt;
};

/// A_j' = g^-1 A_j g + i g^-1 dg/dx_j, V' = g^-1 V g - i g^-1 dg/dt.
YmPotential apply_gauge(const YmPotential& p, const YmGauge& c);

struct Line {
    Vec2 start;
    Vec2 omega;  // unit direction
    double length;
    double t;
};

struct TransportResult {
    Matrix endpoint;
    std::vector<std::pair<double, Matrix>> trace;  // (arclength, c), when recorded
    double step = 0.0;
};

/// Integrates dc/ds = i (A(x(s), t) . omega) c, c(0) = I, by classical RK4
/// with fixed step h. Throws StepTooLarge when the unitarity defect passes
/// 1e-4 at a checkpoint.
TransportResult nonabelian_transport(const YmPotential& p, const Line& line, double h,
                                     bool record_trace = false);

/// Full-support transport per parallel line: start at -(support_radius+1),
/// end at +(support_radius+1) along omega, offset y2 along omega_perp.
std::vector<Matrix> nonabelian_radon(const YmPotential& p, const Vec2& omega,
                                     const std::vector<double>& offsets, double t, double h);

/// Int c^-1(s) (V1 - V4)(x(s), t) c(s) ds with c the transport matrix of p1.
Matrix weighted_potential_transform(const YmPotential& p1, const YmPotential& p4,
                                    const Line& line, double h);

// --- leading geometric-optics amplitude -----------------------------------

/// chi0 bump with Int chi0^2 = 1, support [-1, 1].
class CutoffProfile {
  public:
    CutoffProfile(double eps, double t0, double tau0);
    double chi1(double t) const;    // eps^{-1/2} chi0((t - t0)/eps)
    double chi2(double tau) const;  // eps^{-1/2} chi0((tau - tau0)/eps)
    double eps() const { return eps_; }

  private:
    double eps_, t0_, tau0_;
};

/// a00(s, tau, t) = chi1(t) chi2(tau) exp(i Int_{s0}^{s} A(x(s'), t) . omega ds')
/// in ray-frame coordinates x = x_ref + s omega + tau omega_perp.
struct GoAmplitude {
    Vec2 x_ref;
    Vec2 omega, omega_perp;
    double s0;
    CutoffProfile cut;
    EmPotential p;
    QuadratureConfig quad;

    std::complex<double> operator()(double s, double tau, double t) const;
    std::complex<double> at_point(const Vec2& x, double t) const;
};

GoAmplitude go_amplitude(const EmPotential& p, const Vec2& origin, const Vec2& omega, double s0,
                         const CutoffProfile& cut);

// --- transform datasets ---------------------------------------------------

struct RayDiscrepancy {
    int ray_id;
    double t0;
    Vec2 entry;
    Vec2 direction;
    double delta_mag;
    double delta_elec;
};

struct DiscrepancyReport {
    double max_mag_defect = 0.0;  // max |exp(i delta_mag) - 1|
    double max_elec = 0.0;        // max |delta_elec|
    std::vector<RayDiscrepancy> rows;
};

DiscrepancyReport transform_dataset(const EmPotential& pa, const EmPotential& pb,
                                    const std::vector<BrokenRay>& rays,
                                    const QuadratureConfig& quad = {});

}  // namespace abflux
