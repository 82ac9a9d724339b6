#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "abflux/fields.hpp"
#include "abflux/geometry.hpp"

namespace abflux {

using Complex = std::complex<double>;

/// Abelian gauge element c(x,t) = exp(i [sum_j m_j theta_j(x,t) + psi(x,t)]):
/// a smooth single-valued phase psi plus integer windings about the obstacle
/// centers of an associated domain.
struct GaugeElement {
    std::function<double(const Vec2&, double)> psi;
    std::function<Vec2(const Vec2&, double)> dpsi_dx;  // optional
    std::function<double(const Vec2&, double)> dpsi_dt;
    std::vector<int> windings;  // one per domain obstacle; empty means all 0
    const Domain* domain = nullptr;
    bool boundary_trivial = false;
    double fd_step = 1e-6;

    static GaugeElement identity();
    static GaugeElement smooth(std::function<double(const Vec2&, double)> psi,
                               std::function<Vec2(const Vec2&, double)> dpsi_dx = nullptr,
                               std::function<double(const Vec2&, double)> dpsi_dt = nullptr);
    static GaugeElement winding(const Domain& domain, std::vector<int> m);

    /// Total phase mth + psi is multivalued; gradient and time derivative of
    /// it are single-valued.
    Vec2 phase_gradient(const Vec2& x, double t) const;
    double phase_dt(const Vec2& x, double t) const;
    /// c(x,t); well defined despite the multivalued angle part.
    Complex value(const Vec2& x, double t) const;
};

/// A' = A - grad(m theta + psi), V' = V + d_t(m theta + psi); field strengths
/// are unchanged.
EmPotential apply_gauge(const EmPotential& p, const GaugeElement& c);

/// Nonintegrable phase factor R(A, V, loop) = exp(-i Int_loop A.dx - V dt).
Complex holonomy(const EmPotential& p, const SpacetimePath& loop,
                 const QuadratureConfig& quad = {});

/// Winding count of an ordered sample of nonvanishing complex values along a
/// closed loop; throws UndersampledLoop when a phase jump reaches pi - 0.1.
int winding_number(const std::vector<Complex>& c_samples);

struct EquivalenceVerdict {
    bool equivalent = false;
    std::vector<int> windings;  // recovered m_j per obstacle, when equivalent
    std::function<Complex(const Vec2&, double)> gauge;  // c with p_b = apply_gauge(p_a, c)
    SpacetimePath witness;          // first failing loop, when inequivalent
    Complex witness_holonomy = 1.0; // R' R^{-1} on the witness loop
};

struct EquivalenceOptions {
    double tol_h = 1e-6;
    int loop_segments = 256;
    QuadratureConfig quad{};
};

/// Decides gauge equivalence of two abelian potentials by holonomy of the
/// difference connection on generator loops at the sampled times plus one
/// time-direction rectangle per obstacle between consecutive samples.
EquivalenceVerdict test_gauge_equivalence(const EmPotential& pa, const EmPotential& pb,
                                          const Domain& domain,
                                          const std::vector<double>& t_samples, double clearance,
                                          const EquivalenceOptions& opt = {});

/// Obstacle-avoiding path from base to target: spatial polyline at the base
/// time slice, then a time segment (rerouted when an obstacle sweeps through
/// the target's position).
SpacetimePath gauge_path(const Domain& domain, const Vec3& base, const Vec3& target,
                         double clearance);

/// c at each target per the difference-connection path integral, with
/// c(base) = 1. Requires the generator-loop check to have been run.
std::vector<Complex> construct_gauge_function(const EmPotential& pa, const EmPotential& pb,
                                              const Domain& domain, const Vec3& base,
                                              const std::vector<Vec3>& targets, double clearance,
                                              bool equivalence_checked,
                                              const QuadratureConfig& quad = {});

}  // namespace abflux
