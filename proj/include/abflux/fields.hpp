#pragma once

#include <Eigen/Dense>
#include <functional>
#include <variant>
#include <vector>

#include "abflux/geometry.hpp"
#include "abflux/quadrature.hpp"

namespace abflux {

using Vec3 = Eigen::Vector3d;  // (x1, x2, t)

/// Smooth bump of unit mass supported in [-width, width].
class Mollifier {
  public:
    explicit Mollifier(double width);
    double width() const { return width_; }
    double operator()(double s) const;
    double derivative(double s) const;
    /// Smooth step: 0 below -width, 1 above +width.
    double antiderivative(double s) const;

  private:
    double width_;
    double norm_;  // 1 / (width * int exp(-1/(1-u^2)) du)
};

/// Abelian electromagnetic potential pair (A, V) with optional analytic
/// partials; central finite differences of step fd_step otherwise.
struct EmPotential {
    std::function<Vec2(const Vec2&, double)> A;
    std::function<double(const Vec2&, double)> V;
    double support_radius = 0.0;

    // optional analytic partials; (i,j) entry of dA_dx is dA_i/dx_j
    std::function<Eigen::Matrix2d(const Vec2&, double)> dA_dx;
    std::function<Vec2(const Vec2&, double)> dA_dt;
    std::function<Vec2(const Vec2&, double)> dV_dx;
    double fd_step = 1e-5;

    bool has_partials() const { return dA_dx && dA_dt && dV_dx; }
    Eigen::Matrix2d jacobian_A(const Vec2& x, double t) const;
    Vec2 time_derivative_A(const Vec2& x, double t) const;
    Vec2 gradient_V(const Vec2& x, double t) const;
};

struct FieldStrength {
    std::function<double(const Vec2&, double)> B3;
    std::function<Vec2(const Vec2&, double)> E;
};

FieldStrength derived_fields(const EmPotential& p);

/// Piecewise-linear path in (x1, x2, t) space.
struct SpacetimePath {
    std::vector<Vec3> samples;
    bool closed = false;

    static SpacetimePath spatial_polyline(const std::vector<Vec2>& pts, double t, bool closed);
    void validate() const;
    Vec3 centroid() const;
};

double line_integral_em(const EmPotential& p, const SpacetimePath& path,
                        const QuadratureConfig& quad = {});

// --- surface patches ------------------------------------------------------

/// Spatial disk {|x - center| <= radius} at fixed t, oriented dx1 ^ dx2.
struct SpatialDiskPatch {
    Vec2 center;
    double radius;
    double t;
};

/// {x1 = const} x [x2_lo, x2_hi] x [t_lo, t_hi], oriented dx2 ^ dt.
struct FixedX1RectPatch {
    double x1;
    double x2_lo, x2_hi;
    double t_lo, t_hi;
};

struct TriangulatedPatch {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
};

using SurfacePatch = std::variant<SpatialDiskPatch, FixedX1RectPatch, TriangulatedPatch>;

/// Integral of the field-strength two-form
///   F = d(A.dx - V dt) = B3 dx1^dx2 + E1 dx1^dt + E2 dx2^dt
/// over the oriented patch, so Stokes gives line_integral_em on the boundary.
double surface_flux(const FieldStrength& f, const SurfacePatch& patch,
                    const QuadratureConfig& quad = {});

/// Cone over a closed path from an apex; boundary orientation matches the
/// path's traversal order.
TriangulatedPatch fan_patch(const SpacetimePath& loop, const Vec3& apex);

// --- section-4 scenarios --------------------------------------------------

/// Regularized vortex: A = (b(t)/2pi) M(rho)/rho^2 (-y2, y1), y = x - c(t),
/// where M ramps from 0 to 1 across a radial bump core of radius core_radius.
/// curl A = b(t) eta(rho) with eta a unit-mass radial density; V = 0.
EmPotential vortex_potential(std::function<double(double)> b, std::function<double(double)> db_dt,
                             std::function<Vec2(double)> center,
                             std::function<Vec2(double)> center_velocity, double core_radius,
                             double support_radius);

enum class ShieldedKind { Electric, Magnetic };

struct ShieldedScenario {
    ShieldedKind kind;
    EmPotential potential;
    FieldStrength fields;
    Domain domain;
    double v0;
    double r1;
    double delta;
    std::function<double(double)> profile;  // e(t) or b(t)
};

/// The moving-obstacle shielded-field examples. The delta functions are
/// realized as width-delta mollifiers confined to the obstacle core, so the
/// potential pair is exact (fields are its exact derivatives).
ShieldedScenario build_shielded_scenario(ShieldedKind kind, std::function<double(double)> profile,
                                         std::function<double(double)> profile_dt, double v0,
                                         double r1, double delta, double outer_radius,
                                         double t_end);

}  // namespace abflux
