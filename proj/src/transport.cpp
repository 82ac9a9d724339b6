#include "abflux/transport.hpp"

#include <cmath>

#include "abflux/errors.hpp"

namespace abflux {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

double magnetic_ray_transform(const EmPotential& p, const BrokenRay& ray,
                              const QuadratureConfig& quad) {
    double total = 0.0;
    for (const RayLeg& leg : ray.legs) {
        total += integrate(
            [&](double s) { return p.A(leg.start + s * leg.dir, ray.t0).dot(leg.dir); }, 0.0,
            leg.length, quad);
    }
    return total;
}

double electric_ray_transform(const EmPotential& p, const BrokenRay& ray,
                              const QuadratureConfig& quad) {
    double total = 0.0;
    for (const RayLeg& leg : ray.legs) {
        total += integrate([&](double s) { return p.V(leg.start + s * leg.dir, ray.t0); }, 0.0,
                           leg.length, quad);
    }
    return total;
}

YmPotential YmPotential::zero(int m, double support_radius) {
    YmPotential p;
    p.m = m;
    p.support_radius = support_radius;
    auto z = [m](const Vec2&, double) { return Matrix::Zero(m, m).eval(); };
    p.A1 = z;
    p.A2 = z;
    p.V = z;
    return p;
}

YmPotential apply_gauge(const YmPotential& p, const YmGauge& c) {
    YmPotential q;
    q.m = p.m;
    q.support_radius = p.support_radius;
    q.A1 = [p, c](const Vec2& x, double t) {
        Matrix gi = c.g(x, t).inverse();
        return (gi * p.A1(x, t) * c.g(x, t) + kI * gi * c.dg_dx1(x, t)).eval();
    };
    q.A2 = [p, c](const Vec2& x, double t) {
        Matrix gi = c.g(x, t).inverse();
        return (gi * p.A2(x, t) * c.g(x, t) + kI * gi * c.dg_dx2(x, t)).eval();
    };
    q.V = [p, c](const Vec2& x, double t) {
        Matrix gi = c.g(x, t).inverse();
        return (gi * p.V(x, t) * c.g(x, t) - kI * gi * c.dg_dt(x, t)).eval();
    };
    return q;
}

TransportResult nonabelian_transport(const YmPotential& p, const Line& line, double h,
                                     bool record_trace) {
    if (h <= 0.0 || line.length < 0.0)
        throw PreconditionViolated("nonabelian_transport: need h > 0 and length >= 0");
    const int n = std::max(1, static_cast<int>(std::ceil(line.length / h)));
    const double dh = line.length / n;
    const Vec2 omega = line.omega;
    auto rhs = [&](double s, const Matrix& c) {
        const Vec2 x = line.start + s * omega;
        return (kI * (p.A1(x, line.t) * omega(0) + p.A2(x, line.t) * omega(1)) * c).eval();
    };

    TransportResult out;
    out.step = dh;
    Matrix c = Matrix::Identity(p.m, p.m);
    if (record_trace) out.trace.emplace_back(0.0, c);
    const Matrix id = Matrix::Identity(p.m, p.m);
    const int checkpoint = std::max(1, n / 16);
    for (int k = 0; k < n; ++k) {
        const double s = k * dh;
        const Matrix k1 = rhs(s, c);
        const Matrix k2 = rhs(s + 0.5 * dh, c + 0.5 * dh * k1);
        const Matrix k3 = rhs(s + 0.5 * dh, c + 0.5 * dh * k2);
        const Matrix k4 = rhs(s + dh, c + dh * k3);
        c += (dh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (record_trace) out.trace.emplace_back((k + 1) * dh, c);
        if ((k + 1) % checkpoint == 0 || k + 1 == n) {
            const double defect = (c.adjoint() * c - id).norm();
            if (defect > 1e-4)
                throw StepTooLarge("nonabelian_transport: unitarity defect " +
                                   std::to_string(defect) + " at s = " +
                                   std::to_string((k + 1) * dh) + "; reduce h");
        }
    }
    out.endpoint = c;
    return out;
}

std::vector<Matrix> nonabelian_radon(const YmPotential& p, const Vec2& omega,
                                     const std::vector<double>& offsets, double t, double h) {
    const Vec2 perp(-omega(1), omega(0));
    const double reach = p.support_radius + 1.0;
    std::vector<Matrix> out;
    out.reserve(offsets.size());
    for (double y2 : offsets) {
        Line line{y2 * perp - reach * omega, omega, 2.0 * reach, t};
        out.push_back(nonabelian_transport(p, line, h).endpoint);
    }
    return out;
}

Matrix weighted_potential_transform(const YmPotential& p1, const YmPotential& p4,
                                    const Line& line, double h) {
    if (p1.m != p4.m)
        throw PreconditionViolated("weighted_potential_transform: mismatched matrix sizes");
    if (h <= 0.0 || line.length < 0.0)
        throw PreconditionViolated("weighted_potential_transform: need h > 0 and length >= 0");
    const int n = std::max(1, static_cast<int>(std::ceil(line.length / h)));
    const double dh = line.length / n;
    const Vec2 omega = line.omega;

    struct State {
        Matrix c, w;
    };
    auto rhs = [&](double s, const State& st) {
        const Vec2 x = line.start + s * omega;
        State d;
        d.c = kI * (p1.A1(x, line.t) * omega(0) + p1.A2(x, line.t) * omega(1)) * st.c;
        d.w = st.c.inverse() * (p1.V(x, line.t) - p4.V(x, line.t)) * st.c;
        return d;
    };
    auto axpy = [](const State& a, double b, const State& d) {
        return State{a.c + b * d.c, a.w + b * d.w};
    };

    State st{Matrix::Identity(p1.m, p1.m), Matrix::Zero(p1.m, p1.m)};
    for (int k = 0; k < n; ++k) {
        const double s = k * dh;
        const State k1 = rhs(s, st);
        const State k2 = rhs(s + 0.5 * dh, axpy(st, 0.5 * dh, k1));
        const State k3 = rhs(s + 0.5 * dh, axpy(st, 0.5 * dh, k2));
        const State k4 = rhs(s + dh, axpy(st, dh, k3));
        st.c += (dh / 6.0) * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
        st.w += (dh / 6.0) * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
    }
    return st.w;
}

namespace {
double chi0_raw(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

double chi0_l2_norm() {
    static const double norm = [] {
        QuadratureConfig cfg;
        cfg.abs_tol = 1e-14;
        return std::sqrt(integrate([](double u) { return chi0_raw(u) * chi0_raw(u); }, -1.0, 1.0,
                                   cfg));
    }();
    return norm;
}

double chi0(double u) { return chi0_raw(u) / chi0_l2_norm(); }
}  // namespace

CutoffProfile::CutoffProfile(double eps, double t0, double tau0) : eps_(eps), t0_(t0), tau0_(tau0) {
    if (eps <= 0.0) throw PreconditionViolated("CutoffProfile: eps must be positive");
}

double CutoffProfile::chi1(double t) const { return chi0((t - t0_) / eps_) / std::sqrt(eps_); }

double CutoffProfile::chi2(double tau) const { return chi0((tau - tau0_) / eps_) / std::sqrt(eps_); }

std::complex<double> GoAmplitude::operator()(double s, double tau, double t) const {
    const double cut_factor = cut.chi1(t) * cut.chi2(tau);
    if (cut_factor == 0.0) return 0.0;
    const double phase = integrate(
        [&](double sp) {
            return p.A(x_ref + sp * omega + tau * omega_perp, t).dot(omega);
        },
        s0, s, quad);
    return cut_factor * std::exp(kI * phase);
}

std::complex<double> GoAmplitude::at_point(const Vec2& x, double t) const {
    const Vec2 d = x - x_ref;
    return (*this)(d.dot(omega), d.dot(omega_perp), t);
}

GoAmplitude go_amplitude(const EmPotential& p, const Vec2& origin, const Vec2& omega, double s0,
                         const CutoffProfile& cut) {
    GoAmplitude a{origin, omega, Vec2(-omega(1), omega(0)), s0, cut, p, {}};
    a.quad.abs_tol = 1e-12;
    return a;
}

DiscrepancyReport transform_dataset(const EmPotential& pa, const EmPotential& pb,
                                    const std::vector<BrokenRay>& rays,
                                    const QuadratureConfig& quad) {
    DiscrepancyReport rep;
    rep.rows.reserve(rays.size());
    int id = 0;
    for (const BrokenRay& ray : rays) {
        RayDiscrepancy row;
        row.ray_id = id++;
        row.t0 = ray.t0;
        row.entry = ray.legs.front().start;
        row.direction = ray.legs.front().dir;
        row.delta_mag = magnetic_ray_transform(pa, ray, quad) - magnetic_ray_transform(pb, ray, quad);
        row.delta_elec = electric_ray_transform(pa, ray, quad) - electric_ray_transform(pb, ray, quad);
        rep.max_mag_defect =
            std::max(rep.max_mag_defect, std::abs(std::exp(kI * row.delta_mag) - 1.0));
        rep.max_elec = std::max(rep.max_elec, std::abs(row.delta_elec));
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace abflux
