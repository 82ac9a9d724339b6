#include "abflux/quadrature.hpp"

#include <cmath>
#include <vector>

namespace abflux {

namespace {

struct SimpsonPanel {
    double a, b, fa, fm, fb, estimate;
};

double simpson(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b, double fa, double fm,
             double fb, double whole, double tol, int depth, int max_depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    if (depth >= max_depth) {
        throw QuadratureNonconvergent("adaptive quadrature depth limit reached");
    }
    return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
           adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& cfg) {
    if (a == b) return 0.0;
    const int n = cfg.min_panels > 0 ? cfg.min_panels : 1;
    const double h = (b - a) / n;
    double total = 0.0;
    const double tol = cfg.abs_tol / n;
    for (int i = 0; i < n; ++i) {
        const double x0 = a + i * h;
        const double x1 = x0 + h;
        const double xm = 0.5 * (x0 + x1);
        const double f0 = f(x0);
        const double fm = f(xm);
        const double f1 = f(x1);
        const double whole = simpson(f0, fm, f1, h);
        total += adapt(f, x0, x1, f0, fm, f1, whole, tol, 0, cfg.max_depth);
    }
    return total;
}

double integrate2d(const std::function<double(double, double)>& f, double ax, double bx,
                   const std::function<double(double)>& ylo,
                   const std::function<double(double)>& yhi, const QuadratureConfig& cfg) {
    QuadratureConfig inner = cfg;
    inner.abs_tol = cfg.abs_tol / std::max(1.0, std::abs(bx - ax));
    auto row = [&](double x) {
        const double lo = ylo(x);
        const double hi = yhi(x);
        if (lo >= hi) return 0.0;
        return integrate([&](double y) { return f(x, y); }, lo, hi, inner);
    };
    QuadratureConfig outer = cfg;
    outer.min_panels = std::max(cfg.min_panels, 32);
    return integrate(row, ax, bx, outer);
}

}  // namespace abflux
