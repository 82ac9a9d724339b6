#pragma once

#include <functional>

#include "abflux/errors.hpp"

namespace abflux {

struct QuadratureConfig {
    double abs_tol = 1e-10;
    int max_depth = 24;
    // panels the interval is split into before adaptation starts; a coarse
    // initial sampling can miss narrow mollifier bumps entirely
    int min_panels = 8;
};

// Adaptive Simpson integration of f over [a, b].
// Throws QuadratureNonconvergent when the depth limit is reached.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& cfg = {});

// Iterated 2D integral of f over [ax,bx] x [ay(x), by(x)].
double integrate2d(const std::function<double(double, double)>& f, double ax, double bx,
                   const std::function<double(double)>& ylo,
                   const std::function<double(double)>& yhi,
                   const QuadratureConfig& cfg = {});

}  // namespace abflux
