#pragma once

#include <cstdint>
#include <functional>

namespace absorb {

struct QuadratureOptions {
    double rel_tol = 1e-10;
    std::int64_t max_panels = std::int64_t{1} << 20;
};

/// Adaptive Simpson with Richardson correction. Throws NumericalError when the
/// panel budget is exhausted before the tolerance is met.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& opts = {});

/// Iterated adaptive Simpson over [ax, bx] x [ay, by].
double adaptive_simpson_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay,
                           double by, const QuadratureOptions& opts = {});

}  // namespace absorb
