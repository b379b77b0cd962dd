#include "absorb/quadrature.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "absorb/error.hpp"

namespace absorb {

namespace {

struct Panel {
    double a, b, fa, fm, fb, whole, eps;
};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, const QuadratureOptions& opts)
{
    if (a == b) return 0.0;

    // A coarse composite rule sets the absolute target so that the relative
    // tolerance applies to the whole integral rather than to each panel.
    constexpr int kSeed = 16;
    const double h = (b - a) / kSeed;
    std::vector<double> fx(2 * kSeed + 1);
    for (int i = 0; i <= 2 * kSeed; ++i) fx[static_cast<std::size_t>(i)] = f(a + 0.5 * h * i);
    double coarse_abs = 0.0;
    for (int i = 0; i < kSeed; ++i) {
        const auto j = static_cast<std::size_t>(2 * i);
        coarse_abs += std::fabs(h / 6.0 * (fx[j] + 4.0 * fx[j + 1] + fx[j + 2]));
    }
    const double target = std::max(opts.rel_tol * coarse_abs, std::numeric_limits<double>::min());

    std::vector<Panel> stack;
    stack.reserve(64);
    for (int i = kSeed - 1; i >= 0; --i) {
        const auto j = static_cast<std::size_t>(2 * i);
        const double pa = a + h * i;
        const double pb = (i == kSeed - 1) ? b : a + h * (i + 1);
        stack.push_back({pa, pb, fx[j], fx[j + 1], fx[j + 2], (pb - pa) / 6.0 * (fx[j] + 4.0 * fx[j + 1] + fx[j + 2]),
                         target / kSeed});
    }

    std::int64_t panels = kSeed;
    double total = 0.0;
    double compensation = 0.0;
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const double m = 0.5 * (p.a + p.b);
        const double lm = 0.5 * (p.a + m);
        const double rm = 0.5 * (m + p.b);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        const double delta = left + right - p.whole;
        if (std::fabs(delta) <= 15.0 * p.eps || m <= p.a || m >= p.b) {
            const double y = left + right + delta / 15.0 - compensation;
            const double t = total + y;
            compensation = (t - total) - y;
            total = t;
            continue;
        }
        ++panels;
        if (panels > opts.max_panels) {
            throw NumericalError("adaptive Simpson on [" + std::to_string(a) + ", " + std::to_string(b) +
                                 "] exceeded " + std::to_string(opts.max_panels) + " panels");
        }
        stack.push_back({m, p.b, p.fm, frm, p.fb, right, 0.5 * p.eps});
        stack.push_back({p.a, m, p.fa, flm, p.fm, left, 0.5 * p.eps});
    }
    return total;
}

double adaptive_simpson_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay, double by,
                           const QuadratureOptions& opts)
{
    QuadratureOptions inner = opts;
    inner.rel_tol = opts.rel_tol * 0.1;
    return adaptive_simpson(
        [&](double x) { return adaptive_simpson([&](double y) { return f(x, y); }, ay, by, inner); }, ax, bx, opts);
}

}  // namespace absorb
