#include "absorb/green.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "absorb/error.hpp"

namespace absorb {

namespace {

/// 1/2 [erf(hi) - erf(lo)] without cancellation in either tail.
double erf_mass(double lo, double hi)
{
    double v;
    if (lo >= 0.0)
        v = 0.5 * (std::erfc(lo) - std::erfc(hi));
    else if (hi <= 0.0)
        v = 0.5 * (std::erfc(-hi) - std::erfc(-lo));
    else
        v = 0.5 * (std::erf(hi) - std::erf(lo));
    return std::max(0.0, v);
}

}  // namespace

double GreenWeights::at(std::int64_t offset) const
{
    if (offset < first_offset || offset > last_offset()) return 0.0;
    return weights[static_cast<std::size_t>(offset - first_offset)];
}

long double GreenWeights::sum() const
{
    long double s = 0.0L;
    for (double w : weights) s += w;
    return s;
}

std::vector<double> GreenWeights::circulant_column(std::int64_t n) const
{
    std::vector<double> col(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        std::int64_t j = (first_offset + static_cast<std::int64_t>(i)) % n;
        if (j < 0) j += n;
        col[static_cast<std::size_t>(j)] += weights[i];
    }
    return col;
}

GreenWeights green_weights(double diffusivity, double drift, double tau, double dx, double tol,
                           std::int64_t max_reach)
{
    if (!(diffusivity > 0.0)) throw ConfigError("green_weights: diffusivity must be positive");
    if (!(tau > 0.0)) throw ConfigError("green_weights: tau must be positive");
    if (!(dx > 0.0)) throw ConfigError("green_weights: dx must be positive");
    if (!(tol > 0.0)) throw ConfigError("green_weights: tolerance must be positive");

    GreenWeights g;
    g.kind = drift == 0.0 ? KernelKind::Diffusion : KernelKind::AdvectionDiffusion;
    g.diffusivity = diffusivity;
    g.drift = drift;
    g.tau = tau;
    g.dx = dx;

    const double width = std::sqrt(4.0 * diffusivity * tau);
    const double center = -drift * tau;
    const auto edge = [&](std::int64_t j, double side) { return (static_cast<double>(j) * dx + side * 0.5 * dx - center) / width; };
    const auto weight = [&](std::int64_t j) { return erf_mass(edge(j, -1.0), edge(j, 1.0)); };
    const auto right_tail = [&](std::int64_t j) { return 0.5 * std::erfc(edge(j, 1.0)); };
    const auto left_tail = [&](std::int64_t j) { return 0.5 * std::erfc(-edge(j, -1.0)); };

    const auto mid = static_cast<std::int64_t>(std::llround(center / dx));
    std::int64_t lo = mid, hi = mid;
    while (right_tail(hi) >= 0.5 * tol) {
        if (++hi - mid > max_reach) throw NumericalError("green_weights: truncation tolerance needs more than " + std::to_string(max_reach) + " cells");
    }
    while (left_tail(lo) >= 0.5 * tol) {
        if (mid - --lo > max_reach) throw NumericalError("green_weights: truncation tolerance needs more than " + std::to_string(max_reach) + " cells");
    }

    g.first_offset = lo;
    g.weights.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t j = lo; j <= hi; ++j) g.weights.push_back(weight(j));
    g.omitted_mass = right_tail(hi) + left_tail(lo);

    // The weights are left unnormalized. Rounding can still push the stored
    // sum to 1 when the omitted mass is below an ulp, so shave the largest
    // weight until the deficit is strictly positive.
    while (g.sum() >= 1.0L - 1e-17L) {
        auto it = std::max_element(g.weights.begin(), g.weights.end());
        *it = std::nextafter(*it, 0.0);
    }
    return g;
}

namespace {

long double max_eigen_modulus(const GreenWeights& w, std::int64_t n)
{
    if (n < 1) throw ConfigError("spectral_check: N must be positive");
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    long double best = 0.0L;
    for (std::int64_t k = 0; k < n; ++k) {
        long double re = 0.0L, im = 0.0L;
        for (std::size_t i = 0; i < w.weights.size(); ++i) {
            const std::int64_t j = w.first_offset + static_cast<std::int64_t>(i);
            std::int64_t phase = (j % n) * k % n;
            if (phase < 0) phase += n;
            const long double theta = two_pi * static_cast<long double>(phase) / static_cast<long double>(n);
            re += static_cast<long double>(w.weights[i]) * std::cos(theta);
            im -= static_cast<long double>(w.weights[i]) * std::sin(theta);
        }
        best = std::max(best, std::sqrt(re * re + im * im));
    }
    return best;
}

}  // namespace

long double spectral_check(const GreenWeights& w, std::int64_t n) { return max_eigen_modulus(w, n); }

long double spectral_check_2d(const GreenWeights& wx, const GreenWeights& wy, std::int64_t n)
{
    return max_eigen_modulus(wx, n) * max_eigen_modulus(wy, n);
}

double SpatialKernel::at(std::int64_t j, std::int64_t l) const
{
    if (dimension == 1) return l == 0 ? x.at(j) : 0.0;
    return x.at(j) * y.at(l);
}

long double SpatialKernel::spectral_max(std::int64_t n) const
{
    return dimension == 1 ? spectral_check(x, n) : spectral_check_2d(x, y, n);
}

long double SpatialKernel::mass() const { return dimension == 1 ? x.sum() : x.sum() * y.sum(); }

}  // namespace absorb
