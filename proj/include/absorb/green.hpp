#pragma once

#include <cstdint>
#include <vector>

namespace absorb {

enum class KernelKind { Diffusion, AdvectionDiffusion };

/// Cell-averaged free-space Green's function for one step of length tau:
///   w(j) = 1/2 [erf((x_j + dx/2 - c)/sqrt(4 D tau)) - erf((x_j - dx/2 - c)/sqrt(4 D tau))]
/// with x_j = j dx and kernel center c = -a tau (zero for the pure diffusion
/// kernel). Offsets run over [first_offset, first_offset + weights.size()).
struct GreenWeights {
    KernelKind kind = KernelKind::Diffusion;
    double diffusivity = 0.0;
    double drift = 0.0;
    double tau = 0.0;
    double dx = 0.0;
    std::int64_t first_offset = 0;
    std::vector<double> weights;
    double omitted_mass = 0.0;  ///< analytic two-tail mass outside the stored offsets

    std::int64_t last_offset() const { return first_offset + static_cast<std::int64_t>(weights.size()) - 1; }
    double at(std::int64_t offset) const;
    /// Sum of the stored weights, accumulated in extended precision.
    long double sum() const;

    /// First column of the N x N circulant matrix: weights folded modulo N.
    std::vector<double> circulant_column(std::int64_t n) const;
};

/// Builds the weights with the smallest support whose omitted two-tail mass is
/// below tol. Throws NumericalError if that needs more than max_reach cells on
/// either side, ConfigError on non-positive D, tau or dx.
GreenWeights green_weights(double diffusivity, double drift, double tau, double dx, double tol,
                           std::int64_t max_reach = std::int64_t{1} << 20);

/// max_j |lambda_j| of the circulant matrix built from w on N cells, evaluated
/// as the DFT of its first column in extended precision.
long double spectral_check(const GreenWeights& w, std::int64_t n);

/// Same bound for the separable 2-D kernel on an N x N torus: the eigenvalues
/// are products of the per-axis eigenvalues.
long double spectral_check_2d(const GreenWeights& wx, const GreenWeights& wy, std::int64_t n);

/// Spatial kernel used by one diffusion sub-step: one weight set per axis.
struct SpatialKernel {
    int dimension = 1;
    GreenWeights x;
    GreenWeights y;

    /// Weight at 2-D offset (j, l): w_x(j) * w_y(l). In 1-D l must be 0.
    double at(std::int64_t j, std::int64_t l = 0) const;
    long double spectral_max(std::int64_t n) const;
    long double mass() const;
};

}  // namespace absorb
