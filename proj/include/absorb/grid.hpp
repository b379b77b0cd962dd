#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include "absorb/beta.hpp"
#include "absorb/config.hpp"
#include "absorb/green.hpp"
#include "absorb/lattice.hpp"

namespace absorb {

/// Fully discrete state u(i, k): cell averages of U over spatial cell i and
/// absorption bin [k d_xi, (k+1) d_xi). Mass that has left the resolved bins
/// is kept per spatial cell in `overflow`, in units of u * d_xi.
struct AbsorptionGrid {
    Lattice lattice;
    std::int64_t bins = 0;
    double d_xi = 0.0;
    double tau = 0.0;
    std::int64_t step = 0;
    std::vector<double> u;         ///< index cell * bins + k
    std::vector<double> overflow;  ///< per cell

    AbsorptionGrid() = default;
    AbsorptionGrid(Lattice lattice, std::int64_t bins, double d_xi, double tau);

    /// Unit mass placed in bin 0 of one cell: u = 1 / (dx^n d_xi).
    static AbsorptionGrid point_source(const Lattice& lattice, std::int64_t bins, double d_xi, double tau,
                                       std::int64_t flat_cell);

    double& at(std::int64_t cell, std::int64_t k) { return u[static_cast<std::size_t>(cell * bins + k)]; }
    double at(std::int64_t cell, std::int64_t k) const { return u[static_cast<std::size_t>(cell * bins + k)]; }

    /// Sum u dx^n d_xi + sum overflow dx^n.
    double total_mass() const;
    /// Discrete energy: sum of u^2 over the resolved bins.
    double energy() const;
};

/// Characteristic transport in xi over one step: column i moves by
/// s_i = beta_i tau / d_xi bins. Floor mode moves bin k to k + floor(s_i);
/// fractional mode splits between floor(s_i) and floor(s_i)+1 with weights
/// (1-frac, frac). Column totals are preserved exactly, with anything beyond
/// the last bin landing in overflow. Throws ConfigError for negative beta.
void absorb_shift(AbsorptionGrid& grid, const BetaProfile& beta, ShiftMode mode);

/// Circular convolution of every xi-slice and of the overflow slice with the
/// kernel. Owns scratch space and FFT plans so a stepper can reuse them.
class Diffuser {
public:
    Diffuser(const Lattice& lattice, std::int64_t bins, SpatialKernel kernel,
             ConvolutionMethod method = ConvolutionMethod::Auto);
    ~Diffuser();
    Diffuser(const Diffuser&) = delete;
    Diffuser& operator=(const Diffuser&) = delete;

    void apply(AbsorptionGrid& grid);

    struct Tap {
        std::int64_t offset;  ///< reduced modulo N
        double weight;
    };
    ConvolutionMethod method() const { return method_; }
    const SpatialKernel& kernel() const { return kernel_; }

private:
    void apply_direct(std::vector<double>& data, std::int64_t stride);
    void apply_fft(AbsorptionGrid& grid);

    Lattice lattice_;
    std::int64_t bins_;
    SpatialKernel kernel_;
    ConvolutionMethod method_;
    std::vector<double> scratch_;
    std::vector<double> overflow_scratch_;
    std::vector<Tap> taps_x_;
    std::vector<Tap> taps_y_;
    struct FftState;
    std::unique_ptr<FftState> fft_;
};

void diffuse_step(AbsorptionGrid& grid, const SpatialKernel& kernel,
                  ConvolutionMethod method = ConvolutionMethod::Direct);

/// p(i) = sum_{k < live_bins} u(i, k) d_xi, in units of length^-n.
std::vector<double> live_density(const AbsorptionGrid& grid, std::int64_t live_bins);

/// Raw grid dump: "ABGR", u32 version, u64 N (total spatial cells), u64 K,
/// f64 dx, f64 d_xi, then N*K row-major u values and N overflow values.
/// Everything little-endian.
void write_grid_binary(std::ostream& out, const AbsorptionGrid& grid);
void write_grid_binary(const std::filesystem::path& path, const AbsorptionGrid& grid);
AbsorptionGrid read_grid_binary(std::istream& in, int dimension = 1);

}  // namespace absorb
