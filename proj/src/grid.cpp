#include "absorb/grid.hpp"

#include <algorithm>
#include <bit>
#include <complex>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <fftw3.h>

#include "absorb/error.hpp"

namespace absorb {

AbsorptionGrid::AbsorptionGrid(Lattice lat, std::int64_t k, double dxi, double step_tau)
    : lattice(lat), bins(k), d_xi(dxi), tau(step_tau)
{
    if (k < 1) throw ConfigError("absorption grid needs at least one bin");
    u.assign(static_cast<std::size_t>(lattice.size() * bins), 0.0);
    overflow.assign(static_cast<std::size_t>(lattice.size()), 0.0);
}

AbsorptionGrid AbsorptionGrid::point_source(const Lattice& lattice, std::int64_t bins, double d_xi, double tau,
                                            std::int64_t flat_cell)
{
    AbsorptionGrid g(lattice, bins, d_xi, tau);
    if (flat_cell < 0 || flat_cell >= lattice.size()) throw ConfigError("point source outside the lattice");
    g.at(flat_cell, 0) = 1.0 / (lattice.cell_volume() * d_xi);
    return g;
}

double AbsorptionGrid::total_mass() const
{
    long double live = 0.0L, over = 0.0L;
    for (double v : u) live += v;
    for (double v : overflow) over += v;
    return static_cast<double>((live * d_xi + over) * lattice.cell_volume());
}

double AbsorptionGrid::energy() const
{
    long double e = 0.0L;
    for (double v : u) e += static_cast<long double>(v) * v;
    return static_cast<double>(e);
}

void absorb_shift(AbsorptionGrid& grid, const BetaProfile& beta, ShiftMode mode)
{
    const std::int64_t n = grid.lattice.size();
    const std::int64_t K = grid.bins;
    if (static_cast<std::int64_t>(beta.values.size()) != n) throw ConfigError("beta profile does not match the grid");

    for (std::int64_t c = 0; c < n; ++c) {
        const double b = beta[c];
        if (b < 0.0 || !std::isfinite(b)) throw ConfigError("absorption rate must be finite and non-negative");
        const double s = b * grid.tau / grid.d_xi;
        if (s == 0.0) continue;
        const double whole = std::floor(s);
        const double frac = mode == ShiftMode::Fractional ? s - whole : 0.0;
        double* col = grid.u.data() + c * K;
        double& over = grid.overflow[static_cast<std::size_t>(c)];

        if (whole >= static_cast<double>(K)) {
            double moved = 0.0;
            for (std::int64_t k = 0; k < K; ++k) {
                moved += col[k];
                col[k] = 0.0;
            }
            over += moved * grid.d_xi;
            continue;
        }
        const auto sh = static_cast<std::int64_t>(whole);
        // Walk downwards so every source bin is read before anything lands in it.
        double spill = 0.0;
        for (std::int64_t k = K - 1; k >= 0; --k) {
            const double v = col[k];
            if (v == 0.0) continue;
            col[k] = 0.0;
            const double upper = frac * v;
            const double lower = v - upper;
            const std::int64_t t = k + sh;
            if (t < K)
                col[t] += lower;
            else
                spill += lower;
            if (upper != 0.0) {
                if (t + 1 < K)
                    col[t + 1] += upper;
                else
                    spill += upper;
            }
        }
        over += spill * grid.d_xi;
    }
}

// ---------------------------------------------------------------------------

struct Diffuser::FftState {
    int rank = 1;
    int n = 0;
    std::int64_t bins = 0;
    std::int64_t complex_per_slice = 0;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    std::vector<std::complex<double>> kernel_hat;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    ~FftState()
    {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
        fftw_free(real);
        fftw_free(spec);
    }
};

namespace {

using Tap = Diffuser::Tap;

std::vector<Tap> taps_of(const GreenWeights& w, std::int64_t n)
{
    const auto col = w.circulant_column(n);
    std::vector<Tap> taps;
    for (std::int64_t j = 0; j < n; ++j)
        if (col[static_cast<std::size_t>(j)] != 0.0) taps.push_back({j, col[static_cast<std::size_t>(j)]});
    return taps;
}

/// [first, last) span of bins that hold mass in at least one cell.
std::pair<std::int64_t, std::int64_t> occupied_range(const std::vector<double>& u, std::int64_t cells,
                                                     std::int64_t bins)
{
    std::int64_t first = bins, last = 0;
    for (std::int64_t c = 0; c < cells; ++c) {
        const double* col = u.data() + c * bins;
        std::int64_t lo = 0;
        while (lo < first && col[lo] == 0.0) ++lo;
        first = std::min(first, lo);
        std::int64_t hi = bins;
        while (hi > last && col[hi - 1] == 0.0) --hi;
        last = std::max(last, hi);
    }
    return {first, std::max(first, last)};
}

/// out(i) = sum_j w_j in(i - j) along one axis. `outer` independent lines,
/// each with `len` points spaced `pitch` apart; at every point the values
/// [k0, k1) are convolved.
void convolve_axis(const double* in, double* out, const std::vector<Tap>& taps, std::int64_t outer,
                   std::int64_t outer_pitch, std::int64_t len, std::int64_t pitch, std::int64_t k0, std::int64_t k1)
{
    for (std::int64_t o = 0; o < outer; ++o) {
        const double* src = in + o * outer_pitch;
        double* dst = out + o * outer_pitch;
        for (std::int64_t i = 0; i < len; ++i) {
            double* d = dst + i * pitch;
            std::fill(d + k0, d + k1, 0.0);
            for (const Tap& t : taps) {
                std::int64_t from = i - t.offset;
                if (from < 0) from += len;
                const double* s = src + from * pitch;
                const double w = t.weight;
                for (std::int64_t k = k0; k < k1; ++k) d[k] += w * s[k];
            }
        }
    }
}

}  // namespace

Diffuser::Diffuser(const Lattice& lattice, std::int64_t bins, SpatialKernel kernel, ConvolutionMethod method)
    : lattice_(lattice), bins_(bins), kernel_(std::move(kernel)), method_(method)
{
    if (kernel_.dimension != lattice_.dimension) throw ConfigError("kernel and lattice dimensions differ");
    if (method_ == ConvolutionMethod::Auto) {
        const std::size_t taps = kernel_.x.weights.size() + (lattice_.dimension == 2 ? kernel_.y.weights.size() : 0);
        method_ = taps <= 64 ? ConvolutionMethod::Direct : ConvolutionMethod::Fft;
    }
    scratch_.resize(static_cast<std::size_t>(lattice_.size() * bins_));
    taps_x_ = taps_of(kernel_.x, lattice_.cells_per_axis);
    if (lattice_.dimension == 2) taps_y_ = taps_of(kernel_.y, lattice_.cells_per_axis);

    if (method_ == ConvolutionMethod::Fft) {
        fft_ = std::make_unique<FftState>();
        FftState& f = *fft_;
        f.rank = lattice_.dimension;
        f.n = static_cast<int>(lattice_.cells_per_axis);
        f.bins = bins_;
        const std::int64_t half = f.n / 2 + 1;
        f.complex_per_slice = f.rank == 1 ? half : static_cast<std::int64_t>(f.n) * half;
        f.real = fftw_alloc_real(static_cast<std::size_t>(lattice_.size() * bins_));
        f.spec = fftw_alloc_complex(static_cast<std::size_t>(f.complex_per_slice * bins_));
        int dims[2] = {f.n, f.n};
        const int howmany = static_cast<int>(bins_);
        const int stride = static_cast<int>(bins_);
        f.forward = fftw_plan_many_dft_r2c(f.rank, dims, howmany, f.real, nullptr, stride, 1, f.spec, nullptr, stride,
                                           1, FFTW_ESTIMATE);
        f.backward = fftw_plan_many_dft_c2r(f.rank, dims, howmany, f.spec, nullptr, stride, 1, f.real, nullptr, stride,
                                            1, FFTW_ESTIMATE);
        if (!f.forward || !f.backward) throw NumericalError("FFTW could not build a plan");

        // Kernel spectrum from the folded circulant columns.
        const auto cx = kernel_.x.circulant_column(f.n);
        const auto cy = f.rank == 2 ? kernel_.y.circulant_column(f.n) : std::vector<double>{1.0};
        std::vector<double> kreal(static_cast<std::size_t>(lattice_.size()));
        for (std::size_t i = 0; i < cx.size(); ++i)
            for (std::size_t j = 0; j < cy.size(); ++j) kreal[i * cy.size() + j] = cx[i] * cy[j];
        std::vector<fftw_complex> khat(static_cast<std::size_t>(f.complex_per_slice));
        fftw_plan kp = fftw_plan_dft_r2c(f.rank, dims, kreal.data(), khat.data(), FFTW_ESTIMATE);
        fftw_execute(kp);
        fftw_destroy_plan(kp);
        const double scale = 1.0 / static_cast<double>(lattice_.size());
        f.kernel_hat.resize(khat.size());
        for (std::size_t i = 0; i < khat.size(); ++i) f.kernel_hat[i] = {khat[i][0] * scale, khat[i][1] * scale};
    }
}

Diffuser::~Diffuser() = default;

void Diffuser::apply_direct(std::vector<double>& data, std::int64_t stride)
{
    // Bins outside the occupied span are zero everywhere and stay zero.
    const std::int64_t n = lattice_.cells_per_axis;
    const auto [k0, k1] = occupied_range(data, lattice_.size(), stride);
    if (k0 >= k1) return;

    std::vector<double>& tmp = stride == bins_ ? scratch_ : overflow_scratch_;
    tmp.resize(data.size());
    if (lattice_.dimension == 1) {
        convolve_axis(data.data(), tmp.data(), taps_x_, 1, 0, n, stride, k0, k1);
        for (std::int64_t i = 0; i < n; ++i)
            std::copy(tmp.data() + i * stride + k0, tmp.data() + i * stride + k1, data.data() + i * stride + k0);
        return;
    }
    // Along x: one line per iy, points n * stride apart.
    convolve_axis(data.data(), tmp.data(), taps_x_, n, stride, n, n * stride, k0, k1);
    // Along y: one line per ix, back into `data`.
    convolve_axis(tmp.data(), data.data(), taps_y_, n, n * stride, n, stride, k0, k1);
}

void Diffuser::apply_fft(AbsorptionGrid& grid)
{
    FftState& f = *fft_;
    std::copy(grid.u.begin(), grid.u.end(), f.real);
    fftw_execute(f.forward);
    for (std::int64_t q = 0; q < f.complex_per_slice; ++q) {
        const std::complex<double> kh = f.kernel_hat[static_cast<std::size_t>(q)];
        fftw_complex* row = f.spec + q * f.bins;
        for (std::int64_t k = 0; k < f.bins; ++k) {
            const std::complex<double> v(row[k][0], row[k][1]);
            const std::complex<double> r = v * kh;
            row[k][0] = r.real();
            row[k][1] = r.imag();
        }
    }
    fftw_execute(f.backward);
    // Round-off leaves values of order 1e-16 * max where the exact result is
    // zero; they are dropped to keep the state non-negative.
    for (std::size_t i = 0; i < grid.u.size(); ++i) grid.u[i] = std::max(0.0, f.real[i]);
}

void Diffuser::apply(AbsorptionGrid& grid)
{
    if (!(grid.lattice == lattice_) || grid.bins != bins_) throw ConfigError("grid does not match the diffuser");
    if (method_ == ConvolutionMethod::Fft)
        apply_fft(grid);
    else
        apply_direct(grid.u, bins_);
    apply_direct(grid.overflow, 1);
}

void diffuse_step(AbsorptionGrid& grid, const SpatialKernel& kernel, ConvolutionMethod method)
{
    Diffuser d(grid.lattice, grid.bins, kernel, method);
    d.apply(grid);
}

std::vector<double> live_density(const AbsorptionGrid& grid, std::int64_t live_bins)
{
    const std::int64_t n = grid.lattice.size();
    const std::int64_t kc = std::min(live_bins, grid.bins);
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t c = 0; c < n; ++c) {
        const double* col = grid.u.data() + c * grid.bins;
        double s = 0.0;
        for (std::int64_t k = 0; k < kc; ++k) s += col[k];
        p[static_cast<std::size_t>(c)] = s * grid.d_xi;
    }
    return p;
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
void put_le(std::ostream& out, T value)
{
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in)
{
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IoError("truncated grid file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

constexpr char kMagic[4] = {'A', 'B', 'G', 'R'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_grid_binary(std::ostream& out, const AbsorptionGrid& grid)
{
    out.write(kMagic, 4);
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(grid.lattice.size()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(grid.bins));
    put_le<double>(out, grid.lattice.dx);
    put_le<double>(out, grid.d_xi);
    for (double v : grid.u) put_le<double>(out, v);
    for (double v : grid.overflow) put_le<double>(out, v);
    if (!out) throw IoError("failed writing grid");
}

void write_grid_binary(const std::filesystem::path& path, const AbsorptionGrid& grid)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_grid_binary(out, grid);
}

AbsorptionGrid read_grid_binary(std::istream& in, int dimension)
{
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not an ABGR grid file");
    const auto version = get_le<std::uint32_t>(in);
    if (version != kVersion) throw IoError("unsupported grid file version " + std::to_string(version));
    const auto n = static_cast<std::int64_t>(get_le<std::uint64_t>(in));
    const auto k = static_cast<std::int64_t>(get_le<std::uint64_t>(in));
    const double dx = get_le<double>(in);
    const double d_xi = get_le<double>(in);

    Lattice lat;
    lat.dimension = dimension;
    lat.dx = dx;
    if (dimension == 1) {
        lat.cells_per_axis = n;
    } else {
        const auto side = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(n))));
        if (side * side != n) throw IoError("grid file cell count is not a square");
        lat.cells_per_axis = side;
    }
    AbsorptionGrid g(lat, k, d_xi, 0.0);
    for (double& v : g.u) v = get_le<double>(in);
    for (double& v : g.overflow) v = get_le<double>(in);
    return g;
}

}  // namespace absorb
