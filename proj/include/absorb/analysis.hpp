#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "absorb/abm.hpp"
#include "absorb/grid.hpp"
#include "absorb/lattice.hpp"
#include "absorb/pde.hpp"

namespace absorb {

/// Moments of live agents are only reported while P(t) >= this.
inline constexpr double kMomentCutoff = 1e-4;
/// Survival level below which the occupancy-time integral is truncated.
inline constexpr double kMotCutoff = 1e-6;

/// P(t) = sum_i p_i dx^n for each density in the series.
std::vector<double> survival_curve(const std::vector<std::vector<double>>& p_series, const Lattice& lattice);
double integrate_density(std::span<const double> p, const Lattice& lattice);

struct Moments {
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 2> variance{0.0, 0.0};
};

/// Mean and variance of the normalized live density, integrating the
/// piecewise-constant density exactly over each cell (so a single loaded cell
/// has variance dx^2/12). Empty when P < eps_p.
std::optional<Moments> location_moments(std::span<const double> p, const Lattice& lattice,
                                        double eps_p = kMomentCutoff);

struct MotResult {
    double value = 0.0;
    double t_cut = 0.0;
    double remainder_bound = 0.0;
    bool decayed = false;
};

/// Trapezoidal integral of P over [0, t_cut], t_cut being the first sample
/// with P < cutoff. The remainder bound is P(t_cut) (t_end - t_cut); when P
/// never drops below the cutoff the result is flagged as not decayed.
MotResult mean_occupancy_time(std::span<const double> times, std::span<const double> survival,
                              double cutoff = kMotCutoff);

/// Mean of the recorded death times; flagged as not decayed if any walker was
/// still alive at the end.
MotResult empirical_occupancy_time(const EnsembleResult& abm);

struct AuditSeries {
    std::vector<double> energy;
    std::vector<double> mass;
    double max_energy_increase = 0.0;  ///< max_m (E^{m+1} - E^m), absolute
    double max_relative_energy_increase = 0.0;
    double max_mass_drift = 0.0;  ///< relative to mass(0)
};

AuditSeries energy_and_mass_series(std::span<const AbsorptionGrid> snapshots);
AuditSeries energy_and_mass_series(std::vector<double> energy, std::vector<double> mass);

/// Averages a lattice-walk density with the [1/4, 1/2, 1/4] stencil per axis.
/// Walkers without a stay move alternate parity sublattices, so raw
/// histograms are striped; the filter removes that before comparing with a
/// smooth density.
std::vector<double> lattice_parity_filter(std::span<const double> p, const Lattice& lattice);

/// Integral of |a - b| over the lattice.
double l1_distance(std::span<const double> a, std::span<const double> b, const Lattice& lattice);

/// Density series from one engine in a common form.
struct DensitySeries {
    std::string engine;
    Lattice lattice;
    std::vector<double> times;
    std::vector<std::vector<double>> density;
    std::vector<double> survival;
    bool lattice_walk = false;  ///< striped by walk parity (ABM, master equation)
    std::optional<MotResult> mot;
};

DensitySeries series_from(const EnsembleResult& abm);
DensitySeries series_from(const PdeResult& pde);

struct SummarySeries {
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<std::optional<Moments>> moments;
};

SummarySeries summarize(const DensitySeries& s, double eps_p = kMomentCutoff);

struct ComparisonReport {
    std::string first;
    std::string second;
    std::vector<double> times;
    double survival_sup_gap = 0.0;
    std::vector<double> l1;      ///< after the parity filter on lattice-walk series
    std::vector<double> l1_raw;  ///< unfiltered
    std::optional<MotResult> mot_first;
    std::optional<MotResult> mot_second;
    /// Audit of the PDE run when one of the series came from it.
    std::optional<double> max_energy_increase;
    std::optional<double> max_mass_drift;
    std::optional<double> spectral_max;

    double max_l1() const;
};

/// Throws ConfigError when lattices or output times differ.
ComparisonReport compare_series(const DensitySeries& a, const DensitySeries& b);
ComparisonReport compare_results(const EnsembleResult& abm, const PdeResult& pde);

nlohmann::json to_json(const ComparisonReport& report);
nlohmann::json to_json(const MotResult& mot);

}  // namespace absorb
