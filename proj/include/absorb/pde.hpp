#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "absorb/beta.hpp"
#include "absorb/config.hpp"
#include "absorb/field.hpp"
#include "absorb/grid.hpp"

namespace absorb {

struct PdeAudit {
    std::vector<double> energy;  ///< E^m for every sub-step m (including m = 0)
    std::vector<double> mass;
    double max_energy_increase = 0.0;  ///< max_m (E^{m+1} - E^m) / E^m
    double max_mass_drift = 0.0;       ///< max_m |mass(m) - mass(0)| / mass(0)
    long double spectral_max = 0.0L;

    bool energy_ok() const { return max_energy_increase <= 1e-14; }
    bool mass_ok() const { return max_mass_drift < 1e-10; }
    bool spectral_ok() const { return spectral_max < 1.0L; }
    bool ok() const { return energy_ok() && mass_ok() && spectral_ok(); }
};

struct PdeResult {
    Lattice lattice;
    std::vector<std::int64_t> output_steps;  ///< in units of dt
    std::vector<double> output_times;
    std::vector<std::vector<double>> live_density;  ///< p per output time, length^-n
    std::vector<double> survival;
    PdeAudit audit;
    std::optional<AbsorptionGrid> final_grid;
};

struct PdeOptions {
    bool keep_final_grid = false;
    /// Multiplies every kernel weight. Only used to exercise the audit path.
    double weight_scale = 1.0;
};

SpatialKernel build_kernel(const ExperimentConfig& cfg);

PdeResult run_pde(const ExperimentConfig& cfg, const ChemicalField& field, const PdeOptions& opts = {});
PdeResult run_pde(const ExperimentConfig& cfg, const BetaProfile& beta, const PdeOptions& opts = {});

}  // namespace absorb
