#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "absorb/beta.hpp"
#include "absorb/config.hpp"

namespace absorb {

enum class MasterMode {
    /// Absorbed amounts tracked exactly per lattice path (entries with equal
    /// totals merged). Ground truth for short horizons.
    Exact,
    /// Absorbed amounts on the d_xi grid with floor or fractional increments.
    Binned,
};

struct MasterOptions {
    MasterMode mode = MasterMode::Exact;
    ShiftMode shift_mode = ShiftMode::Floor;
    std::int64_t max_entries = std::int64_t{1} << 22;  ///< exact-mode state cap
};

/// Probability law of the lattice walk with absorption. Dead mass (absorbed
/// at least xi_c) is removed from the walk and accumulated in `dead`.
struct MasterState {
    Lattice lattice;
    std::int64_t bins = 0;  ///< K_c: all live bins
    double d_xi = 0.0;
    std::int64_t step = 0;
    MasterMode mode = MasterMode::Exact;
    std::vector<double> mass;  ///< P(i, k), index cell * bins + k; binned copy in exact mode
    double dead = 0.0;
    /// Exact mode only: per cell, (absorbed amount, probability) sorted by amount.
    std::vector<std::vector<std::pair<double, double>>> exact;

    std::vector<double> live_marginal() const;
    double live_mass() const;
    double total_mass() const { return live_mass() + dead; }
};

/// Unit mass at (x0, xi = 0).
MasterState initial_master_state(const ExperimentConfig& cfg, MasterMode mode);

/// Advances the state by `steps` steps. In exact mode a NumericalError leaves
/// the state at the last step that stayed under max_entries.
void advance_master_equation(MasterState& st, const ExperimentConfig& cfg, const BetaProfile& beta,
                             std::int64_t steps, const MasterOptions& opts = {});

/// Continues an exact state in binned form from its current step.
void convert_to_binned(MasterState& st);

/// Evolves the discrete difference equation from a unit mass at (x0, xi = 0)
/// for `steps` steps of dt. Exact mode throws NumericalError once the state
/// exceeds max_entries.
MasterState evolve_master_equation(const ExperimentConfig& cfg, const BetaProfile& beta, std::int64_t steps,
                                   const MasterOptions& opts = {});

}  // namespace absorb
