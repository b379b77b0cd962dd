#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "absorb/beta.hpp"
#include "absorb/config.hpp"
#include "absorb/field.hpp"
#include "absorb/rng.hpp"

namespace absorb {

struct AgentState {
    std::array<std::int64_t, 2> position{0, 0};  ///< lattice indices (wrapped on the torus)
    double absorbed = 0.0;
    bool alive = true;
};

/// Everything an agent step needs besides the agent and the random draw.
struct WalkContext {
    Lattice lattice;
    std::vector<double> beta_hat;  ///< beta * dt per cell
    MovementRule rule;
    double xi_c = 0.0;

    static WalkContext make(const BetaProfile& beta, const MovementRule& rule, double dt, double xi_c);
};

/// Move, then absorb beta_hat at the new cell; the agent dies when its total
/// reaches xi_c. `u` in [0,1) selects left, right, down, up, stay in that order
/// of cumulative probability. Dead agents must not be stepped.
AgentState step_agent(AgentState agent, const WalkContext& ctx, double u);
AgentState step_agent(AgentState agent, const WalkContext& ctx, Philox4x32& rng);

struct EnsembleResult {
    Lattice lattice;
    std::int64_t realizations = 0;
    double dt = 0.0;
    std::vector<std::int64_t> output_steps;
    std::vector<double> output_times;
    std::vector<std::vector<std::int64_t>> histograms;  ///< live counts per cell, per output time
    std::vector<std::int64_t> survival;                 ///< live count per output time
    std::vector<double> death_times;                    ///< realization order
    std::int64_t censored = 0;                          ///< alive at the final step

    double survival_fraction(std::size_t i) const
    {
        return static_cast<double>(survival[i]) / static_cast<double>(realizations);
    }
    /// Histogram converted to a density: count / (R dx^n).
    std::vector<double> density(std::size_t i) const;
};

/// Runs cfg.realizations independent walkers from x0 with zero absorption.
/// Realization j draws from Philox stream (seed, j), so results do not depend
/// on the worker count.
EnsembleResult run_ensemble(const ExperimentConfig& cfg, const ChemicalField& field, unsigned workers = 0);
EnsembleResult run_ensemble(const ExperimentConfig& cfg, const BetaProfile& beta, unsigned workers = 0);

}  // namespace absorb
