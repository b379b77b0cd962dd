#pragma once

#include <cstdint>
#include <vector>

#include "absorb/config.hpp"
#include "absorb/field.hpp"
#include "absorb/lattice.hpp"
#include "absorb/quadrature.hpp"

namespace absorb {

/// Absorption rate beta (amount per unit time) at every lattice cell.
struct BetaProfile {
    Lattice lattice;
    std::vector<double> values;

    double operator[](std::int64_t flat) const { return values[static_cast<std::size_t>(flat)]; }

    /// Per-step absorbed amount beta * dt for each cell.
    std::vector<double> per_step(double dt) const;

    /// Equal values up to a relative 1e-12.
    bool is_constant() const;
};

enum class CellIntegralSource { Auto, ClosedForm, Quadrature };

BetaProfile beta_profile(const ChemicalField& field, const ExperimentConfig& cfg,
                         CellIntegralSource source = CellIntegralSource::Auto);

BetaProfile beta_profile(const ChemicalField& field, const Lattice& lattice, double alpha, BetaRule rule,
                         CellIntegralSource source = CellIntegralSource::Auto, const QuadratureOptions& quad = {});

/// Integral of C over one lattice cell.
double cell_integral(const ChemicalField& field, const Lattice& lattice, std::int64_t flat, CellIntegralSource source,
                     const QuadratureOptions& quad = {});

}  // namespace absorb
