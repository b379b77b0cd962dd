#include "absorb/beta.hpp"

#include <algorithm>
#include <cmath>

#include "absorb/error.hpp"

namespace absorb {

std::vector<double> BetaProfile::per_step(double dt) const
{
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [dt](double b) { return b * dt; });
    return out;
}

bool BetaProfile::is_constant() const
{
    if (values.empty()) return true;
    // Cell integrals of a constant field differ in the last bits across cells.
    const double first = values.front();
    return std::all_of(values.begin(), values.end(),
                       [first](double b) { return std::fabs(b - first) <= 1e-12 * std::fabs(first); });
}

double cell_integral(const ChemicalField& field, const Lattice& lattice, std::int64_t flat, CellIntegralSource source,
                     const QuadratureOptions& quad)
{
    const auto [ix, iy] = lattice.unflat(flat);
    const double h = 0.5 * lattice.dx;
    const double cx = lattice.center(0, ix);
    const double cy = lattice.dimension == 2 ? lattice.center(1, iy) : 0.0;

    bool closed = false;
    switch (source) {
    case CellIntegralSource::Auto: closed = field.has_closed_form(); break;
    case CellIntegralSource::ClosedForm:
        if (!field.has_closed_form())
            throw ConfigError("field '" + field.description + "' has no closed-form cell integral");
        closed = true;
        break;
    case CellIntegralSource::Quadrature: closed = false; break;
    }

    if (closed) {
        if (lattice.dimension == 1) return field.cell_integral(cx - h, cx + h, 0.0, 0.0);
        return field.cell_integral(cx - h, cx + h, cy - h, cy + h);
    }
    if (lattice.dimension == 1)
        return adaptive_simpson([&field](double x) { return field(x); }, cx - h, cx + h, quad);
    return adaptive_simpson_2d([&field](double x, double y) { return field(x, y); }, cx - h, cx + h, cy - h, cy + h,
                               quad);
}

BetaProfile beta_profile(const ChemicalField& field, const Lattice& lattice, double alpha, BetaRule rule,
                         CellIntegralSource source, const QuadratureOptions& quad)
{
    if (field.dimension != lattice.dimension) throw ConfigError("field and lattice dimensions differ");
    BetaProfile beta;
    beta.lattice = lattice;
    beta.values.resize(static_cast<std::size_t>(lattice.size()));
    for (std::int64_t c = 0; c < lattice.size(); ++c) {
        double v = 0.0;
        if (rule == BetaRule::CellIntegral) {
            v = alpha * cell_integral(field, lattice, c, source, quad);
        } else {
            const auto [ix, iy] = lattice.unflat(c);
            const double conc = field(lattice.center(0, ix), lattice.dimension == 2 ? lattice.center(1, iy) : 0.0);
            v = rule == BetaRule::Midpoint ? alpha * lattice.cell_volume() * conc : alpha * conc;
        }
        if (!std::isfinite(v)) throw NumericalError("non-finite absorption rate at cell " + std::to_string(c));
        // Closed forms built from differences of cosines can land a few ulps
        // below zero where C vanishes.
        beta.values[static_cast<std::size_t>(c)] = std::max(0.0, v);
    }
    return beta;
}

BetaProfile beta_profile(const ChemicalField& field, const ExperimentConfig& cfg, CellIntegralSource source)
{
    return beta_profile(field, cfg.lattice, cfg.alpha, cfg.beta_rule, source);
}

}  // namespace absorb
