#include "absorb/pde.hpp"

#include <algorithm>
#include <cmath>

#include "absorb/error.hpp"

namespace absorb {

SpatialKernel build_kernel(const ExperimentConfig& cfg)
{
    SpatialKernel k;
    k.dimension = cfg.dimension;
    k.x = green_weights(cfg.diffusivity[0], cfg.drift[0], cfg.tau, cfg.dx, cfg.truncation_tol);
    if (cfg.dimension == 2) k.y = green_weights(cfg.diffusivity[1], cfg.drift[1], cfg.tau, cfg.dx, cfg.truncation_tol);
    return k;
}

PdeResult run_pde(const ExperimentConfig& cfg, const ChemicalField& field, const PdeOptions& opts)
{
    return run_pde(cfg, beta_profile(field, cfg), opts);
}

PdeResult run_pde(const ExperimentConfig& cfg, const BetaProfile& beta, const PdeOptions& opts)
{
    if (!(beta.lattice == cfg.lattice)) throw ConfigError("beta profile lattice does not match the config");

    SpatialKernel kernel = build_kernel(cfg);
    if (opts.weight_scale != 1.0) {
        for (double& w : kernel.x.weights) w *= opts.weight_scale;
        for (double& w : kernel.y.weights) w *= opts.weight_scale;
    }

    PdeResult res;
    res.lattice = cfg.lattice;
    res.output_steps = cfg.output_steps;
    for (std::int64_t s : cfg.output_steps) res.output_times.push_back(cfg.time_of_step(s));
    res.audit.spectral_max = kernel.spectral_max(cfg.lattice.cells_per_axis);

    AbsorptionGrid grid =
        AbsorptionGrid::point_source(cfg.lattice, cfg.total_bins, cfg.d_xi, cfg.tau, cfg.x0_flat());
    Diffuser diffuser(cfg.lattice, cfg.total_bins, kernel, cfg.convolution);

    PdeAudit& audit = res.audit;
    audit.energy.push_back(grid.energy());
    audit.mass.push_back(grid.total_mass());
    const double mass0 = audit.mass.front();

    auto next_output = res.output_steps.begin();
    const auto record = [&](std::int64_t step) {
        while (next_output != res.output_steps.end() && *next_output == step) {
            auto p = live_density(grid, cfg.live_bins);
            double s = 0.0;
            for (double v : p) s += v;
            res.survival.push_back(s * cfg.lattice.cell_volume());
            res.live_density.push_back(std::move(p));
            ++next_output;
        }
    };
    record(0);

    for (std::int64_t step = 1; step <= cfg.end_step; ++step) {
        for (int q = 0; q < cfg.tau_refine; ++q) {
            if (cfg.order == StepOrder::ShiftThenDiffuse) {
                absorb_shift(grid, beta, cfg.shift_mode);
                diffuser.apply(grid);
            } else {
                diffuser.apply(grid);
                absorb_shift(grid, beta, cfg.shift_mode);
            }
            ++grid.step;

            const double e = grid.energy();
            const double m = grid.total_mass();
            const double e_prev = audit.energy.back();
            if (e_prev > 0.0) audit.max_energy_increase = std::max(audit.max_energy_increase, (e - e_prev) / e_prev);
            audit.max_mass_drift = std::max(audit.max_mass_drift, std::fabs(m - mass0) / mass0);
            audit.energy.push_back(e);
            audit.mass.push_back(m);
        }
        record(step);
    }

    if (opts.keep_final_grid) res.final_grid = std::move(grid);
    return res;
}

}  // namespace absorb
