#include "absorb/regimes.hpp"

#include <cmath>
#include <numbers>

#include "absorb/error.hpp"
#include "absorb/green.hpp"
#include "absorb/quadrature.hpp"

namespace absorb {

std::string to_string(Regime r)
{
    switch (r) {
    case Regime::AbsorptionDominant: return "absorption-dominant";
    case Regime::Balanced: return "balanced";
    case Regime::DiffusionDominant: return "diffusion-dominant";
    }
    return "balanced";
}

Regime classify(double rho_x0, double rho_mean, const RegimeThresholds& thr)
{
    if (std::min(rho_x0, rho_mean) >= thr.absorption_dominant) return Regime::AbsorptionDominant;
    if (std::max(rho_x0, rho_mean) <= thr.diffusion_dominant) return Regime::DiffusionDominant;
    return Regime::Balanced;
}

namespace {

/// Half-open [lo, hi): on a periodic lattice the window [0, 1) holds one
/// period. A degenerate window [a, a] selects the cell at a.
bool in_window(double v, const std::array<double, 2>& w)
{
    const double slack = 1e-9 * std::max(1.0, std::fabs(v));
    if (w[0] == w[1]) return std::fabs(v - w[0]) <= slack;
    return v >= w[0] - slack && v < w[1] - slack;
}

bool cell_in_window(const Lattice& lat, std::int64_t c, const std::array<double, 2>& w)
{
    const auto idx = lat.unflat(c);
    if (!in_window(lat.center(0, idx[0]), w)) return false;
    return lat.dimension == 1 || in_window(lat.center(1, idx[1]), w);
}

double regime_diffusivity(const ExperimentConfig& cfg)
{
    return cfg.dimension == 1 ? cfg.diffusivity[0] : 0.5 * (cfg.diffusivity[0] + cfg.diffusivity[1]);
}

/// Cells aligned with x0 whose centers cover the averaging window.
Lattice window_lattice(const ExperimentConfig& cfg)
{
    const auto& w = cfg.average_window;
    Lattice lat;
    lat.dimension = cfg.dimension;
    lat.dx = cfg.dx;
    std::int64_t count = 0;
    for (int axis = 0; axis < cfg.dimension; ++axis) {
        const auto ax = static_cast<std::size_t>(axis);
        const auto first = static_cast<std::int64_t>(std::ceil((w[0] - cfg.x0[ax]) / cfg.dx - 1e-9));
        const auto last = static_cast<std::int64_t>(std::floor((w[1] - cfg.x0[ax]) / cfg.dx + 1e-9));
        lat.origin[ax] = cfg.x0[ax] + static_cast<double>(first) * cfg.dx;
        count = std::max(count, last - first + 1);
    }
    if (count < 1) throw ConfigError("averaging window contains no cell centers");
    lat.cells_per_axis = count;
    return lat;
}

}  // namespace

double window_mean_beta(const ExperimentConfig& cfg, const ChemicalField& field)
{
    const Lattice lat = window_lattice(cfg);
    const BetaProfile beta = beta_profile(field, lat, cfg.alpha, cfg.beta_rule);
    double sum = 0.0;
    std::int64_t used = 0;
    for (std::int64_t c = 0; c < lat.size(); ++c)
        if (cell_in_window(lat, c, cfg.average_window)) {
            sum += beta[c];
            ++used;
        }
    if (used == 0) throw ConfigError("averaging window contains no cell centers");
    return sum / static_cast<double>(used);
}

RegimeReport classify_regime(const ExperimentConfig& cfg, const BetaProfile& beta, const RegimeThresholds& thr)
{
    const double scale = 1.0 / (regime_diffusivity(cfg) * cfg.xi_c);
    RegimeReport r;
    r.thresholds = thr;
    r.ratio.resize(beta.values.size());
    double sum = 0.0;
    std::int64_t used = 0;
    for (std::size_t c = 0; c < beta.values.size(); ++c) {
        r.ratio[c] = beta.values[c] * scale;
        if (cell_in_window(beta.lattice, static_cast<std::int64_t>(c), cfg.average_window)) {
            sum += beta.values[c];
            ++used;
        }
    }
    if (used == 0) throw ConfigError("averaging window contains no lattice cells");
    r.mean_beta = sum / static_cast<double>(used);
    r.rho_x0 = beta[cfg.x0_flat()] * scale;
    r.rho_mean = r.mean_beta * scale;
    r.classification = classify(r.rho_x0, r.rho_mean, thr);
    return r;
}

RegimeReport classify_regime(const ExperimentConfig& cfg, const ChemicalField& field, const RegimeThresholds& thr)
{
    const double scale = 1.0 / (regime_diffusivity(cfg) * cfg.xi_c);
    const BetaProfile beta = beta_profile(field, cfg);
    RegimeReport r;
    r.thresholds = thr;
    r.ratio.resize(beta.values.size());
    for (std::size_t c = 0; c < beta.values.size(); ++c) r.ratio[c] = beta.values[c] * scale;
    r.mean_beta = window_mean_beta(cfg, field);
    r.rho_x0 = beta[cfg.x0_flat()] * scale;
    r.rho_mean = r.mean_beta * scale;
    r.classification = classify(r.rho_x0, r.rho_mean, thr);
    return r;
}

nlohmann::json to_json(const RegimeReport& r)
{
    return {{"rho_x0", r.rho_x0},
            {"rho_mean", r.rho_mean},
            {"mean_beta", r.mean_beta},
            {"classification", to_string(r.classification)},
            {"thresholds",
             {{"absorption_dominant", r.thresholds.absorption_dominant},
              {"diffusion_dominant", r.thresholds.diffusion_dominant}}}};
}

double analytic_limit_density(LimitKind kind, const LimitParameters& params,
                              const std::function<double(double, double)>& phi, double x, double xi, double t)
{
    const auto phi0 = [&](double y, double z) { return z < 0.0 ? 0.0 : phi(y, z); };
    switch (kind) {
    case LimitKind::Absorption:
        if (!params.beta) throw ConfigError("absorption limit needs beta(x)");
        return phi0(x, xi - params.beta(x) * t);
    case LimitKind::Diffusion: return phi0(x, xi - params.mean_beta * t);
    case LimitKind::ConstantBeta: {
        const double z = xi - params.constant_beta * t;
        if (t == 0.0) return phi0(x, z);
        if (!(params.diffusivity > 0.0)) throw ConfigError("constant-beta limit needs a positive diffusivity");
        const double s2 = 4.0 * params.diffusivity * t;
        const double norm = 1.0 / std::sqrt(std::numbers::pi * s2);
        // Mass moves with velocity -a, so the kernel is centered at x + a t.
        const double c = x + params.drift * t;
        const double half = 12.0 * std::sqrt(0.5 * s2);
        return adaptive_simpson(
            [&](double y) {
                const double d = c - y;
                return norm * std::exp(-d * d / s2) * phi0(y, z);
            },
            c - half, c + half);
    }
    }
    return 0.0;
}

namespace {

void require_constant(const BetaProfile& beta)
{
    if (!beta.is_constant()) throw ConfigError("constant-beta limit requires a spatially constant beta");
}

}  // namespace

double analytic_limit_survival(LimitKind kind, const ExperimentConfig& cfg, const BetaProfile& beta, double t,
                               double mean_beta)
{
    double rate = 0.0;
    switch (kind) {
    case LimitKind::Absorption: rate = beta[cfg.x0_flat()]; break;
    case LimitKind::Diffusion: rate = mean_beta; break;
    case LimitKind::ConstantBeta:
        require_constant(beta);
        rate = beta.values.empty() ? 0.0 : beta.values.front();
        break;
    }
    return rate * t < cfg.xi_c ? 1.0 : 0.0;
}

std::vector<double> analytic_limit_live_density(LimitKind kind, const ExperimentConfig& cfg,
                                                const BetaProfile& beta, double t, double mean_beta)
{
    const Lattice& lat = cfg.lattice;
    std::vector<double> p(static_cast<std::size_t>(lat.size()), 0.0);
    const double alive = analytic_limit_survival(kind, cfg, beta, t, mean_beta);
    if (alive == 0.0) return p;
    const double vol = lat.cell_volume();

    if (kind == LimitKind::Diffusion) {
        std::int64_t used = 0;
        for (std::int64_t c = 0; c < lat.size(); ++c) used += cell_in_window(lat, c, cfg.average_window) ? 1 : 0;
        if (used == 0) throw ConfigError("averaging window contains no lattice cells");
        for (std::int64_t c = 0; c < lat.size(); ++c)
            if (cell_in_window(lat, c, cfg.average_window))
                p[static_cast<std::size_t>(c)] = alive / (static_cast<double>(used) * vol);
        return p;
    }
    if (kind == LimitKind::Absorption || t == 0.0) {
        p[static_cast<std::size_t>(cfg.x0_flat())] = alive / vol;
        return p;
    }

    const std::int64_t n = lat.cells_per_axis;
    const auto cx = green_weights(cfg.diffusivity[0], cfg.drift[0], t, cfg.dx, cfg.truncation_tol).circulant_column(n);
    std::vector<double> cy{1.0};
    if (cfg.dimension == 2)
        cy = green_weights(cfg.diffusivity[1], cfg.drift[1], t, cfg.dx, cfg.truncation_tol).circulant_column(n);
    for (std::int64_t c = 0; c < lat.size(); ++c) {
        const auto idx = lat.unflat(c);
        const std::int64_t jx = lat.wrap(idx[0] - cfg.x0_index[0]);
        double w = cx[static_cast<std::size_t>(jx)];
        if (cfg.dimension == 2) w *= cy[static_cast<std::size_t>(lat.wrap(idx[1] - cfg.x0_index[1]))];
        p[static_cast<std::size_t>(c)] = alive * w / vol;
    }
    return p;
}

}  // namespace absorb
