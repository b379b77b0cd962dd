#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "absorb/beta.hpp"
#include "absorb/config.hpp"
#include "absorb/field.hpp"

namespace absorb {

enum class Regime { AbsorptionDominant, Balanced, DiffusionDominant };

std::string to_string(Regime r);

struct RegimeThresholds {
    double absorption_dominant = 1e3;
    double diffusion_dominant = 1e-3;
};

/// rho = beta / (D xi_c) at x0 and averaged over the configured window.
struct RegimeReport {
    std::vector<double> ratio;  ///< per lattice cell
    double rho_x0 = 0.0;
    double rho_mean = 0.0;
    double mean_beta = 0.0;
    Regime classification = Regime::Balanced;
    RegimeThresholds thresholds;
};

/// Absorption-dominant needs both ratios at or above the upper threshold,
/// diffusion-dominant both at or below the lower one.
Regime classify(double rho_x0, double rho_mean, const RegimeThresholds& thresholds);

/// Averages beta over the cells of `beta` whose centers lie in the window.
RegimeReport classify_regime(const ExperimentConfig& cfg, const BetaProfile& beta,
                             const RegimeThresholds& thresholds = {});
/// Builds a window lattice aligned with x0 so the average does not depend on
/// how far the simulation lattice extends.
RegimeReport classify_regime(const ExperimentConfig& cfg, const ChemicalField& field,
                             const RegimeThresholds& thresholds = {});

/// Mean of beta over cells aligned with x0 whose centers lie in the window.
double window_mean_beta(const ExperimentConfig& cfg, const ChemicalField& field);

nlohmann::json to_json(const RegimeReport& report);

enum class LimitKind { Absorption, Diffusion, ConstantBeta };

struct LimitParameters {
    std::function<double(double)> beta;  ///< absorption kind
    double mean_beta = 0.0;              ///< diffusion kind
    double constant_beta = 0.0;          ///< constant-beta kind
    double diffusivity = 0.0;
    double drift = 0.0;
    double xi_c = 0.0;
};

/// Closed-form density U(x, t, xi) from an initial density phi(x, xi):
///   absorption:    phi(x, xi - beta(x) t)
///   diffusion:     phibar(xi - <beta> t), with phibar passed as phi(ignored, xi)
///   constant-beta: (G(., t) * phi(., xi - beta t))(x), G the (advection-)
///                  diffusion kernel, evaluated by adaptive quadrature.
/// phi is taken as zero for negative xi.
double analytic_limit_density(LimitKind kind, const LimitParameters& params,
                              const std::function<double(double, double)>& phi, double x, double xi, double t);

/// Survival of a point source at (x0, xi = 0) under each limit.
double analytic_limit_survival(LimitKind kind, const ExperimentConfig& cfg, const BetaProfile& beta, double t,
                               double mean_beta = 0.0);

/// Live density on the lattice for a point source: the transported delta
/// (absorption), the survival spread uniformly over the window cells
/// (diffusion), or the cell-averaged kernel G(x - x0, t) while beta t < xi_c
/// (constant beta). Throws ConfigError for the constant-beta kind when beta
/// varies.
std::vector<double> analytic_limit_live_density(LimitKind kind, const ExperimentConfig& cfg,
                                                const BetaProfile& beta, double t, double mean_beta = 0.0);

}  // namespace absorb
