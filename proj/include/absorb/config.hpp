#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "absorb/lattice.hpp"

namespace absorb {

/// Per-step movement probabilities. In 1-D only left/right are used.
struct MovementRule {
    double left = 0.5;
    double right = 0.5;
    double down = 0.0;
    double up = 0.0;

    double stay() const { return 1.0 - (left + right + down + up); }
    bool operator==(const MovementRule&) const = default;
};

enum class BetaRule {
    CellIntegral,  ///< beta_i = alpha * integral of C over the cell
    Midpoint,      ///< beta_i = alpha * dx^n * C(x_i)
    Rate,          ///< beta_i = alpha * C(x_i)
};

enum class ShiftMode { Floor, Fractional };
enum class StepOrder { ShiftThenDiffuse, DiffuseThenShift };
enum class ConvolutionMethod { Auto, Direct, Fft };

/// The configuration document as written, before any derivation. Mirrors the
/// JSON schema one-to-one.
struct RawConfig {
    struct Field {
        std::string profile;
        std::string beta_rule = "cell_integral";
        bool time_dependent = false;
    } field;

    struct Grid {
        int dimension = 1;
        double dx = 0.0;
        double dt = 0.0;
        std::optional<double> d_xi;
        std::optional<std::int64_t> xi_bins;
        double xi_c = 0.0;
        std::optional<std::int64_t> cells;
        std::optional<std::vector<double>> origin;
        std::optional<std::array<double, 2>> region;
        std::optional<std::array<double, 2>> average_window;
    } grid;

    struct Agent {
        double alpha = 0.0;
        std::vector<double> x0;
        std::optional<MovementRule> movement;
    } agent;

    struct Run {
        double t_end = 0.0;
        std::int64_t realizations = 1000;
        std::uint64_t seed = 1;
        std::vector<double> output_times;
        std::optional<double> output_every;
    } run;

    struct Pde {
        std::string shift_mode = "fractional";
        std::string order = "shift_first";
        int tau_refine = 1;
        double truncation_tol = 1e-15;
        std::string convolution = "auto";
        std::optional<std::int64_t> xi_bins_total;
        double pad_sigmas = 6.0;
    } pde;
};

/// Validated configuration with every derived constant both engines share.
struct ExperimentConfig {
    RawConfig raw;

    int dimension = 1;
    double dx = 0.0;
    double dt = 0.0;
    double d_xi = 0.0;
    double xi_c = 0.0;
    std::int64_t live_bins = 0;  ///< K_c with xi_c = K_c * d_xi
    double alpha = 0.0;
    MovementRule movement;
    BetaRule beta_rule = BetaRule::CellIntegral;

    /// D per axis: dx^2 (p_minus + p_plus) / (2 dt). Equals dx^2/(2 n dt) for
    /// walks without a stay probability.
    std::array<double, 2> diffusivity{0.0, 0.0};
    /// a per axis: dx (p_minus - p_plus) / dt. Mass is transported with
    /// velocity -a.
    std::array<double, 2> drift{0.0, 0.0};

    Lattice lattice;
    std::array<double, 2> x0{0.0, 0.0};
    std::array<std::int64_t, 2> x0_index{0, 0};
    std::array<double, 2> average_window{0.0, 0.0};
    bool explicit_lattice = false;

    double t_end = 0.0;
    std::int64_t end_step = 0;
    std::vector<std::int64_t> output_steps;  ///< in units of dt, ascending, unique
    std::int64_t realizations = 0;
    std::uint64_t seed = 0;

    int tau_refine = 1;
    double tau = 0.0;
    ShiftMode shift_mode = ShiftMode::Fractional;
    StepOrder order = StepOrder::ShiftThenDiffuse;
    ConvolutionMethod convolution = ConvolutionMethod::Auto;
    double truncation_tol = 1e-15;
    std::int64_t total_bins = 0;  ///< K, resolved absorption bins before the overflow accumulator

    std::int64_t x0_flat() const { return lattice.flat(x0_index[0], x0_index[1]); }
    double time_of_step(std::int64_t step) const { return static_cast<double>(step) * dt; }
};

RawConfig parse_config(const nlohmann::json& doc);
RawConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RawConfig& raw);

/// Checks every invariant of the configuration and derives the shared
/// constants. Throws ConfigError on the first violation.
ExperimentConfig validate_config(const RawConfig& raw);

/// Largest kernel half-width (in cells) the erf weights can need for the given
/// per-step spread; used when sizing the free-space lattice.
std::int64_t kernel_reach_cells(double diffusivity, double drift_velocity, double tau, double dx, double tol);

BetaRule parse_beta_rule(const std::string& s);
ShiftMode parse_shift_mode(const std::string& s);
StepOrder parse_step_order(const std::string& s);
ConvolutionMethod parse_convolution(const std::string& s);

}  // namespace absorb
