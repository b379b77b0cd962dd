#include "absorb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "absorb/error.hpp"

namespace absorb {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!known) throw ConfigError("unknown key '" + where + "." + key + "'");
    }
}

template <class T>
T get(const json& obj, const std::string& where, const char* key)
{
    if (!obj.contains(key)) throw ConfigError("missing key '" + where + "." + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + where + "." + key + "': " + e.what());
    }
}

template <class T>
void get_if(const json& obj, const std::string& where, const char* key, T& out)
{
    if (obj.contains(key)) out = get<T>(obj, where, key);
}

template <class T>
void get_if(const json& obj, const std::string& where, const char* key, std::optional<T>& out)
{
    if (obj.contains(key)) out = get<T>(obj, where, key);
}

/// Index of value on the grid origin + i*step, or nullopt when it is more than
/// a relative 1e-9 step away from a grid point.
std::optional<std::int64_t> grid_index(double value, double origin, double step)
{
    const double r = (value - origin) / step;
    const double i = std::round(r);
    if (std::fabs(r - i) > 1e-9 * std::max(1.0, std::fabs(r))) return std::nullopt;
    return static_cast<std::int64_t>(i);
}

void check_probability(double p, const char* name)
{
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("movement probability '") + name + "' outside [0,1]");
}

}  // namespace

BetaRule parse_beta_rule(const std::string& s)
{
    if (s == "cell_integral") return BetaRule::CellIntegral;
    if (s == "midpoint") return BetaRule::Midpoint;
    if (s == "rate") return BetaRule::Rate;
    throw ConfigError("unknown beta_rule '" + s + "' (cell_integral, midpoint, rate)");
}

ShiftMode parse_shift_mode(const std::string& s)
{
    if (s == "floor") return ShiftMode::Floor;
    if (s == "fractional") return ShiftMode::Fractional;
    throw ConfigError("unknown shift_mode '" + s + "' (floor, fractional)");
}

StepOrder parse_step_order(const std::string& s)
{
    if (s == "shift_first") return StepOrder::ShiftThenDiffuse;
    if (s == "diffuse_first") return StepOrder::DiffuseThenShift;
    throw ConfigError("unknown order '" + s + "' (shift_first, diffuse_first)");
}

ConvolutionMethod parse_convolution(const std::string& s)
{
    if (s == "auto") return ConvolutionMethod::Auto;
    if (s == "direct") return ConvolutionMethod::Direct;
    if (s == "fft") return ConvolutionMethod::Fft;
    throw ConfigError("unknown convolution '" + s + "' (auto, direct, fft)");
}

RawConfig parse_config(const json& doc)
{
    require_keys(doc, "config", {"field", "grid", "agent", "run", "pde"});
    RawConfig raw;

    const json& f = doc.contains("field") ? doc.at("field") : throw ConfigError("missing section 'field'");
    require_keys(f, "field", {"profile", "beta_rule", "time_dependent"});
    raw.field.profile = get<std::string>(f, "field", "profile");
    get_if(f, "field", "beta_rule", raw.field.beta_rule);
    get_if(f, "field", "time_dependent", raw.field.time_dependent);

    const json& g = doc.contains("grid") ? doc.at("grid") : throw ConfigError("missing section 'grid'");
    require_keys(g, "grid",
                 {"dimension", "dx", "dt", "d_xi", "xi_bins", "xi_c", "cells", "origin", "region", "average_window"});
    get_if(g, "grid", "dimension", raw.grid.dimension);
    raw.grid.dx = get<double>(g, "grid", "dx");
    raw.grid.dt = get<double>(g, "grid", "dt");
    get_if(g, "grid", "d_xi", raw.grid.d_xi);
    get_if(g, "grid", "xi_bins", raw.grid.xi_bins);
    raw.grid.xi_c = get<double>(g, "grid", "xi_c");
    get_if(g, "grid", "cells", raw.grid.cells);
    get_if(g, "grid", "origin", raw.grid.origin);
    get_if(g, "grid", "region", raw.grid.region);
    get_if(g, "grid", "average_window", raw.grid.average_window);

    const json& a = doc.contains("agent") ? doc.at("agent") : throw ConfigError("missing section 'agent'");
    require_keys(a, "agent", {"alpha", "x0", "movement"});
    raw.agent.alpha = get<double>(a, "agent", "alpha");
    const json& x0 = a.contains("x0") ? a.at("x0") : throw ConfigError("missing key 'agent.x0'");
    if (x0.is_number())
        raw.agent.x0 = {x0.get<double>()};
    else
        raw.agent.x0 = get<std::vector<double>>(a, "agent", "x0");
    if (a.contains("movement")) {
        const json& m = a.at("movement");
        require_keys(m, "agent.movement", {"left", "right", "down", "up"});
        MovementRule rule{0.0, 0.0, 0.0, 0.0};
        get_if(m, "agent.movement", "left", rule.left);
        get_if(m, "agent.movement", "right", rule.right);
        get_if(m, "agent.movement", "down", rule.down);
        get_if(m, "agent.movement", "up", rule.up);
        raw.agent.movement = rule;
    }

    const json& r = doc.contains("run") ? doc.at("run") : throw ConfigError("missing section 'run'");
    require_keys(r, "run", {"t_end", "realizations", "seed", "output_times", "output_every"});
    raw.run.t_end = get<double>(r, "run", "t_end");
    get_if(r, "run", "realizations", raw.run.realizations);
    get_if(r, "run", "seed", raw.run.seed);
    get_if(r, "run", "output_times", raw.run.output_times);
    get_if(r, "run", "output_every", raw.run.output_every);

    if (doc.contains("pde")) {
        const json& p = doc.at("pde");
        require_keys(p, "pde",
                     {"shift_mode", "order", "tau_refine", "truncation_tol", "convolution", "xi_bins_total",
                      "pad_sigmas"});
        get_if(p, "pde", "shift_mode", raw.pde.shift_mode);
        get_if(p, "pde", "order", raw.pde.order);
        get_if(p, "pde", "tau_refine", raw.pde.tau_refine);
        get_if(p, "pde", "truncation_tol", raw.pde.truncation_tol);
        get_if(p, "pde", "convolution", raw.pde.convolution);
        get_if(p, "pde", "xi_bins_total", raw.pde.xi_bins_total);
        get_if(p, "pde", "pad_sigmas", raw.pde.pad_sigmas);
    }
    return raw;
}

RawConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

json to_json(const RawConfig& raw)
{
    json doc;
    doc["field"] = {{"profile", raw.field.profile},
                    {"beta_rule", raw.field.beta_rule},
                    {"time_dependent", raw.field.time_dependent}};

    json g = {{"dimension", raw.grid.dimension}, {"dx", raw.grid.dx}, {"dt", raw.grid.dt}, {"xi_c", raw.grid.xi_c}};
    if (raw.grid.d_xi) g["d_xi"] = *raw.grid.d_xi;
    if (raw.grid.xi_bins) g["xi_bins"] = *raw.grid.xi_bins;
    if (raw.grid.cells) g["cells"] = *raw.grid.cells;
    if (raw.grid.origin) g["origin"] = *raw.grid.origin;
    if (raw.grid.region) g["region"] = *raw.grid.region;
    if (raw.grid.average_window) g["average_window"] = *raw.grid.average_window;
    doc["grid"] = g;

    json a = {{"alpha", raw.agent.alpha}, {"x0", raw.agent.x0}};
    if (raw.agent.movement) {
        const MovementRule& m = *raw.agent.movement;
        a["movement"] = {{"left", m.left}, {"right", m.right}, {"down", m.down}, {"up", m.up}};
    }
    doc["agent"] = a;

    json r = {{"t_end", raw.run.t_end},
              {"realizations", raw.run.realizations},
              {"seed", raw.run.seed},
              {"output_times", raw.run.output_times}};
    if (raw.run.output_every) r["output_every"] = *raw.run.output_every;
    doc["run"] = r;

    json p = {{"shift_mode", raw.pde.shift_mode},
              {"order", raw.pde.order},
              {"tau_refine", raw.pde.tau_refine},
              {"truncation_tol", raw.pde.truncation_tol},
              {"convolution", raw.pde.convolution},
              {"pad_sigmas", raw.pde.pad_sigmas}};
    if (raw.pde.xi_bins_total) p["xi_bins_total"] = *raw.pde.xi_bins_total;
    doc["pde"] = p;
    return doc;
}

std::int64_t kernel_reach_cells(double diffusivity, double drift_velocity, double tau, double dx, double tol)
{
    // erfc(z) bounds the two-tail mass beyond z * sqrt(4 D tau) from the center.
    double z = 0.0;
    while (std::erfc(z) >= tol && z < 40.0) z += 0.05;
    const double reach = std::fabs(drift_velocity) * tau + z * std::sqrt(4.0 * diffusivity * tau);
    return static_cast<std::int64_t>(std::ceil(reach / dx)) + 1;
}

ExperimentConfig validate_config(const RawConfig& raw)
{
    ExperimentConfig cfg;
    cfg.raw = raw;

    if (raw.field.time_dependent) throw ConfigError("time-dependent fields are not supported");
    if (raw.field.profile.empty()) throw ConfigError("field.profile is empty");
    cfg.beta_rule = parse_beta_rule(raw.field.beta_rule);

    const int n = raw.grid.dimension;
    if (n != 1 && n != 2) throw ConfigError("grid.dimension must be 1 or 2");
    cfg.dimension = n;

    if (!(raw.grid.dx > 0.0) || !std::isfinite(raw.grid.dx)) throw ConfigError("grid.dx must be positive");
    if (!(raw.grid.dt > 0.0) || !std::isfinite(raw.grid.dt)) throw ConfigError("grid.dt must be positive");
    if (!(raw.grid.xi_c > 0.0) || !std::isfinite(raw.grid.xi_c)) throw ConfigError("grid.xi_c must be positive");
    cfg.dx = raw.grid.dx;
    cfg.dt = raw.grid.dt;
    cfg.xi_c = raw.grid.xi_c;

    if (!raw.grid.d_xi && !raw.grid.xi_bins) throw ConfigError("grid needs d_xi or xi_bins");
    if (raw.grid.xi_bins) {
        if (*raw.grid.xi_bins < 1) throw ConfigError("grid.xi_bins must be at least 1");
        cfg.live_bins = *raw.grid.xi_bins;
        cfg.d_xi = cfg.xi_c / static_cast<double>(cfg.live_bins);
        if (raw.grid.d_xi && std::fabs(*raw.grid.d_xi - cfg.d_xi) > 1e-12 * cfg.d_xi)
            throw ConfigError("grid.d_xi and grid.xi_bins disagree");
    } else {
        if (!(*raw.grid.d_xi > 0.0)) throw ConfigError("grid.d_xi must be positive");
        const auto k = grid_index(cfg.xi_c, 0.0, *raw.grid.d_xi);
        if (!k || *k < 1) throw ConfigError("grid.xi_c is not a multiple of grid.d_xi");
        cfg.live_bins = *k;
        // Snap so that xi_c = K_c * d_xi holds exactly in the arithmetic below.
        cfg.d_xi = cfg.xi_c / static_cast<double>(cfg.live_bins);
    }

    if (!std::isfinite(raw.agent.alpha) || raw.agent.alpha < 0.0) throw ConfigError("agent.alpha must be >= 0");
    cfg.alpha = raw.agent.alpha;

    if (raw.agent.movement) {
        cfg.movement = *raw.agent.movement;
    } else if (n == 2) {
        cfg.movement = MovementRule{0.25, 0.25, 0.25, 0.25};
    }
    const MovementRule& m = cfg.movement;
    check_probability(m.left, "left");
    check_probability(m.right, "right");
    check_probability(m.down, "down");
    check_probability(m.up, "up");
    if (m.stay() < -1e-12) throw ConfigError("movement probabilities sum above 1");
    if (n == 1 && (m.down != 0.0 || m.up != 0.0)) throw ConfigError("movement.down/up must be 0 in 1-D");

    const double dx2 = cfg.dx * cfg.dx;
    cfg.diffusivity[0] = dx2 * (m.left + m.right) / (2.0 * cfg.dt);
    cfg.drift[0] = cfg.dx * (m.left - m.right) / cfg.dt;
    if (n == 2) {
        cfg.diffusivity[1] = dx2 * (m.down + m.up) / (2.0 * cfg.dt);
        cfg.drift[1] = cfg.dx * (m.down - m.up) / cfg.dt;
    }
    for (int axis = 0; axis < n; ++axis)
        if (!(cfg.diffusivity[static_cast<std::size_t>(axis)] > 0.0))
            throw ConfigError("movement gives zero diffusivity on an axis");

    // Time axis.
    if (!(raw.run.t_end > 0.0)) throw ConfigError("run.t_end must be positive");
    const auto end_step = grid_index(raw.run.t_end, 0.0, cfg.dt);
    if (!end_step) throw ConfigError("run.t_end is not a multiple of grid.dt");
    cfg.end_step = *end_step;
    cfg.t_end = raw.run.t_end;

    std::set<std::int64_t> steps;
    for (double t : raw.run.output_times) {
        const auto s = grid_index(t, 0.0, cfg.dt);
        if (!s) {
            std::ostringstream msg;
            msg << "output time " << t << " is not a multiple of dt";
            throw ConfigError(msg.str());
        }
        if (*s < 0 || *s > cfg.end_step) throw ConfigError("output time outside [0, t_end]");
        steps.insert(*s);
    }
    if (raw.run.output_every) {
        const auto every = grid_index(*raw.run.output_every, 0.0, cfg.dt);
        if (!every || *every < 1) throw ConfigError("run.output_every is not a positive multiple of dt");
        for (std::int64_t s = 0; s <= cfg.end_step; s += *every) steps.insert(s);
    }
    if (steps.empty()) steps.insert(cfg.end_step);
    cfg.output_steps.assign(steps.begin(), steps.end());

    if (raw.run.realizations < 1) throw ConfigError("run.realizations must be at least 1");
    cfg.realizations = raw.run.realizations;
    cfg.seed = raw.run.seed;

    // PDE numerics.
    if (raw.pde.tau_refine < 1) throw ConfigError("pde.tau_refine must be at least 1");
    cfg.tau_refine = raw.pde.tau_refine;
    cfg.tau = cfg.dt / static_cast<double>(cfg.tau_refine);
    cfg.shift_mode = parse_shift_mode(raw.pde.shift_mode);
    cfg.order = parse_step_order(raw.pde.order);
    cfg.convolution = parse_convolution(raw.pde.convolution);
    if (!(raw.pde.truncation_tol > 0.0 && raw.pde.truncation_tol <= 1e-6))
        throw ConfigError("pde.truncation_tol must be in (0, 1e-6]");
    cfg.truncation_tol = raw.pde.truncation_tol;
    if (!(raw.pde.pad_sigmas >= 0.0)) throw ConfigError("pde.pad_sigmas must be >= 0");
    cfg.total_bins = cfg.live_bins;
    if (raw.pde.xi_bins_total) {
        if (*raw.pde.xi_bins_total < cfg.live_bins) throw ConfigError("pde.xi_bins_total is below the live bin count");
        cfg.total_bins = *raw.pde.xi_bins_total;
    }

    // Space.
    if (static_cast<int>(raw.agent.x0.size()) != n) throw ConfigError("agent.x0 must have one entry per dimension");
    for (int axis = 0; axis < n; ++axis) cfg.x0[static_cast<std::size_t>(axis)] = raw.agent.x0[static_cast<std::size_t>(axis)];
    if (raw.grid.region && !(raw.grid.region->at(0) <= raw.grid.region->at(1)))
        throw ConfigError("grid.region must be [lo, hi] with lo <= hi");

    cfg.lattice.dimension = n;
    cfg.lattice.dx = cfg.dx;
    if (raw.grid.cells) {
        if (*raw.grid.cells < 1) throw ConfigError("grid.cells must be positive");
        cfg.explicit_lattice = true;
        cfg.lattice.cells_per_axis = *raw.grid.cells;
        if (raw.grid.origin) {
            if (static_cast<int>(raw.grid.origin->size()) != n)
                throw ConfigError("grid.origin must have one entry per dimension");
            for (int axis = 0; axis < n; ++axis)
                cfg.lattice.origin[static_cast<std::size_t>(axis)] = raw.grid.origin->at(static_cast<std::size_t>(axis));
        }
        for (int axis = 0; axis < n; ++axis) {
            const auto ax = static_cast<std::size_t>(axis);
            const auto i = grid_index(cfg.x0[ax], cfg.lattice.origin[ax], cfg.dx);
            if (!i) throw ConfigError("agent.x0 is not on a cell center");
            if (*i < 0 || *i >= cfg.lattice.cells_per_axis) throw ConfigError("agent.x0 lies outside the lattice");
            cfg.x0_index[ax] = *i;
        }
    } else {
        if (raw.grid.origin) throw ConfigError("grid.origin needs grid.cells");
        // Free-space emulation: cover the region of interest and x0, padded by
        // pad_sigmas standard deviations of the walk at t_end, the drift
        // displacement and one kernel reach.
        std::array<std::int64_t, 2> left{0, 0}, right{0, 0};
        for (int axis = 0; axis < n; ++axis) {
            const auto ax = static_cast<std::size_t>(axis);
            const double d = cfg.diffusivity[ax];
            const double pad = raw.pde.pad_sigmas * std::sqrt(2.0 * d * cfg.t_end) +
                               std::fabs(cfg.drift[ax]) * cfg.t_end +
                               static_cast<double>(kernel_reach_cells(d, cfg.drift[ax], cfg.tau, cfg.dx,
                                                                      cfg.truncation_tol)) *
                                   cfg.dx;
            double lo = cfg.x0[ax], hi = cfg.x0[ax];
            if (raw.grid.region) {
                lo = std::min(lo, raw.grid.region->at(0));
                hi = std::max(hi, raw.grid.region->at(1));
            }
            left[ax] = static_cast<std::int64_t>(std::ceil((cfg.x0[ax] - (lo - pad)) / cfg.dx));
            right[ax] = static_cast<std::int64_t>(std::ceil(((hi + pad) - cfg.x0[ax]) / cfg.dx));
        }
        std::int64_t cells = 0;
        for (int axis = 0; axis < n; ++axis)
            cells = std::max(cells, left[static_cast<std::size_t>(axis)] + right[static_cast<std::size_t>(axis)] + 1);
        cfg.lattice.cells_per_axis = cells;
        for (int axis = 0; axis < n; ++axis) {
            const auto ax = static_cast<std::size_t>(axis);
            cfg.x0_index[ax] = left[ax];
            cfg.lattice.origin[ax] = cfg.x0[ax] - static_cast<double>(left[ax]) * cfg.dx;
        }
    }

    if (raw.grid.average_window) {
        if (!(raw.grid.average_window->at(0) <= raw.grid.average_window->at(1)))
            throw ConfigError("grid.average_window must be [lo, hi] with lo <= hi");
        cfg.average_window = *raw.grid.average_window;
    } else if (raw.grid.region) {
        cfg.average_window = *raw.grid.region;
    } else {
        cfg.average_window = {cfg.lattice.center(0, 0), cfg.lattice.center(0, cfg.lattice.cells_per_axis - 1)};
    }
    return cfg;
}

}  // namespace absorb
