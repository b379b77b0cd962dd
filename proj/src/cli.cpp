#include "absorb/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fftw3.h>
#include <json.hpp>

#include "absorb/abm.hpp"
#include "absorb/analysis.hpp"
#include "absorb/beta.hpp"
#include "absorb/config.hpp"
#include "absorb/error.hpp"
#include "absorb/field.hpp"
#include "absorb/io.hpp"
#include "absorb/master.hpp"
#include "absorb/parallel.hpp"
#include "absorb/pde.hpp"
#include "absorb/regimes.hpp"

#ifndef ABSORB_LAB_VERSION
#define ABSORB_LAB_VERSION "0.0.0"
#endif

namespace absorb {

using nlohmann::json;

std::vector<Engine> parse_engines(const std::string& list)
{
    std::vector<Engine> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        Engine e;
        if (item == "abm")
            e = Engine::Abm;
        else if (item == "pde")
            e = Engine::Pde;
        else if (item == "master")
            e = Engine::Master;
        else if (item == "analytic")
            e = Engine::Analytic;
        else
            throw ConfigError("unknown engine '" + item + "' (abm, pde, master, analytic)");
        if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
    }
    if (out.empty()) throw ConfigError("no engines requested");
    return out;
}

std::string to_string(Engine e)
{
    switch (e) {
    case Engine::Abm: return "abm";
    case Engine::Pde: return "pde";
    case Engine::Master: return "master";
    case Engine::Analytic: return "analytic";
    }
    return "?";
}

namespace {

std::string numbered(const std::string& stem, std::size_t i)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "_%03zu.csv", i);
    return stem + buf;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Outputs {
    std::filesystem::path dir;
    std::vector<std::filesystem::path> files;
    json index = json::array();

    std::filesystem::path add(const std::string& name, const std::string& kind, const std::string& engine = "")
    {
        files.emplace_back(name);
        json entry = {{"file", name}, {"kind", kind}};
        if (!engine.empty()) entry["engine"] = engine;
        index.push_back(entry);
        return dir / name;
    }
};

DensitySeries master_series(const ExperimentConfig& cfg, const BetaProfile& beta, std::int64_t& binned_from)
{
    DensitySeries s;
    s.engine = "master";
    s.lattice = cfg.lattice;
    s.lattice_walk = true;
    MasterOptions opts;
    MasterState st = initial_master_state(cfg, MasterMode::Exact);
    binned_from = -1;
    for (std::int64_t step : cfg.output_steps) {
        try {
            advance_master_equation(st, cfg, beta, step - st.step, opts);
        } catch (const NumericalError&) {
            // Too many distinct paths for exact tracking; continue binned.
            binned_from = st.step;
            convert_to_binned(st);
            opts.mode = MasterMode::Binned;
            opts.shift_mode = cfg.shift_mode;
            advance_master_equation(st, cfg, beta, step - st.step, opts);
        }
        auto p = st.live_marginal();
        const double inv = 1.0 / cfg.lattice.cell_volume();
        for (double& v : p) v *= inv;
        s.times.push_back(cfg.time_of_step(step));
        s.survival.push_back(st.live_mass());
        s.density.push_back(std::move(p));
    }
    if (!s.times.empty() && s.times.front() == 0.0) s.mot = mean_occupancy_time(s.times, s.survival);
    return s;
}

std::optional<DensitySeries> analytic_series(const ExperimentConfig& cfg, const BetaProfile& beta,
                                             const RegimeReport& regime, std::string& note)
{
    LimitKind kind;
    double mean_beta = regime.mean_beta;
    if (beta.is_constant()) {
        kind = LimitKind::ConstantBeta;
        note = "constant-beta";
    } else if (regime.classification == Regime::AbsorptionDominant) {
        kind = LimitKind::Absorption;
        note = "absorption-dominant";
    } else if (regime.classification == Regime::DiffusionDominant) {
        kind = LimitKind::Diffusion;
        note = "diffusion-dominant";
    } else {
        note = "balanced regime has no closed-form limit";
        return std::nullopt;
    }
    DensitySeries s;
    s.engine = "analytic";
    s.lattice = cfg.lattice;
    for (std::int64_t step : cfg.output_steps) {
        const double t = cfg.time_of_step(step);
        s.times.push_back(t);
        s.survival.push_back(analytic_limit_survival(kind, cfg, beta, t, mean_beta));
        s.density.push_back(analytic_limit_live_density(kind, cfg, beta, t, mean_beta));
    }
    if (!s.times.empty() && s.times.front() == 0.0) s.mot = mean_occupancy_time(s.times, s.survival);
    return s;
}

json series_json(const DensitySeries& s)
{
    json j = {{"times", s.times}, {"survival", s.survival}};
    j["mot"] = s.mot ? to_json(*s.mot) : json(nullptr);
    return j;
}

json audit_json(const PdeAudit& a)
{
    return {{"max_energy_increase", a.max_energy_increase},
            {"max_mass_drift", a.max_mass_drift},
            {"spectral_max", static_cast<double>(a.spectral_max)},
            {"energy_ok", a.energy_ok()},
            {"mass_ok", a.mass_ok()},
            {"spectral_ok", a.spectral_ok()}};
}

}  // namespace

ExecutionResult execute(const ExperimentManifest& manifest)
{
    ExecutionResult result;
    if (manifest.engines.empty()) throw ConfigError("at least one engine is required");

    RawConfig raw = load_config(manifest.config_path);
    if (manifest.seed) raw.run.seed = *manifest.seed;
    if (manifest.realizations) raw.run.realizations = *manifest.realizations;
    if (manifest.tau_refine) raw.pde.tau_refine = *manifest.tau_refine;
    if (manifest.output_times) {
        raw.run.output_times = *manifest.output_times;
        raw.run.output_every.reset();
    }
    const ExperimentConfig cfg = validate_config(raw);
    const ChemicalField field = build_field(cfg.raw.field.profile);
    if (field.dimension != cfg.dimension)
        throw ConfigError("field '" + field.description + "' is " + std::to_string(field.dimension) +
                          "-D but the grid is " + std::to_string(cfg.dimension) + "-D");
    {
        const double h = 0.5 * cfg.dx;
        const double hi0 = cfg.lattice.center(0, cfg.lattice.cells_per_axis - 1) + h;
        const double hi1 = cfg.lattice.center(1, cfg.lattice.cells_per_axis - 1) + h;
        check_field_nonnegative(field, {cfg.lattice.origin[0] - h, cfg.lattice.origin[1] - h}, {hi0, hi1});
    }
    const BetaProfile beta = beta_profile(field, cfg);

    std::error_code ec;
    std::filesystem::create_directories(manifest.output_dir, ec);
    if (ec) throw IoError("cannot create '" + manifest.output_dir.string() + "': " + ec.message());
    Outputs out{manifest.output_dir, {}, json::array()};
    const std::string id =
        manifest.experiment_id.empty() ? manifest.config_path.stem().string() : manifest.experiment_id;

    std::map<Engine, DensitySeries> series;
    std::optional<PdeResult> pde;
    json report;
    report["experiment_id"] = id;
    json engines = json::array();
    for (Engine e : manifest.engines) engines.push_back(to_string(e));
    report["engines"] = engines;

    const RegimeReport regime = classify_regime(cfg, field);
    report["regime"] = to_json(regime);

    for (Engine e : manifest.engines) {
        const std::string name = to_string(e);
        switch (e) {
        case Engine::Abm: {
            const EnsembleResult abm = run_ensemble(cfg, beta);
            for (std::size_t i = 0; i < abm.output_times.size(); ++i)
                io::write_histogram_csv(out.add(numbered("abm_hist", i), "histogram", name), cfg.lattice,
                                        abm.histograms[i]);
            io::write_survival_csv(out.add("abm_survival.csv", "survival", name), abm);
            series.emplace(e, series_from(abm));
            break;
        }
        case Engine::Pde: {
            PdeOptions opts;
            opts.keep_final_grid = manifest.dump_grid;
            opts.weight_scale = manifest.inject_weight_scale;
            pde = run_pde(cfg, beta, opts);
            for (std::size_t i = 0; i < pde->output_times.size(); ++i)
                io::write_density_csv(out.add(numbered("pde_density", i), "density", name), cfg.lattice,
                                      pde->live_density[i]);
            if (pde->final_grid) {
                const auto path = out.add("pde_final_grid.abgr", "grid", name);
                write_grid_binary(path, *pde->final_grid);
            }
            {
                const auto path = out.add("pde_audit.csv", "audit", name);
                std::ofstream f(path, std::ios::binary);
                if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
                f << "substep,energy,mass\n";
                for (std::size_t m = 0; m < pde->audit.energy.size(); ++m)
                    f << m << ',' << io::format_double(pde->audit.energy[m]) << ','
                      << io::format_double(pde->audit.mass[m]) << '\n';
                if (!f) throw IoError("failed writing '" + path.string() + "'");
            }
            report["audit"] = audit_json(pde->audit);
            series.emplace(e, series_from(*pde));
            break;
        }
        case Engine::Master: {
            std::int64_t binned_from = -1;
            DensitySeries s = master_series(cfg, beta, binned_from);
            report["master_mode"] = binned_from < 0 ? json{{"mode", "exact"}}
                                                    : json{{"mode", "binned"},
                                                                     {"exact_until_t", cfg.time_of_step(binned_from)}};
            for (std::size_t i = 0; i < s.times.size(); ++i)
                io::write_density_csv(out.add(numbered("master_density", i), "density", name), cfg.lattice,
                                      s.density[i]);
            series.emplace(e, std::move(s));
            break;
        }
        case Engine::Analytic: {
            std::string note;
            auto s = analytic_series(cfg, beta, regime, note);
            report["analytic_kind"] = note;
            if (s) series.emplace(e, std::move(*s));
            break;
        }
        }
    }

    // Per-engine survival curves and long-format surfaces.
    {
        const auto path = out.add("survival.csv", "survival");
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
        f << "t";
        for (const auto& [e, s] : series) f << ",P_" << to_string(e);
        f << '\n';
        for (std::size_t i = 0; i < cfg.output_steps.size(); ++i) {
            f << io::format_double(cfg.time_of_step(cfg.output_steps[i]));
            for (const auto& [e, s] : series) f << ',' << io::format_double(s.survival[i]);
            f << '\n';
        }
        if (!f) throw IoError("failed writing '" + path.string() + "'");
    }
    json series_doc = json::object();
    for (const auto& [e, s] : series) {
        io::write_surface_csv(out.add(to_string(e) + "_surface.csv", "surface", to_string(e)), cfg.lattice, s.times,
                              s.density);
        series_doc[to_string(e)] = series_json(s);
    }
    report["series"] = series_doc;

    // Pairwise comparisons.
    json comparisons = json::array();
    json l1_matrix = json::object(), gap_matrix = json::object();
    std::optional<ComparisonReport> abm_vs_pde;
    for (auto a = series.begin(); a != series.end(); ++a) {
        for (auto b = std::next(a); b != series.end(); ++b) {
            ComparisonReport cr = compare_series(a->second, b->second);
            if (pde && (a->first == Engine::Pde || b->first == Engine::Pde)) {
                cr.max_energy_increase = pde->audit.max_energy_increase;
                cr.max_mass_drift = pde->audit.max_mass_drift;
                cr.spectral_max = static_cast<double>(pde->audit.spectral_max);
            }
            const std::string ka = to_string(a->first), kb = to_string(b->first);
            l1_matrix[ka][kb] = l1_matrix[kb][ka] = cr.max_l1();
            gap_matrix[ka][kb] = gap_matrix[kb][ka] = cr.survival_sup_gap;
            comparisons.push_back(to_json(cr));
            if (a->first == Engine::Abm && b->first == Engine::Pde) abm_vs_pde = cr;
        }
    }
    report["comparisons"] = comparisons;
    if (series.size() >= 2) report["distance_matrix"] = {{"max_l1", l1_matrix}, {"survival_sup_gap", gap_matrix}};

    {
        std::optional<SummarySeries> sa, sp;
        if (series.count(Engine::Abm)) sa = summarize(series.at(Engine::Abm));
        if (series.count(Engine::Pde)) sp = summarize(series.at(Engine::Pde));
        std::vector<double> times;
        for (std::int64_t s : cfg.output_steps) times.push_back(cfg.time_of_step(s));
        io::write_summary_csv(out.add("summary.csv", "summary"), times, sa ? &*sa : nullptr, sp ? &*sp : nullptr,
                              abm_vs_pde ? &abm_vs_pde->l1 : nullptr, cfg.dimension);
    }

    io::write_json(out.add("report.json", "report"), report);

    const std::string config_bytes = read_file(manifest.config_path);
    json provenance = {{"experiment_id", id},
                       {"config_path", manifest.config_path.string()},
                       {"config_fnv1a", io::fnv1a_hex(config_bytes)},
                       {"effective_config", to_json(cfg.raw)},
                       {"effective_config_fnv1a", io::fnv1a_hex(to_json(cfg.raw).dump())},
                       {"seed", cfg.seed},
                       {"realizations", cfg.realizations},
                       {"tau_refine", cfg.tau_refine},
                       {"lattice", {{"dimension", cfg.dimension}, {"cells_per_axis", cfg.lattice.cells_per_axis},
                                    {"dx", cfg.dx}, {"origin", cfg.lattice.origin}}},
                       {"versions",
                        {{"absorb_lab", ABSORB_LAB_VERSION},
                         {"fftw", std::string(fftw_version)},
                         {"compiler", __VERSION__},
                         {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
    io::write_json(out.add("provenance.json", "provenance"), provenance);

    out.files.emplace_back("index.json");
    io::write_json(out.dir / "index.json", {{"experiment_id", id}, {"files", out.index}});
    result.files = out.files;

    if (pde && !pde->audit.ok()) {
        std::ostringstream msg;
        msg << "PDE invariant audit failed:";
        if (!pde->audit.energy_ok()) msg << " energy increase " << pde->audit.max_energy_increase << ';';
        if (!pde->audit.mass_ok()) msg << " mass drift " << pde->audit.max_mass_drift << ';';
        if (!pde->audit.spectral_ok()) msg << " spectral max " << static_cast<double>(pde->audit.spectral_max) << ';';
        result.exit_code = kExitInvariant;
        result.message = msg.str();
    } else {
        result.message = "wrote " + std::to_string(out.files.size()) + " files to " + manifest.output_dir.string();
    }
    return result;
}

namespace {

int guarded(const std::function<int()>& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violated: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitInvariant;
    }
}

json derived_json(const ExperimentConfig& cfg)
{
    return {{"dimension", cfg.dimension},
            {"diffusivity", std::vector<double>(cfg.diffusivity.begin(), cfg.diffusivity.begin() + cfg.dimension)},
            {"drift", std::vector<double>(cfg.drift.begin(), cfg.drift.begin() + cfg.dimension)},
            {"d_xi", cfg.d_xi},
            {"live_bins", cfg.live_bins},
            {"total_bins", cfg.total_bins},
            {"cells_per_axis", cfg.lattice.cells_per_axis},
            {"origin", std::vector<double>(cfg.lattice.origin.begin(), cfg.lattice.origin.begin() + cfg.dimension)},
            {"x0_index", std::vector<std::int64_t>(cfg.x0_index.begin(), cfg.x0_index.begin() + cfg.dimension)},
            {"end_step", cfg.end_step},
            {"output_steps", cfg.output_steps},
            {"tau", cfg.tau},
            {"workers", worker_count()}};
}

}  // namespace

int cli_main(int argc, char** argv)
{
    CLI::App app{"absorb-lab: lattice walkers with cumulative absorption, ABM and PDE engines"};
    app.require_subcommand(1);

    ExperimentManifest manifest;
    std::string engines = "pde";
    std::uint64_t seed = 0;
    std::int64_t realizations = 0;
    int tau_refine = 0;
    std::vector<double> output_times;

    const auto add_run_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", manifest.config_path, "experiment JSON")->required();
        cmd->add_option("--engines", engines, "comma-separated: abm,pde,master,analytic");
        cmd->add_option("--out", manifest.output_dir, "output directory")->required();
        cmd->add_option("--seed", seed, "override run.seed");
        cmd->add_option("--realizations", realizations, "override run.realizations");
        cmd->add_option("--tau-refine", tau_refine, "PDE sub-steps per dt");
        cmd->add_option("--output-times", output_times, "override run.output_times")->delimiter(',');
        cmd->add_option("--id", manifest.experiment_id, "experiment id (default: config file stem)");
        cmd->add_flag("--dump-grid", manifest.dump_grid, "write the final PDE grid as ABGR binary");
        cmd->add_option("--inject-weight-scale", manifest.inject_weight_scale)->group("");
    };

    auto* run = app.add_subcommand("run", "run engines and write artifacts");
    add_run_options(run);
    auto* compare = app.add_subcommand("compare", "run at least two engines and report distances");
    add_run_options(compare);
    compare->get_option("--engines")->default_str("abm,pde");

    std::filesystem::path config_path;
    std::filesystem::path regimes_out;
    auto* regimes = app.add_subcommand("regimes", "classify the absorption/diffusion regime");
    regimes->add_option("--config", config_path, "experiment JSON")->required();
    regimes->add_option("--out", regimes_out, "directory for regimes.json");

    auto* validate = app.add_subcommand("validate", "check a config and print its derived constants");
    validate->add_option("--config", config_path, "experiment JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (run->parsed() || compare->parsed()) {
        return guarded([&] {
            if (compare->parsed() && compare->count("--engines") == 0) engines = "abm,pde";
            manifest.engines = parse_engines(engines);
            if (compare->parsed() && manifest.engines.size() < 2)
                throw ConfigError("compare needs at least two engines");
            if (run->count("--seed") || compare->count("--seed")) manifest.seed = seed;
            if (run->count("--realizations") || compare->count("--realizations")) manifest.realizations = realizations;
            if (run->count("--tau-refine") || compare->count("--tau-refine")) manifest.tau_refine = tau_refine;
            if (!output_times.empty()) manifest.output_times = output_times;
            const ExecutionResult res = execute(manifest);
            if (res.exit_code != kExitOk)
                std::cerr << res.message << '\n';
            else
                std::cout << res.message << '\n';
            return res.exit_code;
        });
    }
    if (regimes->parsed()) {
        return guarded([&] {
            const ExperimentConfig cfg = validate_config(load_config(config_path));
            const ChemicalField field = build_field(cfg.raw.field.profile);
            const json doc = to_json(classify_regime(cfg, field));
            std::cout << doc.dump(2) << '\n';
            if (!regimes_out.empty()) {
                std::error_code ec;
                std::filesystem::create_directories(regimes_out, ec);
                if (ec) throw IoError("cannot create '" + regimes_out.string() + "'");
                io::write_json(regimes_out / "regimes.json", doc);
            }
            return static_cast<int>(kExitOk);
        });
    }
    return guarded([&] {
        const ExperimentConfig cfg = validate_config(load_config(config_path));
        const ChemicalField field = build_field(cfg.raw.field.profile);
        if (field.dimension != cfg.dimension) throw ConfigError("field and grid dimensions differ");
        std::cout << derived_json(cfg).dump(2) << '\n';
        return static_cast<int>(kExitOk);
    });
}

}  // namespace absorb
