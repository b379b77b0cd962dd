#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include <json.hpp>

#include "absorb/abm.hpp"
#include "absorb/analysis.hpp"
#include "absorb/config.hpp"
#include "absorb/error.hpp"
#include "absorb/green.hpp"
#include "absorb/pde.hpp"
#include "absorb/regimes.hpp"
#include "absorb/rng.hpp"

namespace py = pybind11;
using namespace absorb;

namespace {

ExperimentConfig config_from(const std::string& text)
{
    return validate_config(parse_config(nlohmann::json::parse(text)));
}

py::array_t<double> to_array(const std::vector<double>& v)
{
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<double> to_matrix(const std::vector<std::vector<double>>& rows)
{
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    py::array_t<double> out({rows.size(), cols});
    auto m = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    return out;
}

py::dict lattice_dict(const Lattice& lat)
{
    py::dict d;
    d["dimension"] = lat.dimension;
    d["cells_per_axis"] = lat.cells_per_axis;
    d["dx"] = lat.dx;
    d["origin"] = std::vector<double>(lat.origin.begin(), lat.origin.begin() + lat.dimension);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Lattice walkers with cumulative absorption: ABM and PDE engines";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def(
        "validate_config",
        [](const std::string& text) {
            const ExperimentConfig cfg = config_from(text);
            py::dict d;
            d["diffusivity"] = std::vector<double>(cfg.diffusivity.begin(), cfg.diffusivity.begin() + cfg.dimension);
            d["drift"] = std::vector<double>(cfg.drift.begin(), cfg.drift.begin() + cfg.dimension);
            d["live_bins"] = cfg.live_bins;
            d["end_step"] = cfg.end_step;
            d["output_steps"] = cfg.output_steps;
            d["lattice"] = lattice_dict(cfg.lattice);
            return d;
        },
        py::arg("config_json"), "Validate a JSON config and return its derived constants.");

    m.def(
        "run_pde",
        [](const std::string& text) {
            const ExperimentConfig cfg = config_from(text);
            const ChemicalField field = build_field(cfg.raw.field.profile);
            PdeResult res;
            {
                py::gil_scoped_release release;
                res = run_pde(cfg, field);
            }
            py::dict d;
            d["times"] = to_array(res.output_times);
            d["survival"] = to_array(res.survival);
            d["density"] = to_matrix(res.live_density);
            d["lattice"] = lattice_dict(res.lattice);
            d["max_energy_increase"] = res.audit.max_energy_increase;
            d["max_mass_drift"] = res.audit.max_mass_drift;
            d["spectral_max"] = static_cast<double>(res.audit.spectral_max);
            return d;
        },
        py::arg("config_json"));

    m.def(
        "run_ensemble",
        [](const std::string& text, unsigned workers) {
            const ExperimentConfig cfg = config_from(text);
            const ChemicalField field = build_field(cfg.raw.field.profile);
            EnsembleResult res;
            {
                py::gil_scoped_release release;
                res = run_ensemble(cfg, field, workers);
            }
            py::dict d;
            d["times"] = to_array(res.output_times);
            d["survival"] = res.survival;
            d["histograms"] = res.histograms;
            d["death_times"] = to_array(res.death_times);
            d["censored"] = res.censored;
            d["lattice"] = lattice_dict(res.lattice);
            return d;
        },
        py::arg("config_json"), py::arg("workers") = 0);

    m.def(
        "classify_regime",
        [](const std::string& text) {
            const ExperimentConfig cfg = config_from(text);
            return to_json(classify_regime(cfg, build_field(cfg.raw.field.profile))).dump();
        },
        py::arg("config_json"), "Regime report as a JSON string.");

    m.def(
        "green_weights",
        [](double d, double a, double tau, double dx, double tol) {
            const GreenWeights g = green_weights(d, a, tau, dx, tol);
            return py::make_tuple(g.first_offset, to_array(g.weights));
        },
        py::arg("diffusivity"), py::arg("drift"), py::arg("tau"), py::arg("dx"), py::arg("tol") = 1e-15,
        "Returns (first_offset, weights).");

    m.def(
        "spectral_check",
        [](double d, double a, double tau, double dx, std::int64_t n, double tol) {
            return static_cast<double>(spectral_check(green_weights(d, a, tau, dx, tol), n));
        },
        py::arg("diffusivity"), py::arg("drift"), py::arg("tau"), py::arg("dx"), py::arg("n"), py::arg("tol") = 1e-15);

    m.def(
        "philox",
        [](std::uint64_t seed, std::uint64_t stream, std::size_t count) {
            Philox4x32 rng(seed, stream);
            std::vector<std::uint32_t> out(count);
            for (auto& v : out) v = rng.next_u32();
            return out;
        },
        py::arg("seed"), py::arg("stream"), py::arg("count"));
}
