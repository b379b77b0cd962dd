// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance              run every criterion
//   acceptance --criterion N

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "absorb/abm.hpp"
#include "absorb/analysis.hpp"
#include "absorb/beta.hpp"
#include "absorb/config.hpp"
#include "absorb/field.hpp"
#include "absorb/green.hpp"
#include "absorb/master.hpp"
#include "absorb/pde.hpp"
#include "absorb/regimes.hpp"

using namespace absorb;
using nlohmann::json;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

json load_doc(const std::string& name)
{
    std::ifstream in(std::string(ABSORB_LAB_CONFIG_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing config " + name);
    return json::parse(in);
}

ExperimentConfig config_of(const json& doc) { return validate_config(parse_config(doc)); }

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::size_t index_of_time(const std::vector<double>& times, double t)
{
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::fabs(times[i] - t) < 1e-9 * std::max(1.0, t)) return i;
    throw std::runtime_error("output time " + fmt(t) + " not recorded");
}

/// Strict local maxima of a 1-D density, ignoring values below rel * max.
int count_maxima_1d(const std::vector<double>& p, double rel = 1e-9)
{
    const double top = *std::max_element(p.begin(), p.end());
    int n = 0;
    for (std::size_t i = 1; i + 1 < p.size(); ++i)
        if (p[i] > rel * top && p[i] > p[i - 1] && p[i] > p[i + 1]) ++n;
    return n;
}

struct Peak {
    std::int64_t ix, iy;
    double value;
};

/// Strict local maxima over the 8-neighbourhood holding at least rel * max.
std::vector<Peak> maxima_2d(const std::vector<double>& p, const Lattice& lat, double rel)
{
    const double top = *std::max_element(p.begin(), p.end());
    std::vector<Peak> peaks;
    const std::int64_t n = lat.cells_per_axis;
    for (std::int64_t ix = 0; ix < n; ++ix)
        for (std::int64_t iy = 0; iy < n; ++iy) {
            const double v = p[static_cast<std::size_t>(lat.flat(ix, iy))];
            if (v < rel * top) continue;
            bool is_max = true;
            for (int a = -1; a <= 1 && is_max; ++a)
                for (int b = -1; b <= 1; ++b) {
                    if (a == 0 && b == 0) continue;
                    const double w = p[static_cast<std::size_t>(lat.flat(lat.wrap(ix + a), lat.wrap(iy + b)))];
                    if (w >= v) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) peaks.push_back({ix, iy, v});
        }
    return peaks;
}

double max_eigen_modulus_dense(const std::vector<double>& column)
{
    const auto n = static_cast<Eigen::Index>(column.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = column[static_cast<std::size_t>(((i - j) % n + n) % n)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

struct Example1Pde {
    ExperimentConfig cfg;
    PdeResult pde;
};

const Example1Pde& example1_pde()
{
    static const Example1Pde run = [] {
        Example1Pde r;
        r.cfg = config_of(load_doc("example1.json"));
        r.pde = run_pde(r.cfg, build_field(r.cfg.raw.field.profile));
        return r;
    }();
    return run;
}

Verdict criterion1()
{
    const auto& r = example1_pde();
    const auto& e = r.pde.audit.energy;
    double worst = -1.0;
    bool ok = true;
    for (std::size_t m = 0; m + 1 < e.size(); ++m) {
        worst = std::max(worst, (e[m + 1] - e[m]) / e[m]);
        if (e[m + 1] > e[m] * (1.0 + 1e-14)) ok = false;
    }
    return {ok, "Example 1, " + std::to_string(e.size() - 1) + " steps, max relative energy increase " + fmt(worst)};
}

Verdict criterion2()
{
    const auto& a = example1_pde().pde.audit;
    return {a.max_mass_drift < 1e-10, "relative mass drift (live + overflow) " + fmt(a.max_mass_drift)};
}

Verdict criterion3()
{
    const char* names[] = {"example1.json",   "example2.json",   "biased.json",     "sine2d_a10.json",
                           "sine2d_a01.json", "regime_abs.json", "regime_diff.json"};
    long double worst = 0.0L;
    double worst_gap = 0.0;
    int kernels = 0;
    bool ok = true;
    for (const char* name : names) {
        for (int q : {1, 2}) {
            json doc = load_doc(name);
            doc["pde"]["tau_refine"] = q;
            const ExperimentConfig cfg = config_of(doc);
            const SpatialKernel k = build_kernel(cfg);
            const std::int64_t n = cfg.lattice.cells_per_axis;
            const long double lam = k.spectral_max(n);
            worst = std::max(worst, lam);
            ok = ok && lam < 1.0L;
            ++kernels;
            // Dense eigendecomposition on at most 256 cells, per axis. Double
            // precision cannot resolve 1 - 1e-17, so it only has to agree.
            const std::int64_t m = std::min<std::int64_t>(n, 256);
            for (const GreenWeights* w : {&k.x, cfg.dimension == 2 ? &k.y : nullptr}) {
                if (!w) continue;
                const double dense = max_eigen_modulus_dense(w->circulant_column(m));
                const double dft = static_cast<double>(spectral_check(*w, m));
                worst_gap = std::max(worst_gap, std::fabs(dense - dft));
                ok = ok && std::fabs(dense - dft) <= 1e-10;
            }
        }
    }
    return {ok, std::to_string(kernels) + " kernels, max |lambda| = 1 - " + fmt(static_cast<double>(1.0L - worst)) +
                    ", DFT vs eigendecomposition gap " + fmt(worst_gap)};
}

json constant_beta_doc()
{
    json doc = load_doc("example1.json");
    doc["field"]["profile"] = "constant(value=1)";
    doc["field"]["beta_rule"] = "rate";
    doc["agent"]["alpha"] = 5e-4;  // beta t* = xi_c at t* = 0.01
    doc["run"]["t_end"] = 0.005;
    doc["run"].erase("output_every");
    doc["run"]["output_times"] = {0.002, 0.005};
    return doc;
}

/// Constant beta, point source, at Example 1 resolution (refine = 1) or with dx
/// and tau halved (refine = 2). Diffusivity is held at the coarse value so both
/// runs approximate the same solution.
std::vector<double> constant_beta_errors(int refine, const ExperimentConfig* coarse)
{
    json doc = constant_beta_doc();
    if (refine > 1) {
        doc["grid"]["dx"] = doc["grid"]["dx"].get<double>() / refine;
        doc["grid"]["cells"] = coarse->lattice.cells_per_axis * refine;
        doc["grid"]["origin"] = {coarse->lattice.origin[0]};
        doc["pde"]["tau_refine"] = refine;
    }
    ExperimentConfig cfg = config_of(doc);
    if (coarse) cfg.diffusivity = coarse->diffusivity;
    const BetaProfile beta = beta_profile(build_field("constant(value=1)"), cfg);
    const PdeResult pde = run_pde(cfg, beta);
    std::vector<double> err;
    for (std::size_t i = 0; i < pde.output_times.size(); ++i) {
        const auto exact = analytic_limit_live_density(LimitKind::ConstantBeta, cfg, beta, pde.output_times[i]);
        err.push_back(l1_distance(pde.live_density[i], exact, cfg.lattice));
    }
    return err;
}

Verdict criterion4()
{
    const ExperimentConfig coarse_cfg = config_of(constant_beta_doc());
    const auto coarse = constant_beta_errors(1, nullptr);
    const auto fine = constant_beta_errors(2, &coarse_cfg);
    bool abs_ok = true, order_ok = true;
    std::string detail;
    const double ts[] = {0.002, 0.005};
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        const double ratio = coarse[i] / fine[i];
        abs_ok = abs_ok && coarse[i] <= 5e-3;
        order_ok = order_ok && ratio >= 1.8;
        detail += "t=" + fmt(ts[i]) + ": L1 " + fmt(coarse[i]) + " -> " + fmt(fine[i]) + " (x" + fmt(ratio) + "); ";
    }
    detail += std::string("L1<=5e-3 ") + (abs_ok ? "yes" : "no") + ", order>=1.8 " + (order_ok ? "yes" : "no");
    return {abs_ok && order_ok, detail};
}

Verdict criterion5()
{
    json doc = load_doc("example1.json");
    doc["grid"]["cells"] = 25;
    doc["grid"]["origin"] = {0.38};
    doc["grid"].erase("region");
    doc["run"]["t_end"] = 12 * 5e-5;
    doc["run"].erase("output_every");
    doc["run"]["output_times"] = {12 * 5e-5};
    doc["run"]["realizations"] = 1000000;
    // Threshold between the 12-step totals of walkers near x0 and of walkers
    // that strayed, so the live marginal is neither empty nor full.
    const ExperimentConfig probe = config_of(doc);
    const double step_amount = beta_profile(build_field(probe.raw.field.profile), probe)[probe.x0_flat()] * probe.dt;
    doc["grid"]["xi_c"] = 11.9 * step_amount;
    const ExperimentConfig cfg = config_of(doc);
    const BetaProfile beta = beta_profile(build_field(cfg.raw.field.profile), cfg);

    const MasterState master = evolve_master_equation(cfg, beta, 12);
    const auto marginal = master.live_marginal();
    const EnsembleResult abm = run_ensemble(cfg, beta);
    const auto& hist = abm.histograms.back();
    const double R = static_cast<double>(abm.realizations);
    double worst_z = 0.0;
    bool abm_ok = true;
    for (std::size_t c = 0; c < marginal.size(); ++c) {
        const double p = marginal[c];
        const double expect = R * p;
        const double sd = std::sqrt(R * p * (1.0 - p));
        const double diff = std::fabs(static_cast<double>(hist[c]) - expect);
        if (sd == 0.0) {
            abm_ok = abm_ok && diff == 0.0;
            continue;
        }
        worst_z = std::max(worst_z, diff / sd);
        abm_ok = abm_ok && diff <= 4.0 * sd;
    }

    const PdeResult pde = run_pde(cfg, beta);
    std::vector<double> master_density(marginal.size());
    for (std::size_t c = 0; c < marginal.size(); ++c) master_density[c] = marginal[c] / cfg.dx;
    const double l1 = l1_distance(lattice_parity_filter(pde.live_density.back(), cfg.lattice),
                                  lattice_parity_filter(master_density, cfg.lattice), cfg.lattice);
    const double l1_raw = l1_distance(pde.live_density.back(), master_density, cfg.lattice);
    return {abm_ok && l1 <= 0.05, "live mass " + fmt(master.live_mass()) + ", ABM max |z| " + fmt(worst_z) +
                                      " (<= 4), PDE vs master L1 " + fmt(l1) + " (parity filtered; raw " +
                                      fmt(l1_raw) + ")"};
}

Verdict criterion6()
{
    const auto& r = example1_pde();
    const ExperimentConfig& cfg = r.cfg;
    const EnsembleResult abm = run_ensemble(cfg, build_field(cfg.raw.field.profile));
    const ComparisonReport cr = compare_results(abm, r.pde);
    const auto& t = r.pde.output_times;
    const auto& P = r.pde.survival;
    const double p5 = P[index_of_time(t, 0.005)], p7 = P[index_of_time(t, 0.007)];
    const int maxima = count_maxima_1d(r.pde.live_density[index_of_time(t, 0.0055)]);
    const bool ok = cr.survival_sup_gap <= 0.03 && p5 - p7 >= 0.4 && p7 < 0.5 && maxima == 2;
    return {ok, "R=" + std::to_string(abm.realizations) + " sup-gap " + fmt(cr.survival_sup_gap) + ", P(0.005)-P(0.007) " +
                    fmt(p5 - p7) + ", P(0.007) " + fmt(p7) + ", maxima at t=0.0055: " + std::to_string(maxima)};
}

Verdict criterion7()
{
    const ExperimentConfig cfg = config_of(load_doc("example2.json"));
    const PdeResult pde = run_pde(cfg, build_field(cfg.raw.field.profile));
    const SummarySeries s = summarize(series_from(pde));
    bool right = true;
    double min_mu = 1e300;
    std::vector<double> ts, sigma;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        if (!s.moments[i]) continue;
        const double mu = s.moments[i]->mean[0];
        if (s.times[i] >= 0.006 - 1e-12) {
            right = right && mu > 0.5;
            min_mu = std::min(min_mu, mu);
        }
        // Shape is judged over the die-off; the few survivors left after it
        // sit in the low-C tail and spread again.
        if (s.survival[i] < 0.01) continue;
        ts.push_back(s.times[i]);
        sigma.push_back(std::sqrt(s.moments[i]->variance[0]));
    }
    const auto peak = static_cast<std::size_t>(std::max_element(sigma.begin(), sigma.end()) - sigma.begin());
    bool decreasing = peak + 1 < sigma.size();
    for (std::size_t i = peak + 1; i < sigma.size(); ++i) decreasing = decreasing && sigma[i] < sigma[i - 1];
    const bool peak_ok = ts[peak] >= 0.004 && ts[peak] <= 0.0065 && decreasing;
    return {right && peak_ok, "min mu(t>=0.006) " + fmt(min_mu) + ", while P >= 0.01 sigma peaks " + fmt(sigma[peak]) + " at t=" +
                                  fmt(ts[peak]) + " and falls to " + fmt(sigma.back()) + " by t=" + fmt(ts.back()) +
                                  (decreasing ? " monotonically" : " non-monotonically")};
}

double fitted_slope(const std::vector<double>& t, const std::vector<double>& y)
{
    const double n = static_cast<double>(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    return (n * sty - st * sy) / (n * stt - st * st);
}

Verdict criterion8()
{
    json doc = load_doc("biased.json");
    doc["run"].erase("output_every");
    doc["run"]["output_every"] = 5e-5;
    const ExperimentConfig cfg = config_of(doc);
    const ChemicalField field = build_field(cfg.raw.field.profile);
    const BetaProfile beta = beta_profile(field, cfg);
    const PdeResult pde = run_pde(cfg, beta);
    const EnsembleResult abm = run_ensemble(cfg, beta);
    const ComparisonReport cr = compare_results(abm, pde);

    const double target = 0.2 * cfg.dx / cfg.dt;
    const auto slope_of = [&](const DensitySeries& s) {
        std::vector<double> t, mu;
        for (std::size_t i = 0; i < s.times.size() && i <= 100; ++i) {
            const auto m = location_moments(s.density[i], s.lattice);
            if (!m) continue;
            t.push_back(s.times[i]);
            mu.push_back(m->mean[0]);
        }
        return fitted_slope(t, mu);
    };
    const double s_pde = slope_of(series_from(pde));
    const double s_abm = slope_of(series_from(abm));
    const bool ok = std::fabs(s_pde / target - 1.0) <= 0.05 && std::fabs(s_abm / target - 1.0) <= 0.05 &&
                    cr.survival_sup_gap <= 0.03;
    return {ok, "target slope " + fmt(target) + ", PDE " + fmt(s_pde) + ", ABM " + fmt(s_abm) +
                    ", survival sup-gap " + fmt(cr.survival_sup_gap)};
}

bool bimodal_on_antidiagonal(const std::vector<double>& p, const Lattice& lat, std::string& why)
{
    const auto peaks = maxima_2d(p, lat, 0.05);
    why = std::to_string(peaks.size()) + " peaks";
    if (peaks.size() != 2) return false;
    for (const Peak& pk : peaks) {
        const double x = lat.center(0, pk.ix), y = lat.center(1, pk.iy);
        why += " (" + fmt(x) + "," + fmt(y) + ")";
        if (std::fabs(x + y - 1.0) > lat.dx + 1e-12) return false;
        if (std::fabs(x - 0.5) < lat.dx / 2) return false;
    }
    return true;
}

Verdict criterion9()
{
    const ExperimentConfig cfg = config_of(load_doc("sine2d_a10.json"));
    const ChemicalField field = build_field(cfg.raw.field.profile);
    const BetaProfile beta = beta_profile(field, cfg);
    const PdeResult pde = run_pde(cfg, beta);
    double drift = 0.0;
    for (const auto& p : pde.live_density)
        if (const auto m = location_moments(p, cfg.lattice))
            drift = std::max({drift, std::fabs(m->mean[0] - 0.5), std::fabs(m->mean[1] - 0.5)});
    std::string why10;
    const bool bimodal10 =
        bimodal_on_antidiagonal(pde.live_density[index_of_time(pde.output_times, 0.0024)], cfg.lattice, why10);

    json doc = load_doc("sine2d_a01.json");
    doc["run"]["t_end"] = 0.025;
    doc["run"]["output_times"] = json::array();
    doc["run"]["output_every"] = 0.0025;
    const ExperimentConfig cfg01 = config_of(doc);
    const PdeResult pde01 = run_pde(cfg01, field);
    double first_bimodal = -1.0;
    std::string why01;
    for (std::size_t i = 0; i < pde01.output_times.size(); ++i) {
        std::string w;
        if (pde01.survival[i] > kMomentCutoff && bimodal_on_antidiagonal(pde01.live_density[i], cfg01.lattice, w)) {
            first_bimodal = pde01.output_times[i];
            why01 = w;
            break;
        }
    }
    const bool emerge_ok = first_bimodal >= 0.0125 - 1e-12 && first_bimodal <= 0.025 + 1e-12;

    json abm_doc = load_doc("sine2d_a10.json");
    abm_doc["run"]["t_end"] = 0.0024;
    abm_doc["run"]["output_times"] = {0.0, 0.0002, 0.0017, 0.0024};
    const ExperimentConfig abm_cfg = config_of(abm_doc);
    const EnsembleResult abm = run_ensemble(abm_cfg, beta);
    double gap = 0.0;
    for (std::size_t i = 0; i < abm.output_times.size(); ++i)
        gap = std::max(gap, std::fabs(abm.survival_fraction(i) -
                                      pde.survival[index_of_time(pde.output_times, abm.output_times[i])]));

    return {drift <= 1e-9 && bimodal10 && emerge_ok,
            "mean drift " + fmt(drift) + "; alpha=0.1 at t=0.0024: " + why10 + "; alpha=0.01 first bimodal at t=" +
                fmt(first_bimodal) + " " + why01 + "; ABM R=" + std::to_string(abm.realizations) +
                " survival gap " + fmt(gap)};
}

Verdict criterion10()
{
    json doc = load_doc("example1.json");
    doc["run"]["realizations"] = 100000;
    const ExperimentConfig cfg = config_of(doc);
    const auto& pde = example1_pde().pde;
    const EnsembleResult abm = run_ensemble(cfg, build_field(cfg.raw.field.profile));
    const MotResult m_pde = mean_occupancy_time(pde.output_times, pde.survival);
    const MotResult m_abm = empirical_occupancy_time(abm);
    const double rel = std::fabs(m_pde.value - m_abm.value) / m_abm.value;
    return {m_pde.decayed && m_abm.decayed && rel <= 0.02,
            "PDE trapezoid " + fmt(m_pde.value) + ", ABM mean death time " + fmt(m_abm.value) + " (R=1e5, censored " +
                std::to_string(abm.censored) + "), relative gap " + fmt(rel)};
}

double survival_sup_vs_limit(const ExperimentConfig& cfg, const BetaProfile& beta, const PdeResult& pde, LimitKind kind,
                             double mean_beta, double& t_worst)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < pde.output_times.size(); ++i) {
        const double a = analytic_limit_survival(kind, cfg, beta, pde.output_times[i], mean_beta);
        const double gap = std::fabs(a - pde.survival[i]);
        if (gap > worst) {
            worst = gap;
            t_worst = pde.output_times[i];
        }
    }
    return worst;
}

Verdict criterion11()
{
    const ExperimentConfig abs_cfg = config_of(load_doc("regime_abs.json"));
    const ChemicalField abs_field = build_field(abs_cfg.raw.field.profile);
    const BetaProfile abs_beta = beta_profile(abs_field, abs_cfg);
    const RegimeReport abs_report = classify_regime(abs_cfg, abs_field);
    const bool rho_ok = std::fabs(abs_report.rho_x0 / 2e5 - 1.0) <= 1e-9 &&
                        abs_report.classification == Regime::AbsorptionDominant;
    const PdeResult abs_pde = run_pde(abs_cfg, abs_beta);
    double t_abs = 0.0;
    const double abs_gap =
        survival_sup_vs_limit(abs_cfg, abs_beta, abs_pde, LimitKind::Absorption, abs_report.mean_beta, t_abs);

    const ExperimentConfig diff_cfg = config_of(load_doc("regime_diff.json"));
    const ChemicalField diff_field = build_field(diff_cfg.raw.field.profile);
    const BetaProfile diff_beta = beta_profile(diff_field, diff_cfg);
    const RegimeReport diff_report = classify_regime(diff_cfg, diff_field);
    const PdeResult diff_pde = run_pde(diff_cfg, diff_beta);
    double t_diff = 0.0;
    const double diff_gap =
        survival_sup_vs_limit(diff_cfg, diff_beta, diff_pde, LimitKind::Diffusion, diff_report.mean_beta, t_diff);

    const bool ok = rho_ok && abs_gap <= 0.01 && diff_gap <= 0.05;
    return {ok, "rho(x0) " + fmt(abs_report.rho_x0) + " (" + to_string(abs_report.classification) +
                    "), absorption sup-gap " + fmt(abs_gap) + " at t=" + fmt(t_abs) + "; diffusion-case rho_mean " +
                    fmt(diff_report.rho_mean) + " (" + to_string(diff_report.classification) +
                    "), t* = " + fmt(diff_cfg.xi_c / diff_report.mean_beta) + ", sup-gap " + fmt(diff_gap) +
                    " at t=" + fmt(t_diff)};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"energy monotonicity", criterion1},
        {"mass conservation", criterion2},
        {"spectral bound", criterion3},
        {"constant-beta analytic oracle", criterion4},
        {"master-equation equivalence", criterion5},
        {"Example 1 reproduction", criterion6},
        {"Example 2 moments", criterion7},
        {"Example 3 biased walk", criterion8},
        {"2-D mode bifurcation", criterion9},
        {"mean occupancy time", criterion10},
        {"regime oracles", criterion11},
    };

    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--criterion N]\n";
            return 2;
        }
    }
    if (only < 0 || only > static_cast<int>(criteria.size())) {
        std::cerr << "criterion must be 1.." << criteria.size() << '\n';
        return 2;
    }

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<int>(i) + 1 != only) continue;
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << v.detail << std::endl;
        failures += v.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
