#include <doctest.h>

#include <cmath>

#include "absorb/analysis.hpp"
#include "absorb/error.hpp"
#include "absorb/regimes.hpp"
#include "helpers.hpp"

using namespace absorb;

namespace {

Lattice line(std::int64_t n, double dx = 0.01, double origin = 0.0)
{
    Lattice l;
    l.cells_per_axis = n;
    l.dx = dx;
    l.origin = {origin, 0.0};
    return l;
}

}  // namespace

TEST_CASE("location moments use exact cell integrals")
{
    const Lattice lat = line(11, 0.1);
    std::vector<double> p(11, 0.0);
    p[5] = 10.0;  // all mass in the cell centered at 0.5
    const auto m = location_moments(p, lat);
    REQUIRE(m);
    CHECK(m->mean[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m->variance[0] == doctest::Approx(0.01 / 12).epsilon(1e-12));

    std::vector<double> sym(11, 0.0);
    sym[2] = sym[8] = 1.0;
    sym[4] = sym[6] = 3.0;
    CHECK(location_moments(sym, lat)->mean[0] == doctest::Approx(0.5).epsilon(1e-12));

    std::vector<double> faint(11, 0.0);
    faint[3] = 1e-4;  // P = 1e-5, below the cutoff
    CHECK_FALSE(location_moments(faint, lat));
    CHECK(integrate_density(p, lat) == doctest::Approx(1.0));
    CHECK(survival_curve({p, faint}, lat) == std::vector<double>{integrate_density(p, lat), 1e-5});
}

TEST_CASE("occupancy time")
{
    // Unit step dropping at t* = 0.3 sampled every 0.1: trapezoid gives t* - dt/2.
    const std::vector<double> t{0, 0.1, 0.2, 0.3, 0.4, 0.5};
    const std::vector<double> step{1, 1, 1, 0, 0, 0};
    const MotResult m = mean_occupancy_time(t, step);
    CHECK(m.decayed);
    CHECK(m.value == doctest::Approx(0.25));
    CHECK(m.remainder_bound == 0.0);

    const MotResult flat = mean_occupancy_time(t, std::vector<double>(6, 1.0));
    CHECK_FALSE(flat.decayed);
    CHECK(std::isinf(flat.remainder_bound));
    CHECK_THROWS_AS(mean_occupancy_time(std::vector<double>{0.1, 0.2}, std::vector<double>{1, 0}), ConfigError);

    EnsembleResult e;
    e.realizations = 3;
    e.death_times = {0.1, 0.2, 0.3};
    CHECK(empirical_occupancy_time(e).value == doctest::Approx(0.2));
    CHECK(empirical_occupancy_time(e).decayed);
    e.realizations = 4;
    e.censored = 1;
    CHECK_FALSE(empirical_occupancy_time(e).decayed);
}

TEST_CASE("audit series")
{
    const AuditSeries a = energy_and_mass_series({4.0, 3.0, 3.5, 1.0}, {1.0, 1.0, 1.0 + 1e-12, 1.0});
    CHECK(a.max_energy_increase == doctest::Approx(0.5));
    CHECK(a.max_relative_energy_increase == doctest::Approx(0.5 / 3.0));
    CHECK(a.max_mass_drift == doctest::Approx(1e-12).epsilon(1e-3));
}

TEST_CASE("parity filter and L1")
{
    const Lattice lat = line(6, 0.5);
    const std::vector<double> striped{2, 0, 2, 0, 2, 0};
    const auto f = lattice_parity_filter(striped, lat);
    for (double v : f) CHECK(v == doctest::Approx(1.0));
    CHECK(integrate_density(f, lat) == doctest::Approx(integrate_density(striped, lat)));
    CHECK(l1_distance(striped, f, lat) == doctest::Approx(3.0));
    CHECK(l1_distance(f, f, lat) == 0.0);
}

TEST_CASE("compare_series: self, symmetry and mismatches")
{
    const ExperimentConfig cfg = test::make(test::small_doc("rational(center=0.2,k=10)"));
    const ChemicalField field = build_field("rational(center=0.2,k=10)");
    const PdeResult pde = run_pde(cfg, field);
    const EnsembleResult abm = run_ensemble(cfg, field);
    const DensitySeries sp = series_from(pde), sa = series_from(abm);
    CHECK(sa.lattice_walk);
    CHECK_FALSE(sp.lattice_walk);

    const ComparisonReport self = compare_series(sp, sp);
    CHECK(self.survival_sup_gap == 0.0);
    CHECK(self.max_l1() == 0.0);

    const ComparisonReport ab = compare_series(sa, sp), ba = compare_series(sp, sa);
    CHECK(ab.survival_sup_gap == ba.survival_sup_gap);
    CHECK(ab.l1 == ba.l1);
    CHECK(ab.survival_sup_gap < 0.05);

    const ComparisonReport r = compare_results(abm, pde);
    CHECK(r.max_mass_drift);
    CHECK(r.spectral_max);
    CHECK(to_json(r).contains("survival_sup_gap"));

    DensitySeries shifted = sp;
    shifted.times.back() += 1e-3;
    CHECK_THROWS_AS(compare_series(sa, shifted), ConfigError);
    DensitySeries other = sp;
    other.lattice.cells_per_axis += 1;
    CHECK_THROWS_AS(compare_series(sa, other), ConfigError);

    const SummarySeries s = summarize(sp);
    CHECK(s.times == sp.times);
    CHECK(s.moments.front()->mean[0] == doctest::Approx(0.2));
}

TEST_CASE("regime classification")
{
    CHECK(classify(2e5, 2e5, {}) == Regime::AbsorptionDominant);
    CHECK(classify(2e5, 1.0, {}) == Regime::Balanced);
    CHECK(classify(1e-4, 1e-3, {}) == Regime::DiffusionDominant);
    CHECK(classify(0.0, 0.0, {}) == Regime::DiffusionDominant);
    CHECK(to_string(Regime::Balanced) == "balanced");

    // Absorption-dominant exemplar: beta = dx alpha C with the midpoint rule,
    // alpha = 0.1, C(x0) = 1, dx = dt = 1e-4, xi_c = 1e-6.
    const auto abs_doc = nlohmann::json::parse(R"({
      "field": {"profile": "sine-bump", "beta_rule": "midpoint"},
      "grid": {"dx": 1e-4, "dt": 1e-4, "xi_c": 1e-6, "xi_bins": 1000, "region": [0, 1], "average_window": [0, 1]},
      "agent": {"alpha": 0.1, "x0": [0.5]},
      "run": {"t_end": 0.01, "output_every": 0.001}})");
    const ExperimentConfig ac = test::make(abs_doc);
    const RegimeReport ar = classify_regime(ac, build_field("sine-bump"));
    CHECK(ar.rho_x0 == doctest::Approx(2e5).epsilon(1e-9));
    CHECK(ar.classification == Regime::AbsorptionDominant);

    nlohmann::json zero = test::small_doc("constant(value=0)");
    CHECK(classify_regime(test::make(zero), build_field("constant(value=0)")).classification ==
          Regime::DiffusionDominant);

    // Diffusion exemplar: recomputed window mean over the ten cells in [0, 1).
    const auto diff_doc = nlohmann::json::parse(R"({
      "field": {"profile": "sine-bump", "beta_rule": "midpoint"},
      "grid": {"dx": 0.1, "dt": 0.01, "xi_c": 1, "xi_bins": 100, "cells": 10, "origin": [0], "region": [0, 1]},
      "agent": {"alpha": 0.1, "x0": [0.5]},
      "run": {"t_end": 1, "output_every": 1}})");
    const ExperimentConfig dc = test::make(diff_doc);
    const RegimeReport dr = classify_regime(dc, build_field("sine-bump"));
    CHECK(dr.rho_mean == doctest::Approx(0.016313751514675044).epsilon(1e-12));
    CHECK(dr.classification == Regime::Balanced);

    // Invariance: extending the simulation lattice does not move the window mean.
    nlohmann::json wide = diff_doc;
    wide["grid"]["cells"] = 30;
    wide["grid"]["origin"] = {-1.0};
    CHECK(classify_regime(test::make(wide), build_field("sine-bump")).rho_mean ==
          doctest::Approx(dr.rho_mean).epsilon(1e-12));
    // Scaling: rho is linear in alpha and inverse in xi_c.
    nlohmann::json scaled = diff_doc;
    scaled["agent"]["alpha"] = 0.3;
    scaled["grid"]["xi_c"] = 2;
    CHECK(classify_regime(test::make(scaled), build_field("sine-bump")).rho_mean ==
          doctest::Approx(1.5 * dr.rho_mean).epsilon(1e-12));
    CHECK(to_json(dr).contains("classification"));
}

TEST_CASE("limit solutions")
{
    const ExperimentConfig cfg = test::make(test::small_doc("constant(value=1)"));
    const BetaProfile beta = beta_profile(build_field("constant(value=1)"), cfg);
    const double t_star = cfg.xi_c / beta[0];
    CHECK(analytic_limit_survival(LimitKind::ConstantBeta, cfg, beta, 0.99 * t_star) == 1.0);
    CHECK(analytic_limit_survival(LimitKind::ConstantBeta, cfg, beta, 1.01 * t_star) == 0.0);
    CHECK(analytic_limit_survival(LimitKind::Diffusion, cfg, beta, 0.5, 0.9 * cfg.xi_c / 0.5) == 1.0);
    CHECK(analytic_limit_survival(LimitKind::Diffusion, cfg, beta, 0.5, 1.1 * cfg.xi_c / 0.5) == 0.0);

    // A unit-step survival integrates to t*.
    std::vector<double> t, s;
    for (int i = 0; i <= 200; ++i) {
        t.push_back(i * t_star / 100);
        s.push_back(analytic_limit_survival(LimitKind::ConstantBeta, cfg, beta, t.back()));
    }
    CHECK(mean_occupancy_time(t, s).value == doctest::Approx(t_star).epsilon(0.01));

    const auto p = analytic_limit_live_density(LimitKind::ConstantBeta, cfg, beta, 2e-4);
    CHECK(integrate_density(p, cfg.lattice) == doctest::Approx(1.0).epsilon(1e-12));

    const ExperimentConfig rc = test::make(test::small_doc("rational(center=0.2,k=10)"));
    const BetaProfile varying = beta_profile(build_field("rational(center=0.2,k=10)"), rc);
    CHECK_THROWS_AS(analytic_limit_live_density(LimitKind::ConstantBeta, rc, varying, 1e-4), ConfigError);

    LimitParameters lp;
    lp.beta = [](double) { return 2.0; };
    const auto phi = [](double, double xi) { return xi >= 0.0 && xi < 1.0 ? 1.0 : 0.0; };
    CHECK(analytic_limit_density(LimitKind::Absorption, lp, phi, 0.3, 1.5, 0.5) == 1.0);
    CHECK(analytic_limit_density(LimitKind::Absorption, lp, phi, 0.3, 0.5, 0.5) == 0.0);
}
