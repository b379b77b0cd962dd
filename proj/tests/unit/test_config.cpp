#include <doctest.h>

#include <cmath>

#include "absorb/beta.hpp"
#include "absorb/config.hpp"
#include "absorb/error.hpp"
#include "absorb/field.hpp"
#include "absorb/quadrature.hpp"
#include "helpers.hpp"

using namespace absorb;
using nlohmann::json;

TEST_CASE("derived constants")
{
    const ExperimentConfig cfg = test::make(test::small_doc());
    CHECK(cfg.diffusivity[0] == doctest::Approx(1.0));  // dx^2 / (2 dt)
    CHECK(cfg.drift[0] == 0.0);
    CHECK(cfg.live_bins == 100);
    CHECK(cfg.d_xi == doctest::Approx(5e-8));
    CHECK(cfg.end_step == 10);
    CHECK(cfg.output_steps.size() == 11);
    CHECK(cfg.x0_index[0] == 20);
    CHECK(cfg.tau == cfg.dt);
    CHECK(cfg.total_bins == cfg.live_bins);

    json biased = test::small_doc();
    biased["agent"]["movement"] = {{"left", 0.4}, {"right", 0.6}};
    const ExperimentConfig b = test::make(biased);
    CHECK(b.drift[0] == doctest::Approx(-0.2 * 0.01 / 5e-5));
    CHECK(b.diffusivity[0] == doctest::Approx(1.0));

    json two = test::small_doc("sine2d");
    two["grid"]["dimension"] = 2;
    two["grid"]["origin"] = {0.0, 0.0};
    two["agent"]["x0"] = {0.2, 0.2};
    const ExperimentConfig c2 = test::make(two);
    CHECK(c2.movement.left == 0.25);
    CHECK(c2.movement.up == 0.25);
    CHECK(c2.diffusivity[0] == doctest::Approx(0.5));
    CHECK(c2.lattice.size() == 41 * 41);
}

TEST_CASE("auto lattice covers the region and centers x0")
{
    const json doc = json::parse(R"json({
      "field": {"profile": "rational(center=0.5,k=10)"},
      "grid": {"dx": 0.01, "dt": 5e-05, "xi_c": 5e-06, "xi_bins": 2000, "region": [0.0, 1.0]},
      "agent": {"alpha": 0.1, "x0": [0.5]},
      "run": {"t_end": 0.03, "output_every": 0.00025}})json");
    const ExperimentConfig cfg = test::make(doc);
    CHECK_FALSE(cfg.explicit_lattice);
    CHECK(cfg.lattice.center(0, cfg.x0_index[0]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cfg.lattice.origin[0] < 0.0 - 6 * std::sqrt(2 * 1.0 * 0.03) + 0.01);
    CHECK(cfg.lattice.center(0, cfg.lattice.cells_per_axis - 1) > 1.0 + 6 * std::sqrt(2 * 1.0 * 0.03) - 0.01);
    CHECK(cfg.average_window == std::array<double, 2>{0.0, 1.0});
}

TEST_CASE("validation errors")
{
    auto expect_error = [](auto mutate) {
        json doc = test::small_doc();
        mutate(doc);
        CHECK_THROWS_AS(test::make(doc), ConfigError);
    };
    expect_error([](json& d) { d["grid"]["dx"] = 0.0; });
    expect_error([](json& d) { d["grid"]["dimension"] = 3; });
    expect_error([](json& d) { d["grid"]["bogus"] = 1; });
    expect_error([](json& d) { d.erase("agent"); });
    expect_error([](json& d) { d["agent"]["movement"] = {{"left", 0.7}, {"right", 0.6}}; });
    expect_error([](json& d) { d["agent"]["movement"] = {{"left", -0.1}, {"right", 0.6}}; });
    expect_error([](json& d) { d["agent"]["movement"] = {{"left", 0.5}, {"right", 0.5}, {"up", 0.1}}; });
    expect_error([](json& d) { d["agent"]["x0"] = {0.205}; });
    expect_error([](json& d) { d["agent"]["x0"] = {5.0}; });
    expect_error([](json& d) { d["agent"]["alpha"] = -1.0; });
    expect_error([](json& d) { d["run"]["t_end"] = 1.2e-4; });
    expect_error([](json& d) { d["run"]["output_times"] = {3e-5}; });
    expect_error([](json& d) { d["run"]["output_times"] = {1.0}; });
    expect_error([](json& d) { d["run"]["realizations"] = 0; });
    expect_error([](json& d) { d["grid"]["d_xi"] = 3e-7; });
    expect_error([](json& d) { d["grid"]["origin"] = {0.0, 0.0}; });
    expect_error([](json& d) { d["field"]["beta_rule"] = "average"; });
    expect_error([](json& d) { d["field"]["time_dependent"] = true; });
    expect_error([](json& d) { d["pde"] = {{"truncation_tol", 1e-3}}; });
    expect_error([](json& d) { d["pde"] = {{"tau_refine", 0}}; });
    expect_error([](json& d) { d["pde"] = {{"xi_bins_total", 10}}; });
    expect_error([](json& d) { d["pde"] = {{"shift_mode", "round"}}; });
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("config round trip is idempotent")
{
    const RawConfig raw = parse_config(test::small_doc());
    const json once = to_json(raw);
    const json twice = to_json(parse_config(once));
    CHECK(once == twice);
    const ExperimentConfig a = validate_config(raw);
    const ExperimentConfig b = validate_config(parse_config(once));
    CHECK(a.lattice == b.lattice);
    CHECK(a.output_steps == b.output_steps);
}

TEST_CASE("beta profiles")
{
    const ExperimentConfig cfg = test::make(test::small_doc("constant(value=1e-2)"));
    const BetaProfile zero = beta_profile(build_field("constant(value=0)"), cfg);
    for (double v : zero.values) CHECK(v == 0.0);

    const BetaProfile c = beta_profile(build_field("constant(value=1e-2)"), cfg);
    CHECK(c.is_constant());
    for (double v : c.values) CHECK(v == doctest::Approx(0.1 * 1e-2 * 0.01).epsilon(1e-13));
    CHECK(c.per_step(cfg.dt)[0] == doctest::Approx(1e-5 * 5e-5));

    json doc = test::small_doc("rational(center=0.5,k=10)", 101);
    const ExperimentConfig rc = test::make(doc);
    const ChemicalField f = build_field("rational(center=0.5,k=10)");
    const BetaProfile closed = beta_profile(f, rc, CellIntegralSource::ClosedForm);
    const BetaProfile quad = beta_profile(f, rc, CellIntegralSource::Quadrature);
    const double simpson = [&] {
        // Composite Simpson with 10^4 panels over the cell centered at 0.5.
        const int n = 10000;
        const double a = 0.495, h = 0.01 / n;
        double s = f(a) + f(a + 0.01);
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
        return s * h / 3.0;
    }();
    CHECK(closed[50] == doctest::Approx(0.1 * simpson).epsilon(1e-12));
    for (std::size_t i = 0; i < closed.values.size(); ++i)
        CHECK(closed.values[i] == doctest::Approx(quad.values[i]).epsilon(1e-10));

    doc["field"]["beta_rule"] = "midpoint";
    CHECK(beta_profile(f, test::make(doc))[50] == doctest::Approx(0.1 * 0.01 * 1.0));
    doc["field"]["beta_rule"] = "rate";
    CHECK(beta_profile(f, test::make(doc))[50] == doctest::Approx(0.1));

    CHECK_THROWS_AS(beta_profile(build_field("expr(log(x))"), rc), NumericalError);
}
