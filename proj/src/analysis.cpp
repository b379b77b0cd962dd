#include "absorb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absorb/error.hpp"

namespace absorb {

double integrate_density(std::span<const double> p, const Lattice& lattice)
{
    double s = 0.0;
    for (double v : p) s += v;
    return s * lattice.cell_volume();
}

std::vector<double> survival_curve(const std::vector<std::vector<double>>& p_series, const Lattice& lattice)
{
    std::vector<double> out;
    out.reserve(p_series.size());
    for (const auto& p : p_series) out.push_back(integrate_density(p, lattice));
    return out;
}

std::optional<Moments> location_moments(std::span<const double> p, const Lattice& lattice, double eps_p)
{
    if (static_cast<std::int64_t>(p.size()) != lattice.size()) throw ConfigError("density does not match the lattice");
    const double P = integrate_density(p, lattice);
    if (!(P >= eps_p)) return std::nullopt;

    Moments mom;
    const double vol = lattice.cell_volume();
    const double cell_var = lattice.dx * lattice.dx / 12.0;
    for (int axis = 0; axis < lattice.dimension; ++axis) {
        const auto ax = static_cast<std::size_t>(axis);
        double mean = 0.0;
        for (std::size_t c = 0; c < p.size(); ++c) {
            const auto idx = lattice.unflat(static_cast<std::int64_t>(c));
            mean += p[c] * vol * lattice.center(axis, idx[ax]);
        }
        mean /= P;
        // Centered form of (1/P) sum p_i int_cell x^2 - mu^2; the cell's own
        // spread contributes dx^2/12.
        double var = 0.0;
        for (std::size_t c = 0; c < p.size(); ++c) {
            const auto idx = lattice.unflat(static_cast<std::int64_t>(c));
            const double d = lattice.center(axis, idx[ax]) - mean;
            var += p[c] * vol * d * d;
        }
        mom.mean[ax] = mean;
        mom.variance[ax] = var / P + cell_var;
    }
    return mom;
}

MotResult mean_occupancy_time(std::span<const double> times, std::span<const double> survival, double cutoff)
{
    if (times.size() != survival.size() || times.empty()) throw ConfigError("survival series is empty or ragged");
    if (times.front() != 0.0) throw ConfigError("survival series must start at t = 0");
    MotResult r;
    std::size_t cut = times.size();
    for (std::size_t i = 0; i < times.size(); ++i)
        if (survival[i] < cutoff) {
            cut = i;
            break;
        }
    const std::size_t last = cut == times.size() ? times.size() - 1 : cut;
    double m = 0.0;
    for (std::size_t i = 1; i <= last; ++i) m += 0.5 * (times[i] - times[i - 1]) * (survival[i] + survival[i - 1]);
    r.value = m;
    r.t_cut = times[last];
    r.decayed = cut != times.size();
    r.remainder_bound = r.decayed ? survival[cut] * (times.back() - r.t_cut) : std::numeric_limits<double>::infinity();
    return r;
}

MotResult empirical_occupancy_time(const EnsembleResult& abm)
{
    MotResult r;
    const double t_end = abm.output_times.empty() ? 0.0 : abm.output_times.back();
    double sum = 0.0, last = 0.0;
    for (double t : abm.death_times) {
        sum += t;
        last = std::max(last, t);
    }
    r.decayed = abm.censored == 0;
    if (r.decayed) {
        r.value = abm.death_times.empty() ? 0.0 : sum / static_cast<double>(abm.death_times.size());
        r.t_cut = last;
        r.remainder_bound = 0.0;
    } else {
        // Censored walkers count with the horizon, so the value is a lower bound.
        r.value = (sum + static_cast<double>(abm.censored) * t_end) / static_cast<double>(abm.realizations);
        r.t_cut = t_end;
        r.remainder_bound = std::numeric_limits<double>::infinity();
    }
    return r;
}

AuditSeries energy_and_mass_series(std::vector<double> energy, std::vector<double> mass)
{
    AuditSeries a;
    a.energy = std::move(energy);
    a.mass = std::move(mass);
    for (std::size_t m = 1; m < a.energy.size(); ++m) {
        const double d = a.energy[m] - a.energy[m - 1];
        if (m == 1 || d > a.max_energy_increase) a.max_energy_increase = d;
        if (a.energy[m - 1] > 0.0) {
            const double rel = d / a.energy[m - 1];
            if (m == 1 || rel > a.max_relative_energy_increase) a.max_relative_energy_increase = rel;
        }
    }
    if (!a.mass.empty() && a.mass.front() != 0.0)
        for (double v : a.mass) a.max_mass_drift = std::max(a.max_mass_drift, std::fabs(v - a.mass.front()) / a.mass.front());
    return a;
}

AuditSeries energy_and_mass_series(std::span<const AbsorptionGrid> snapshots)
{
    std::vector<double> e, m;
    for (const auto& g : snapshots) {
        e.push_back(g.energy());
        m.push_back(g.total_mass());
    }
    return energy_and_mass_series(std::move(e), std::move(m));
}

std::vector<double> lattice_parity_filter(std::span<const double> p, const Lattice& lattice)
{
    std::vector<double> out(p.begin(), p.end());
    std::vector<double> tmp(out.size());
    for (int axis = 0; axis < lattice.dimension; ++axis) {
        for (std::int64_t c = 0; c < lattice.size(); ++c) {
            auto idx = lattice.unflat(c);
            auto lo = idx, hi = idx;
            lo[static_cast<std::size_t>(axis)] = lattice.wrap(idx[static_cast<std::size_t>(axis)] - 1);
            hi[static_cast<std::size_t>(axis)] = lattice.wrap(idx[static_cast<std::size_t>(axis)] + 1);
            tmp[static_cast<std::size_t>(c)] = 0.25 * out[static_cast<std::size_t>(lattice.flat(lo[0], lo[1]))] +
                                               0.5 * out[static_cast<std::size_t>(c)] +
                                               0.25 * out[static_cast<std::size_t>(lattice.flat(hi[0], hi[1]))];
        }
        out.swap(tmp);
    }
    return out;
}

double l1_distance(std::span<const double> a, std::span<const double> b, const Lattice& lattice)
{
    if (a.size() != b.size()) throw ConfigError("l1_distance: densities differ in size");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return s * lattice.cell_volume();
}

DensitySeries series_from(const EnsembleResult& abm)
{
    DensitySeries s;
    s.engine = "abm";
    s.lattice = abm.lattice;
    s.times = abm.output_times;
    for (std::size_t i = 0; i < abm.histograms.size(); ++i) {
        s.density.push_back(abm.density(i));
        s.survival.push_back(abm.survival_fraction(i));
    }
    s.lattice_walk = true;
    s.mot = empirical_occupancy_time(abm);
    return s;
}

DensitySeries series_from(const PdeResult& pde)
{
    DensitySeries s;
    s.engine = "pde";
    s.lattice = pde.lattice;
    s.times = pde.output_times;
    s.density = pde.live_density;
    s.survival = pde.survival;
    if (!s.times.empty() && s.times.front() == 0.0) s.mot = mean_occupancy_time(s.times, s.survival);
    return s;
}

SummarySeries summarize(const DensitySeries& s, double eps_p)
{
    SummarySeries out;
    out.times = s.times;
    out.survival = s.survival;
    for (const auto& p : s.density) out.moments.push_back(location_moments(p, s.lattice, eps_p));
    return out;
}

double ComparisonReport::max_l1() const { return l1.empty() ? 0.0 : *std::max_element(l1.begin(), l1.end()); }

ComparisonReport compare_series(const DensitySeries& a, const DensitySeries& b)
{
    if (!(a.lattice == b.lattice)) throw ConfigError("cannot compare " + a.engine + " and " + b.engine + ": lattices differ");
    if (a.times.size() != b.times.size()) throw ConfigError("cannot compare: output times differ");
    for (std::size_t i = 0; i < a.times.size(); ++i)
        if (std::fabs(a.times[i] - b.times[i]) > 1e-12 * std::max(1.0, std::fabs(a.times[i])))
            throw ConfigError("cannot compare: output times differ");

    ComparisonReport r;
    r.first = a.engine;
    r.second = b.engine;
    r.times = a.times;
    const bool filter = a.lattice_walk || b.lattice_walk;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        r.survival_sup_gap = std::max(r.survival_sup_gap, std::fabs(a.survival[i] - b.survival[i]));
        r.l1_raw.push_back(l1_distance(a.density[i], b.density[i], a.lattice));
        if (filter) {
            // Both sides get the same smoothing so the metric stays symmetric.
            const auto fa = lattice_parity_filter(a.density[i], a.lattice);
            const auto fb = lattice_parity_filter(b.density[i], b.lattice);
            r.l1.push_back(l1_distance(fa, fb, a.lattice));
        } else {
            r.l1.push_back(r.l1_raw.back());
        }
    }
    r.mot_first = a.mot;
    r.mot_second = b.mot;
    return r;
}

ComparisonReport compare_results(const EnsembleResult& abm, const PdeResult& pde)
{
    ComparisonReport r = compare_series(series_from(abm), series_from(pde));
    r.max_energy_increase = pde.audit.max_energy_increase;
    r.max_mass_drift = pde.audit.max_mass_drift;
    r.spectral_max = static_cast<double>(pde.audit.spectral_max);
    return r;
}

namespace {

nlohmann::json finite_or_null(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

nlohmann::json to_json(const MotResult& mot)
{
    return {{"value", mot.value},
            {"t_cut", mot.t_cut},
            {"remainder_bound", finite_or_null(mot.remainder_bound)},
            {"decayed", mot.decayed}};
}

nlohmann::json to_json(const ComparisonReport& r)
{
    nlohmann::json j;
    j["first"] = r.first;
    j["second"] = r.second;
    j["times"] = r.times;
    j["survival_sup_gap"] = r.survival_sup_gap;
    j["l1"] = r.l1;
    j["l1_raw"] = r.l1_raw;
    j["max_l1"] = r.max_l1();
    j["mot_first"] = r.mot_first ? to_json(*r.mot_first) : nlohmann::json(nullptr);
    j["mot_second"] = r.mot_second ? to_json(*r.mot_second) : nlohmann::json(nullptr);
    if (r.max_energy_increase) j["max_energy_increase"] = *r.max_energy_increase;
    if (r.max_mass_drift) j["max_mass_drift"] = *r.max_mass_drift;
    if (r.spectral_max) j["spectral_max"] = *r.spectral_max;
    return j;
}

}  // namespace absorb
