#include "absorb/master.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "absorb/error.hpp"

namespace absorb {

namespace {

struct Move {
    std::int64_t dx, dy;
    double p;
};

std::vector<Move> moves_of(const MovementRule& r)
{
    std::vector<Move> out;
    const std::array<Move, 5> all{{{-1, 0, r.left}, {1, 0, r.right}, {0, -1, r.down}, {0, 1, r.up}, {0, 0, r.stay()}}};
    for (const Move& m : all)
        if (m.p > 0.0) out.push_back(m);
    return out;
}

std::int64_t target_cell(const Lattice& lat, std::int64_t c, const Move& m)
{
    const auto [ix, iy] = lat.unflat(c);
    return lat.flat(lat.wrap(ix + m.dx), lat.dimension == 2 ? lat.wrap(iy + m.dy) : 0);
}

}  // namespace

std::vector<double> MasterState::live_marginal() const
{
    std::vector<double> p(static_cast<std::size_t>(lattice.size()), 0.0);
    if (!exact.empty()) {
        for (std::size_t c = 0; c < exact.size(); ++c)
            for (const auto& [xi, m] : exact[c]) p[c] += m;
        return p;
    }
    for (std::size_t c = 0; c < p.size(); ++c)
        for (std::int64_t k = 0; k < bins; ++k) p[c] += mass[c * static_cast<std::size_t>(bins) + static_cast<std::size_t>(k)];
    return p;
}

double MasterState::live_mass() const
{
    double s = 0.0;
    for (double v : live_marginal()) s += v;
    return s;
}

namespace {

void bin_exact(MasterState& st)
{
    const auto K = static_cast<std::size_t>(st.bins);
    st.mass.assign(st.exact.size() * K, 0.0);
    for (std::size_t c = 0; c < st.exact.size(); ++c)
        for (const auto& [xi, mass] : st.exact[c]) {
            const auto k = std::min<std::int64_t>(st.bins - 1, static_cast<std::int64_t>(std::floor(xi / st.d_xi)));
            st.mass[c * K + static_cast<std::size_t>(k)] += mass;
        }
}

}  // namespace

MasterState initial_master_state(const ExperimentConfig& cfg, MasterMode mode)
{
    MasterState st;
    st.lattice = cfg.lattice;
    st.bins = cfg.live_bins;
    st.d_xi = cfg.d_xi;
    st.mode = mode;
    const auto cells = static_cast<std::size_t>(cfg.lattice.size());
    const auto x0 = static_cast<std::size_t>(cfg.x0_flat());
    if (mode == MasterMode::Exact) {
        st.exact.assign(cells, {});
        st.exact[x0].push_back({0.0, 1.0});
        bin_exact(st);
    } else {
        st.mass.assign(cells * static_cast<std::size_t>(st.bins), 0.0);
        st.mass[x0 * static_cast<std::size_t>(st.bins)] = 1.0;
    }
    return st;
}

void convert_to_binned(MasterState& st)
{
    if (st.mode == MasterMode::Binned) return;
    bin_exact(st);
    st.exact.clear();
    st.mode = MasterMode::Binned;
}

void advance_master_equation(MasterState& st, const ExperimentConfig& cfg, const BetaProfile& beta,
                             std::int64_t steps, const MasterOptions& opts)
{
    if (!(beta.lattice == cfg.lattice) || !(st.lattice == cfg.lattice))
        throw ConfigError("master state, beta profile and config lattices differ");
    if (steps < 0) throw ConfigError("master equation needs a non-negative step count");
    if (st.mode != opts.mode) throw ConfigError("master state and options disagree on the mode");

    const Lattice& lat = cfg.lattice;
    const auto cells = static_cast<std::size_t>(lat.size());
    const std::vector<double> beta_hat = beta.per_step(cfg.dt);
    const std::vector<Move> moves = moves_of(cfg.movement);

    if (st.mode == MasterMode::Exact) {
        using Entry = std::pair<double, double>;
        std::vector<std::vector<Entry>> next(cells);
        for (std::int64_t m = 0; m < steps; ++m) {
            for (auto& v : next) v.clear();
            double died = 0.0;
            for (std::size_t c = 0; c < cells; ++c) {
                for (const auto& [xi, mass] : st.exact[c]) {
                    for (const Move& mv : moves) {
                        const auto t = static_cast<std::size_t>(target_cell(lat, static_cast<std::int64_t>(c), mv));
                        // Same accumulation order as a walker: previous total plus the new cell's increment.
                        const double xi_new = xi + beta_hat[t];
                        const double pm = mass * mv.p;
                        if (xi_new >= cfg.xi_c)
                            died += pm;
                        else
                            next[t].push_back({xi_new, pm});
                    }
                }
            }
            std::size_t total = 0;
            for (auto& v : next) {
                std::sort(v.begin(), v.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
                std::size_t w = 0;
                for (std::size_t r = 0; r < v.size(); ++r) {
                    if (w > 0 && v[w - 1].first == v[r].first)
                        v[w - 1].second += v[r].second;
                    else
                        v[w++] = v[r];
                }
                v.resize(w);
                total += w;
            }
            // The state is left at the last step that fit, so callers can switch modes.
            if (static_cast<std::int64_t>(total) > opts.max_entries)
                throw NumericalError("exact master equation exceeded " + std::to_string(opts.max_entries) +
                                     " entries; use the binned mode");
            st.exact.swap(next);
            st.dead += died;
            ++st.step;
        }
        bin_exact(st);
        return;
    }

    const auto K = static_cast<std::size_t>(st.bins);
    std::vector<double> next(cells * K);
    for (std::int64_t m = 0; m < steps; ++m) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t c = 0; c < cells; ++c) {
            for (std::size_t k = 0; k < K; ++k) {
                const double mass = st.mass[c * K + k];
                if (mass == 0.0) continue;
                for (const Move& mv : moves) {
                    const auto t = static_cast<std::size_t>(target_cell(lat, static_cast<std::int64_t>(c), mv));
                    const double s = beta_hat[t] / st.d_xi;
                    const double whole = std::floor(s);
                    const double frac = opts.shift_mode == ShiftMode::Fractional ? s - whole : 0.0;
                    const double pm = mass * mv.p;
                    const double upper = frac * pm;
                    const double lower = pm - upper;
                    const double k_lo = static_cast<double>(k) + whole;
                    if (k_lo >= static_cast<double>(K))
                        st.dead += lower;
                    else
                        next[t * K + static_cast<std::size_t>(k_lo)] += lower;
                    if (upper != 0.0) {
                        if (k_lo + 1.0 >= static_cast<double>(K))
                            st.dead += upper;
                        else
                            next[t * K + static_cast<std::size_t>(k_lo) + 1] += upper;
                    }
                }
            }
        }
        st.mass.swap(next);
        ++st.step;
    }
}

MasterState evolve_master_equation(const ExperimentConfig& cfg, const BetaProfile& beta, std::int64_t steps,
                                   const MasterOptions& opts)
{
    MasterState st = initial_master_state(cfg, opts.mode);
    advance_master_equation(st, cfg, beta, steps, opts);
    return st;
}

}  // namespace absorb
