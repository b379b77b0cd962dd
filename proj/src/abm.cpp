#include "absorb/abm.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "absorb/error.hpp"
#include "absorb/parallel.hpp"

namespace absorb {

WalkContext WalkContext::make(const BetaProfile& beta, const MovementRule& rule, double dt, double xi_c)
{
    return WalkContext{beta.lattice, beta.per_step(dt), rule, xi_c};
}

AgentState step_agent(AgentState agent, const WalkContext& ctx, double u)
{
    assert(agent.alive && "dead agents must not be stepped");
    const MovementRule& r = ctx.rule;
    const Lattice& lat = ctx.lattice;
    auto& pos = agent.position;
    double edge = r.left;
    if (u < edge) {
        pos[0] = lat.wrap(pos[0] - 1);
    } else if (u < (edge += r.right)) {
        pos[0] = lat.wrap(pos[0] + 1);
    } else if (u < (edge += r.down)) {
        pos[1] = lat.wrap(pos[1] - 1);
    } else if (u < (edge += r.up)) {
        pos[1] = lat.wrap(pos[1] + 1);
    }
    agent.absorbed += ctx.beta_hat[static_cast<std::size_t>(lat.flat(pos[0], pos[1]))];
    if (agent.absorbed >= ctx.xi_c) agent.alive = false;
    return agent;
}

AgentState step_agent(AgentState agent, const WalkContext& ctx, Philox4x32& rng)
{
    return step_agent(agent, ctx, rng.next_uniform());
}

std::vector<double> EnsembleResult::density(std::size_t i) const
{
    const double scale = 1.0 / (static_cast<double>(realizations) * lattice.cell_volume());
    std::vector<double> p(histograms[i].size());
    for (std::size_t c = 0; c < p.size(); ++c) p[c] = static_cast<double>(histograms[i][c]) * scale;
    return p;
}

EnsembleResult run_ensemble(const ExperimentConfig& cfg, const ChemicalField& field, unsigned workers)
{
    return run_ensemble(cfg, beta_profile(field, cfg), workers);
}

EnsembleResult run_ensemble(const ExperimentConfig& cfg, const BetaProfile& beta, unsigned workers)
{
    if (!(beta.lattice == cfg.lattice)) throw ConfigError("beta profile lattice does not match the config");
    for (double b : beta.values)
        if (b < 0.0 || !std::isfinite(b)) throw ConfigError("absorption rate must be finite and non-negative");

    const WalkContext ctx = WalkContext::make(beta, cfg.movement, cfg.dt, cfg.xi_c);
    const std::size_t n_out = cfg.output_steps.size();
    const auto cells = static_cast<std::size_t>(cfg.lattice.size());
    const auto R = static_cast<std::size_t>(cfg.realizations);
    if (workers == 0) workers = worker_count();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, R));

    struct Partial {
        std::vector<std::vector<std::int64_t>> hist;
        std::vector<std::int64_t> alive;
        std::int64_t censored = 0;
    };
    std::vector<Partial> partial(workers);
    std::vector<double> death(R, std::numeric_limits<double>::quiet_NaN());

    parallel_for(
        R,
        [&](std::size_t begin, std::size_t end, unsigned w) {
            Partial& part = partial[w];
            part.hist.assign(n_out, std::vector<std::int64_t>(cells, 0));
            part.alive.assign(n_out, 0);
            for (std::size_t j = begin; j < end; ++j) {
                Philox4x32 rng(cfg.seed, j);
                AgentState agent;
                agent.position = cfg.x0_index;
                std::size_t o = 0;
                std::int64_t step = 0;
                while (true) {
                    while (o < n_out && cfg.output_steps[o] == step) {
                        ++part.hist[o][static_cast<std::size_t>(cfg.lattice.flat(agent.position[0], agent.position[1]))];
                        ++part.alive[o];
                        ++o;
                    }
                    if (step == cfg.end_step) {
                        ++part.censored;
                        break;
                    }
                    agent = step_agent(agent, ctx, rng);
                    ++step;
                    if (!agent.alive) {
                        death[j] = cfg.time_of_step(step);
                        break;
                    }
                }
            }
        },
        workers);

    EnsembleResult res;
    res.lattice = cfg.lattice;
    res.realizations = cfg.realizations;
    res.dt = cfg.dt;
    res.output_steps = cfg.output_steps;
    for (std::int64_t s : cfg.output_steps) res.output_times.push_back(cfg.time_of_step(s));
    res.histograms.assign(n_out, std::vector<std::int64_t>(cells, 0));
    res.survival.assign(n_out, 0);
    for (const Partial& part : partial) {
        if (part.hist.empty()) continue;
        for (std::size_t o = 0; o < n_out; ++o) {
            for (std::size_t c = 0; c < cells; ++c) res.histograms[o][c] += part.hist[o][c];
            res.survival[o] += part.alive[o];
        }
        res.censored += part.censored;
    }
    res.death_times.reserve(R - static_cast<std::size_t>(res.censored));
    for (double t : death)
        if (!std::isnan(t)) res.death_times.push_back(t);
    return res;
}

}  // namespace absorb
