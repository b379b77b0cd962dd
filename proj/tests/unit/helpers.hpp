#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "absorb/config.hpp"

namespace test {

/// Small 1-D experiment on an explicit lattice: `cells` cells from 0 with
/// x0 at the middle cell, dx = 0.01, dt = 5e-5.
inline nlohmann::json small_doc(const std::string& profile = "constant(value=1)", std::int64_t cells = 41)
{
    const double dx = 0.01;
    return {
        {"field", {{"profile", profile}}},
        {"grid",
         {{"dimension", 1},
          {"dx", dx},
          {"dt", 5e-5},
          {"xi_c", 5e-6},
          {"xi_bins", 100},
          {"cells", cells},
          {"origin", {0.0}}}},
        {"agent", {{"alpha", 0.1}, {"x0", {dx * static_cast<double>(cells / 2)}}}},
        {"run", {{"t_end", 5e-4}, {"realizations", 2000}, {"seed", 7}, {"output_every", 5e-5}}},
    };
}

inline absorb::ExperimentConfig make(const nlohmann::json& doc)
{
    return absorb::validate_config(absorb::parse_config(doc));
}

inline double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace test
