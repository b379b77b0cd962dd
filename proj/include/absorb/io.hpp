#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "absorb/abm.hpp"
#include "absorb/analysis.hpp"
#include "absorb/lattice.hpp"

namespace absorb::io {

/// Shortest round-trip decimal form; identical inputs give identical text.
std::string format_double(double v);

/// cell_index,x_center[,y_center],p
void write_density_csv(const std::filesystem::path& path, const Lattice& lattice, std::span<const double> p);
/// cell_index,x_center[,y_center],count
void write_histogram_csv(const std::filesystem::path& path, const Lattice& lattice,
                         std::span<const std::int64_t> counts);
/// t,alive_count,alive_fraction
void write_survival_csv(const std::filesystem::path& path, const EnsembleResult& abm);
/// Long-format surface t,x[,y],p for plotting.
void write_surface_csv(const std::filesystem::path& path, const Lattice& lattice, std::span<const double> times,
                       const std::vector<std::vector<double>>& density);
/// t,P_abm,P_pde,mu_abm,mu_pde,sigma_abm,sigma_pde,l1_gap (+ y moments in 2-D).
/// Either series may be absent; missing values are written as empty fields.
void write_summary_csv(const std::filesystem::path& path, const std::vector<double>& times,
                       const SummarySeries* abm, const SummarySeries* pde, const std::vector<double>* l1,
                       int dimension);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace absorb::io
