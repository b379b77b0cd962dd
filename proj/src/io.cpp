#include "absorb/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "absorb/error.hpp"

namespace absorb::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_coords(std::ostream& out, const Lattice& lattice, std::int64_t c)
{
    const auto idx = lattice.unflat(c);
    out << format_double(lattice.center(0, idx[0]));
    if (lattice.dimension == 2) out << ',' << format_double(lattice.center(1, idx[1]));
}

std::string coord_header(const Lattice& lattice, const char* x, const char* y)
{
    return lattice.dimension == 2 ? std::string(x) + "," + y : std::string(x);
}

}  // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_density_csv(const std::filesystem::path& path, const Lattice& lattice, std::span<const double> p)
{
    auto out = open_out(path);
    out << "cell_index," << coord_header(lattice, "x_center", "y_center") << ",p\n";
    for (std::size_t c = 0; c < p.size(); ++c) {
        out << c << ',';
        write_coords(out, lattice, static_cast<std::int64_t>(c));
        out << ',' << format_double(p[c]) << '\n';
    }
    finish(out, path);
}

void write_histogram_csv(const std::filesystem::path& path, const Lattice& lattice,
                         std::span<const std::int64_t> counts)
{
    auto out = open_out(path);
    out << "cell_index," << coord_header(lattice, "x_center", "y_center") << ",count\n";
    for (std::size_t c = 0; c < counts.size(); ++c) {
        out << c << ',';
        write_coords(out, lattice, static_cast<std::int64_t>(c));
        out << ',' << counts[c] << '\n';
    }
    finish(out, path);
}

void write_survival_csv(const std::filesystem::path& path, const EnsembleResult& abm)
{
    auto out = open_out(path);
    out << "t,alive_count,alive_fraction\n";
    for (std::size_t i = 0; i < abm.output_times.size(); ++i)
        out << format_double(abm.output_times[i]) << ',' << abm.survival[i] << ','
            << format_double(abm.survival_fraction(i)) << '\n';
    finish(out, path);
}

void write_surface_csv(const std::filesystem::path& path, const Lattice& lattice, std::span<const double> times,
                       const std::vector<std::vector<double>>& density)
{
    auto out = open_out(path);
    out << "t," << coord_header(lattice, "x", "y") << ",p\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        const std::string t = format_double(times[i]);
        for (std::size_t c = 0; c < density[i].size(); ++c) {
            out << t << ',';
            write_coords(out, lattice, static_cast<std::int64_t>(c));
            out << ',' << format_double(density[i][c]) << '\n';
        }
    }
    finish(out, path);
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<double>& times, const SummarySeries* abm,
                       const SummarySeries* pde, const std::vector<double>* l1, int dimension)
{
    auto out = open_out(path);
    out << "t,P_abm,P_pde,mu_abm,mu_pde,sigma_abm,sigma_pde,l1_gap";
    if (dimension == 2) out << ",mu_y_abm,mu_y_pde,sigma_y_abm,sigma_y_pde";
    out << '\n';

    const auto survival = [](const SummarySeries* s, std::size_t i) {
        return s ? format_double(s->survival[i]) : std::string();
    };
    const auto mean = [](const SummarySeries* s, std::size_t i, int axis) {
        if (!s || !s->moments[i]) return std::string();
        return format_double(s->moments[i]->mean[static_cast<std::size_t>(axis)]);
    };
    const auto sigma = [](const SummarySeries* s, std::size_t i, int axis) {
        if (!s || !s->moments[i]) return std::string();
        return format_double(std::sqrt(s->moments[i]->variance[static_cast<std::size_t>(axis)]));
    };
    for (std::size_t i = 0; i < times.size(); ++i) {
        out << format_double(times[i]) << ',' << survival(abm, i) << ',' << survival(pde, i) << ',' << mean(abm, i, 0)
            << ',' << mean(pde, i, 0) << ',' << sigma(abm, i, 0) << ',' << sigma(pde, i, 0) << ','
            << (l1 ? format_double((*l1)[i]) : std::string());
        if (dimension == 2)
            out << ',' << mean(abm, i, 1) << ',' << mean(pde, i, 1) << ',' << sigma(abm, i, 1) << ','
                << sigma(pde, i, 1);
        out << '\n';
    }
    finish(out, path);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc)
{
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
    finish(out, path);
}

std::string fnv1a_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace absorb::io
