#pragma once

#include <array>
#include <cstdint>

namespace absorb {

/// Periodic square lattice of cells of width dx. Cell centers along each axis are
/// origin[axis] + i * dx for i in [0, cells_per_axis). Flat indices are row-major
/// with the x axis outermost.
struct Lattice {
    int dimension = 1;
    std::int64_t cells_per_axis = 0;
    double dx = 0.0;
    std::array<double, 2> origin{0.0, 0.0};

    std::int64_t size() const
    {
        return dimension == 1 ? cells_per_axis : cells_per_axis * cells_per_axis;
    }

    double cell_volume() const { return dimension == 1 ? dx : dx * dx; }

    double center(int axis, std::int64_t i) const { return origin[static_cast<std::size_t>(axis)] + static_cast<double>(i) * dx; }

    std::int64_t wrap(std::int64_t i) const
    {
        const std::int64_t r = i % cells_per_axis;
        return r < 0 ? r + cells_per_axis : r;
    }

    std::int64_t flat(std::int64_t ix, std::int64_t iy = 0) const
    {
        return dimension == 1 ? ix : ix * cells_per_axis + iy;
    }

    std::array<std::int64_t, 2> unflat(std::int64_t c) const
    {
        if (dimension == 1) return {c, 0};
        return {c / cells_per_axis, c % cells_per_axis};
    }

    bool operator==(const Lattice&) const = default;
};

}  // namespace absorb
