#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>

namespace absorb {

/// Static chemical concentration C(x) (amount per unit length^n).
struct ChemicalField {
    int dimension = 1;
    std::string description;
    std::function<double(double, double)> concentration;
    /// Exact integral of C over [x_lo, x_hi] (x [y_lo, y_hi] in 2-D). Empty when
    /// no elementary antiderivative is available.
    std::function<double(double, double, double, double)> cell_integral;

    double operator()(double x, double y = 0.0) const { return concentration(x, y); }
    bool has_closed_form() const { return static_cast<bool>(cell_integral); }
};

/// Builds a field from a profile description such as
///   "rational(center=0.5,k=10)"   C = 1/(1+k(x-center)^2)
///   "gaussian-decay"              C = exp(-((x-center)/width)^2), center=0 width=1
///   "sine2d"                      C = 0.5(sin(k pi x) sin(k pi y) + 1), k=4
///   "sine-bump"                   C = 0.5(1 + sin(k pi x)), k=1
///   "constant(value=1,dim=1)"
///   "expr(<expression in x>)", "expr2d(<expression in x,y>)"
/// Throws ConfigError for unknown profiles or malformed parameters.
ChemicalField build_field(std::string_view spec);

/// Samples C on a uniform grid over the box and throws ConfigError on any
/// negative or non-finite value.
void check_field_nonnegative(const ChemicalField& field, std::array<double, 2> lo, std::array<double, 2> hi,
                             int samples_per_axis = 1001);

}  // namespace absorb
