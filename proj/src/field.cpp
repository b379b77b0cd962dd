#include "absorb/field.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "absorb/error.hpp"
#include "absorb/expression.hpp"

namespace absorb {

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

struct ProfileCall {
    std::string name;
    std::string body;  // text between the outer parentheses, empty if none
};

ProfileCall split_call(std::string_view spec)
{
    const std::string s = trim(spec);
    const auto open = s.find('(');
    if (open == std::string::npos) return {s, {}};
    if (s.back() != ')') throw ConfigError("field profile '" + s + "': missing closing ')'");
    return {trim(std::string_view(s).substr(0, open)), s.substr(open + 1, s.size() - open - 2)};
}

class Params {
public:
    Params(const std::string& profile, const std::string& body) : profile_(profile)
    {
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (trim(item).empty()) continue;
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("field profile '" + profile + "': expected key=value, got '" + item + "'");
            const std::string key = trim(std::string_view(item).substr(0, eq));
            const std::string val = trim(std::string_view(item).substr(eq + 1));
            try {
                std::size_t used = 0;
                values_[key] = std::stod(val, &used);
                if (used != val.size()) throw std::invalid_argument(val);
            } catch (const std::exception&) {
                throw ConfigError("field profile '" + profile + "': parameter " + key + " is not a number");
            }
        }
    }

    double get(const std::string& key, double fallback)
    {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const double v = it->second;
        values_.erase(it);
        return v;
    }

    void finish() const
    {
        if (!values_.empty())
            throw ConfigError("field profile '" + profile_ + "': unknown parameter '" + values_.begin()->first + "'");
    }

private:
    std::string profile_;
    std::map<std::string, double> values_;
};

}  // namespace

ChemicalField build_field(std::string_view spec)
{
    const ProfileCall call = split_call(spec);
    ChemicalField f;
    f.description = trim(spec);

    if (call.name == "expr" || call.name == "expr2d") {
        if (trim(call.body).empty()) throw ConfigError("field profile '" + call.name + "' needs an expression");
        const Expression e = Expression::parse(call.body);
        f.dimension = call.name == "expr2d" ? 2 : 1;
        if (f.dimension == 1 && e.uses_y()) throw ConfigError("expr profile uses y; use expr2d");
        f.concentration = [e](double x, double y) { return e(x, y); };
        return f;
    }

    Params params(call.name, call.body);
    if (call.name == "rational") {
        const double c = params.get("center", 0.5);
        const double k = params.get("k", 10.0);
        params.finish();
        if (!(k > 0.0)) throw ConfigError("rational profile needs k > 0");
        f.concentration = [c, k](double x, double) { return 1.0 / (1.0 + k * (x - c) * (x - c)); };
        const double rk = std::sqrt(k);
        f.cell_integral = [c, rk](double a, double b, double, double) {
            return (std::atan(rk * (b - c)) - std::atan(rk * (a - c))) / rk;
        };
    } else if (call.name == "gaussian-decay") {
        const double c = params.get("center", 0.0);
        const double w = params.get("width", 1.0);
        params.finish();
        if (!(w > 0.0)) throw ConfigError("gaussian-decay profile needs width > 0");
        f.concentration = [c, w](double x, double) { return std::exp(-((x - c) / w) * ((x - c) / w)); };
        f.cell_integral = [c, w](double a, double b, double, double) {
            const double za = (a - c) / w;
            const double zb = (b - c) / w;
            const double half = 0.5 * std::sqrt(std::numbers::pi) * w;
            // erfc on the far side keeps the difference accurate in the tails.
            if (za >= 0.0) return half * (std::erfc(za) - std::erfc(zb));
            if (zb <= 0.0) return half * (std::erfc(-zb) - std::erfc(-za));
            return half * (std::erf(zb) - std::erf(za));
        };
    } else if (call.name == "sine2d") {
        const double k = params.get("k", 4.0);
        params.finish();
        f.dimension = 2;
        const double w = k * std::numbers::pi;
        f.concentration = [w](double x, double y) { return 0.5 * (std::sin(w * x) * std::sin(w * y) + 1.0); };
        f.cell_integral = [w](double ax, double bx, double ay, double by) {
            const double ix = (std::cos(w * ax) - std::cos(w * bx)) / w;
            const double iy = (std::cos(w * ay) - std::cos(w * by)) / w;
            return 0.5 * (ix * iy + (bx - ax) * (by - ay));
        };
    } else if (call.name == "sine-bump") {
        const double k = params.get("k", 1.0);
        params.finish();
        const double w = k * std::numbers::pi;
        f.concentration = [w](double x, double) { return 0.5 * (1.0 + std::sin(w * x)); };
        f.cell_integral = [w](double a, double b, double, double) {
            return 0.5 * ((b - a) + (std::cos(w * a) - std::cos(w * b)) / w);
        };
    } else if (call.name == "constant") {
        const double v = params.get("value", 1.0);
        const double dim = params.get("dim", 1.0);
        params.finish();
        if (dim != 1.0 && dim != 2.0) throw ConfigError("constant profile: dim must be 1 or 2");
        f.dimension = static_cast<int>(dim);
        f.concentration = [v](double, double) { return v; };
        if (f.dimension == 1)
            f.cell_integral = [v](double a, double b, double, double) { return v * (b - a); };
        else
            f.cell_integral = [v](double ax, double bx, double ay, double by) { return v * (bx - ax) * (by - ay); };
    } else {
        throw ConfigError("unknown field profile '" + call.name + "'");
    }
    return f;
}

void check_field_nonnegative(const ChemicalField& field, std::array<double, 2> lo, std::array<double, 2> hi,
                             int samples_per_axis)
{
    const int n = std::max(2, samples_per_axis);
    const int ny = field.dimension == 2 ? n : 1;
    for (int i = 0; i < n; ++i) {
        const double x = lo[0] + (hi[0] - lo[0]) * i / (n - 1);
        for (int j = 0; j < ny; ++j) {
            const double y = field.dimension == 2 ? lo[1] + (hi[1] - lo[1]) * j / (n - 1) : 0.0;
            const double c = field(x, y);
            if (!std::isfinite(c) || c < 0.0) {
                std::ostringstream msg;
                msg << "field '" << field.description << "' has concentration " << c << " at x=" << x;
                if (field.dimension == 2) msg << ", y=" << y;
                throw ConfigError(msg.str());
            }
        }
    }
}

}  // namespace absorb
