#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vblob/errors.hpp"
#include "vblob/vec2.hpp"

namespace vblob {

/// Uniform node lattice: node (i, j) sits at origin + spacing * (i, j).
struct GridSpec {
    Vec2 origin{};
    double spacing = 0.0;
    std::size_t nx = 0;
    std::size_t ny = 0;

    std::size_t size() const noexcept { return nx * ny; }
    Vec2 node(std::size_t i, std::size_t j) const noexcept {
        return {origin.x + spacing * static_cast<double>(i), origin.y + spacing * static_cast<double>(j)};
    }
    Vec2 node(std::size_t k) const noexcept { return node(k % nx, k / nx); }
    Vec2 upper() const noexcept { return node(nx ? nx - 1 : 0, ny ? ny - 1 : 0); }
    double cell_area() const noexcept { return spacing * spacing; }

    /// Smallest lattice with the given spacing covering [lo, hi], anchored at lo.
    static GridSpec covering(Vec2 lo, Vec2 hi, double spacing) {
        if (!(spacing > 0.0)) throw DomainError("grid spacing must be positive");
        GridSpec g;
        g.origin = lo;
        g.spacing = spacing;
        g.nx = static_cast<std::size_t>(std::ceil((hi.x - lo.x) / spacing - 1e-9)) + 1;
        g.ny = static_cast<std::size_t>(std::ceil((hi.y - lo.y) / spacing - 1e-9)) + 1;
        return g;
    }

    bool covers(Vec2 lo, Vec2 hi) const noexcept {
        const Vec2 up = upper();
        return lo.x >= origin.x && lo.y >= origin.y && hi.x <= up.x && hi.y <= up.y;
    }
};

/// Scalar (components = 1) or vector (components = 2) samples on a GridSpec.
struct GridField {
    GridSpec spec;
    int components = 1;
    std::vector<double> values;

    GridField() = default;
    GridField(GridSpec s, int comps) : spec(s), components(comps), values(s.size() * static_cast<std::size_t>(comps), 0.0) {
        if (comps != 1 && comps != 2) throw DomainError("grid field must have 1 or 2 components");
    }

    double& at(std::size_t k, int c = 0) { return values[k * static_cast<std::size_t>(components) + static_cast<std::size_t>(c)]; }
    double at(std::size_t k, int c = 0) const { return values[k * static_cast<std::size_t>(components) + static_cast<std::size_t>(c)]; }

    /// Pointwise magnitude (absolute value or Euclidean norm).
    double magnitude(std::size_t k) const {
        return components == 1 ? std::abs(at(k)) : std::hypot(at(k, 0), at(k, 1));
    }

    /// Bilinear interpolation of component c; zero outside the lattice.
    double sample(Vec2 x, int c = 0) const {
        if (spec.nx < 2 || spec.ny < 2) return 0.0;
        const double fx = (x.x - spec.origin.x) / spec.spacing;
        const double fy = (x.y - spec.origin.y) / spec.spacing;
        if (fx < 0.0 || fy < 0.0 || fx > static_cast<double>(spec.nx - 1) || fy > static_cast<double>(spec.ny - 1)) return 0.0;
        const std::size_t i = std::min(static_cast<std::size_t>(fx), spec.nx - 2);
        const std::size_t j = std::min(static_cast<std::size_t>(fy), spec.ny - 2);
        const double tx = fx - static_cast<double>(i);
        const double ty = fy - static_cast<double>(j);
        const auto v = [&](std::size_t a, std::size_t b) { return at(b * spec.nx + a, c); };
        return (1 - tx) * (1 - ty) * v(i, j) + tx * (1 - ty) * v(i + 1, j) + (1 - tx) * ty * v(i, j + 1) +
               tx * ty * v(i + 1, j + 1);
    }
};

/// Discrete L^p norm (sum |f|^p dx^2)^(1/p); p = infinity gives the node max.
inline double lp_norm(const GridField& f, double p) {
    if (!(p >= 1.0)) throw DomainError("lp_norm: exponent must be >= 1");
    const std::size_t n = f.spec.size();
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t k = 0; k < n; ++k) m = std::max(m, f.magnitude(k));
        return m;
    }
    double s = 0.0;
    if (p == 1.0) {
        for (std::size_t k = 0; k < n; ++k) s += f.magnitude(k);
        return s * f.spec.cell_area();
    }
    for (std::size_t k = 0; k < n; ++k) s += std::pow(f.magnitude(k), p);
    return std::pow(s * f.spec.cell_area(), 1.0 / p);
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Text dump: `# origin=<x> <y> spacing=<v> nx=<n> ny=<n> components=<c>`,
/// then one line per row j holding the row's node values in order of i.
inline void write_grid_field(std::ostream& os, const GridField& f) {
    os << "# origin=" << format_double(f.spec.origin.x) << ' ' << format_double(f.spec.origin.y)
       << " spacing=" << format_double(f.spec.spacing) << " nx=" << f.spec.nx << " ny=" << f.spec.ny
       << " components=" << f.components << '\n';
    for (std::size_t j = 0; j < f.spec.ny; ++j) {
        for (std::size_t i = 0; i < f.spec.nx; ++i) {
            for (int c = 0; c < f.components; ++c) {
                if (i + static_cast<std::size_t>(c) > 0) os << ' ';
                os << format_double(f.at(j * f.spec.nx + i, c));
            }
        }
        os << '\n';
    }
}

inline GridField read_grid_field(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# origin=", 0) != 0)
        throw ConfigError("grid field: missing '# origin=' header", 1, "origin");
    GridSpec spec;
    int comps = 0;
    {
        std::istringstream hs(line.substr(9));
        std::string tok;
        if (!(hs >> spec.origin.x >> spec.origin.y)) throw ConfigError("grid field: bad origin", 1, "origin");
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) throw ConfigError("grid field: bad header token '" + tok + "'", 1);
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            try {
                if (key == "spacing") spec.spacing = std::stod(val);
                else if (key == "nx") spec.nx = std::stoul(val);
                else if (key == "ny") spec.ny = std::stoul(val);
                else if (key == "components") comps = std::stoi(val);
                else throw ConfigError("grid field: unknown header key '" + key + "'", 1, key);
            } catch (const std::logic_error&) {
                throw ConfigError("grid field: bad value for '" + key + "'", 1, key);
            }
        }
    }
    if (!(spec.spacing > 0.0) || (comps != 1 && comps != 2))
        throw ConfigError("grid field: spacing must be positive and components 1 or 2", 1);
    GridField f(spec, comps);
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        if (!(is >> f.values[k]))
            throw ConfigError("grid field: expected " + std::to_string(f.values.size()) + " values, got " +
                              std::to_string(k));
    }
    return f;
}

inline GridField read_grid_field_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid field file '" + path + "'");
    return read_grid_field(in);
}

}  // namespace vblob
