#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vblob/errors.hpp"
#include "vblob/grid.hpp"
#include "vblob/kernels.hpp"
#include "vblob/quadrature.hpp"
#include "vblob/vec2.hpp"

namespace vblob {

/// Points within `pad` of the axis-aligned box [lo, hi]. A disc is a
/// degenerate box with pad equal to its radius.
struct Region {
    Vec2 lo{};
    Vec2 hi{};
    double pad = 0.0;

    static Region disc(Vec2 c, double r) { return {c, c, r}; }
    static Region box(Vec2 lo, Vec2 hi) { return {lo, hi, 0.0}; }

    Region grown(double d) const { return {lo, hi, pad + d}; }
    Vec2 bbox_lo() const { return {lo.x - pad, lo.y - pad}; }
    Vec2 bbox_hi() const { return {hi.x + pad, hi.y + pad}; }

    double distance_to(Vec2 p) const {
        const double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
        const double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
        return std::hypot(dx, dy);
    }
    bool contains(Vec2 p) const { return distance_to(p) <= pad; }

    /// True when the region meets the open square [clo, chi] in positive area.
    bool meets_box(Vec2 clo, Vec2 chi) const {
        const double dx = std::max({lo.x - chi.x, 0.0, clo.x - hi.x});
        const double dy = std::max({lo.y - chi.y, 0.0, clo.y - hi.y});
        return std::hypot(dx, dy) < pad || (pad == 0.0 && dx == 0.0 && dy == 0.0 && lo.x < chi.x &&
                                              clo.x < hi.x && lo.y < chi.y && clo.y < hi.y);
    }
    double max_radius() const {
        const double cx = std::max(std::abs(lo.x), std::abs(hi.x));
        const double cy = std::max(std::abs(lo.y), std::abs(hi.y));
        return std::hypot(cx, cy) + pad;
    }
};

/// Mass of a radial profile centred at distance d from the centre of the disc
/// B(R), i.e. int_{B(R)} m(y - X) dy with |X| = d. Integrates 2 pi rho phi(rho)
/// times the fraction of the circle of radius rho that lies inside B(R).
inline double mollifier_mass_in_disc(const Mollifier& m, double d, double R) {
    d = std::abs(d);
    const double rs = m.support_radius();
    if (R <= 0.0) return 0.0;
    if (d + rs <= R) return m.cumulative_mass(rs);
    if (d >= R + rs) return 0.0;
    auto fraction = [&](double rho) {
        if (rho + d <= R) return 1.0;
        if (rho >= d + R || rho <= d - R) return 0.0;
        const double c = (d * d + rho * rho - R * R) / (2.0 * d * rho);
        return std::acos(std::clamp(c, -1.0, 1.0)) / kPi;
    };
    // Breakpoints where the fraction changes regime; each piece uses a
    // smoothstep substitution to tame the square-root kinks at its ends.
    double cuts[4] = {0.0, std::abs(R - d), R + d, rs};
    std::sort(cuts, cuts + 4);
    static const quad::GaussLegendre gl = quad::gauss_legendre(24);
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double a = cuts[k];
        const double b = std::min(cuts[k + 1], rs);
        if (!(b > a)) continue;
        auto f = [&](double u) {
            const double t = u * u * (3.0 - 2.0 * u);
            const double rho = a + (b - a) * t;
            const double jac = (b - a) * 6.0 * u * (1.0 - u);
            return kTwoPi * rho * m.value_r2(rho * rho) * fraction(rho) * jac;
        };
        total += quad::integrate_fixed(gl, f, 0.0, 1.0);
    }
    return total;
}

enum class VorticityKind { GaussianDipole, Patch, PowerSpike, CustomGrid };

inline std::string_view kind_name(VorticityKind k) {
    switch (k) {
        case VorticityKind::GaussianDipole: return "gaussian_dipole";
        case VorticityKind::Patch: return "patch";
        case VorticityKind::PowerSpike: return "power_spike";
        case VorticityKind::CustomGrid: return "custom_grid";
    }
    return "?";
}

/// Two opposite-sign lumps A exp(-r^2/s^2)(1 - r^2/T^2)^3, r < T, centred at
/// center +- (0, separation/2). Identical shapes give exactly zero mean.
struct GaussianDipole {
    double amplitude = 1.0;
    double separation = 1.0;
    double core = 0.15;
    double truncation = 0.45;
    Vec2 center{};

    double lump(double r2) const {
        const double t2 = truncation * truncation;
        if (r2 >= t2) return 0.0;
        const double u = 1.0 - r2 / t2;
        return std::exp(-r2 / (core * core)) * u * u * u;
    }
    Vec2 plus() const { return center + Vec2{0.0, 0.5 * separation}; }
    Vec2 minus() const { return center - Vec2{0.0, 0.5 * separation}; }
};

/// Uniform disc of vorticity `amplitude`.
struct Patch {
    double amplitude = 1.0;
    double radius = 1.0;
    Vec2 center{};
};

/// amplitude * |x - c|^(-2/q) on the disc of `radius`; in L^p for p < q.
struct PowerSpike {
    double amplitude = 1.0;
    double exponent_q = 4.0;
    double radius = 1.0;
    Vec2 center{};
};

/// Bilinearly interpolated samples, zero outside the lattice.
struct CustomGrid {
    GridField field;
};

/// Initial vorticity with compact support, evaluable pointwise.
class InitialVorticity {
public:
    using Shape = std::variant<GaussianDipole, Patch, PowerSpike, CustomGrid>;

    explicit InitialVorticity(Shape s) : shape_(std::move(s)) { validate(); }

    VorticityKind kind() const { return static_cast<VorticityKind>(shape_.index()); }
    const Shape& shape() const { return shape_; }

    double operator()(Vec2 x) const {
        return std::visit([&](const auto& s) { return eval(s, x); }, shape_);
    }

    /// Closed sets covering the support.
    std::vector<Region> support() const {
        return std::visit([](const auto& s) { return regions(s); }, shape_);
    }

    /// R with supp w0 inside the ball B_R about the origin.
    double support_radius() const {
        double r = 0.0;
        for (const auto& reg : support()) r = std::max(r, reg.max_radius());
        return r;
    }

    double norm_l1() const { return norm_lp(1.0); }

    /// ||w0||_{L^p}; infinity when w0 is not in L^p.
    double norm_lp(double p) const {
        if (!(p >= 1.0)) throw DomainError("norm_lp: exponent must be >= 1");
        return std::visit([&](const auto& s) { return lp(s, p); }, shape_);
    }

private:
    void validate() const {
        std::visit([](const auto& s) { check(s); }, shape_);
    }

    static void check(const GaussianDipole& s) {
        if (!(s.core > 0.0) || !(s.truncation > 0.0) || !(s.separation >= 0.0))
            throw ConfigError("gaussian_dipole: core and truncation must be positive, separation nonnegative");
    }
    static void check(const Patch& s) {
        if (!(s.radius >= 0.0)) throw ConfigError("patch: radius must be nonnegative");
    }
    static void check(const PowerSpike& s) {
        if (!(s.radius >= 0.0) || !(s.exponent_q > 1.0))
            throw ConfigError("power_spike: radius must be nonnegative and q > 1");
    }
    static void check(const CustomGrid& s) {
        if (s.field.components != 1) throw ConfigError("custom_grid: field must be scalar");
    }

    static double eval(const GaussianDipole& s, Vec2 x) {
        return s.amplitude * (s.lump(norm2(x - s.plus())) - s.lump(norm2(x - s.minus())));
    }
    static double eval(const Patch& s, Vec2 x) {
        return norm2(x - s.center) < s.radius * s.radius ? s.amplitude : 0.0;
    }
    static double eval(const PowerSpike& s, Vec2 x) {
        const double r = norm(x - s.center);
        if (r >= s.radius) return 0.0;
        // The singular point itself is a null set; clamp so quadrature stays finite.
        return s.amplitude * std::pow(std::max(r, 1e-300), -2.0 / s.exponent_q);
    }
    static double eval(const CustomGrid& s, Vec2 x) { return s.field.sample(x); }

    static std::vector<Region> regions(const GaussianDipole& s) {
        return {Region::disc(s.plus(), s.truncation), Region::disc(s.minus(), s.truncation)};
    }
    static std::vector<Region> regions(const Patch& s) { return {Region::disc(s.center, s.radius)}; }
    static std::vector<Region> regions(const PowerSpike& s) { return {Region::disc(s.center, s.radius)}; }
    static std::vector<Region> regions(const CustomGrid& s) {
        if (s.field.spec.nx < 2 || s.field.spec.ny < 2) return {};
        return {Region::box(s.field.spec.origin, s.field.spec.upper())};
    }

    static double lp(const GaussianDipole& s, double p) {
        if (std::isinf(p)) return std::abs(s.amplitude);
        auto f = [&](double r) { return kTwoPi * r * std::pow(std::abs(s.amplitude) * s.lump(r * r), p); };
        const double one = quad::integrate(f, 0.0, s.truncation, 1e-15);
        // Lumps overlap only if separation < 2 * truncation; then integrate the sum directly.
        if (s.separation >= 2.0 * s.truncation) return std::pow(2.0 * one, 1.0 / p);
        return lp_numeric(s, p);
    }
    static double lp(const Patch& s, double p) {
        if (std::isinf(p)) return s.radius > 0.0 ? std::abs(s.amplitude) : 0.0;
        return std::abs(s.amplitude) * std::pow(kPi * s.radius * s.radius, 1.0 / p);
    }
    static double lp(const PowerSpike& s, double p) {
        if (s.radius == 0.0 || s.amplitude == 0.0) return 0.0;
        if (std::isinf(p) || p >= s.exponent_q) return std::numeric_limits<double>::infinity();
        const double e = 2.0 - 2.0 * p / s.exponent_q;
        return std::abs(s.amplitude) * std::pow(kTwoPi * std::pow(s.radius, e) / e, 1.0 / p);
    }
    static double lp(const CustomGrid& s, double p) { return lp_numeric(s, p); }

    // 4x4 Gauss-Legendre per lattice cell of the bounding box.
    template <class S>
    static double lp_numeric(const S& s, double p) {
        const auto regs = regions(s);
        if (regs.empty()) return 0.0;
        Vec2 lo = regs[0].bbox_lo(), hi = regs[0].bbox_hi();
        for (const auto& r : regs) {
            lo = {std::min(lo.x, r.bbox_lo().x), std::min(lo.y, r.bbox_lo().y)};
            hi = {std::max(hi.x, r.bbox_hi().x), std::max(hi.y, r.bbox_hi().y)};
        }
        const int n = 400;
        const double hx = (hi.x - lo.x) / n, hy = (hi.y - lo.y) / n;
        static const quad::GaussLegendre gl = quad::gauss_legendre(4);
        double sum = 0.0, mx = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) {
                        const Vec2 x{lo.x + hx * (i + 0.5 + 0.5 * gl.nodes[a]), lo.y + hy * (j + 0.5 + 0.5 * gl.nodes[b])};
                        const double v = std::abs(eval(s, x));
                        mx = std::max(mx, v);
                        if (!std::isinf(p)) sum += 0.25 * gl.weights[a] * gl.weights[b] * std::pow(v, p);
                    }
        if (std::isinf(p)) return mx;
        return std::pow(sum * hx * hy, 1.0 / p);
    }

    Shape shape_;
};

}  // namespace vblob
