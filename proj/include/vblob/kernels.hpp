#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "vblob/errors.hpp"
#include "vblob/vec2.hpp"

namespace vblob {

enum class Profile { Poly6, Gaussian };

inline std::string_view profile_name(Profile p) {
    return p == Profile::Poly6 ? "poly6" : "gaussian";
}

inline Profile parse_profile(std::string_view s) {
    if (s == "poly6") return Profile::Poly6;
    if (s == "gaussian") return Profile::Gaussian;
    throw ConfigError("unknown mollifier profile '" + std::string(s) + "'");
}

/// Radial smoothing profile of unit mass, scaled to a length `radius`.
///
/// Poly6 is (4/pi)(1 - |x|^2)^3 on the unit ball and has compact support.
/// Gaussian is exp(-|x|^2)/pi and is not compactly supported; neighbour
/// searches truncate it at kGaussianCutoff radii, where the neglected mass is
/// exp(-36) ~ 2e-16.
class Mollifier {
public:
    static constexpr double kGaussianCutoff = 6.0;

    Mollifier(Profile profile, double radius) : profile_(profile), radius_(radius) {
        if (!(radius > 0.0) || !std::isfinite(radius))
            throw DomainError("mollifier radius must be strictly positive");
    }

    Profile profile() const noexcept { return profile_; }
    double radius() const noexcept { return radius_; }

    /// Radius beyond which the profile is treated as zero.
    double support_radius() const noexcept {
        return profile_ == Profile::Poly6 ? radius_ : kGaussianCutoff * radius_;
    }

    /// phi(r) for a point at distance r from the centre.
    double value_r2(double r2) const noexcept {
        const double e2 = radius_ * radius_;
        if (profile_ == Profile::Poly6) {
            if (r2 >= e2) return 0.0;
            const double u = 1.0 - r2 / e2;
            return (4.0 / kPi) * u * u * u / e2;
        }
        return std::exp(-r2 / e2) / (kPi * e2);
    }
    double value(Vec2 x) const noexcept { return value_r2(norm2(x)); }
    double peak() const noexcept { return value_r2(0.0); }

    /// Mass 2*pi*int_0^r s*phi(s) ds inside radius r.
    double cumulative_mass(double r) const {
        if (r < 0.0 || std::isnan(r)) throw DomainError("cumulative_mass: radius must be nonnegative");
        const double s = r * r / (radius_ * radius_);
        if (profile_ == Profile::Poly6) {
            if (s >= 1.0) return 1.0;
            const double u = 1.0 - s;
            return 1.0 - (u * u) * (u * u);
        }
        return -std::expm1(-s);
    }

    /// Scalar c(|x|^2) with K_eps(x) = c * perp(x). Finite at the origin, so
    /// K_eps(0) = 0 without a branch.
    double kernel_factor(double r2) const noexcept {
        const double e2 = radius_ * radius_;
        if (profile_ == Profile::Poly6) {
            if (r2 >= e2) return 1.0 / (kTwoPi * r2);
            const double s = r2 / e2;
            // (1 - (1 - s)^4) / s expanded to avoid cancellation near 0.
            return (4.0 - s * (6.0 - s * (4.0 - s))) / (kTwoPi * e2);
        }
        const double s = r2 / e2;
        if (s < 1e-8) return (1.0 - 0.5 * s) / (kTwoPi * e2);
        return -std::expm1(-s) / (kTwoPi * r2);
    }

    /// Regularized Green's function G_eps = G * phi with G = log|x| / (2 pi),
    /// so that K_eps = perp(grad G_eps).
    double green(double r) const {
        const double eps = radius_;
        if (profile_ == Profile::Poly6) {
            if (r >= eps) return std::log(r) / kTwoPi;
            const double u = r * r / (eps * eps);
            auto primitive = [](double v) { return v * (4.0 - v * (3.0 - v * (4.0 / 3.0 - 0.25 * v))); };
            return (std::log(eps) - 0.5 * (primitive(1.0) - primitive(u))) / kTwoPi;
        }
        const double s = r * r / (eps * eps);
        // log r + E1(s)/2, with E1(s) + log s -> -gamma as s -> 0.
        constexpr double kEulerGamma = 0.57721566490153286061;
        if (s < 1e-12) return (std::log(eps) - 0.5 * kEulerGamma) / kTwoPi;
        if (s > 700.0) return std::log(r) / kTwoPi;
        const double e1 = -std::expint(-s);
        return (std::log(r) + 0.5 * e1) / kTwoPi;
    }

    friend bool operator==(const Mollifier&, const Mollifier&) = default;

private:
    Profile profile_;
    double radius_;
};

/// Singular Biot-Savart kernel K(x) = perp(x) / (2 pi |x|^2).
inline Vec2 biot_savart(Vec2 x) {
    const double r2 = norm2(x);
    if (!(r2 > 0.0)) throw DomainError("biot_savart: kernel is singular at the origin");
    return (1.0 / (kTwoPi * r2)) * perp(x);
}

/// Cumulative mass of the scaled profile inside radius r.
inline double cumulative_mass(const Mollifier& m, double r) { return m.cumulative_mass(r); }

/// K_eps = K * phi_eps, evaluated in closed form as K(x) times the mass of
/// phi_eps inside |x|.
struct RegularizedKernel {
    Mollifier mollifier;

    Vec2 operator()(Vec2 x) const noexcept {
        return mollifier.kernel_factor(norm2(x)) * perp(x);
    }
};

inline Vec2 regularized_velocity_kernel(const RegularizedKernel& k, Vec2 x) { return k(x); }

/// || K(. - a) - K ||_{L^r} for 1 < r < 2.
///
/// |K(x - a) - K(x)| = |a| / (2 pi |x| |x - a|), so the r-th power integrates
/// to (|a| / 2 pi)^r |a|^(2 - 2r) J(r) with J(r) = int |y|^-r |y - e|^-r dy,
/// which the Riesz composition formula gives as
/// pi G(1 - r/2)^2 G(r - 1) / (G(r/2)^2 G(2 - r)).
inline double kernel_translation_gap(Vec2 a, double r) {
    if (!(r > 1.0 && r < 2.0)) throw DomainError("kernel_translation_gap: exponent must lie in (1, 2)");
    const double la = norm(a);
    if (la == 0.0) return 0.0;
    const double g1 = std::tgamma(1.0 - 0.5 * r), g2 = std::tgamma(0.5 * r);
    const double J = kPi * g1 * g1 * std::tgamma(r - 1.0) / (g2 * g2 * std::tgamma(2.0 - r));
    return (la / kTwoPi) * std::pow(la, 2.0 / r - 2.0) * std::pow(J, 1.0 / r);
}

}  // namespace vblob
