#pragma once

// Test-side reference computations. Nothing here calls into the library, so
// a shared mistake cannot make an oracle agree with the code under test.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// Adaptive Simpson with Richardson correction.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 48) {
    struct R {
        static double step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
            const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double diff = left + right - whole;
            if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
            return step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return R::step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// Unit-mass compact profile (4/pi)(1 - |x|^2)^3 scaled to radius eps.
inline double poly6(double r, double eps) {
    const double s = r * r / (eps * eps);
    if (s >= 1.0) return 0.0;
    return 4.0 / (pi * eps * eps) * std::pow(1.0 - s, 3);
}

inline double gauss(double r, double eps) { return std::exp(-r * r / (eps * eps)) / (pi * eps * eps); }

/// K_eps(x) = int K(x - y) phi(y) dy in polar coordinates about x, where
/// K(-rho e) rho = -perp(e) / (2 pi) is bounded. Returns (u, v).
inline std::pair<double, double> convolved_kernel(double x, double y, double eps, bool gaussian, double tol = 1e-11) {
    const double reach = std::hypot(x, y) + (gaussian ? 7.0 * eps : eps);
    auto phi = [&](double px, double py) {
        const double r = std::hypot(px, py);
        return gaussian ? gauss(r, eps) : poly6(r, eps);
    };
    auto comp = [&](int c) {
        auto angular = [&](double th) {
            const double ex = std::cos(th), ey = std::sin(th);
            // -perp(e) = (ey, -ex)
            const double w = c == 0 ? ey : -ex;
            auto radial = [&](double rho) { return phi(x + rho * ex, y + rho * ey); };
            // Support boundary crossings make kinks; split at the chord ends.
            double cuts[4];
            int nc = 0;
            cuts[nc++] = 0.0;
            if (!gaussian) {
                const double bq = x * ex + y * ey, cq = x * x + y * y - eps * eps;
                const double disc = bq * bq - cq;
                if (disc > 0.0) {
                    const double s = std::sqrt(disc);
                    for (double t : {-bq - s, -bq + s})
                        if (t > cuts[nc - 1] && t < reach) cuts[nc++] = t;
                }
            }
            cuts[nc++] = reach;
            double s = 0.0;
            for (int k = 0; k + 1 < nc; ++k) s += simpson(radial, cuts[k], cuts[k + 1], tol);
            return w * s / (2.0 * pi);
        };
        double s = 0.0;
        const int pieces = 16;
        for (int k = 0; k < pieces; ++k)
            s += simpson(angular, 2.0 * pi * k / pieces, 2.0 * pi * (k + 1) / pieces, tol / pieces);
        return s;
    };
    return {comp(0), comp(1)};
}

/// (int |K(x - a) - K(x)|^r dx)^(1/r) for a = (la, 0), using
/// |K(x - a) - K(x)| = la / (2 pi |x| |x - a|) and the symmetry x -> a - x:
/// twice the half plane x_1 < la/2, in polar coordinates about 0.
inline double translation_gap(double la, double r, double tol = 1e-12) {
    auto g = [&](double rho, double th) {
        const double dx = rho * std::cos(th) - la, dy = rho * std::sin(th);
        return std::pow(la / (2.0 * pi * rho * std::hypot(dx, dy)), r);
    };
    auto angular = [&](double th) {
        const double c = std::cos(th);
        const double rho_max = c > 0.0 ? la / (2.0 * c) : INFINITY;
        const double first = std::min(la, rho_max);
        // rho = first u^2 removes rho^(1 - r).
        auto near = [&](double u) {
            if (u == 0.0) return 0.0;
            const double rho = first * u * u;
            return g(rho, th) * rho * 2.0 * first * u;
        };
        double s = simpson(near, 0.0, 1.0, tol);
        if (rho_max > la) {
            // rho = la / w, w in [la / rho_max, 1].
            auto far = [&](double w) {
                if (w == 0.0) return 0.0;
                const double rho = la / w;
                return g(rho, th) * rho * la / (w * w);
            };
            s += simpson(far, std::isinf(rho_max) ? 0.0 : la / rho_max, 1.0, tol);
        }
        return s;
    };
    const double cuts[] = {0.0, pi / 6.0, pi / 3.0, pi / 2.0, 2.0 * pi / 3.0, pi};
    double total = 0.0;
    for (int k = 0; k < 5; ++k) total += simpson(angular, cuts[k], cuts[k + 1], tol);
    // Upper and lower half planes, then the mirror half.
    return std::pow(4.0 * total, 1.0 / r);
}

/// Co-rotating point vortices of equal strength gamma at distance d:
/// angular velocity gamma / (pi d^2).
inline double corotating_period(double gamma, double d) { return 2.0 * pi * pi * d * d / gamma; }

/// Counter-rotating pair +-gamma at distance d translates at gamma / (2 pi d).
inline double pair_speed(double gamma, double d) { return gamma / (2.0 * pi * d); }

}  // namespace oracle
