#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vblob/dynamics.hpp"
#include "vblob/ensemble.hpp"
#include "vblob/errors.hpp"
#include "vblob/grid.hpp"
#include "vblob/initial_vorticity.hpp"
#include "vblob/parallel.hpp"

namespace vblob {

/// Uniform bins of points for neighbour queries within a fixed radius.
class PointBins {
public:
    PointBins(std::span<const Vec2> points, double radius) : points_(points), radius_(radius) {
        if (points.empty() || !(radius > 0.0)) return;
        lo_ = points[0];
        Vec2 hi = points[0];
        for (auto p : points) {
            lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
        nx_ = static_cast<long>((hi.x - lo_.x) / radius) + 1;
        ny_ = static_cast<long>((hi.y - lo_.y) / radius) + 1;
        start_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
        std::vector<std::size_t> bin(points.size());
        for (std::size_t k = 0; k < points.size(); ++k) {
            bin[k] = static_cast<std::size_t>(cell_y(points[k].y) * nx_ + cell_x(points[k].x));
            ++start_[bin[k] + 1];
        }
        for (std::size_t b = 1; b < start_.size(); ++b) start_[b] += start_[b - 1];
        items_.resize(points.size());
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        for (std::size_t k = 0; k < points.size(); ++k) items_[fill[bin[k]]++] = k;
    }

    /// Calls fn(k) for every point k with |points[k] - x| < radius, in
    /// increasing bin order and increasing k within a bin.
    template <class Fn>
    void for_each_near(Vec2 x, Fn&& fn) const {
        if (items_.empty()) return;
        const long i0 = std::max(0L, static_cast<long>(std::floor((x.x - radius_ - lo_.x) / radius_)));
        const long i1 = std::min(nx_ - 1, static_cast<long>(std::floor((x.x + radius_ - lo_.x) / radius_)));
        const long j0 = std::max(0L, static_cast<long>(std::floor((x.y - radius_ - lo_.y) / radius_)));
        const long j1 = std::min(ny_ - 1, static_cast<long>(std::floor((x.y + radius_ - lo_.y) / radius_)));
        const double r2 = radius_ * radius_;
        for (long j = j0; j <= j1; ++j)
            for (long i = i0; i <= i1; ++i) {
                const auto b = static_cast<std::size_t>(j * nx_ + i);
                for (std::size_t s = start_[b]; s < start_[b + 1]; ++s) {
                    const std::size_t k = items_[s];
                    if (norm2(points_[k] - x) < r2) fn(k);
                }
            }
    }

private:
    long cell_x(double x) const { return std::min(nx_ - 1, static_cast<long>((x - lo_.x) / radius_)); }
    long cell_y(double y) const { return std::min(ny_ - 1, static_cast<long>((y - lo_.y) / radius_)); }

    std::span<const Vec2> points_;
    double radius_;
    Vec2 lo_{};
    long nx_ = 0, ny_ = 0;
    std::vector<std::size_t> start_;
    std::vector<std::size_t> items_;
};

inline void require_resolution(double spacing, double epsilon) {
    if (!(spacing > 0.0) || spacing > 0.25 * epsilon * (1.0 + 1e-12))
        throw DomainError("grid spacing must satisfy 0 < spacing <= epsilon/4");
}

/// Grid over the blob bounding box widened by the core support plus 2 eps.
inline GridSpec diagnostic_grid(const Ensemble& e, double spacing) {
    const double margin = e.mollifier().support_radius() + 2.0 * e.epsilon();
    auto [lo, hi] = e.bounds();
    return GridSpec::covering({lo.x - margin, lo.y - margin}, {hi.x + margin, hi.y + margin}, spacing);
}

/// Grid nodes of sum_k w_k phi(x - p_k).
inline GridField splat(std::span<const Vec2> points, std::span<const double> weights, const Mollifier& m,
                       const GridSpec& grid) {
    GridField f(grid, 1);
    const PointBins bins(points, m.support_radius());
    parallel_for(grid.size(), [&](std::size_t k) {
        const Vec2 x = grid.node(k);
        double s = 0.0;
        bins.for_each_near(x, [&](std::size_t i) { s += weights[i] * m.value(x - points[i]); });
        f.at(k) = s;
    });
    return f;
}

/// w^eps(t, x) = sum_i Gamma_i phi_eps(x - X_i) on the grid nodes.
inline GridField reconstruct_vorticity(const Ensemble& e, const GridSpec& grid) {
    require_resolution(grid.spacing, e.epsilon());
    return splat(e.positions(), e.circulations(), e.mollifier(), grid);
}

/// F_eps(x) = sum_i [v(x) - v(X_i)] phi_eps(x - X_i) Gamma_i on the grid.
inline GridField consistency_error_field(const Ensemble& e, const GridSpec& grid, const VelocityEvaluator& ve = {}) {
    require_resolution(grid.spacing, e.epsilon());
    GridField f(grid, 2);
    if (e.empty()) return f;
    const Mollifier m = e.mollifier();
    const VelocityField field(e, ve);
    const std::vector<Vec2> vb = field.at_blobs();
    const PointBins bins(e.positions(), m.support_radius());
    parallel_for(grid.size(), [&](std::size_t k) {
        const Vec2 x = grid.node(k);
        bool any = false;
        bins.for_each_near(x, [&](std::size_t) { any = true; });
        if (!any) return;
        const Vec2 vx = field.at(x);
        Vec2 s{};
        bins.for_each_near(x, [&](std::size_t i) {
            s += (e.circulation(i) * m.value(x - e.position(i))) * (vx - vb[i]);
        });
        f.at(k, 0) = s.x;
        f.at(k, 1) = s.y;
    });
    return f;
}

struct ConsistencyNorms {
    double l1 = 0.0;
    double l2 = 0.0;
};

inline ConsistencyNorms consistency_error_norms(const Ensemble& e, double spacing, const VelocityEvaluator& ve = {}) {
    if (e.empty()) return {};
    const GridField f = consistency_error_field(e, diagnostic_grid(e, spacing), ve);
    return {lp_norm(f, 1.0), lp_norm(f, 2.0)};
}

struct Impulses {
    double total_circulation = 0.0;
    Vec2 linear{};
    double angular = 0.0;
};

/// sum Gamma_i, sum Gamma_i X_i, sum Gamma_i |X_i|^2.
inline Impulses impulses(const Ensemble& e) {
    Impulses out;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double g = e.circulation(i);
        const Vec2 x = e.position(i);
        out.total_circulation += g;
        out.linear += g * x;
        out.angular += g * norm2(x);
    }
    return out;
}

struct EnergyEstimate {
    double core = 0.0;  // 1/2 sum |v|^2 dx^2 over nodes in the ball
    double tail = 0.0;  // upper bound on 1/2 int |v|^2 outside the ball
};

/// Relative zero-mean tolerance of the finite-energy gate.
inline constexpr double kZeroMeanTolerance = 1e-6;

inline void require_zero_mean(const Ensemble& e) {
    const Impulses imp = impulses(e);
    if (std::abs(imp.total_circulation) > kZeroMeanTolerance * e.total_abs_circulation())
        throw DomainError("kinetic energy is infinite: total circulation is not zero "
                          "(compactly supported vorticity has finite energy only with zero mean)");
}

/// Kinetic energy inside the ball B_R about the ensemble centre, plus an
/// analytic bound for the exterior. Outside the cores a zero-circulation
/// ensemble of arm a = max |X_i - c| satisfies
/// |v(x)| <= sum|Gamma| a / (2 pi r (r - a)), r = |x - c|, which integrates
/// in closed form.
inline EnergyEstimate kinetic_energy(const Ensemble& e, double ball_radius, double spacing,
                                     const VelocityEvaluator& ve = {}) {
    if (e.empty()) return {};
    require_zero_mean(e);
    require_resolution(spacing, e.epsilon());
    const double diam = e.diameter_bound();
    if (ball_radius < 4.0 * diam || ball_radius <= e.mollifier().support_radius() + 0.5 * diam)
        throw DomainError("kinetic_energy: ball radius must be at least four ensemble diameters");

    const Vec2 c = e.center();
    const auto m = static_cast<long>(std::floor(ball_radius / spacing));
    const std::size_t side = static_cast<std::size_t>(2 * m + 1);
    const VelocityField field(e, ve);
    const double r2max = ball_radius * ball_radius;
    std::vector<double> row(side, 0.0);
    parallel_for(side, [&](std::size_t jj) {
        const double y = spacing * (static_cast<double>(jj) - static_cast<double>(m));
        double s = 0.0;
        for (long i = -m; i <= m; ++i) {
            const double x = spacing * static_cast<double>(i);
            if (x * x + y * y > r2max) continue;
            s += norm2(field.at({c.x + x, c.y + y}));
        }
        row[jj] = s;
    });
    double core = 0.0;
    for (double s : row) core += s;
    core *= 0.5 * spacing * spacing;

    const double a = 0.5 * diam;
    double tail = 0.0;
    if (a > 0.0) {
        const double R = ball_radius;
        const double integral = 1.0 / (a * (R - a)) + std::log1p(-a / R) / (a * a);
        const double M = e.total_abs_circulation() * a;
        tail = M * M / (4.0 * kPi) * integral;
    }
    return {core, tail};
}

/// Kinetic energy as -1/2 int psi w^eps with psi = sum Gamma_j G_eps(x - X_j)
/// the stream function; needs only the compact vorticity support.
inline double kinetic_energy_stream(const Ensemble& e, double spacing) {
    if (e.empty()) return 0.0;
    require_zero_mean(e);
    const GridSpec grid = diagnostic_grid(e, spacing);
    const GridField w = reconstruct_vorticity(e, grid);
    const Mollifier m = e.mollifier();
    std::vector<double> terms(grid.size(), 0.0);
    parallel_for(grid.size(), [&](std::size_t k) {
        const double wk = w.at(k);
        if (wk == 0.0) return;
        const Vec2 x = grid.node(k);
        double psi = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) psi += e.circulation(j) * m.green(norm(x - e.position(j)));
        terms[k] = psi * wk;
    });
    double s = 0.0;
    for (double t : terms) s += t;
    return -0.5 * s * grid.cell_area();
}

/// Max |div v^eps| over interior nodes by centred differences of the
/// gridded velocity.
inline double divergence_check(const Ensemble& e, double spacing, const VelocityEvaluator& ve = {}) {
    if (e.empty()) return 0.0;
    require_resolution(spacing, e.epsilon());
    const GridSpec g = diagnostic_grid(e, spacing);
    const VelocityField field(e, ve);
    std::vector<Vec2> v(g.size());
    parallel_for(g.size(), [&](std::size_t k) { v[k] = field.at(g.node(k)); });
    double mx = 0.0;
    for (std::size_t j = 1; j + 1 < g.ny; ++j)
        for (std::size_t i = 1; i + 1 < g.nx; ++i) {
            const double du = v[j * g.nx + i + 1].x - v[j * g.nx + i - 1].x;
            const double dw = v[(j + 1) * g.nx + i].y - v[(j - 1) * g.nx + i].y;
            mx = std::max(mx, std::abs(du + dw) / (2.0 * spacing));
        }
    return mx;
}

/// For each radius r, sum_i |Gamma_i| times the mass of phi_eps(. - X_i)
/// outside B_r.
inline std::vector<double> equi_tail_profile(const Ensemble& e, std::span<const double> radii) {
    const Mollifier m = e.mollifier();
    std::vector<double> out;
    out.reserve(radii.size());
    for (double r : radii) {
        double s = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const double outside = 1.0 - mollifier_mass_in_disc(m, norm(e.position(i)), r);
            s += std::abs(e.circulation(i)) * std::max(0.0, outside);
        }
        out.push_back(s);
    }
    return out;
}

struct SpeedBound {
    double max_speed = 0.0;
    double bound = 0.0;
    bool holds() const { return max_speed <= bound * (1.0 + 1e-12); }
};

/// max_i |v(X_i)| against ||K 1_{B_1}||_1 ||w||_inf + ||K 1_{B_1^c}||_inf ||w||_1
/// = ||w||_inf + ||w||_1 / (2 pi).
inline SpeedBound speed_bound_check(const Ensemble& e, double omega_linf, double omega_l1,
                                    const VelocityEvaluator& ve = {}) {
    SpeedBound out;
    out.bound = omega_linf + omega_l1 / kTwoPi;
    for (auto v : VelocityField(e, ve).at_blobs()) out.max_speed = std::max(out.max_speed, norm(v));
    return out;
}

}  // namespace vblob
