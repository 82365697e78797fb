#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "vblob/diagnostics.hpp"
#include "vblob/dynamics.hpp"
#include "vblob/ensemble.hpp"
#include "vblob/errors.hpp"
#include "vblob/grid.hpp"

namespace vblob {

/// Radial cutoff a(r): 1 for r <= R, 0 for r >= 2R, quintic ramp between
/// (C^2 across both ends).
struct Cutoff {
    double R = 1.0;

    /// 1 - a(r) and its first two radial derivatives.
    void far(double r, double& b, double& db, double& d2b) const {
        const double s = (r - R) / R;
        if (s <= 0.0) {
            b = db = d2b = 0.0;
        } else if (s >= 1.0) {
            b = 1.0;
            db = d2b = 0.0;
        } else {
            b = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
            db = 30.0 * s * s * (1.0 - s) * (1.0 - s) / R;
            d2b = 60.0 * s * (1.0 - 3.0 * s + 2.0 * s * s) / (R * R);
        }
    }
    double near(double r) const {
        double b, db, d2b;
        far(r, b, db, d2b);
        return 1.0 - b;
    }
};

/// First and second derivatives of f_i = (1 - a) K_i at z:
/// d1[i][j] = d_j f_i, d2[i][j][l] = d_j d_l f_i. Zero for |z| <= R.
struct FarKernelDerivatives {
    double d1[2][2] = {};
    double d2[2][2][2] = {};
};

inline FarKernelDerivatives far_kernel_derivatives(Vec2 z, const Cutoff& a) {
    FarKernelDerivatives out;
    const double r2 = norm2(z);
    const double r = std::sqrt(r2);
    double b, db, d2b;
    a.far(r, b, db, d2b);
    if (b == 0.0 && db == 0.0 && d2b == 0.0) return out;
    const double zc[2] = {z.x, z.y};
    const double r4 = r2 * r2, r6 = r4 * r2;
    const auto delta = [](int p, int q) { return p == q ? 1.0 : 0.0; };

    // Radial factor derivatives.
    double gb[2], hb[2][2];
    for (int j = 0; j < 2; ++j) {
        gb[j] = db * zc[j] / r;
        for (int l = 0; l < 2; ++l)
            hb[j][l] = d2b * zc[j] * zc[l] / r2 + db * (delta(j, l) / r - zc[j] * zc[l] / (r2 * r));
    }
    // K_0 = -z_1 / (2 pi r^2), K_1 = z_0 / (2 pi r^2).
    for (int i = 0; i < 2; ++i) {
        const int m = i == 0 ? 1 : 0;
        const double sg = (i == 0 ? -1.0 : 1.0) / kTwoPi;
        const double K = sg * zc[m] / r2;
        double gK[2], hK[2][2];
        for (int j = 0; j < 2; ++j) {
            gK[j] = sg * (delta(j, m) / r2 - 2.0 * zc[m] * zc[j] / r4);
            for (int l = 0; l < 2; ++l)
                hK[j][l] = sg * (-2.0 * (delta(j, m) * zc[l] + delta(m, l) * zc[j] + delta(j, l) * zc[m]) / r4 +
                                 8.0 * zc[m] * zc[j] * zc[l] / r6);
        }
        for (int j = 0; j < 2; ++j) {
            out.d1[i][j] = gb[j] * K + b * gK[j];
            for (int l = 0; l < 2; ++l)
                out.d2[i][j][l] = hb[j][l] * K + gb[j] * gK[l] + gb[l] * gK[j] + b * hK[j][l];
        }
    }
    return out;
}

/// Max over sample points and components of
///   | v(t,x) - v(0,x) - (aK)*(w(t) - w(0))(x)
///     + int_0^t D[(1-a)K] * (v (x) v) - int_0^t grad[(1-a)K] * F |
/// where t is the last time of the series and D f = grad grad^perp f.
/// Convolutions are node sums on `grid`; time integrals use the trapezoid
/// rule over the series times. Sample points are snapped to the nearest
/// node. The near-field term subtracts the centre value of the vorticity
/// increment, which is exact since aK is odd.
inline double serfati_residual(std::span<const Ensemble> series, double cutoff_radius, const GridSpec& grid,
                               std::span<const Vec2> sample_points) {
    if (series.empty()) throw DomainError("serfati_residual: empty series");
    if (!(cutoff_radius > 0.0)) throw DomainError("serfati_residual: cutoff radius must be positive");
    require_resolution(grid.spacing, series.front().epsilon());
    for (std::size_t s = 1; s < series.size(); ++s)
        if (series[s].time() < series[s - 1].time()) throw DomainError("serfati_residual: series times decrease");
    if (sample_points.empty()) return 0.0;

    const Cutoff a{cutoff_radius};
    const double dx = grid.spacing, area = grid.cell_area();
    const double rs = series.front().mollifier().support_radius();
    for (const auto& e : series)
        for (auto p : e.positions())
            if (!grid.covers({p.x - rs, p.y - rs}, {p.x + rs, p.y + rs}))
                throw DomainError("serfati_residual: grid does not cover the vorticity support");

    struct Sample {
        std::size_t i, j;
        Vec2 x;
    };
    std::vector<Sample> samples;
    for (auto p : sample_points) {
        const double fi = std::round((p.x - grid.origin.x) / dx), fj = std::round((p.y - grid.origin.y) / dx);
        if (fi < 0 || fj < 0 || fi > static_cast<double>(grid.nx - 1) || fj > static_cast<double>(grid.ny - 1))
            throw DomainError("serfati_residual: sample point outside the grid");
        const auto i = static_cast<std::size_t>(fi), j = static_cast<std::size_t>(fj);
        const Vec2 x = grid.node(i, j);
        const double R2 = 2.0 * cutoff_radius;
        if (!grid.covers({x.x - R2, x.y - R2}, {x.x + R2, x.y + R2}))
            throw DomainError("serfati_residual: grid does not cover the cutoff ball of a sample point");
        samples.push_back({i, j, x});
    }

    // Far-field time integrand per sample and component, per series entry.
    const std::size_t ns = samples.size();
    std::vector<std::vector<Vec2>> integrand(series.size(), std::vector<Vec2>(ns));
    const VelocityEvaluator direct{};
    for (std::size_t s = 0; s < series.size(); ++s) {
        const Ensemble& e = series[s];
        const VelocityField field(e, direct);
        std::vector<Vec2> v(grid.size());
        parallel_for(grid.size(), [&](std::size_t k) { v[k] = field.at(grid.node(k)); });
        const GridField F = consistency_error_field(e, grid, direct);

        std::vector<Vec2> acc(ns);
        parallel_for(ns, [&](std::size_t q) {
            const Sample& smp = samples[q];
            double out[2] = {0.0, 0.0};
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const Vec2 z = smp.x - grid.node(k);
                if (norm2(z) <= cutoff_radius * cutoff_radius) continue;
                const FarKernelDerivatives d = far_kernel_derivatives(z, a);
                const double vv[2] = {v[k].x, v[k].y};
                const double f[2] = {F.at(k, 0), F.at(k, 1)};
                for (int i = 0; i < 2; ++i) {
                    double flux = 0.0;
                    for (int j = 0; j < 2; ++j) {
                        // (grad^perp f)_0 = -d_1 f, (grad^perp f)_1 = d_0 f.
                        flux += -d.d2[i][j][1] * vv[j] * vv[0] + d.d2[i][j][0] * vv[j] * vv[1];
                    }
                    const double force = d.d1[i][0] * f[0] + d.d1[i][1] * f[1];
                    out[i] += -flux + force;
                }
            }
            acc[q] = {out[0] * area, out[1] * area};
        });
        integrand[s] = std::move(acc);
    }

    const Ensemble& e0 = series.front();
    const Ensemble& et = series.back();
    const Mollifier m = e0.mollifier();
    const PointBins b0(e0.positions(), m.support_radius()), bt(et.positions(), m.support_radius());
    auto vort = [&](const Ensemble& e, const PointBins& bins, Vec2 x) {
        double w = 0.0;
        bins.for_each_near(x, [&](std::size_t i) { w += e.circulation(i) * m.value(x - e.position(i)); });
        return w;
    };

    double worst = 0.0;
    for (std::size_t q = 0; q < ns; ++q) {
        const Sample& smp = samples[q];
        Vec2 far{};
        for (std::size_t s = 1; s < series.size(); ++s)
            far += (0.5 * (series[s].time() - series[s - 1].time())) * (integrand[s - 1][q] + integrand[s][q]);

        const double g0 = vort(et, bt, smp.x) - vort(e0, b0, smp.x);
        const auto span = static_cast<long>(std::ceil(2.0 * cutoff_radius / dx));
        Vec2 nearf{};
        for (long dj = -span; dj <= span; ++dj)
            for (long di = -span; di <= span; ++di) {
                const long ii = static_cast<long>(smp.i) + di, jj = static_cast<long>(smp.j) + dj;
                if ((di == 0 && dj == 0) || ii < 0 || jj < 0 || ii >= static_cast<long>(grid.nx) ||
                    jj >= static_cast<long>(grid.ny))
                    continue;
                const Vec2 y = grid.node(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj));
                const Vec2 z = smp.x - y;
                const double av = a.near(norm(z));
                if (av == 0.0) continue;
                const double g = vort(et, bt, y) - vort(e0, b0, y) - g0;
                nearf += (av * g) * biot_savart(z);
            }
        nearf = area * nearf;

        const Vec2 lhs = velocity_at(et, smp.x);
        const Vec2 rhs = velocity_at(e0, smp.x) + nearf + far;
        worst = std::max({worst, std::abs(lhs.x - rhs.x), std::abs(lhs.y - rhs.y)});
    }
    return worst;
}

}  // namespace vblob
