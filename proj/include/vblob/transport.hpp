#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "vblob/diagnostics.hpp"
#include "vblob/discretization.hpp"
#include "vblob/dynamics.hpp"
#include "vblob/errors.hpp"
#include "vblob/grid.hpp"

namespace vblob {

/// Passive markers carrying w0^delta(initial position) with quadrature
/// weight pitch^2. Values never change; only positions move.
struct TracerCloud {
    std::vector<Vec2> initial;
    std::vector<Vec2> current;
    std::vector<double> values;
    double pitch = 0.0;

    std::size_t size() const noexcept { return current.size(); }
    double weight() const noexcept { return pitch * pitch; }
};

/// Markers on the lattice pitch * Z^2 inside the mollified support.
inline TracerCloud seed_tracers(const MollifiedVorticity& w, double epsilon, double pitch) {
    if (!(pitch > 0.0)) throw DomainError("seed_tracers: pitch must be positive");
    if (pitch > 0.5 * epsilon * (1.0 + 1e-12)) throw DomainError("seed_tracers: pitch must be at most epsilon/2");
    TracerCloud tc;
    tc.pitch = pitch;
    const auto regions = w.support();
    if (regions.empty()) return tc;
    Vec2 lo = regions[0].bbox_lo(), hi = regions[0].bbox_hi();
    for (const auto& r : regions) {
        lo = {std::min(lo.x, r.bbox_lo().x), std::min(lo.y, r.bbox_lo().y)};
        hi = {std::max(hi.x, r.bbox_hi().x), std::max(hi.y, r.bbox_hi().y)};
    }
    const auto i0 = static_cast<long>(std::floor(lo.x / pitch)), i1 = static_cast<long>(std::ceil(hi.x / pitch));
    const auto j0 = static_cast<long>(std::floor(lo.y / pitch)), j1 = static_cast<long>(std::ceil(hi.y / pitch));
    std::vector<Vec2> pts;
    for (long j = j0; j <= j1; ++j)
        for (long i = i0; i <= i1; ++i) {
            const Vec2 p{pitch * static_cast<double>(i), pitch * static_cast<double>(j)};
            if (std::any_of(regions.begin(), regions.end(), [&](const Region& r) { return r.contains(p); }))
                pts.push_back(p);
        }
    std::vector<double> vals(pts.size());
    parallel_for(pts.size(), [&](std::size_t k) { vals[k] = w(pts[k]); });
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (vals[k] == 0.0) continue;
        tc.initial.push_back(pts[k]);
        tc.values.push_back(vals[k]);
    }
    tc.current = tc.initial;
    return tc;
}

struct AdvectResult {
    TracerCloud tracers;
    RunResult run;
};

/// Runs the blob dynamics and carries the markers with the same RK4 stages.
inline AdvectResult advect_tracers(TracerCloud tc, const Ensemble& e0, const Integrator& itg,
                                   const VelocityEvaluator& ve, std::span<const Observer> observers = {},
                                   std::size_t observe_every = 1) {
    RunResult r = run(e0, itg, ve, observers, observe_every, tc.current);
    tc.current = r.markers;
    return {std::move(tc), std::move(r)};
}

/// sum_j w_j value_j phi_eps(x - Y_j) on the grid nodes.
inline GridField mollified_transport_field(const TracerCloud& tc, const Mollifier& m, const GridSpec& grid) {
    std::vector<double> w(tc.values);
    for (double& v : w) v *= tc.weight();
    return splat(tc.current, w, m, grid);
}

/// Discrete L^p distance between w^eps(t) and the mollified transported
/// datum. The grid must cover the supports of both fields.
inline double lagrangian_gap(const Ensemble& e, const TracerCloud& tc, double p, const GridSpec& grid) {
    require_resolution(grid.spacing, e.epsilon());
    const Mollifier m = e.mollifier();
    const double rs = m.support_radius();
    auto check = [&](std::span<const Vec2> pts) {
        for (auto x : pts)
            if (!grid.covers({x.x - rs, x.y - rs}, {x.x + rs, x.y + rs}))
                throw DomainError("lagrangian_gap: grid does not cover the field supports");
    };
    check(e.positions());
    check(tc.current);
    GridField a = reconstruct_vorticity(e, grid);
    const GridField b = mollified_transport_field(tc, m, grid);
    for (std::size_t k = 0; k < a.values.size(); ++k) a.values[k] -= b.values[k];
    return lp_norm(a, p);
}

/// Diagnostic grid covering both the blobs and the markers.
inline GridSpec transport_grid(const Ensemble& e, const TracerCloud& tc, double spacing) {
    const double margin = e.mollifier().support_radius() + 2.0 * e.epsilon();
    auto [lo, hi] = e.bounds();
    if (e.empty() && !tc.current.empty()) lo = hi = tc.current[0];
    for (auto x : tc.current) {
        lo = {std::min(lo.x, x.x), std::min(lo.y, x.y)};
        hi = {std::max(hi.x, x.x), std::max(hi.y, x.y)};
    }
    return GridSpec::covering({lo.x - margin, lo.y - margin}, {hi.x + margin, hi.y + margin}, spacing);
}

}  // namespace vblob
