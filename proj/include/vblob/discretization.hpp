#pragma once

#include <cfloat>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vblob/ensemble.hpp"
#include "vblob/errors.hpp"
#include "vblob/initial_vorticity.hpp"
#include "vblob/kernels.hpp"
#include "vblob/parallel.hpp"
#include "vblob/quadrature.hpp"

namespace vblob {

/// w0 * j_delta, evaluated pointwise by quadrature over the mollifier support.
///
/// General data use a tensor-product rule in polar coordinates about x
/// (Gauss-Legendre in the radius, uniform in the angle); weights are
/// normalized to sum to one so constants are reproduced. Patches use the
/// angular integral of the indicator in closed form, which keeps the
/// mollified field smooth across the patch edge.
class MollifiedVorticity {
public:
    MollifiedVorticity(InitialVorticity w0, Mollifier j, std::size_t n_radial = 16, std::size_t n_angular = 32)
        : w0_(std::move(w0)), j_(j) {
        const auto gl = quad::gauss_legendre(n_radial);
        const double rs = j_.support_radius();
        double total = 0.0;
        for (std::size_t a = 0; a < n_radial; ++a) {
            const double rho = 0.5 * rs * (1.0 + gl.nodes[a]);
            const double wr = 0.5 * rs * gl.weights[a] * rho * j_.value_r2(rho * rho) * kTwoPi /
                              static_cast<double>(n_angular);
            for (std::size_t b = 0; b < n_angular; ++b) {
                const double th = kTwoPi * static_cast<double>(b) / static_cast<double>(n_angular);
                offsets_.push_back({rho * std::cos(th), rho * std::sin(th)});
                weights_.push_back(wr);
                total += wr;
            }
        }
        for (double& w : weights_) w /= total;
    }

    double operator()(Vec2 x) const {
        if (const auto* p = std::get_if<Patch>(&w0_.shape()))
            return p->amplitude * mollifier_mass_in_disc(j_, norm(x - p->center), p->radius);
        double s = 0.0;
        for (std::size_t k = 0; k < offsets_.size(); ++k) s += weights_[k] * w0_(x - offsets_[k]);
        return s;
    }

    /// Support of w0 grown by the mollifier radius.
    std::vector<Region> support() const {
        auto regs = w0_.support();
        for (auto& r : regs) r = r.grown(j_.support_radius());
        return regs;
    }

    const InitialVorticity& source() const noexcept { return w0_; }
    const Mollifier& mollifier() const noexcept { return j_; }
    double delta() const noexcept { return j_.radius(); }

private:
    InitialVorticity w0_;
    Mollifier j_;
    std::vector<Vec2> offsets_;
    std::vector<double> weights_;
};

inline MollifiedVorticity mollify_initial(const InitialVorticity& w0, double delta, Profile profile = Profile::Poly6) {
    if (!(delta > 0.0)) throw DomainError("mollify_initial: delta must be positive");
    return MollifiedVorticity(w0, Mollifier(profile, delta));
}

/// Cells of side h centred at h * (i1, i2) that meet a support set.
struct Lattice {
    double h = 0.0;
    std::vector<LatticeIndex> indices;

    Vec2 center(LatticeIndex i) const { return {h * static_cast<double>(i.i1), h * static_cast<double>(i.i2)}; }
    std::size_t size() const noexcept { return indices.size(); }
};

/// Index of the cell (h(i - 1/2), h(i + 1/2)] holding coordinate x; points on a
/// shared edge go to the lower index.
inline long lattice_cell(double x, double h) { return static_cast<long>(std::ceil(x / h + 0.5)) - 1; }

inline Lattice build_lattice(const std::vector<Region>& support, double h) {
    if (!(h > 0.0)) throw DomainError("lattice spacing h must be positive");
    Lattice lat{h, {}};
    if (support.empty()) return lat;
    Vec2 lo = support[0].bbox_lo(), hi = support[0].bbox_hi();
    for (const auto& r : support) {
        lo = {std::min(lo.x, r.bbox_lo().x), std::min(lo.y, r.bbox_lo().y)};
        hi = {std::max(hi.x, r.bbox_hi().x), std::max(hi.y, r.bbox_hi().y)};
    }
    const long i_lo = lattice_cell(lo.x, h), i_hi = lattice_cell(hi.x, h);
    const long j_lo = lattice_cell(lo.y, h), j_hi = lattice_cell(hi.y, h);
    for (long j = j_lo; j <= j_hi; ++j) {
        for (long i = i_lo; i <= i_hi; ++i) {
            const Vec2 c{h * static_cast<double>(i), h * static_cast<double>(j)};
            const Vec2 clo{c.x - 0.5 * h, c.y - 0.5 * h}, chi{c.x + 0.5 * h, c.y + 0.5 * h};
            for (const auto& r : support) {
                if (r.meets_box(clo, chi)) {
                    lat.indices.push_back({i, j});
                    break;
                }
            }
        }
    }
    return lat;
}

struct TileOptions {
    /// Drop blobs with |Gamma| < prune_tol * h^2. Changes the method; off by default.
    bool prune = false;
    double prune_tol = 1e-12;
};

/// One blob per lattice cell meeting the support, at the cell centre, with
/// circulation from 4x4 Gauss-Legendre quadrature of the mollified datum
/// over the cell.
inline Ensemble tile_and_weight(const MollifiedVorticity& w, double h, double epsilon,
                                Profile profile = Profile::Poly6, TileOptions opts = {}) {
    if (!(epsilon > 0.0)) throw DomainError("tile_and_weight: epsilon must be positive");
    const Lattice lat = build_lattice(w.support(), h);
    if (lat.indices.empty()) throw DegenerateInputError("no cells: initial vorticity has empty support");

    static const quad::GaussLegendre gl = quad::gauss_legendre(4);
    std::vector<double> gamma(lat.size());
    parallel_for(lat.size(), [&](std::size_t k) {
        const Vec2 c = lat.center(lat.indices[k]);
        double s = 0.0;
        for (int b = 0; b < 4; ++b)
            for (int a = 0; a < 4; ++a)
                s += gl.weights[a] * gl.weights[b] *
                     w({c.x + 0.5 * h * gl.nodes[a], c.y + 0.5 * h * gl.nodes[b]});
        gamma[k] = 0.25 * h * h * s;
    });

    std::vector<Vec2> pos;
    std::vector<double> circ;
    std::vector<LatticeIndex> idx;
    pos.reserve(lat.size());
    for (std::size_t k = 0; k < lat.size(); ++k) {
        if (opts.prune && std::abs(gamma[k]) < opts.prune_tol * h * h) continue;
        pos.push_back(lat.center(lat.indices[k]));
        circ.push_back(gamma[k]);
        idx.push_back(lat.indices[k]);
    }
    return Ensemble(std::move(pos), std::move(circ), BlobParams{epsilon, w.delta(), h, profile}, 0.0, std::move(idx));
}

enum class ScheduleMode { TheoreticalL1, TheoreticalFE, Practical };

inline std::string_view schedule_name(ScheduleMode m) {
    switch (m) {
        case ScheduleMode::TheoreticalL1: return "theoretical_l1";
        case ScheduleMode::TheoreticalFE: return "theoretical_fe";
        case ScheduleMode::Practical: return "practical";
    }
    return "?";
}

inline ScheduleMode parse_schedule(std::string_view s) {
    if (s == "theoretical_l1") return ScheduleMode::TheoreticalL1;
    if (s == "theoretical_fe") return ScheduleMode::TheoreticalFE;
    if (s == "practical") return ScheduleMode::Practical;
    throw ConfigError("unknown schedule '" + std::string(s) + "'");
}

struct ScheduleConstants {
    double c0 = 1.0;
    double c1 = 1.0;
    double sigma = 0.2;
};

struct Schedule {
    ScheduleMode mode = ScheduleMode::Practical;
    double delta = 0.0;
    double h = 0.0;
    /// h is zero, subnormal, or below machine epsilon, where lattice
    /// coordinates of O(1) supports can no longer be told apart.
    bool h_underflow = false;
};

/// delta(eps) and h(eps). The theoretical modes follow the exponentially small
/// spacings needed by the convergence estimates; Practical uses
/// delta = eps^0.2, h = eps^1.5.
inline Schedule schedule_parameters(double epsilon, ScheduleMode mode, double horizon, double norm_l1,
                                    ScheduleConstants k = {}) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("schedule_parameters: epsilon must lie in (0, 1)");
    Schedule s;
    s.mode = mode;
    switch (mode) {
        case ScheduleMode::TheoreticalL1:
            s.delta = std::pow(epsilon, k.sigma);
            s.h = std::pow(epsilon, 4) / std::exp(k.c1 * norm_l1 * horizon / (epsilon * epsilon));
            break;
        case ScheduleMode::TheoreticalFE:
            s.delta = std::pow(epsilon, k.sigma);
            s.h = k.c1 * std::pow(epsilon, 6) * std::exp(-k.c0 / (epsilon * epsilon));
            break;
        case ScheduleMode::Practical:
            s.delta = std::pow(epsilon, 0.2);
            s.h = std::pow(epsilon, 1.5);
            break;
    }
    s.h_underflow = !(s.h >= DBL_MIN) || s.h < DBL_EPSILON;
    return s;
}

}  // namespace vblob
