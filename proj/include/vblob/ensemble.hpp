#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "vblob/errors.hpp"
#include "vblob/kernels.hpp"
#include "vblob/vec2.hpp"

namespace vblob {

struct LatticeIndex {
    long i1 = 0;
    long i2 = 0;
    friend bool operator==(LatticeIndex, LatticeIndex) = default;
};

/// One vortex core.
struct Blob {
    Vec2 position;
    double circulation;
    LatticeIndex index;
};

/// Method parameters shared by every blob in an ensemble.
struct BlobParams {
    double epsilon = 0.1;
    double delta = 0.1;
    double h = 0.1;
    Profile profile = Profile::Poly6;
    friend bool operator==(const BlobParams&, const BlobParams&) = default;
};

/// Particle state at one time instant. Circulations are fixed at
/// construction and shared between all states derived from this one.
class Ensemble {
public:
    Ensemble() : Ensemble({}, {}, BlobParams{}, 0.0) {}

    Ensemble(std::vector<Vec2> positions, std::vector<double> circulations, BlobParams params, double time,
             std::vector<LatticeIndex> indices = {})
        : positions_(std::move(positions)),
          circulations_(std::make_shared<const std::vector<double>>(std::move(circulations))),
          indices_(std::make_shared<const std::vector<LatticeIndex>>(std::move(indices))),
          params_(params),
          time_(time) {
        if (positions_.size() != circulations_->size())
            throw DomainError("ensemble: positions and circulations differ in length");
        if (!indices_->empty() && indices_->size() != positions_.size())
            throw DomainError("ensemble: lattice indices differ in length");
        if (!(params_.epsilon > 0.0)) throw DomainError("ensemble: epsilon must be positive");
    }

    std::size_t size() const noexcept { return positions_.size(); }
    bool empty() const noexcept { return positions_.empty(); }

    std::span<const Vec2> positions() const noexcept { return positions_; }
    std::span<const double> circulations() const noexcept { return *circulations_; }
    Vec2 position(std::size_t i) const { return positions_[i]; }
    double circulation(std::size_t i) const { return (*circulations_)[i]; }
    bool has_indices() const noexcept { return !indices_->empty(); }
    Blob blob(std::size_t i) const {
        return {positions_[i], (*circulations_)[i], has_indices() ? (*indices_)[i] : LatticeIndex{}};
    }

    const BlobParams& params() const noexcept { return params_; }
    double epsilon() const noexcept { return params_.epsilon; }
    double delta() const noexcept { return params_.delta; }
    double h() const noexcept { return params_.h; }
    Profile profile() const noexcept { return params_.profile; }
    double time() const noexcept { return time_; }

    Mollifier mollifier() const { return Mollifier(params_.profile, params_.epsilon); }
    RegularizedKernel kernel() const { return RegularizedKernel{mollifier()}; }

    /// Same blobs and circulations at new positions and time.
    Ensemble moved(std::vector<Vec2> positions, double time) const {
        if (positions.size() != positions_.size()) throw DomainError("ensemble: moved() changes blob count");
        Ensemble e(*this);
        e.positions_ = std::move(positions);
        e.time_ = time;
        return e;
    }

    Ensemble at_time(double time) const {
        Ensemble e(*this);
        e.time_ = time;
        return e;
    }

    /// Copy with every circulation negated (runs the dynamics backwards).
    Ensemble negated() const {
        std::vector<double> g(circulations_->begin(), circulations_->end());
        for (double& v : g) v = -v;
        return Ensemble(positions_, std::move(g), params_, time_, *indices_);
    }

    double total_abs_circulation() const {
        double s = 0.0;
        for (double g : *circulations_) s += std::abs(g);
        return s;
    }

    /// Centre of |circulation|; arithmetic mean of positions when all vanish.
    Vec2 center() const {
        Vec2 c{};
        double w = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            const double a = std::abs(circulation(i));
            c += a * positions_[i];
            w += a;
        }
        if (w > 0.0) return (1.0 / w) * c;
        c = {};
        for (auto p : positions_) c += p;
        return empty() ? c : (1.0 / static_cast<double>(size())) * c;
    }

    /// Twice the largest distance from center(): an upper bound on the diameter.
    double diameter_bound() const {
        const Vec2 c = center();
        double r = 0.0;
        for (auto p : positions_) r = std::max(r, norm(p - c));
        return 2.0 * r;
    }

    /// Bounding box of blob positions.
    std::pair<Vec2, Vec2> bounds() const {
        if (empty()) return {{0.0, 0.0}, {0.0, 0.0}};
        Vec2 lo = positions_[0], hi = positions_[0];
        for (auto p : positions_) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
        return {lo, hi};
    }

private:
    std::vector<Vec2> positions_;
    std::shared_ptr<const std::vector<double>> circulations_;
    std::shared_ptr<const std::vector<LatticeIndex>> indices_;
    BlobParams params_;
    double time_;
};

}  // namespace vblob
