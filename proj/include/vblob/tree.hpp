#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vblob/kernels.hpp"
#include "vblob/vec2.hpp"

namespace vblob {

/// Barnes-Hut quadtree over blob positions for the regularized Biot-Savart sum.
///
/// With z = x1 + i x2, a point vortex gives u - i v = Gamma / (2 pi i (z - p)).
/// Each node stores the complex moments a_k = sum Gamma (p - c)^k, k < kOrder,
/// about the |Gamma|-weighted centroid c, and far cells are summed as
/// sum_k a_k / (z - c)^(k+1). Accepted cells lie outside twice the blob
/// support, where K_eps = K exactly for the compact profile.
class VortexTree {
public:
    static constexpr int kOrder = 4;

    VortexTree(std::span<const Vec2> positions, std::span<const double> circulations, const Mollifier& m,
               std::size_t leaf_size = 8)
        : mollifier_(m), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
        const std::size_t n = positions.size();
        pos_.assign(positions.begin(), positions.end());
        gam_.assign(circulations.begin(), circulations.end());
        if (n == 0) return;
        std::vector<std::uint32_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);

        Vec2 lo = pos_[0], hi = pos_[0];
        for (auto p : pos_) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
        const double side = std::max({hi.x - lo.x, hi.y - lo.y, 1e-300}) * (1.0 + 1e-12);
        nodes_.reserve(2 * n / leaf_size_ + 8);
        build(order, 0, n, lo, side, 0);

        // Store particles in tree order so leaves are contiguous.
        std::vector<Vec2> p2(n);
        std::vector<double> g2(n);
        for (std::size_t i = 0; i < n; ++i) {
            p2[i] = pos_[order[i]];
            g2[i] = gam_[order[i]];
        }
        pos_ = std::move(p2);
        gam_ = std::move(g2);
    }

    /// Velocity at x; cells of side s at distance d from x are replaced by
    /// their multipole sums when s < theta * d and no part of the cell lies
    /// within two core radii of x.
    Vec2 velocity(Vec2 x, double theta) const {
        Vec2 v{};
        if (nodes_.empty()) return v;
        const double near = 2.0 * mollifier_.support_radius();
        std::int32_t stack[256];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& nd = nodes_[static_cast<std::size_t>(stack[--top])];
            if (nd.leaf) {
                for (std::uint32_t k = nd.begin; k < nd.end; ++k) {
                    const Vec2 d = x - pos_[k];
                    v += (gam_[k] * mollifier_.kernel_factor(norm2(d))) * perp(d);
                }
                continue;
            }
            const double dx = std::max({nd.lo.x - x.x, 0.0, x.x - (nd.lo.x + nd.side)});
            const double dy = std::max({nd.lo.y - x.y, 0.0, x.y - (nd.lo.y + nd.side)});
            const double box_dist2 = dx * dx + dy * dy;
            const double d2 = norm2(x - nd.c_abs);
            if (box_dist2 >= near * near && nd.side * nd.side < theta * theta * d2) {
                const std::complex<double> inv = 1.0 / std::complex<double>(x.x - nd.c_abs.x, x.y - nd.c_abs.y);
                std::complex<double> pw = inv, sum = 0.0;
                for (int m = 0; m < kOrder; ++m) {
                    sum += nd.moment[m] * pw;
                    pw *= inv;
                }
                // u - i v = sum / (2 pi i), so u = Im(sum) / 2 pi, v = Re(sum) / 2 pi.
                v += Vec2{sum.imag(), sum.real()} * (1.0 / kTwoPi);
                continue;
            }
            for (int c = 3; c >= 0; --c)
                if (nd.child[c] >= 0) stack[top++] = nd.child[c];
        }
        return v;
    }

    std::size_t node_count() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Vec2 lo;
        double side;
        std::uint32_t begin, end;
        std::int32_t child[4] = {-1, -1, -1, -1};
        bool leaf = true;
        Vec2 c_abs{};
        std::complex<double> moment[kOrder]{};
    };

    std::int32_t build(std::vector<std::uint32_t>& order, std::size_t begin, std::size_t end, Vec2 lo, double side,
                       int depth) {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        Node fresh{};
        fresh.lo = lo;
        fresh.side = side;
        fresh.begin = static_cast<std::uint32_t>(begin);
        fresh.end = static_cast<std::uint32_t>(end);
        nodes_.push_back(fresh);
        {
            double ga = 0.0;
            Vec2 ca{};
            for (std::size_t k = begin; k < end; ++k) {
                const double g = std::abs(gam_[order[k]]);
                ga += g;
                ca += g * pos_[order[k]];
            }
            Node& nd = nodes_.back();
            nd.c_abs = ga != 0.0 ? (1.0 / ga) * ca : Vec2{lo.x + 0.5 * side, lo.y + 0.5 * side};
            for (std::size_t k = begin; k < end; ++k) {
                const Vec2 q = pos_[order[k]] - nd.c_abs;
                const std::complex<double> dq(q.x, q.y);
                std::complex<double> pw(gam_[order[k]], 0.0);
                for (int m = 0; m < kOrder; ++m) {
                    nd.moment[m] += pw;
                    pw *= dq;
                }
            }
        }
        if (end - begin <= leaf_size_ || depth >= 60) return id;

        const double half = 0.5 * side;
        const Vec2 mid{lo.x + half, lo.y + half};
        auto quadrant = [&](std::uint32_t i) {
            const Vec2 p = pos_[i];
            return (p.x >= mid.x ? 1 : 0) + (p.y >= mid.y ? 2 : 0);
        };
        std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
                         order.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](std::uint32_t a, std::uint32_t b) { return quadrant(a) < quadrant(b); });
        std::size_t start = begin;
        std::int32_t kids[4] = {-1, -1, -1, -1};
        for (int q = 0; q < 4; ++q) {
            std::size_t stop = start;
            while (stop < end && quadrant(order[stop]) == q) ++stop;
            if (stop > start) {
                const Vec2 clo{q & 1 ? mid.x : lo.x, q & 2 ? mid.y : lo.y};
                kids[q] = build(order, start, stop, clo, half, depth + 1);
            }
            start = stop;
        }
        Node& parent = nodes_[static_cast<std::size_t>(id)];
        parent.leaf = false;
        for (int q = 0; q < 4; ++q) parent.child[q] = kids[q];
        return id;
    }

    Mollifier mollifier_;
    std::size_t leaf_size_;
    std::vector<Vec2> pos_;
    std::vector<double> gam_;
    std::vector<Node> nodes_;
};

}  // namespace vblob
