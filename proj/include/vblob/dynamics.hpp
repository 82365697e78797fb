#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vblob/ensemble.hpp"
#include "vblob/errors.hpp"
#include "vblob/parallel.hpp"
#include "vblob/record.hpp"
#include "vblob/tree.hpp"

namespace vblob {

enum class EvalMethod { Direct, Tree };

inline std::string_view method_name(EvalMethod m) { return m == EvalMethod::Direct ? "direct" : "tree"; }
inline EvalMethod parse_method(std::string_view s) {
    if (s == "direct") return EvalMethod::Direct;
    if (s == "tree") return EvalMethod::Tree;
    throw ConfigError("unknown evaluator method '" + std::string(s) + "'");
}

struct VelocityEvaluator {
    EvalMethod method = EvalMethod::Direct;
    double theta = 0.5;
};

/// Fixed-step classical RK4 from the ensemble's time to t_end; the last step
/// is shortened to land on t_end.
struct Integrator {
    double dt = 1e-2;
    double t_end = 1.0;

    std::size_t steps_from(double t0) const {
        if (!(dt > 0.0)) throw DomainError("integrator: dt must be positive");
        const double span = t_end - t0;
        if (span <= 0.0) return 0;
        return static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
    }
};

/// Default step min(1e-2, 0.1 eps^2 / ||w0||_1): keeps dt times the
/// C/eps^2 Lipschitz bound of the blob velocity at or below 0.1.
inline double default_dt(double epsilon, double norm_l1) {
    if (!(norm_l1 > 0.0)) return 1e-2;
    return std::min(1e-2, 0.1 * epsilon * epsilon / norm_l1);
}

/// v^eps(x) = sum_i Gamma_i K_eps(x - X_i).
inline Vec2 velocity_at(const Ensemble& e, Vec2 x) {
    const Mollifier m = e.mollifier();
    const auto pos = e.positions();
    const auto gam = e.circulations();
    Vec2 v{};
    for (std::size_t j = 0; j < pos.size(); ++j) {
        const Vec2 d = x - pos[j];
        v += (gam[j] * m.kernel_factor(norm2(d))) * perp(d);
    }
    return v;
}

/// Direct O(N^2) velocities of all blobs. In serial mode each pair is
/// evaluated once and applied to both blobs with opposite signs; otherwise a
/// parallel map over targets (self term included, it vanishes).
inline std::vector<Vec2> direct_velocity_all(const Ensemble& e) {
    const std::size_t n = e.size();
    std::vector<Vec2> v(n);
    const Mollifier m = e.mollifier();
    const auto pos = e.positions();
    const auto gam = e.circulations();
    if (!serial_mode()) {
        parallel_for(n, [&](std::size_t i) { v[i] = velocity_at(e, pos[i]); });
        return v;
    }
    std::vector<double> xs(n), ys(n), vx(n, 0.0), vy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = pos[i].x;
        ys[i] = pos[i].y;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = xs[i], yi = ys[i], gi = gam[i];
        double ax = 0.0, ay = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xi - xs[j], dy = yi - ys[j];
            const double c = m.kernel_factor(dx * dx + dy * dy);
            const double kx = -c * dy, ky = c * dx;
            ax += gam[j] * kx;
            ay += gam[j] * ky;
            vx[j] -= gi * kx;
            vy[j] -= gi * ky;
        }
        vx[i] += ax;
        vy[i] += ay;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = {vx[i], vy[i]};
    return v;
}

/// Barnes-Hut velocities of all blobs.
inline std::vector<Vec2> tree_velocity_all(const Ensemble& e, double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("tree_velocity_all: theta must lie in [0, 1]");
    const VortexTree tree(e.positions(), e.circulations(), e.mollifier());
    std::vector<Vec2> v(e.size());
    parallel_for(e.size(), [&](std::size_t i) { v[i] = tree.velocity(e.position(i), theta); });
    return v;
}

/// Velocity field of one ensemble snapshot, evaluated at blobs and at
/// arbitrary passive points with the same method.
class VelocityField {
public:
    VelocityField(const Ensemble& e, const VelocityEvaluator& ve) : e_(e), ve_(ve) {
        if (ve_.method == EvalMethod::Tree) tree_.emplace(e.positions(), e.circulations(), e.mollifier());
    }

    std::vector<Vec2> at_blobs() const {
        if (!tree_) return direct_velocity_all(e_);
        std::vector<Vec2> v(e_.size());
        parallel_for(e_.size(), [&](std::size_t i) { v[i] = tree_->velocity(e_.position(i), ve_.theta); });
        return v;
    }

    Vec2 at(Vec2 x) const { return tree_ ? tree_->velocity(x, ve_.theta) : velocity_at(e_, x); }

    std::vector<Vec2> at(std::span<const Vec2> xs) const {
        std::vector<Vec2> v(xs.size());
        parallel_for(xs.size(), [&](std::size_t i) { v[i] = at(xs[i]); });
        return v;
    }

private:
    const Ensemble& e_;
    VelocityEvaluator ve_;
    std::optional<VortexTree> tree_;
};

inline std::vector<Vec2> velocities_at(const Ensemble& e, std::span<const Vec2> targets, const VelocityEvaluator& ve) {
    return VelocityField(e, ve).at(targets);
}

/// One RK4 step of size dt for all blobs together. Optional passive markers
/// are advanced with the same stages against the stage blob positions and
/// never influence the blobs. `step_index` labels blow-up diagnostics.
inline Ensemble step(const Ensemble& e, double dt, const VelocityEvaluator& ve, std::vector<Vec2>* markers = nullptr,
                     std::size_t step_index = 0) {
    const std::size_t n = e.size();
    const std::size_t nm = markers ? markers->size() : 0;
    const auto x0 = e.positions();
    const std::span<const Vec2> m0 = markers ? std::span<const Vec2>(*markers) : std::span<const Vec2>();

    std::vector<Vec2> xs(x0.begin(), x0.end()), ms(m0.begin(), m0.end());
    std::vector<Vec2> acc_x(n), acc_m(nm);
    const double c_stage[4] = {0.0, 0.5, 0.5, 1.0};
    const double w_stage[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
    std::vector<Vec2> kx, km;
    for (int s = 0; s < 4; ++s) {
        if (s > 0) {
            for (std::size_t i = 0; i < n; ++i) xs[i] = x0[i] + (c_stage[s] * dt) * kx[i];
            for (std::size_t i = 0; i < nm; ++i) ms[i] = m0[i] + (c_stage[s] * dt) * km[i];
        }
        const Ensemble stage = e.moved(xs, e.time() + c_stage[s] * dt);
        const VelocityField field(stage, ve);
        kx = field.at_blobs();
        if (nm) km = field.at(ms);
        for (std::size_t i = 0; i < n; ++i) acc_x[i] += w_stage[s] * kx[i];
        for (std::size_t i = 0; i < nm; ++i) acc_m[i] += w_stage[s] * km[i];
    }
    std::vector<Vec2> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = x0[i] + dt * acc_x[i];
        if (!is_finite(out[i])) throw BlowUpError(i, step_index);
    }
    for (std::size_t i = 0; i < nm; ++i) {
        (*markers)[i] = m0[i] + dt * acc_m[i];
        if (!is_finite((*markers)[i])) throw BlowUpError(i, step_index, "marker");
    }
    return e.moved(std::move(out), e.time() + dt);
}

inline Ensemble step(const Ensemble& e, const Integrator& itg, const VelocityEvaluator& ve) {
    return step(e, itg.dt, ve);
}

/// Fills fields of the record for the given state; markers are the current
/// passive positions (empty when none are carried).
using Observer = std::function<void(const Ensemble&, std::span<const Vec2> markers, DiagnosticsRecord&)>;

struct RunResult {
    Ensemble final_state;
    std::vector<Vec2> markers;
    std::vector<DiagnosticsRecord> records;
    std::size_t steps_taken = 0;
    std::optional<BlowUpError> error;
};

/// Advances e0 to itg.t_end. Observers run at the start, every
/// `observe_every` steps and at the end (once per time). A blow-up stops the
/// run and is reported with the records collected so far.
inline RunResult run(const Ensemble& e0, const Integrator& itg, const VelocityEvaluator& ve,
                     std::span<const Observer> observers, std::size_t observe_every,
                     std::vector<Vec2> markers = {}) {
    if (observe_every < 1) throw DomainError("run: observe_every must be >= 1");
    RunResult res{e0, std::move(markers), {}, 0, std::nullopt};
    const double t0 = e0.time();
    const std::size_t n_steps = itg.steps_from(t0);

    auto observe = [&]() {
        if (observers.empty()) return;
        DiagnosticsRecord rec;
        rec.time = res.final_state.time();
        for (const auto& obs : observers) obs(res.final_state, res.markers, rec);
        res.records.push_back(std::move(rec));
    };

    observe();
    for (std::size_t k = 0; k < n_steps; ++k) {
        const bool last = k + 1 == n_steps;
        const double dt = last ? (itg.t_end - t0) - static_cast<double>(n_steps - 1) * itg.dt : itg.dt;
        try {
            Ensemble next = step(res.final_state, dt, ve, res.markers.empty() ? nullptr : &res.markers, k);
            res.final_state = last ? next.at_time(itg.t_end) : std::move(next);
        } catch (const BlowUpError& err) {
            res.error = err;
            return res;
        }
        res.steps_taken = k + 1;
        if ((k + 1) % observe_every == 0 || last) observe();
    }
    return res;
}

}  // namespace vblob
