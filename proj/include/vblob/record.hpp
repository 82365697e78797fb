#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "vblob/vec2.hpp"

namespace vblob {

/// Measured quantities at one observation time. Optional entries are only
/// present when the corresponding diagnostic ran.
struct DiagnosticsRecord {
    double time = 0.0;
    std::map<double, double> lp_norms;  // p -> ||w^eps||_{L^p}; infinity allowed
    std::optional<double> energy_core;
    std::optional<double> energy_tail;
    std::optional<double> energy_stream;  // -1/2 int psi w, same quantity by another route
    double total_circulation = 0.0;
    Vec2 linear_impulse{};
    double angular_impulse = 0.0;
    std::optional<double> f_eps_l1;
    std::optional<double> f_eps_l2;
    std::map<double, double> lagrangian_gap;  // p -> gap
    std::optional<double> serfati_residual;
    std::vector<std::pair<double, double>> equi_tail;  // radius -> mass outside
    std::optional<double> max_speed;
    std::optional<double> speed_bound;
};

}  // namespace vblob
