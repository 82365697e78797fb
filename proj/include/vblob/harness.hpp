#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "vblob/config.hpp"
#include "vblob/csv.hpp"
#include "vblob/diagnostics.hpp"
#include "vblob/discretization.hpp"
#include "vblob/dynamics.hpp"
#include "vblob/serfati.hpp"
#include "vblob/snapshot.hpp"
#include "vblob/transport.hpp"

namespace vblob {

/// Lattices with more cells than this are refused as a configuration error.
inline constexpr double kMaxBlobs = 2e7;

/// Initial state of a configured run.
struct PreparedRun {
    Ensemble initial;
    Schedule schedule;
    double dt = 0.0;
    double norm_l1 = 0.0;  // ||w0||_1, or sum |Gamma| for point blobs
    std::optional<MollifiedVorticity> mollified;
};

inline PreparedRun prepare(const RunConfig& c) {
    PreparedRun p;
    if (c.blobs) {
        p.schedule.mode = c.schedule;
        p.schedule.delta = c.delta.value_or(0.0);
        p.schedule.h = c.h.value_or(0.0);
        p.initial = Ensemble(c.blobs->positions, c.blobs->circulations,
                             BlobParams{c.epsilon, p.schedule.delta, p.schedule.h, c.profile}, 0.0);
        p.norm_l1 = p.initial.total_abs_circulation();
        if (p.norm_l1 == 0.0) throw DegenerateInputError("no cells: every blob has zero circulation");
    } else {
        const InitialVorticity& w0 = *c.initial;
        p.norm_l1 = w0.norm_l1();
        if (!(p.norm_l1 > 0.0)) throw DegenerateInputError("no cells: initial vorticity is identically zero");
        if (!(c.epsilon < 1.0) && !(c.delta && c.h))
            throw ConfigError("epsilon must lie in (0, 1) unless method.delta and method.h are both set", 0,
                              "method.epsilon");
        if (c.epsilon < 1.0)
            p.schedule = schedule_parameters(c.epsilon, c.schedule, c.t_end, p.norm_l1, c.constants);
        p.schedule.mode = c.schedule;
        if (c.delta) p.schedule.delta = *c.delta;
        if (c.h) {
            p.schedule.h = *c.h;
            p.schedule.h_underflow = !(p.schedule.h >= DBL_EPSILON);
        }
        if (p.schedule.h_underflow)
            throw DegenerateInputError("lattice spacing h underflows for this schedule; set method.h or use the "
                                       "practical schedule");
        const double R = w0.support_radius() + p.schedule.delta;
        if (4.0 * R * R / (p.schedule.h * p.schedule.h) > kMaxBlobs)
            throw ConfigError("lattice spacing h gives more than 2e7 cells", 0, "method.h");
        p.mollified = mollify_initial(w0, p.schedule.delta, c.profile);
        p.initial = tile_and_weight(*p.mollified, p.schedule.h, c.epsilon, c.profile);
    }
    p.dt = c.dt.value_or(default_dt(c.epsilon, p.norm_l1));
    return p;
}

inline double diagnostic_spacing(const RunConfig& c) { return c.diagnostics.spacing.value_or(0.125 * c.epsilon); }

/// Summary line set written beside the initial snapshot.
inline std::string summary_text(const RunConfig& c, const PreparedRun& p) {
    std::ostringstream os;
    const Impulses imp = impulses(p.initial);
    os << "config_hash=" << c.hash << '\n'
       << "schedule=" << schedule_name(p.schedule.mode) << '\n'
       << "epsilon=" << format_double(c.epsilon) << '\n'
       << "delta=" << format_double(p.schedule.delta) << '\n'
       << "h=" << format_double(p.schedule.h) << '\n'
       << "dt=" << format_double(p.dt) << '\n'
       << "n_blobs=" << p.initial.size() << '\n'
       << "total_circulation=" << format_double(imp.total_circulation) << '\n';
    if (c.initial)
        for (double q : c.diagnostics.norms)
            os << "w0_l" << number_label(q) << "=" << format_double(c.initial->norm_lp(q)) << '\n';
    if (!p.initial.empty()) {
        const GridField w = reconstruct_vorticity(p.initial, diagnostic_grid(p.initial, diagnostic_spacing(c)));
        for (double q : c.diagnostics.norms)
            os << "w_eps_l" << number_label(q) << "=" << format_double(lp_norm(w, q)) << '\n';
    }
    return os.str();
}

struct SimulationResult {
    PreparedRun prepared;
    RunResult run;
    std::vector<std::string> warnings;
};

/// Runs a configured simulation with every configured observer.
inline SimulationResult simulate(const RunConfig& c) {
    SimulationResult out;
    out.prepared = prepare(c);
    const PreparedRun& p = out.prepared;
    const auto& d = c.diagnostics;
    const double spacing = diagnostic_spacing(c);
    require_resolution(spacing, c.epsilon);
    const VelocityEvaluator ve = c.evaluator;

    std::vector<Observer> obs;
    obs.push_back([&, spacing](const Ensemble& e, std::span<const Vec2>, DiagnosticsRecord& r) {
        const Impulses imp = impulses(e);
        r.total_circulation = imp.total_circulation;
        r.linear_impulse = imp.linear;
        r.angular_impulse = imp.angular;
        if (d.norms.empty() && !d.speed_bound) return;
        const GridField w = reconstruct_vorticity(e, diagnostic_grid(e, spacing));
        for (double q : d.norms) r.lp_norms[q] = lp_norm(w, q);
        if (d.speed_bound) {
            const SpeedBound sb = speed_bound_check(e, lp_norm(w, INFINITY), lp_norm(w, 1.0), ve);
            r.max_speed = sb.max_speed;
            r.speed_bound = sb.bound;
        }
    });

    if (d.energy) {
        if (std::abs(impulses(p.initial).total_circulation) > kZeroMeanTolerance * p.initial.total_abs_circulation()) {
            out.warnings.push_back("energy skipped: total circulation is not zero, so the energy is infinite");
        } else {
            const double rs = p.initial.mollifier().support_radius();
            const double base = d.energy_radius > 0.0
                                    ? d.energy_radius
                                    : std::max(8.0 * p.initial.diameter_bound(), 4.0 * rs + p.initial.diameter_bound());
            obs.push_back([base, spacing, ve](const Ensemble& e, std::span<const Vec2>, DiagnosticsRecord& r) {
                const double R = std::max(base, 4.0 * e.diameter_bound());
                const EnergyEstimate en = kinetic_energy(e, R, spacing, ve);
                r.energy_core = en.core;
                r.energy_tail = en.tail;
                r.energy_stream = kinetic_energy_stream(e, spacing);
            });
        }
    }
    if (d.f_eps)
        obs.push_back([spacing, ve](const Ensemble& e, std::span<const Vec2>, DiagnosticsRecord& r) {
            const ConsistencyNorms n = consistency_error_norms(e, spacing, ve);
            r.f_eps_l1 = n.l1;
            r.f_eps_l2 = n.l2;
        });

    std::vector<Vec2> markers;
    TracerCloud cloud;
    if ((d.tracer_pitch || d.tracer_pitch_auto) && p.mollified) {
        const double pitch = d.tracer_pitch ? *d.tracer_pitch : std::min(0.25 * c.epsilon, 0.5 * p.schedule.h);
        cloud = seed_tracers(*p.mollified, c.epsilon, pitch);
        markers = cloud.current;
        obs.push_back([&cloud, &d, spacing](const Ensemble& e, std::span<const Vec2> m, DiagnosticsRecord& r) {
            TracerCloud now = cloud;
            now.current.assign(m.begin(), m.end());
            const GridSpec g = transport_grid(e, now, spacing);
            for (double q : d.gap_norms) r.lagrangian_gap[q] = lagrangian_gap(e, now, q, g);
        });
    } else if (d.tracer_pitch || d.tracer_pitch_auto) {
        out.warnings.push_back("transport comparison skipped: point-blob runs have no mollified datum");
    }

    if (!d.equi_radii.empty())
        obs.push_back([&d](const Ensemble& e, std::span<const Vec2>, DiagnosticsRecord& r) {
            const auto tail = equi_tail_profile(e, d.equi_radii);
            for (std::size_t k = 0; k < tail.size(); ++k) r.equi_tail.emplace_back(d.equi_radii[k], tail[k]);
        });

    std::vector<Ensemble> series;
    if (d.serfati)
        obs.push_back([&series](const Ensemble& e, std::span<const Vec2>, DiagnosticsRecord&) { series.push_back(e); });

    out.run = run(p.initial, Integrator{p.dt, c.t_end}, ve, obs, c.observe_every, std::move(markers));

    if (d.serfati && !series.empty()) {
        const double rs = p.initial.mollifier().support_radius();
        Vec2 lo = series[0].bounds().first, hi = series[0].bounds().second;
        for (const auto& e : series) {
            auto [a, b] = e.bounds();
            lo = {std::min(lo.x, a.x), std::min(lo.y, a.y)};
            hi = {std::max(hi.x, b.x), std::max(hi.y, b.y)};
        }
        std::vector<Vec2> pts = d.serfati_points;
        if (pts.empty()) pts.push_back(p.initial.center());
        for (auto x : pts) {
            lo = {std::min(lo.x, x.x), std::min(lo.y, x.y)};
            hi = {std::max(hi.x, x.x), std::max(hi.y, x.y)};
        }
        const double margin = rs + std::max(2.0 * d.serfati_cutoff, d.serfati_margin) + spacing;
        const GridSpec g = GridSpec::covering({lo.x - margin, lo.y - margin}, {hi.x + margin, hi.y + margin}, spacing);
        for (std::size_t k = 0; k < out.run.records.size() && k < series.size(); ++k)
            out.run.records[k].serfati_residual =
                serfati_residual(std::span<const Ensemble>(series.data(), k + 1), d.serfati_cutoff, g, pts);
    }
    return out;
}

/// Diagnostics table: one row per record, every configured column present.
inline void write_records_csv(std::ostream& os, const RunConfig& c, const PreparedRun& p,
                              const std::vector<DiagnosticsRecord>& records) {
    const auto& d = c.diagnostics;
    std::vector<std::string> head{"config_hash", "schedule", "epsilon", "delta", "h", "dt", "time"};
    for (double q : d.norms) head.push_back("lp_" + number_label(q));
    if (d.energy) {
        head.push_back("energy_core");
        head.push_back("energy_tail");
        head.push_back("energy_stream");
    }
    for (const char* k : {"total_circulation", "linear_impulse_x", "linear_impulse_y", "angular_impulse"})
        head.push_back(k);
    if (d.f_eps) {
        head.push_back("f_eps_l1");
        head.push_back("f_eps_l2");
    }
    const bool gap = d.tracer_pitch || d.tracer_pitch_auto;
    if (gap)
        for (double q : d.gap_norms) head.push_back("lagrangian_gap_" + number_label(q));
    if (d.serfati) head.push_back("serfati_residual");
    for (double r : d.equi_radii) head.push_back("equi_tail_" + number_label(r));
    if (d.speed_bound) {
        head.push_back("max_speed");
        head.push_back("speed_bound");
    }
    write_csv_row(os, head);

    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : records) {
        std::vector<std::string> row{c.hash,
                                     std::string(schedule_name(p.schedule.mode)),
                                     format_double(c.epsilon),
                                     format_double(p.schedule.delta),
                                     format_double(p.schedule.h),
                                     format_double(p.dt),
                                     format_double(r.time)};
        for (double q : d.norms) {
            auto it = r.lp_norms.find(q);
            row.push_back(it == r.lp_norms.end() ? std::string() : format_double(it->second));
        }
        if (d.energy) {
            row.push_back(opt(r.energy_core));
            row.push_back(opt(r.energy_tail));
            row.push_back(opt(r.energy_stream));
        }
        row.push_back(format_double(r.total_circulation));
        row.push_back(format_double(r.linear_impulse.x));
        row.push_back(format_double(r.linear_impulse.y));
        row.push_back(format_double(r.angular_impulse));
        if (d.f_eps) {
            row.push_back(opt(r.f_eps_l1));
            row.push_back(opt(r.f_eps_l2));
        }
        if (gap)
            for (double q : d.gap_norms) {
                auto it = r.lagrangian_gap.find(q);
                row.push_back(it == r.lagrangian_gap.end() ? std::string() : format_double(it->second));
            }
        if (d.serfati) row.push_back(opt(r.serfati_residual));
        for (double rad : d.equi_radii) {
            auto it = std::find_if(r.equi_tail.begin(), r.equi_tail.end(), [&](const auto& pr) { return pr.first == rad; });
            row.push_back(it == r.equi_tail.end() ? std::string() : format_double(it->second));
        }
        if (d.speed_bound) {
            row.push_back(opt(r.max_speed));
            row.push_back(opt(r.speed_bound));
        }
        write_csv_row(os, row);
    }
}

/// Prepares `dir` for outputs of config `c`. A directory holding a config
/// with a different hash is refused; an identical one is overwritten.
inline void claim_output_dir(const std::string& dir, const RunConfig& c) {
    namespace fs = std::filesystem;
    const fs::path cfg = fs::path(dir) / "config.txt";
    if (fs::exists(cfg)) {
        std::ifstream in(cfg, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        if (fnv1a_hex(ss.str()) != c.hash)
            throw ConfigError("output directory '" + dir + "' holds outputs of a different config; refusing to overwrite",
                              0, "output.dir");
    }
    fs::create_directories(dir);
    std::ofstream out(cfg, std::ios::binary);
    if (!out) throw ConfigError("cannot write to output directory '" + dir + "'", 0, "output.dir");
    out << c.text;
}

// --- convergence study ---------------------------------------------------

struct StudyRow {
    double epsilon = 0.0;
    std::vector<std::optional<double>> values;  // one per quantity
    std::string error;                          // non-empty when the member run failed
};

struct StudyResult {
    std::vector<std::string> quantities;
    std::vector<StudyRow> rows;
    std::vector<bool> pass;  // per quantity
    bool all_pass = false;
    std::optional<double> failing_epsilon;
};

namespace detail {

inline bool parse_quantity(const std::string& q, std::string& base, double& p) {
    p = 0.0;
    if (q == "f_eps_l1" || q == "f_eps_l2" || q == "energy_drift") {
        base = q;
        return true;
    }
    for (const char* pre : {"lagrangian_gap_", "lp_norm_"}) {
        const std::string s(pre);
        if (q.rfind(s, 0) == 0 && q.size() > s.size()) {
            base = s.substr(0, s.size() - 1);
            try {
                p = KeyValueFile::to_double(q.substr(s.size()), 0, q);
            } catch (const ConfigError&) {
                return false;
            }
            return p >= 1.0;
        }
    }
    return false;
}

}  // namespace detail

inline void validate_study(const RunConfig& c) {
    const auto& s = c.study;
    if (s.epsilons.size() < 3) throw ConfigError("study.epsilons needs at least three values", s.epsilons_line, "study.epsilons");
    for (std::size_t k = 0; k < s.epsilons.size(); ++k) {
        if (!(s.epsilons[k] > 0.0 && s.epsilons[k] < 1.0))
            throw ConfigError("study.epsilons must lie in (0, 1)", s.epsilons_line, "study.epsilons");
        if (k && !(s.epsilons[k] < s.epsilons[k - 1]))
            throw ConfigError("study.epsilons must be strictly decreasing", s.epsilons_line, "study.epsilons");
    }
    if (s.quantities.empty()) throw ConfigError("study.quantities is empty", s.quantities_line, "study.quantities");
    for (const auto& q : s.quantities) {
        std::string base;
        double p;
        if (!detail::parse_quantity(q, base, p))
            throw ConfigError("unknown study quantity '" + q + "'", s.quantities_line, "study.quantities");
    }
}

/// Runs the base config once per epsilon and judges each quantity: strictly
/// decreasing across the list, or for energy_drift, below the threshold.
inline StudyResult run_study(const RunConfig& base, const std::function<void(const std::string&)>& log = {}) {
    validate_study(base);
    StudyResult res;
    res.quantities = base.study.quantities;

    RunConfig c = base;
    for (const auto& q : res.quantities) {
        std::string b;
        double p;
        detail::parse_quantity(q, b, p);
        if (b == "f_eps_l1" || b == "f_eps_l2") c.diagnostics.f_eps = true;
        if (b == "energy_drift") c.diagnostics.energy = true;
        if (b == "lagrangian_gap") {
            if (!c.diagnostics.tracer_pitch) c.diagnostics.tracer_pitch_auto = true;
            if (std::find(c.diagnostics.gap_norms.begin(), c.diagnostics.gap_norms.end(), p) == c.diagnostics.gap_norms.end())
                c.diagnostics.gap_norms.push_back(p);
        }
        if (b == "lp_norm" &&
            std::find(c.diagnostics.norms.begin(), c.diagnostics.norms.end(), p) == c.diagnostics.norms.end())
            c.diagnostics.norms.push_back(p);
    }

    for (double eps : base.study.epsilons) {
        c.epsilon = eps;
        c.diagnostics.spacing = base.diagnostics.spacing ? std::optional<double>(std::min(*base.diagnostics.spacing, 0.25 * eps))
                                                         : std::nullopt;
        StudyRow row;
        row.epsilon = eps;
        if (log) log("study member epsilon=" + format_double(eps));
        try {
            const SimulationResult sim = simulate(c);
            if (sim.run.error) throw std::runtime_error(sim.run.error->what());
            const auto& recs = sim.run.records;
            const DiagnosticsRecord& last = recs.back();
            for (const auto& q : res.quantities) {
                std::string b;
                double p;
                detail::parse_quantity(q, b, p);
                std::optional<double> v;
                if (b == "f_eps_l1") v = last.f_eps_l1;
                else if (b == "f_eps_l2") v = last.f_eps_l2;
                else if (b == "lagrangian_gap") {
                    if (auto it = last.lagrangian_gap.find(p); it != last.lagrangian_gap.end()) v = it->second;
                } else if (b == "lp_norm") {
                    if (auto it = last.lp_norms.find(p); it != last.lp_norms.end()) v = it->second;
                } else if (b == "energy_drift" && recs.front().energy_core) {
                    const double e0 = *recs.front().energy_core;
                    double m = 0.0;
                    for (const auto& r : recs) m = std::max(m, std::abs(*r.energy_core - e0) / std::abs(e0));
                    v = m;
                }
                if (!v) throw std::runtime_error("quantity '" + q + "' was not measured");
                row.values.push_back(v);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
            row.values.assign(res.quantities.size(), std::nullopt);
            if (!res.failing_epsilon) res.failing_epsilon = eps;
        }
        res.rows.push_back(std::move(row));
    }

    res.all_pass = !res.failing_epsilon;
    for (std::size_t qi = 0; qi < res.quantities.size(); ++qi) {
        bool ok = !res.failing_epsilon;
        const bool drift = res.quantities[qi] == "energy_drift";
        for (std::size_t k = 0; ok && k < res.rows.size(); ++k) {
            const auto& v = res.rows[k].values[qi];
            if (!v) ok = false;
            else if (drift) ok = *v <= base.study.energy_threshold;
            else if (k > 0) ok = *v < *res.rows[k - 1].values[qi];
        }
        res.pass.push_back(ok);
        res.all_pass = res.all_pass && ok;
    }
    return res;
}

inline void write_study_csv(std::ostream& os, const RunConfig& c, const StudyResult& s) {
    std::vector<std::string> head{"config_hash", "epsilon"};
    for (const auto& q : s.quantities) head.push_back(q);
    head.push_back("error");
    write_csv_row(os, head);
    for (const auto& r : s.rows) {
        std::vector<std::string> row{c.hash, format_double(r.epsilon)};
        for (const auto& v : r.values) row.push_back(v ? format_double(*v) : std::string());
        row.push_back(r.error);
        write_csv_row(os, row);
    }
}

}  // namespace vblob
