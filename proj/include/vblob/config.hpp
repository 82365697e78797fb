#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vblob/discretization.hpp"
#include "vblob/dynamics.hpp"
#include "vblob/errors.hpp"
#include "vblob/grid.hpp"
#include "vblob/initial_vorticity.hpp"

namespace vblob {

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Flat `section.key = value` text. `#` starts a comment; blank lines are
/// ignored; keys may appear once.
class KeyValueFile {
public:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };

    static KeyValueFile parse(const std::string& text) {
        KeyValueFile f;
        std::istringstream is(text);
        std::string raw;
        std::size_t lineno = 0;
        while (std::getline(is, raw)) {
            ++lineno;
            const auto hash = raw.find('#');
            std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key.empty() || key.find('.') == std::string::npos || key.find(' ') != std::string::npos)
                throw ConfigError("keys must look like section.key", lineno, key);
            if (f.entries_.count(key)) throw ConfigError("duplicate key", lineno, key);
            f.entries_[key] = {val, lineno};
        }
        return f;
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::optional<Entry> take(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        used_.insert(key);
        return it->second;
    }

    std::string str(const std::string& key, const std::string& fallback) {
        auto e = take(key);
        return e ? e->value : fallback;
    }

    double num(const std::string& key, double fallback) {
        auto e = take(key);
        return e ? to_double(e->value, e->line, key) : fallback;
    }

    std::optional<double> opt_num(const std::string& key) {
        auto e = take(key);
        if (!e) return std::nullopt;
        return to_double(e->value, e->line, key);
    }

    long integer(const std::string& key, long fallback) {
        auto e = take(key);
        if (!e) return fallback;
        const double v = to_double(e->value, e->line, key);
        if (v != std::floor(v) || std::abs(v) > 1e15) throw ConfigError("expected an integer", e->line, key);
        return static_cast<long>(v);
    }

    bool flag(const std::string& key, bool fallback) {
        auto e = take(key);
        if (!e) return fallback;
        if (e->value == "true" || e->value == "on" || e->value == "1") return true;
        if (e->value == "false" || e->value == "off" || e->value == "0") return false;
        throw ConfigError("expected true or false", e->line, key);
    }

    std::vector<double> list(const std::string& key, std::vector<double> fallback) {
        auto e = take(key);
        if (!e) return fallback;
        std::vector<double> out;
        std::string s = e->value;
        for (char& c : s)
            if (c == ',' || c == ';') c = ' ';
        std::istringstream is(s);
        std::string tok;
        while (is >> tok) out.push_back(to_double(tok, e->line, key));
        return out;
    }

    Vec2 vec(const std::string& key, Vec2 fallback) {
        if (!has(key)) return fallback;
        const std::size_t line = entries_.at(key).line;
        auto v = list(key, {});
        if (v.size() != 2) throw ConfigError("expected two numbers", line, key);
        return {v[0], v[1]};
    }

    std::size_t line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    /// Throws on the first key that no getter consumed.
    void reject_unused() const {
        const Entry* first = nullptr;
        std::string name;
        for (const auto& [k, e] : entries_)
            if (!used_.count(k) && (!first || e.line < first->line)) {
                first = &e;
                name = k;
            }
        if (first) throw ConfigError("unknown key", first->line, name);
    }

    static double to_double(const std::string& s, std::size_t line, const std::string& key) {
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::logic_error&) {
            throw ConfigError("expected a number, got '" + s + "'", line, key);
        }
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, Entry> entries_;
    std::set<std::string> used_;
};

/// Explicit point blobs given as `x y gamma` triples.
struct PointBlobs {
    std::vector<Vec2> positions;
    std::vector<double> circulations;
};

struct DiagnosticsOptions {
    std::vector<double> norms{1.0, 2.0};
    std::optional<double> spacing;  // default epsilon / 4
    bool energy = false;
    double energy_radius = 0.0;  // 0: eight ensemble diameters, at least 4 support radii
    bool f_eps = false;
    std::optional<double> tracer_pitch;  // absent: no transport comparison
    bool tracer_pitch_auto = false;
    std::vector<double> gap_norms{1.0};
    std::vector<double> equi_radii;
    bool speed_bound = false;
    bool serfati = false;
    double serfati_cutoff = 0.5;
    double serfati_margin = 3.0;
    std::vector<Vec2> serfati_points;  // empty: initial ensemble centre
};

struct StudyOptions {
    std::vector<double> epsilons;
    std::vector<std::string> quantities;
    double energy_threshold = 1e-3;
    std::size_t epsilons_line = 0;  // source lines, for error messages
    std::size_t quantities_line = 0;
};

/// Everything needed to reproduce one run. `text` is the verbatim source.
struct RunConfig {
    std::string text;
    std::string hash;

    std::optional<InitialVorticity> initial;
    std::optional<PointBlobs> blobs;

    double epsilon = 0.1;
    Profile profile = Profile::Poly6;
    ScheduleMode schedule = ScheduleMode::Practical;
    ScheduleConstants constants;
    std::optional<double> delta;
    std::optional<double> h;

    std::optional<double> dt;
    double t_end = 0.0;
    VelocityEvaluator evaluator;
    std::size_t observe_every = 1;
    DiagnosticsOptions diagnostics;
    std::string output_dir = "out";
    long rng_seed = 0;

    StudyOptions study;
};

namespace detail {

inline InitialVorticity parse_initial(KeyValueFile& f, const std::string& kind, std::size_t kind_line) {
    const Vec2 center = f.vec("initial.center", {0.0, 0.0});
    const double amplitude = f.num("initial.amplitude", 1.0);
    try {
        if (kind == "patch") return InitialVorticity(Patch{amplitude, f.num("initial.radius", 1.0), center});
        if (kind == "gaussian_dipole") {
            GaussianDipole d;
            d.amplitude = amplitude;
            d.center = center;
            d.separation = f.num("initial.separation", d.separation);
            d.core = f.num("initial.core", d.core);
            d.truncation = f.num("initial.truncation", d.truncation);
            return InitialVorticity(d);
        }
        if (kind == "power_spike")
            return InitialVorticity(
                PowerSpike{amplitude, f.num("initial.exponent_q", 4.0), f.num("initial.radius", 1.0), center});
        if (kind == "custom_grid") {
            const auto path = f.take("initial.grid_file");
            if (!path) throw ConfigError("custom_grid needs initial.grid_file", kind_line, "initial.grid_file");
            GridField g = read_grid_field_file(path->value);
            if (amplitude != 1.0)
                for (double& v : g.values) v *= amplitude;
            return InitialVorticity(CustomGrid{std::move(g)});
        }
    } catch (const ConfigError& e) {
        if (e.line() != 0) throw;
        throw ConfigError(e.what(), kind_line, "initial.kind");
    }
    throw ConfigError("unknown initial.kind '" + kind + "'", kind_line, "initial.kind");
}

inline PointBlobs parse_blobs(KeyValueFile& f, std::size_t kind_line) {
    const std::size_t line = f.line_of("initial.blobs");
    const auto v = f.list("initial.blobs", {});
    if (v.empty() || v.size() % 3 != 0)
        throw ConfigError("initial.blobs needs 'x y gamma' triples", line ? line : kind_line, "initial.blobs");
    PointBlobs b;
    for (std::size_t k = 0; k < v.size(); k += 3) {
        b.positions.push_back({v[k], v[k + 1]});
        b.circulations.push_back(v[k + 2]);
    }
    return b;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    KeyValueFile f = KeyValueFile::parse(text);
    RunConfig c;
    c.text = text;
    c.hash = fnv1a_hex(text);

    const auto kind = f.take("initial.kind");
    if (!kind) throw ConfigError("missing initial.kind", 0, "initial.kind");
    if (kind->value == "blobs")
        c.blobs = detail::parse_blobs(f, kind->line);
    else
        c.initial = detail::parse_initial(f, kind->value, kind->line);

    auto wrap = [&](const std::string& key, auto&& fn) {
        try {
            return fn();
        } catch (const ConfigError& e) {
            if (e.line() != 0) throw;
            throw ConfigError(e.what(), f.line_of(key), key);
        }
    };

    c.epsilon = f.num("method.epsilon", c.epsilon);
    if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive", f.line_of("method.epsilon"), "method.epsilon");
    const std::string prof = f.str("method.profile", "poly6");
    c.profile = wrap("method.profile", [&] { return parse_profile(prof); });
    const std::string sched = f.str("method.schedule", "practical");
    c.schedule = wrap("method.schedule", [&] { return parse_schedule(sched); });
    c.constants.c0 = f.num("method.c0", c.constants.c0);
    c.constants.c1 = f.num("method.c1", c.constants.c1);
    c.constants.sigma = f.num("method.sigma", c.constants.sigma);
    c.delta = f.opt_num("method.delta");
    c.h = f.opt_num("method.h");
    if (c.delta && !(*c.delta > 0.0)) throw ConfigError("delta must be positive", f.line_of("method.delta"), "method.delta");
    if (c.h && !(*c.h > 0.0)) throw ConfigError("h must be positive", f.line_of("method.h"), "method.h");

    c.dt = f.opt_num("integrator.dt");
    if (c.dt && !(*c.dt > 0.0)) throw ConfigError("dt must be positive", f.line_of("integrator.dt"), "integrator.dt");
    c.t_end = f.num("integrator.t_end", 0.0);
    if (!(c.t_end >= 0.0)) throw ConfigError("t_end must be nonnegative", f.line_of("integrator.t_end"), "integrator.t_end");

    const std::string meth = f.str("evaluator.method", "direct");
    c.evaluator.method = wrap("evaluator.method", [&] { return parse_method(meth); });
    c.evaluator.theta = f.num("evaluator.theta", c.evaluator.theta);
    if (!(c.evaluator.theta >= 0.0 && c.evaluator.theta <= 1.0))
        throw ConfigError("theta must lie in [0, 1]", f.line_of("evaluator.theta"), "evaluator.theta");
    const long every = f.integer("observe.every", 1);
    if (every < 1) throw ConfigError("observe.every must be >= 1", f.line_of("observe.every"), "observe.every");
    c.observe_every = static_cast<std::size_t>(every);

    auto& d = c.diagnostics;
    d.norms = f.list("diagnostics.norms", d.norms);
    for (double p : d.norms)
        if (!(p >= 1.0)) throw ConfigError("norm exponents must be >= 1", f.line_of("diagnostics.norms"), "diagnostics.norms");
    d.spacing = f.opt_num("diagnostics.spacing");
    d.energy = f.flag("diagnostics.energy", d.energy);
    d.energy_radius = f.num("diagnostics.energy_radius", d.energy_radius);
    d.f_eps = f.flag("diagnostics.f_eps", d.f_eps);
    if (const auto tp = f.take("diagnostics.tracer_pitch")) {
        if (tp->value == "auto")
            d.tracer_pitch_auto = true;
        else
            d.tracer_pitch = KeyValueFile::to_double(tp->value, tp->line, "diagnostics.tracer_pitch");
    }
    d.gap_norms = f.list("diagnostics.gap_norms", d.gap_norms);
    d.equi_radii = f.list("diagnostics.equi_radii", d.equi_radii);
    d.speed_bound = f.flag("diagnostics.speed_bound", d.speed_bound);
    d.serfati = f.flag("diagnostics.serfati", d.serfati);
    d.serfati_cutoff = f.num("diagnostics.serfati_cutoff", d.serfati_cutoff);
    d.serfati_margin = f.num("diagnostics.serfati_margin", d.serfati_margin);
    {
        const std::size_t line = f.line_of("diagnostics.serfati_points");
        const auto v = f.list("diagnostics.serfati_points", {});
        if (v.size() % 2 != 0) throw ConfigError("serfati_points needs x y pairs", line, "diagnostics.serfati_points");
        for (std::size_t k = 0; k < v.size(); k += 2) d.serfati_points.push_back({v[k], v[k + 1]});
    }

    c.output_dir = f.str("output.dir", c.output_dir);
    c.rng_seed = f.integer("rng.seed", 0);

    c.study.epsilons_line = f.line_of("study.epsilons");
    c.study.quantities_line = f.line_of("study.quantities");
    c.study.epsilons = f.list("study.epsilons", {});
    {
        const std::string q = f.str("study.quantities", "");
        std::string s = q;
        for (char& ch : s)
            if (ch == ',') ch = ' ';
        std::istringstream is(s);
        std::string tok;
        while (is >> tok) c.study.quantities.push_back(tok);
    }
    c.study.energy_threshold = f.num("study.energy_threshold", c.study.energy_threshold);

    f.reject_unused();
    return c;
}

inline RunConfig read_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace vblob
