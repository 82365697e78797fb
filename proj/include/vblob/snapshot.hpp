#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vblob/ensemble.hpp"
#include "vblob/errors.hpp"
#include "vblob/grid.hpp"

namespace vblob {

/// Ensemble snapshot file contents.
struct Snapshot {
    Ensemble ensemble;
    std::string config_hash;  // empty when the file carries none
};

/// Writes `# epsilon=.. delta=.. h=.. t=.. profile=.. n=..`, an optional
/// `# config_hash=..` line, then one `x y gamma` line per blob. Numbers use 17
/// significant digits, which round-trip doubles exactly.
inline void write_snapshot(std::ostream& os, const Ensemble& e, const std::string& config_hash = {}) {
    os << "# epsilon=" << format_double(e.epsilon()) << " delta=" << format_double(e.delta())
       << " h=" << format_double(e.h()) << " t=" << format_double(e.time()) << " profile=" << profile_name(e.profile())
       << " n=" << e.size() << '\n';
    if (!config_hash.empty()) os << "# config_hash=" << config_hash << '\n';
    for (std::size_t i = 0; i < e.size(); ++i) {
        const Vec2 p = e.position(i);
        os << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(e.circulation(i)) << '\n';
    }
}

inline Snapshot read_snapshot(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    BlobParams params;
    double t = 0.0;
    long long n = -1;
    bool have[6] = {};
    std::string hash;

    auto parse_num = [&](const std::string& key, const std::string& val) {
        try {
            std::size_t used = 0;
            const double v = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(key);
            return v;
        } catch (const std::logic_error&) {
            throw ConfigError("snapshot: bad number for '" + key + "'", lineno, key);
        }
    };

    std::vector<Vec2> pos;
    std::vector<double> gam;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string tok;
            while (hs >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) throw ConfigError("snapshot: bad header token '" + tok + "'", lineno);
                const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "epsilon") { params.epsilon = parse_num(key, val); have[0] = true; }
                else if (key == "delta") { params.delta = parse_num(key, val); have[1] = true; }
                else if (key == "h") { params.h = parse_num(key, val); have[2] = true; }
                else if (key == "t") { t = parse_num(key, val); have[3] = true; }
                else if (key == "profile") {
                    try { params.profile = parse_profile(val); } catch (const ConfigError&) {
                        throw ConfigError("snapshot: unknown profile '" + val + "'", lineno, key);
                    }
                    have[4] = true;
                } else if (key == "n") {
                    const double v = parse_num(key, val);
                    if (v < 0 || v != static_cast<double>(static_cast<long long>(v)))
                        throw ConfigError("snapshot: n must be a nonnegative integer", lineno, key);
                    n = static_cast<long long>(v);
                    have[5] = true;
                } else if (key == "config_hash") hash = val;
                else throw ConfigError("snapshot: unknown header key '" + key + "'", lineno, key);
            }
            continue;
        }
        for (int k = 0; k < 6; ++k)
            if (!have[k]) throw ConfigError("snapshot: header incomplete before data", lineno);
        std::istringstream ls(line);
        std::string a, b, c, extra;
        if (!(ls >> a >> b >> c) || (ls >> extra)) throw ConfigError("snapshot: expected 'x y gamma'", lineno);
        pos.push_back({parse_num("x", a), parse_num("y", b)});
        gam.push_back(parse_num("gamma", c));
    }
    for (int k = 0; k < 6; ++k)
        if (!have[k]) throw ConfigError("snapshot: missing header field", lineno);
    if (static_cast<long long>(pos.size()) != n)
        throw ConfigError("snapshot: header says n=" + std::to_string(n) + " but file has " +
                              std::to_string(pos.size()) + " blobs",
                          lineno, "n");
    if (!(params.epsilon > 0.0)) throw ConfigError("snapshot: epsilon must be positive", 1, "epsilon");
    return {Ensemble(std::move(pos), std::move(gam), params, t), hash};
}

inline void write_snapshot_file(const std::string& path, const Ensemble& e, const std::string& config_hash = {}) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write snapshot '" + path + "'");
    write_snapshot(out, e, config_hash);
}

inline Snapshot read_snapshot_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open snapshot '" + path + "'");
    return read_snapshot(in);
}

}  // namespace vblob
