// Command-line front end: init, run, diagnose, converge.
// Exit codes: 0 ok, 1 study verdict FAIL, 2 config/usage, 3 degenerate input, 4 blow-up.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vblob/vblob.hpp"

namespace {

enum Exit { kOk = 0, kStudyFail = 1, kConfig = 2, kDegenerate = 3, kBlowUp = 4 };

struct Globals {
    std::string config;
    std::string out;
    int threads = 0;
    bool quiet = false;
};

struct DiagnoseFlags {
    std::string snapshot;
    std::vector<double> norms{1.0, 2.0, INFINITY};
    bool energy = false;
    double energy_radius = 0.0;
    bool f_eps = false;
    bool divergence = false;
    bool speed = false;
    double spacing = 0.0;
    std::vector<double> equi_radii;
};

void note(const Globals& g, const std::string& msg) {
    if (!g.quiet) std::cerr << msg << '\n';
}

vblob::RunConfig load(const Globals& g) {
    if (g.config.empty()) throw vblob::ConfigError("--config is required");
    vblob::RunConfig c = vblob::read_config_file(g.config);
    if (!g.out.empty()) c.output_dir = g.out;
    return c;
}

std::filesystem::path out_path(const vblob::RunConfig& c, const char* name) {
    return std::filesystem::path(c.output_dir) / name;
}

int cmd_init(const Globals& g) {
    const vblob::RunConfig c = load(g);
    const vblob::PreparedRun p = vblob::prepare(c);
    vblob::claim_output_dir(c.output_dir, c);
    vblob::write_snapshot_file(out_path(c, "initial.snapshot").string(), p.initial, c.hash);
    std::ofstream(out_path(c, "summary.txt"), std::ios::binary) << vblob::summary_text(c, p);
    note(g, "wrote " + std::to_string(p.initial.size()) + " blobs to " + out_path(c, "initial.snapshot").string());
    return kOk;
}

int cmd_run(const Globals& g) {
    const vblob::RunConfig c = load(g);
    vblob::claim_output_dir(c.output_dir, c);
    const vblob::SimulationResult sim = vblob::simulate(c);
    for (const auto& w : sim.warnings) note(g, "warning: " + w);
    {
        std::ofstream csv(out_path(c, "diagnostics.csv"), std::ios::binary);
        vblob::write_records_csv(csv, c, sim.prepared, sim.run.records);
    }
    vblob::write_snapshot_file(out_path(c, "final.snapshot").string(), sim.run.final_state, c.hash);
    if (sim.run.error) {
        std::cerr << "error: " << sim.run.error->what() << '\n';
        return kBlowUp;
    }
    note(g, "completed " + std::to_string(sim.run.steps_taken) + " steps; outputs in " + c.output_dir);
    return kOk;
}

int cmd_diagnose(const Globals&, const DiagnoseFlags& f) {
    const vblob::Snapshot snap = vblob::read_snapshot_file(f.snapshot);
    const vblob::Ensemble& e = snap.ensemble;
    const double spacing = f.spacing > 0.0 ? f.spacing : e.epsilon() / 8.0;
    auto line = [](const std::string& k, double v) { std::cout << k << '=' << vblob::format_double(v) << '\n'; };

    line("time", e.time());
    std::cout << "n_blobs=" << e.size() << '\n';
    const vblob::Impulses imp = vblob::impulses(e);
    line("total_circulation", imp.total_circulation);
    line("linear_impulse_x", imp.linear.x);
    line("linear_impulse_y", imp.linear.y);
    line("angular_impulse", imp.angular);
    const vblob::GridField w = vblob::reconstruct_vorticity(e, vblob::diagnostic_grid(e, spacing));
    for (double p : f.norms) line("lp_" + vblob::number_label(p), vblob::lp_norm(w, p));
    if (f.energy) {
        const double R = f.energy_radius > 0.0 ? f.energy_radius
                                               : std::max(8.0 * e.diameter_bound(),
                                                          4.0 * e.mollifier().support_radius() + e.diameter_bound());
        const vblob::EnergyEstimate en = vblob::kinetic_energy(e, R, spacing);
        line("energy_core", en.core);
        line("energy_tail", en.tail);
        line("energy_stream", vblob::kinetic_energy_stream(e, spacing));
    }
    if (f.f_eps) {
        const auto n = vblob::consistency_error_norms(e, spacing);
        line("f_eps_l1", n.l1);
        line("f_eps_l2", n.l2);
    }
    if (f.divergence) line("max_divergence", vblob::divergence_check(e, spacing));
    const auto tail = vblob::equi_tail_profile(e, f.equi_radii);
    for (std::size_t k = 0; k < tail.size(); ++k) line("equi_tail_" + vblob::number_label(f.equi_radii[k]), tail[k]);
    if (f.speed) {
        const auto sb = vblob::speed_bound_check(e, vblob::lp_norm(w, INFINITY), vblob::lp_norm(w, 1.0));
        line("max_speed", sb.max_speed);
        line("speed_bound", sb.bound);
    }
    return kOk;
}

int cmd_converge(const Globals& g) {
    const vblob::RunConfig c = load(g);
    vblob::validate_study(c);
    vblob::claim_output_dir(c.output_dir, c);
    const vblob::StudyResult s = vblob::run_study(c, [&](const std::string& m) { note(g, m); });
    {
        std::ofstream csv(out_path(c, "trend.csv"), std::ios::binary);
        vblob::write_study_csv(csv, c, s);
    }
    std::ofstream verdict(out_path(c, "verdict.txt"), std::ios::binary);
    for (std::size_t q = 0; q < s.quantities.size(); ++q) {
        const std::string l = s.quantities[q] + ": " + (s.pass[q] ? "PASS" : "FAIL");
        std::cout << l << '\n';
        verdict << l << '\n';
    }
    if (s.failing_epsilon) {
        const std::string l = "failing_epsilon=" + vblob::format_double(*s.failing_epsilon);
        std::cout << l << '\n';
        verdict << l << '\n';
    }
    const std::string l = std::string("study: ") + (s.all_pass ? "PASS" : "FAIL");
    std::cout << l << '\n';
    verdict << l << '\n';
    return s.all_pass ? kOk : kStudyFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vortex-blob solver for the 2D Euler equations"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Run or study configuration file");
    app.add_option("--out", g.out, "Output directory (overrides output.dir)");
    app.add_option("--threads", g.threads, "Worker threads; 0 = serial deterministic mode")->check(CLI::NonNegativeNumber);
    app.add_flag("--quiet", g.quiet, "Suppress progress messages");

    auto* init = app.add_subcommand("init", "Write the t = 0 ensemble snapshot and a summary");
    auto* runc = app.add_subcommand("run", "Integrate to t_end and write the diagnostics CSV");
    auto* conv = app.add_subcommand("converge", "Run an epsilon sequence and judge the trends");
    auto* diag = app.add_subcommand("diagnose", "Measure diagnostics of one snapshot");
    DiagnoseFlags df;
    diag->add_option("snapshot", df.snapshot, "Snapshot file")->required();
    diag->add_option("--norms", df.norms, "L^p exponents (inf allowed)");
    diag->add_flag("--energy", df.energy, "Kinetic energy (zero-mean ensembles only)");
    diag->add_option("--energy-radius", df.energy_radius, "Ball radius for the energy integral");
    diag->add_flag("--f-eps", df.f_eps, "Consistency error norms");
    diag->add_flag("--divergence", df.divergence, "Max |div v| by centred differences");
    diag->add_flag("--speed-bound", df.speed, "Max blob speed against the a priori bound");
    diag->add_option("--spacing", df.spacing, "Grid spacing (default epsilon/8)");
    diag->add_option("--equi-radii", df.equi_radii, "Radii for the tail-mass profile");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    vblob::set_thread_count(g.threads);
    try {
        if (*init) return cmd_init(g);
        if (*runc) return cmd_run(g);
        if (*conv) return cmd_converge(g);
        if (*diag) return cmd_diagnose(g, df);
    } catch (const vblob::ConfigError& e) {
        std::cerr << "config error";
        if (e.line()) std::cerr << " at line " << e.line();
        if (!e.field().empty()) std::cerr << " (" << e.field() << ")";
        std::cerr << ": " << e.what() << '\n';
        return kConfig;
    } catch (const vblob::DegenerateInputError& e) {
        std::cerr << "degenerate input: " << e.what() << '\n';
        return kDegenerate;
    } catch (const vblob::BlowUpError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBlowUp;
    } catch (const vblob::DomainError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    }
    return kConfig;
}
