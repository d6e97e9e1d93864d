// Command-line front end for the experiment harness: each subcommand renders
// one dataset as CSV plus a JSON summary, reproducible from (command line,
// seed). Errors print a machine-readable JSON object on stderr and exit
// nonzero.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bandcodes/errors.hpp"
#include "bandcodes/experiments.hpp"

namespace {

using namespace bandcodes;

// CSV goes to `out`; the summary lands next to it with the .csv suffix
// replaced by .summary.json.
std::string summary_path(const std::string& out) {
    const std::string suffix = ".csv";
    if (out.size() > suffix.size() &&
        out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return out.substr(0, out.size() - suffix.size()) + ".summary.json";
    }
    return out + ".summary.json";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) raise(ErrorKind::Io, "cannot open for writing: " + path);
    f << content;
    if (!f) raise(ErrorKind::Io, "write failed: " + path);
}

void deliver(const ExperimentOutput& result, const std::string& out) {
    write_file(out, result.csv);
    write_file(summary_path(out), result.summary);
    std::printf("wrote %s and %s\n", out.c_str(), summary_path(out).c_str());
}

// Shared mesh-session knobs: an optional config file plus quick overrides.
struct MeshFlags {
    std::string config_path;
    std::size_t peers = 0;
    std::size_t n = 0;
    std::size_t symbol_size = 0;
    std::size_t generations = 0;
    double loss = -1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value simulation config file");
        cmd->add_option("--peers", peers, "override peer count");
        cmd->add_option("--n", n, "override generation size");
        cmd->add_option("--symbol-size", symbol_size, "override symbol size in bytes");
        cmd->add_option("--generations", generations, "override session length");
        cmd->add_option("--loss", loss, "override per-link loss probability");
    }

    SimConfig resolve(const SimConfig& defaults) const {
        SimConfig cfg = config_path.empty() ? defaults : parse_config_file(config_path);
        if (peers) cfg.peer_count = peers;
        if (n) cfg.n = n;
        if (symbol_size) cfg.symbol_size = symbol_size;
        if (generations) cfg.session_generations = generations;
        if (loss >= 0.0) cfg.loss = loss;
        if (cfg.w > cfg.n) cfg.w = cfg.n;
        return cfg;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Band-coded streaming experiment datasets"};
    app.require_subcommand(1);

    // degree-evolution
    DegreeEvolutionParams de;
    std::string de_out = "degree-evolution.csv";
    auto* de_cmd = app.add_subcommand(
        "degree-evolution", "analytic vs Monte Carlo recombination degree iterates");
    de_cmd->add_option("--n", de.n, "generation size");
    de_cmd->add_option("--source", de.source, "source distribution: rsd | binomial");
    de_cmd->add_option("--rounds", de.rounds, "recombination rounds");
    de_cmd->add_option("--samples", de.samples, "Monte Carlo pool size");
    de_cmd->add_option("--seed", de.seed, "seed");
    de_cmd->add_option("--out", de_out, "output CSV path");

    // e2e-tradeoff
    E2eTradeoffParams e2e;
    std::string e2e_out = "e2e-tradeoff.csv";
    auto* e2e_cmd = app.add_subcommand(
        "e2e-tradeoff", "source-to-sink overhead and decode cost per window size");
    e2e_cmd->add_option("--n", e2e.n_values, "generation sizes")->delimiter(',');
    e2e_cmd->add_option("--ratios", e2e.w_ratios, "window/generation ratios")
        ->delimiter(',');
    e2e_cmd->add_option("--trials", e2e.trials, "trials per point");
    e2e_cmd->add_option("--symbol-size", e2e.symbol_size, "payload bytes");
    e2e_cmd->add_option("--seed", e2e.seed, "seed");
    e2e_cmd->add_option("--out", e2e_out, "output CSV path");

    // mesh-tradeoff
    MeshTradeoffParams mesh;
    MeshFlags mesh_flags;
    std::string mesh_out = "mesh-tradeoff.csv";
    auto* mesh_cmd = app.add_subcommand(
        "mesh-tradeoff", "swarm decode cost vs overhead for both coding arms");
    mesh_flags.attach(mesh_cmd);
    mesh_cmd->add_option("--ratios", mesh.w_ratios, "window ratios for the banded arm")
        ->delimiter(',');
    mesh_cmd->add_option("--ref-n", mesh.reference_n, "generation sizes for the reference arm")
        ->delimiter(',');
    mesh_cmd->add_option("--trials", mesh.trials, "sessions per point");
    mesh_cmd->add_option("--seed", mesh.seed, "seed");
    mesh_cmd->add_option("--out", mesh_out, "output CSV path");

    // complexity-check
    ComplexityCheckParams cc;
    std::string cc_out = "complexity-check.csv";
    auto* cc_cmd = app.add_subcommand(
        "complexity-check", "measured decode XORs against the closed-form model");
    cc_cmd->add_option("--n", cc.n_values, "generation sizes")->delimiter(',');
    cc_cmd->add_option("--ratios", cc.w_ratios, "window/generation ratios")->delimiter(',');
    cc_cmd->add_option("--trials", cc.trials, "trials per point");
    cc_cmd->add_option("--symbol-size", cc.symbol_size, "payload bytes");
    cc_cmd->add_option("--seed", cc.seed, "seed");
    cc_cmd->add_option("--out", cc_out, "output CSV path");

    // degree-preservation
    DegreePreservationParams dp;
    MeshFlags dp_flags;
    std::string dp_out = "degree-preservation.csv";
    auto* dp_cmd = app.add_subcommand(
        "degree-preservation", "received-packet degree histograms from mesh sessions");
    dp_flags.attach(dp_cmd);
    dp_cmd->add_option("--ratios", dp.w_ratios, "window ratios")->delimiter(',');
    dp_cmd->add_option("--seed", dp.seed, "seed");
    dp_cmd->add_option("--out", dp_out, "output CSV path");

    // ci-study
    CiStudyParams ci;
    MeshFlags ci_flags;
    std::string ci_out = "ci-study.csv";
    auto* ci_cmd = app.add_subcommand(
        "ci-study", "continuity-index sensitivity to source bandwidth and buffering");
    ci_flags.attach(ci_cmd);
    ci_cmd->add_option("--bs-factors", ci.source_factors,
                       "source bandwidth factors relative to the auto default")
        ->delimiter(',');
    ci_cmd->add_option("--buffering-us", ci.buffering_us, "buffering sweep values")
        ->delimiter(',');
    ci_cmd->add_option("--stress-factor", ci.stress_factor,
                       "source bandwidth factor used during the buffering sweep");
    ci_cmd->add_option("--trials", ci.trials, "sessions per point");
    ci_cmd->add_option("--seed", ci.seed, "seed");
    ci_cmd->add_option("--out", ci_out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (de_cmd->parsed()) {
            deliver(degree_evolution_experiment(de), de_out);
        } else if (e2e_cmd->parsed()) {
            deliver(e2e_tradeoff_experiment(e2e), e2e_out);
        } else if (mesh_cmd->parsed()) {
            SimConfig defaults;
            defaults.session_generations = 10;
            mesh.base = mesh_flags.resolve(defaults);
            deliver(mesh_tradeoff_experiment(mesh), mesh_out);
        } else if (cc_cmd->parsed()) {
            deliver(complexity_check_experiment(cc), cc_out);
        } else if (dp_cmd->parsed()) {
            SimConfig defaults;
            defaults.session_generations = 12;
            dp.base = dp_flags.resolve(defaults);
            deliver(degree_preservation_experiment(dp), dp_out);
        } else if (ci_cmd->parsed()) {
            SimConfig defaults;
            defaults.peer_count = 30;
            defaults.n = 50;
            defaults.symbol_size = 250;
            defaults.session_generations = 8;
            ci.base = ci_flags.resolve(defaults);
            deliver(ci_study_experiment(ci), ci_out);
        }
    } catch (const Error& e) {
        nlohmann::json err;
        err["error"]["kind"] = error_kind_name(e.kind());
        err["error"]["message"] = e.what();
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"]["kind"] = "internal";
        err["error"]["message"] = e.what();
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 3;
    }
    return 0;
}
