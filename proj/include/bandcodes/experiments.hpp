#pragma once

// Reproducible experiment harness behind the command-line tool. Every
// experiment returns a CSV dataset plus a JSON summary; both embed the
// resolved parameters, the seed, and the build identifier, and regenerate
// bit-for-bit from the same inputs. Trials run on per-trial derived seeds,
// so parallel execution cannot change the output bytes.

#include <cstdint>
#include <string>
#include <vector>

#include "bandcodes/errors.hpp"
#include "bandcodes/sim.hpp"

namespace bandcodes {

struct ExperimentOutput {
    std::string csv;
    std::string summary; // JSON object, one trailing newline
};

// Stamp taken from git-describe at build time.
std::string build_id();

// Analytic degree-evolution iterates next to a Monte Carlo pool,
// rows: experiment,build,j,degree,analytic_p,empirical_p,limit_p.
struct DegreeEvolutionParams {
    std::size_t n = 100;
    std::string source = "rsd"; // rsd | binomial
    std::size_t rounds = 6;
    std::size_t samples = 20'000;
    std::uint64_t seed = 1;
};
ExperimentOutput degree_evolution_experiment(const DegreeEvolutionParams& p);

// Direct source-to-sink decode, no recombination,
// rows: experiment,build,N,W,overhead_mean,overhead_ci95,xor_mean.
struct E2eTradeoffParams {
    std::vector<std::size_t> n_values = {100, 200};
    std::vector<double> w_ratios = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::size_t trials = 200;
    std::size_t symbol_size = 8; // coefficient-level metrics ignore payload width
    std::uint64_t seed = 1;
};
ExperimentOutput e2e_tradeoff_experiment(const E2eTradeoffParams& p);

// Swarm complexity/overhead tradeoff: one curve sweeping the window on a
// fixed generation size, one shrinking the generation size of the dense
// reference scheme. rows: experiment,build,arm,N,W,overhead_mean,
// overhead_ci95,xor_per_mbit_mean,xor_per_mbit_ci95,continuity_mean.
struct MeshTradeoffParams {
    SimConfig base; // arm, n, w overridden per point
    std::vector<double> w_ratios = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<std::size_t> reference_n = {100, 80, 60, 40, 20};
    std::size_t trials = 20;
    std::uint64_t seed = 1;
};
ExperimentOutput mesh_tradeoff_experiment(const MeshTradeoffParams& p);

// Measured decode XORs against the closed-form cost model,
// rows: experiment,build,arm,N,W,measured_mean,predicted,rel_error.
struct ComplexityCheckParams {
    std::vector<std::size_t> n_values = {50, 100, 200};
    std::vector<double> w_ratios = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::size_t trials = 50;
    std::size_t symbol_size = 8;
    std::uint64_t seed = 1;
};
ExperimentOutput complexity_check_experiment(const ComplexityCheckParams& p);

// Received-packet degree histograms from mesh sessions,
// rows: experiment,build,w_ratio,degree,empirical_p,binomial_p.
struct DegreePreservationParams {
    SimConfig base;
    std::vector<double> w_ratios = {0.2, 0.4, 0.6};
    std::uint64_t seed = 1;
};
ExperimentOutput degree_preservation_experiment(const DegreePreservationParams& p);

// Continuity-index sensitivity to source bandwidth and buffering time,
// rows: experiment,build,sweep,value,continuity_mean,continuity_ci95.
// Bandwidth rows scale the auto source bandwidth by each factor at the
// base buffering time; buffering rows run each buffering value at
// stress_factor of the auto source bandwidth.
struct CiStudyParams {
    SimConfig base;
    std::vector<double> source_factors = {1.0, 0.5, 0.25, 0.125};
    std::vector<std::uint64_t> buffering_us = {10'000'000, 5'000'000, 2'000'000};
    double stress_factor = 0.3;
    std::size_t trials = 5;
    std::uint64_t seed = 1;
};
ExperimentOutput ci_study_experiment(const CiStudyParams& p);

inline const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Malformed: return "malformed";
    case ErrorKind::Routing: return "routing";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::NotReady: return "not_ready";
    case ErrorKind::NoData: return "no_data";
    case ErrorKind::RetryExhausted: return "retry_exhausted";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

} // namespace bandcodes
