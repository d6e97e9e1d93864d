#include "bandcodes/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "bandcodes/codec.hpp"
#include "bandcodes/complexity.hpp"
#include "bandcodes/degree_model.hpp"
#include "bandcodes/errors.hpp"

#ifndef BANDCODES_BUILD_ID
#define BANDCODES_BUILD_ID "unknown"
#endif

namespace bandcodes {

std::string build_id() { return BANDCODES_BUILD_ID; }

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Derived seed for (experiment point, trial); stable across thread counts.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t point, std::uint64_t trial) {
    std::uint64_t z = seed ^ (point * 0x9e3779b97f4a7c15ull) ^ (trial * 0xbf58476d1ce4e5b9ull);
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Runs fn(i) for i in [0, count) across threads; each index owns its output
// slot, so scheduling cannot reorder results.
template <typename F>
void parallel_trials(std::size_t count, F&& fn) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += workers) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct MeanCi {
    double mean = 0;
    double ci95 = 0;
};

MeanCi mean_ci95(const std::vector<double>& xs) {
    MeanCi r;
    if (xs.empty()) return r;
    r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    if (xs.size() < 2) return r;
    double var = 0;
    for (const double x : xs) var += (x - r.mean) * (x - r.mean);
    var /= (xs.size() - 1);
    r.ci95 = 1.96 * std::sqrt(var / xs.size());
    return r;
}

std::string csv_header(const std::string& experiment, const json& params,
                       const std::string& columns) {
    json meta;
    meta["experiment"] = experiment;
    meta["build"] = build_id();
    meta["params"] = params;
    return "# " + meta.dump() + "\n" + columns + "\n";
}

std::string summary_text(const std::string& experiment, const json& params,
                         const json& aggregates) {
    json s;
    s["experiment"] = experiment;
    s["build"] = build_id();
    s["params"] = params;
    s["aggregates"] = aggregates;
    return s.dump(2) + "\n";
}

std::string row_prefix(const std::string& experiment) {
    return experiment + "," + build_id() + ",";
}

json config_json(const SimConfig& cfg) {
    json j;
    j["peer_count"] = cfg.peer_count;
    j["full_mesh"] = cfg.full_mesh;
    j["er_expected_degree"] = cfg.er_expected_degree;
    j["arm"] = cfg.arm == Arm::BandCodes ? "band" : "reference";
    j["ref_source"] = cfg.ref_source == RefSource::FairCoin ? "coins" : "rsd";
    j["n"] = cfg.n;
    j["w"] = cfg.w;
    j["symbol_size"] = cfg.symbol_size;
    j["generation_duration_us"] = cfg.generation_duration_us;
    j["buffering_us"] = cfg.buffering_us;
    j["session_generations"] = cfg.session_generations;
    j["source_bandwidth_bps"] =
        cfg.source_bandwidth_bps ? json(*cfg.source_bandwidth_bps) : json("auto");
    j["peer_bandwidth_bps"] =
        cfg.peer_bandwidth_bps ? json(*cfg.peer_bandwidth_bps) : json("auto");
    j["loss"] = cfg.loss;
    j["p_gen"] = cfg.p_gen;
    j["latency_us"] = cfg.latency_us;
    return j;
}

std::size_t ratio_to_w(double ratio, std::size_t n) {
    if (!(ratio > 0.0) || ratio > 1.0) {
        raise(ErrorKind::Parameter, "window ratio must lie in (0, 1]");
    }
    const auto w = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(n)));
    return std::clamp<std::size_t>(w, 1, n);
}

struct E2ePoint {
    double overhead = 0;
    double xors = 0;
};

// One source-to-sink decode: feed fresh encoder output until full rank.
E2ePoint e2e_trial(std::size_t n, std::size_t w, std::size_t symbol_size, bool reference,
                   std::uint64_t seed) {
    Rng rng(seed);
    const auto gen = Generation::random(0, n, symbol_size, rng);
    SgeState st(0, n, w, symbol_size);
    while (!st.complete()) {
        st.receive(reference ? reference_nc_encode(gen, rng)
                             : encode_source_packet(gen, w, rng));
    }
    E2ePoint p;
    p.overhead = *st.report().overhead;
    st.diagonalize();
    p.xors = static_cast<double>(st.counters().total());
    return p;
}

struct MeshPoint {
    double overhead = 0;
    double xor_per_mbit = 0;
    double continuity = 0;
};

MeshPoint mesh_trial(SimConfig cfg, std::uint64_t seed) {
    cfg.seed = seed;
    const auto m = run_session(cfg);
    MeshPoint p;
    p.overhead = m.mean_overhead;
    p.continuity = m.mean_continuity_index;
    std::uint64_t xors = 0, decoded = 0;
    for (const auto& nm : m.nodes) {
        xors += nm.xor_triangularization + nm.xor_diagonalization;
        decoded += nm.decoded;
    }
    const double mbits = static_cast<double>(decoded) * static_cast<double>(cfg.n) *
                         static_cast<double>(cfg.symbol_size) * 8.0 / 1e6;
    p.xor_per_mbit = mbits > 0 ? static_cast<double>(xors) / mbits : 0.0;
    return p;
}

} // namespace

ExperimentOutput degree_evolution_experiment(const DegreeEvolutionParams& p) {
    if (p.n < 1) raise(ErrorKind::Parameter, "n must be >= 1");
    DegreeDistribution source = [&] {
        if (p.source == "rsd") return DegreeDistribution::robust_soliton(p.n);
        if (p.source == "binomial") return DegreeDistribution::binomial_half(p.n);
        raise(ErrorKind::Parameter, "unknown source distribution: " + p.source);
    }();

    std::vector<DegreeDistribution> analytic{source};
    for (std::size_t j = 1; j <= p.rounds; ++j) {
        analytic.push_back(omega_step(analytic.back()));
    }
    Rng rng(mix_seed(p.seed, 0, 0));
    const auto empirical = monte_carlo_evolution(source, p.rounds, p.samples, rng);
    const auto limit = omega_infinity(p.n);

    json params;
    params["n"] = p.n;
    params["source"] = p.source;
    params["rounds"] = p.rounds;
    params["samples"] = p.samples;
    params["seed"] = p.seed;

    const std::string name = "degree-evolution";
    std::string csv = csv_header(
        name, params, "experiment,build,j,degree,analytic_p,empirical_p,limit_p");
    const std::string prefix = row_prefix(name);
    json tv_rounds = json::array();
    for (std::size_t j = 0; j <= p.rounds; ++j) {
        for (std::size_t d = 0; d <= p.n; ++d) {
            csv += prefix + std::to_string(j) + "," + std::to_string(d) + "," +
                   fmt(analytic[j].at(d)) + "," + fmt(empirical[j].at(d)) + "," +
                   fmt(limit.at(d)) + "\n";
        }
        json r;
        r["j"] = j;
        r["tv_analytic_empirical"] = tv_distance(analytic[j], empirical[j]);
        r["tv_analytic_limit"] = tv_distance(analytic[j], limit);
        tv_rounds.push_back(r);
    }

    json agg;
    agg["rounds"] = tv_rounds;
    return {std::move(csv), summary_text(name, params, agg)};
}

ExperimentOutput e2e_tradeoff_experiment(const E2eTradeoffParams& p) {
    if (p.trials < 1) raise(ErrorKind::Parameter, "trials must be >= 1");

    json params;
    params["n_values"] = p.n_values;
    params["w_ratios"] = p.w_ratios;
    params["trials"] = p.trials;
    params["symbol_size"] = p.symbol_size;
    params["seed"] = p.seed;

    const std::string name = "e2e-tradeoff";
    std::string csv = csv_header(name, params,
                                 "experiment,build,N,W,overhead_mean,overhead_ci95,xor_mean");
    const std::string prefix = row_prefix(name);
    json points = json::array();

    std::size_t point_id = 0;
    for (const auto n : p.n_values) {
        for (const auto ratio : p.w_ratios) {
            const auto w = ratio_to_w(ratio, n);
            std::vector<double> overheads(p.trials), xors(p.trials);
            parallel_trials(p.trials, [&](std::size_t i) {
                const auto r =
                    e2e_trial(n, w, p.symbol_size, false, mix_seed(p.seed, point_id, i));
                overheads[i] = r.overhead;
                xors[i] = r.xors;
            });
            const auto o = mean_ci95(overheads);
            const auto x = mean_ci95(xors);
            csv += prefix + std::to_string(n) + "," + std::to_string(w) + "," +
                   fmt(o.mean) + "," + fmt(o.ci95) + "," + fmt(x.mean) + "\n";
            json row;
            row["N"] = n;
            row["W"] = w;
            row["overhead_mean"] = o.mean;
            row["overhead_ci95"] = o.ci95;
            row["xor_mean"] = x.mean;
            row["xor_predicted"] = predict(n, w).cd_total;
            points.push_back(row);
            ++point_id;
        }
    }

    json agg;
    agg["points"] = points;
    return {std::move(csv), summary_text(name, params, agg)};
}

ExperimentOutput mesh_tradeoff_experiment(const MeshTradeoffParams& p) {
    if (p.trials < 1) raise(ErrorKind::Parameter, "trials must be >= 1");
    validate_config(p.base);

    json params;
    params["config"] = config_json(p.base);
    params["w_ratios"] = p.w_ratios;
    params["reference_n"] = p.reference_n;
    params["trials"] = p.trials;
    params["seed"] = p.seed;

    const std::string name = "mesh-tradeoff";
    std::string csv =
        csv_header(name, params,
                   "experiment,build,arm,N,W,overhead_mean,overhead_ci95,"
                   "xor_per_mbit_mean,xor_per_mbit_ci95,continuity_mean");
    const std::string prefix = row_prefix(name);
    json points = json::array();

    struct PointCfg {
        std::string arm;
        SimConfig cfg;
    };
    std::vector<PointCfg> grid;
    for (const auto ratio : p.w_ratios) {
        SimConfig cfg = p.base;
        cfg.arm = Arm::BandCodes;
        cfg.w = ratio_to_w(ratio, cfg.n);
        grid.push_back({"band", cfg});
    }
    for (const auto n : p.reference_n) {
        SimConfig cfg = p.base;
        cfg.arm = Arm::ReferenceNC;
        cfg.n = n;
        cfg.w = n;
        grid.push_back({"reference", cfg});
    }

    for (std::size_t point_id = 0; point_id < grid.size(); ++point_id) {
        const auto& pt = grid[point_id];
        std::vector<double> overheads(p.trials), xpm(p.trials), ci(p.trials);
        parallel_trials(p.trials, [&](std::size_t i) {
            const auto r = mesh_trial(pt.cfg, mix_seed(p.seed, point_id, i));
            overheads[i] = r.overhead;
            xpm[i] = r.xor_per_mbit;
            ci[i] = r.continuity;
        });
        const auto o = mean_ci95(overheads);
        const auto x = mean_ci95(xpm);
        const auto c = mean_ci95(ci);
        csv += prefix + pt.arm + "," + std::to_string(pt.cfg.n) + "," +
               std::to_string(pt.cfg.w) + "," + fmt(o.mean) + "," + fmt(o.ci95) + "," +
               fmt(x.mean) + "," + fmt(x.ci95) + "," + fmt(c.mean) + "\n";
        json row;
        row["arm"] = pt.arm;
        row["N"] = pt.cfg.n;
        row["W"] = pt.cfg.w;
        row["overhead_mean"] = o.mean;
        row["overhead_ci95"] = o.ci95;
        row["xor_per_mbit_mean"] = x.mean;
        row["xor_per_mbit_ci95"] = x.ci95;
        row["continuity_mean"] = c.mean;
        points.push_back(row);
    }

    json agg;
    agg["points"] = points;
    return {std::move(csv), summary_text(name, params, agg)};
}

ExperimentOutput complexity_check_experiment(const ComplexityCheckParams& p) {
    if (p.trials < 1) raise(ErrorKind::Parameter, "trials must be >= 1");

    json params;
    params["n_values"] = p.n_values;
    params["w_ratios"] = p.w_ratios;
    params["trials"] = p.trials;
    params["symbol_size"] = p.symbol_size;
    params["seed"] = p.seed;

    const std::string name = "complexity-check";
    std::string csv = csv_header(
        name, params, "experiment,build,arm,N,W,measured_mean,predicted,rel_error");
    const std::string prefix = row_prefix(name);
    json points = json::array();
    double worst = 0;

    auto emit = [&](const std::string& arm, std::size_t n, std::size_t w,
                    std::size_t point_id) {
        std::vector<double> xors(p.trials);
        parallel_trials(p.trials, [&](std::size_t i) {
            xors[i] = e2e_trial(n, w, p.symbol_size, arm == "reference",
                                mix_seed(p.seed, point_id, i))
                          .xors;
        });
        const auto x = mean_ci95(xors);
        // The reference scheme has no window; its cost sits at the w = n
        // point of the model.
        const double predicted = predict(n, w).cd_total;
        const double rel = std::abs(x.mean - predicted) / predicted;
        worst = std::max(worst, rel);
        csv += prefix + arm + "," + std::to_string(n) + "," + std::to_string(w) + "," +
               fmt(x.mean) + "," + fmt(predicted) + "," + fmt(rel) + "\n";
        json row;
        row["arm"] = arm;
        row["N"] = n;
        row["W"] = w;
        row["measured_mean"] = x.mean;
        row["predicted"] = predicted;
        row["rel_error"] = rel;
        points.push_back(row);
    };

    std::size_t point_id = 0;
    for (const auto n : p.n_values) {
        for (const auto ratio : p.w_ratios) {
            emit("band", n, ratio_to_w(ratio, n), point_id++);
        }
    }
    for (const auto n : p.n_values) {
        emit("reference", n, n, point_id++);
    }

    json agg;
    agg["points"] = points;
    agg["max_rel_error"] = worst;
    return {std::move(csv), summary_text(name, params, agg)};
}

ExperimentOutput degree_preservation_experiment(const DegreePreservationParams& p) {
    validate_config(p.base);

    json params;
    params["config"] = config_json(p.base);
    params["w_ratios"] = p.w_ratios;
    params["seed"] = p.seed;

    const std::string name = "degree-preservation";
    std::string csv = csv_header(
        name, params, "experiment,build,w_ratio,degree,empirical_p,binomial_p");
    const std::string prefix = row_prefix(name);
    json points = json::array();

    for (std::size_t point_id = 0; point_id < p.w_ratios.size(); ++point_id) {
        const double ratio = p.w_ratios[point_id];
        SimConfig cfg = p.base;
        cfg.arm = Arm::BandCodes;
        cfg.w = ratio_to_w(ratio, cfg.n);
        cfg.seed = mix_seed(p.seed, point_id, 0);
        const auto m = run_session(cfg);

        const double total = std::accumulate(m.degree_hist.begin(), m.degree_hist.end(),
                                             0.0);
        const auto binom = DegreeDistribution::binomial_half(cfg.w);
        double tv = 0, mean = 0;
        for (std::size_t d = 0; d <= cfg.n; ++d) {
            const double emp = total > 0 ? m.degree_hist[d] / total : 0.0;
            const double ref = d <= cfg.w ? binom.at(d) : 0.0;
            tv += std::abs(emp - ref);
            mean += static_cast<double>(d) * emp;
            csv += prefix + fmt(ratio) + "," + std::to_string(d) + "," + fmt(emp) + "," +
                   fmt(ref) + "\n";
        }
        json row;
        row["w_ratio"] = ratio;
        row["W"] = cfg.w;
        row["packets"] = total;
        row["tv_to_binomial"] = tv / 2;
        row["mean_degree"] = mean;
        row["continuity_mean"] = m.mean_continuity_index;
        row["source_fraction"] = m.source_fraction;
        points.push_back(row);
    }

    json agg;
    agg["points"] = points;
    return {std::move(csv), summary_text(name, params, agg)};
}

ExperimentOutput ci_study_experiment(const CiStudyParams& p) {
    if (p.trials < 1) raise(ErrorKind::Parameter, "trials must be >= 1");
    if (!(p.stress_factor > 0)) raise(ErrorKind::Parameter, "stress_factor must be > 0");
    validate_config(p.base);

    json params;
    params["config"] = config_json(p.base);
    params["source_factors"] = p.source_factors;
    params["buffering_us"] = p.buffering_us;
    params["stress_factor"] = p.stress_factor;
    params["trials"] = p.trials;
    params["seed"] = p.seed;

    const std::string name = "ci-study";
    std::string csv = csv_header(
        name, params, "experiment,build,sweep,value,continuity_mean,continuity_ci95");
    const std::string prefix = row_prefix(name);
    json points = json::array();

    const double auto_bs = resolved_source_bandwidth(p.base);

    auto emit = [&](const std::string& sweep, double value, const SimConfig& cfg,
                    std::size_t point_id) {
        std::vector<double> ci(p.trials);
        parallel_trials(p.trials, [&](std::size_t i) {
            ci[i] = mesh_trial(cfg, mix_seed(p.seed, point_id, i)).continuity;
        });
        const auto c = mean_ci95(ci);
        csv += prefix + sweep + "," + fmt(value) + "," + fmt(c.mean) + "," + fmt(c.ci95) +
               "\n";
        json row;
        row["sweep"] = sweep;
        row["value"] = value;
        row["continuity_mean"] = c.mean;
        row["continuity_ci95"] = c.ci95;
        points.push_back(row);
    };

    std::size_t point_id = 0;
    for (const auto factor : p.source_factors) {
        SimConfig cfg = p.base;
        cfg.source_bandwidth_bps = auto_bs * factor;
        emit("source_bandwidth", factor, cfg, point_id++);
    }
    for (const auto tb : p.buffering_us) {
        SimConfig cfg = p.base;
        cfg.buffering_us = tb;
        cfg.source_bandwidth_bps = auto_bs * p.stress_factor;
        validate_config(cfg); // buffering must stay a multiple of the period
        emit("buffering_us", static_cast<double>(tb), cfg, point_id++);
    }

    json agg;
    agg["points"] = points;
    return {std::move(csv), summary_text(name, params, agg)};
}

} // namespace bandcodes
