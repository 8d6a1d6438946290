#pragma once

#include <atomic>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dynopt/baselines.hpp"
#include "dynopt/environment.hpp"
#include "dynopt/hga.hpp"
#include "dynopt/metrics.hpp"
#include "dynopt/rng.hpp"

namespace dynopt {

enum class Algorithm { HGA, SGA_M, RI25_M, HM_M, ERS };

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::HGA: return "HGA";
        case Algorithm::SGA_M: return "SGA_M";
        case Algorithm::RI25_M: return "RI25_M";
        case Algorithm::HM_M: return "HM_M";
        case Algorithm::ERS: return "ERS";
    }
    return "?";
}

class config_error : public std::runtime_error {
  public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "HGA") return Algorithm::HGA;
    if (s == "SGA_M") return Algorithm::SGA_M;
    if (s == "RI25_M") return Algorithm::RI25_M;
    if (s == "HM_M") return Algorithm::HM_M;
    if (s == "ERS") return Algorithm::ERS;
    throw config_error("unknown algorithm '" + s + "' (expected HGA, SGA_M, RI25_M, HM_M, ERS)");
}

inline DynamicsKind dynamics_from_string(const std::string& s) {
    if (s == "linear") return DynamicsKind::Linear;
    if (s == "circular") return DynamicsKind::Circular;
    if (s == "random") return DynamicsKind::Random;
    throw config_error("unknown dynamics '" + s + "' (expected linear, circular, random)");
}

// One cell of the experiment matrix.
struct ExperimentCell {
    Algorithm algo = Algorithm::HGA;
    DynamicsKind dynamics = DynamicsKind::Linear;
    std::size_t dim = 5;
    double severity = 0.1;
    std::uint64_t update_freq = 5000;

    bool operator==(const ExperimentCell&) const = default;
};

// A single-cell experiment, as driven by the `run` subcommand.
struct ExperimentSpec {
    ExperimentCell cell;
    std::uint64_t budget = 50000;
    std::uint64_t report_at = 50000;
    std::uint64_t runs = 20;
    std::uint64_t base_seed = 1;
    std::string output_path;

    void validate() const {
        if (report_at > budget) throw config_error("report_at must be <= budget");
        if (runs < 1) throw config_error("runs must be >= 1");
    }
};

// Cartesian experiment matrix with shared run parameters.
struct MatrixSpec {
    std::vector<Algorithm> algorithms{Algorithm::HGA};
    std::vector<DynamicsKind> dynamics{DynamicsKind::Linear};
    std::vector<std::size_t> dimensions{5};
    std::vector<double> severities{0.1};
    std::vector<std::uint64_t> update_freqs{5000};
    std::uint64_t runs = 20;
    std::uint64_t budget = 50000;
    std::uint64_t report_at = 50000;
    std::uint64_t base_seed = 1;
    std::uint64_t gamma = 25;
    double bound_low = -50.0;
    double bound_high = 50.0;
    std::size_t pop_size = 100;

    bool operator==(const MatrixSpec&) const = default;

    void validate() const {
        if (algorithms.empty() || dynamics.empty() || dimensions.empty() || severities.empty() ||
            update_freqs.empty())
            throw config_error("matrix must span at least one cell");
        for (double s : severities)
            if (s < 0.0) throw config_error("severity must be >= 0");
        for (std::uint64_t f : update_freqs)
            if (f < 1) throw config_error("update_freq must be >= 1");
        for (std::size_t d : dimensions)
            if (d < 1) throw config_error("dim must be >= 1");
        if (runs < 1) throw config_error("runs must be >= 1");
        if (report_at > budget) throw config_error("report_at must be <= budget");
        if (!(bound_low < bound_high)) throw config_error("bounds must satisfy low < high");
        if (pop_size < 2) throw config_error("pop_size must be >= 2");
        if (gamma < 1) throw config_error("gamma must be >= 1");
    }

    std::vector<ExperimentCell> cells() const {
        std::vector<ExperimentCell> out;
        for (Algorithm a : algorithms)
            for (DynamicsKind k : dynamics)
                for (std::size_t d : dimensions)
                    for (double s : severities)
                        for (std::uint64_t f : update_freqs) out.push_back({a, k, d, s, f});
        return out;
    }
};

// Parses and validates a JSON configuration document. Scalar and array
// spellings are both accepted for the matrix axes; unknown keys are
// rejected by name. Defaults: pop 100, bounds ±50, 20 runs, severity 0.1,
// update_freq 5000, budget = report_at = 50000.
inline MatrixSpec parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config root must be a JSON object");

    MatrixSpec spec;
    auto as_array = [](const nlohmann::json& v) {
        return v.is_array() ? v : nlohmann::json::array({v});
    };

    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "algorithm" || key == "algorithms") {
                spec.algorithms.clear();
                for (const auto& v : as_array(value))
                    spec.algorithms.push_back(algorithm_from_string(v.get<std::string>()));
            } else if (key == "dynamics") {
                spec.dynamics.clear();
                for (const auto& v : as_array(value))
                    spec.dynamics.push_back(dynamics_from_string(v.get<std::string>()));
            } else if (key == "dim" || key == "dimensions") {
                spec.dimensions = as_array(value).get<std::vector<std::size_t>>();
            } else if (key == "severity" || key == "severities") {
                spec.severities = as_array(value).get<std::vector<double>>();
            } else if (key == "update_freq" || key == "update_freqs") {
                spec.update_freqs = as_array(value).get<std::vector<std::uint64_t>>();
            } else if (key == "runs") {
                spec.runs = value.get<std::uint64_t>();
            } else if (key == "budget") {
                spec.budget = value.get<std::uint64_t>();
                if (!j.contains("report_at")) spec.report_at = spec.budget;
            } else if (key == "report_at") {
                spec.report_at = value.get<std::uint64_t>();
            } else if (key == "base_seed") {
                spec.base_seed = value.get<std::uint64_t>();
            } else if (key == "gamma") {
                spec.gamma = value.get<std::uint64_t>();
            } else if (key == "bounds") {
                auto b = value.get<std::vector<double>>();
                if (b.size() != 2) throw config_error("bounds must be [low, high]");
                spec.bound_low = b[0];
                spec.bound_high = b[1];
            } else if (key == "pop_size") {
                spec.pop_size = value.get<std::size_t>();
            } else {
                throw config_error("unknown config key '" + key + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw config_error("bad value for config key '" + key + "': " + e.what());
        }
    }
    spec.validate();
    return spec;
}

inline std::string serialize_config(const MatrixSpec& spec) {
    nlohmann::json j;
    j["algorithms"] = nlohmann::json::array();
    for (Algorithm a : spec.algorithms) j["algorithms"].push_back(to_string(a));
    j["dynamics"] = nlohmann::json::array();
    for (DynamicsKind k : spec.dynamics) j["dynamics"].push_back(to_string(k));
    j["dimensions"] = spec.dimensions;
    j["severities"] = spec.severities;
    j["update_freqs"] = spec.update_freqs;
    j["runs"] = spec.runs;
    j["budget"] = spec.budget;
    j["report_at"] = spec.report_at;
    j["base_seed"] = spec.base_seed;
    j["gamma"] = spec.gamma;
    j["bounds"] = {spec.bound_low, spec.bound_high};
    j["pop_size"] = spec.pop_size;
    return j.dump(2);
}

// Stable per-run seed: a 64-bit mix of the base seed, the cell coordinates
// and the run index, independent of execution order.
inline std::uint64_t run_seed(const MatrixSpec& spec, const ExperimentCell& cell,
                              std::uint64_t run_index) {
    return mix_seed({spec.base_seed, static_cast<std::uint64_t>(cell.algo),
                     static_cast<std::uint64_t>(cell.dynamics), cell.dim,
                     std::bit_cast<std::uint64_t>(cell.severity), cell.update_freq, run_index});
}

// Executes one seeded run of one cell and summarizes it. When `keep_trace`
// is non-null the full trace is copied out (used for trace export).
inline RunSummary run_single(const ExperimentCell& cell, const MatrixSpec& shared,
                             std::uint64_t seed, RunTrace* keep_trace = nullptr) {
    DynamicsSpec dyn{cell.dynamics, cell.severity, cell.update_freq, shared.gamma, cell.dim};
    DynamicEnvironment env(dyn, mix_seed({seed, 1}), shared.budget);
    BoxDomain domain(std::vector<double>(cell.dim, shared.bound_low),
                     std::vector<double>(cell.dim, shared.bound_high));
    std::uint64_t algo_seed = mix_seed({seed, 2});

    RunTrace trace;
    switch (cell.algo) {
        case Algorithm::HGA: {
            HgaConfig cfg;
            cfg.pop_size = shared.pop_size;
            cfg.ls = hga_refinement_defaults(cell.dim);
            cfg.seed = algo_seed;
            trace = run_hga(env, domain, cfg);
            break;
        }
        default: {
            BaselineConfig cfg;
            cfg.pop_size = shared.pop_size;
            cfg.seed = algo_seed;
            switch (cell.algo) {
                case Algorithm::SGA_M: trace = run_sga_m(env, domain, cfg); break;
                case Algorithm::RI25_M: trace = run_ri_m(env, domain, cfg); break;
                case Algorithm::HM_M: trace = run_hm_m(env, domain, cfg); break;
                case Algorithm::ERS: trace = run_ers(env, domain, cfg); break;
                default: break;
            }
        }
    }
    if (trace.empty()) throw std::runtime_error("run produced an empty trace");

    RunSummary summary;
    summary.offline_error = offline_error(trace, shared.report_at);
    summary.evals = trace.total_evals();
    summary.changes_seen = env.epoch();
    summary.final_best = trace.records.back().best_since_change;
    summary.seed = seed;
    if (keep_trace) *keep_trace = std::move(trace);
    return summary;
}

struct CellResult {
    ExperimentCell cell;
    std::vector<RunSummary> runs;       // ordered by run index
    std::vector<std::string> failures;  // per-run error messages, if any
};

// Runs every (cell, run) job on a worker pool. Results are deterministic
// for any parallelism level: each run is independently seeded and lands in
// its preassigned slot.
inline std::vector<CellResult> run_matrix(const MatrixSpec& spec, unsigned parallelism) {
    spec.validate();
    if (parallelism < 1) throw std::invalid_argument("run_matrix: parallelism must be >= 1");

    std::vector<ExperimentCell> cells = spec.cells();
    struct Job {
        std::size_t cell_idx;
        std::uint64_t run_idx;
    };
    std::vector<Job> jobs;
    jobs.reserve(cells.size() * spec.runs);
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (std::uint64_t r = 0; r < spec.runs; ++r) jobs.push_back({c, r});

    std::vector<std::vector<std::optional<RunSummary>>> slots(cells.size());
    std::vector<std::vector<std::string>> errors(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        slots[c].resize(spec.runs);
        errors[c].assign(spec.runs, "");
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            std::uint64_t seed = run_seed(spec, cells[job.cell_idx], job.run_idx);
            try {
                slots[job.cell_idx][job.run_idx] = run_single(cells[job.cell_idx], spec, seed);
            } catch (const std::exception& e) {
                errors[job.cell_idx][job.run_idx] = e.what();
            }
        }
    };

    unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(parallelism, jobs.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }

    std::vector<CellResult> results(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        results[c].cell = cells[c];
        for (std::uint64_t r = 0; r < spec.runs; ++r) {
            if (slots[c][r].has_value())
                results[c].runs.push_back(*slots[c][r]);
            else
                results[c].failures.push_back("run " + std::to_string(r) + ": " + errors[c][r]);
        }
    }
    return results;
}

}  // namespace dynopt
