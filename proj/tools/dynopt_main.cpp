// Command-line driver for the dynamic-optimization benchmark harness.
//
//   dynopt run     one experiment cell (algorithm x dynamics x parameters)
//   dynopt matrix  a JSON-configured cartesian experiment matrix
//   dynopt table   render an aligned text table from a summary CSV
//   dynopt offsets dump an offset trajectory for debugging
//
// Exit codes: 0 success, 1 partial cell failures, 2 configuration error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "dynopt/dynopt.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw dynopt::config_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

unsigned default_parallelism() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

int report_failures(const std::vector<dynopt::CellResult>& results) {
    int failed = 0;
    for (const dynopt::CellResult& cr : results)
        for (const std::string& msg : cr.failures) {
            std::cerr << "cell " << to_string(cr.cell.algo) << "/" << to_string(cr.cell.dynamics)
                      << " n=" << cr.cell.dim << ": " << msg << "\n";
            ++failed;
        }
    return failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic-optimization benchmark harness"};
    app.require_subcommand(1);

    // ---- run: a single cell ------------------------------------------------
    auto* run = app.add_subcommand("run", "run one experiment cell");
    std::string algo = "HGA", dynamics = "linear", out_path = "summary.csv", trace_out;
    std::size_t dim = 5;
    double severity = 0.1;
    std::uint64_t update_freq = 5000, budget = 50000, report_at = 0, runs = 20, seed = 1,
                  stride = 100;
    unsigned parallelism = default_parallelism();
    run->add_option("--algo", algo, "HGA, SGA_M, RI25_M, HM_M or ERS");
    run->add_option("--dynamics", dynamics, "linear, circular or random");
    run->add_option("--dim", dim, "problem dimension");
    run->add_option("--severity", severity, "offset displacement per update");
    run->add_option("--update-freq", update_freq, "evaluations between updates");
    run->add_option("--budget", budget, "evaluation budget per run");
    run->add_option("--report-at", report_at, "offline-error slice (default: budget)");
    run->add_option("--runs", runs, "independent seeded runs");
    run->add_option("--seed", seed, "base seed");
    run->add_option("--out", out_path, "summary CSV path");
    run->add_option("--parallelism", parallelism, "worker threads");
    run->add_option("--trace-out", trace_out, "write the first run's trace CSV here");
    run->add_option("--stride", stride, "trace down-sampling stride");

    // ---- matrix: a config-file product -------------------------------------
    auto* matrix = app.add_subcommand("matrix", "run a JSON experiment matrix");
    std::string config_path, matrix_out = "summary.csv";
    unsigned matrix_par = default_parallelism();
    matrix->add_option("--config", config_path, "JSON config path")->required();
    matrix->add_option("--out", matrix_out, "summary CSV path");
    matrix->add_option("--parallelism", matrix_par, "worker threads");

    // ---- table: render from CSV --------------------------------------------
    auto* table = app.add_subcommand("table", "render a text table from a summary CSV");
    std::string table_in, table_out;
    table->add_option("--in", table_in, "summary CSV path")->required();
    table->add_option("--out", table_out, "write here instead of stdout");

    // ---- offsets: trajectory dump -------------------------------------------
    auto* offsets = app.add_subcommand("offsets", "dump an offset trajectory CSV");
    std::string off_dynamics = "linear", off_out = "offsets.csv";
    std::size_t off_dim = 5;
    double off_severity = 0.1;
    std::uint64_t off_freq = 5000, off_updates = 25, off_seed = 1, off_gamma = 25;
    offsets->add_option("--dynamics", off_dynamics, "linear, circular or random");
    offsets->add_option("--dim", off_dim, "dimension");
    offsets->add_option("--severity", off_severity, "severity");
    offsets->add_option("--update-freq", off_freq, "evaluations between updates");
    offsets->add_option("--updates", off_updates, "number of updates to apply");
    offsets->add_option("--gamma", off_gamma, "circular cycle length");
    offsets->add_option("--seed", off_seed, "random-dynamics seed");
    offsets->add_option("--out", off_out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            dynopt::ExperimentSpec exp;
            exp.cell = {dynopt::algorithm_from_string(algo), dynopt::dynamics_from_string(dynamics),
                        dim, severity, update_freq};
            exp.budget = budget;
            exp.report_at = report_at > 0 ? report_at : budget;
            exp.runs = runs;
            exp.base_seed = seed;
            exp.output_path = out_path;
            exp.validate();

            dynopt::MatrixSpec spec;
            spec.algorithms = {exp.cell.algo};
            spec.dynamics = {exp.cell.dynamics};
            spec.dimensions = {exp.cell.dim};
            spec.severities = {exp.cell.severity};
            spec.update_freqs = {exp.cell.update_freq};
            spec.runs = exp.runs;
            spec.budget = exp.budget;
            spec.report_at = exp.report_at;
            spec.base_seed = exp.base_seed;
            spec.validate();

            auto results = dynopt::run_matrix(spec, parallelism);
            dynopt::emit_summary(results, out_path);
            std::cout << dynopt::render_table(
                dynopt::parse_summary_csv(dynopt::summary_csv(results)));

            if (!trace_out.empty()) {
                dynopt::ExperimentCell cell = spec.cells()[0];
                dynopt::RunTrace trace;
                dynopt::run_single(cell, spec, dynopt::run_seed(spec, cell, 0), &trace);
                dynopt::emit_trace_plotdata(trace, trace_out, stride);
            }
            return report_failures(results) > 0 ? 1 : 0;
        }

        if (*matrix) {
            dynopt::MatrixSpec spec = dynopt::parse_config(read_file(config_path));
            auto results = dynopt::run_matrix(spec, matrix_par);
            dynopt::emit_summary(results, matrix_out);
            std::cout << dynopt::render_table(
                dynopt::parse_summary_csv(dynopt::summary_csv(results)));
            return report_failures(results) > 0 ? 1 : 0;
        }

        if (*table) {
            std::string rendered = dynopt::render_table(
                dynopt::parse_summary_csv(read_file(table_in)));
            if (table_out.empty())
                std::cout << rendered;
            else
                dynopt::detail::atomic_write(table_out, rendered);
            return 0;
        }

        if (*offsets) {
            dynopt::DynamicsSpec spec{dynopt::dynamics_from_string(off_dynamics), off_severity,
                                      off_freq, off_gamma, off_dim};
            spec.validate();
            dynopt::emit_offsets(spec, off_seed, off_updates, off_out);
            return 0;
        }
    } catch (const dynopt::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
