#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dynopt/harness.hpp"
#include "dynopt/report.hpp"

using namespace dynopt;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

// small matrix that runs in well under a second
MatrixSpec tiny_matrix() {
    MatrixSpec spec;
    spec.algorithms = {Algorithm::SGA_M};
    spec.dynamics = {DynamicsKind::Linear};
    spec.dimensions = {2};
    spec.severities = {0.1};
    spec.update_freqs = {200};
    spec.runs = 3;
    spec.budget = 600;
    spec.report_at = 600;
    spec.pop_size = 10;
    spec.base_seed = 7;
    return spec;
}

}  // namespace

TEST_CASE("parse_config: minimal document picks up the defaults") {
    MatrixSpec spec = parse_config(R"({"algorithm": "HGA", "dynamics": "linear", "dim": 5})");
    REQUIRE(spec.algorithms.size() == 1);
    CHECK(spec.algorithms[0] == Algorithm::HGA);
    REQUIRE(spec.dynamics.size() == 1);
    CHECK(spec.dynamics[0] == DynamicsKind::Linear);
    CHECK(spec.dimensions == std::vector<std::size_t>{5});
    CHECK(spec.severities == std::vector<double>{0.1});
    CHECK(spec.update_freqs == std::vector<std::uint64_t>{5000});
    CHECK(spec.runs == 20);
    CHECK(spec.bound_low == -50.0);
    CHECK(spec.bound_high == 50.0);
    CHECK(spec.pop_size == 100);
    CHECK(spec.budget == 50000);
    CHECK(spec.report_at == 50000);
}

TEST_CASE("parse_config: descriptive failures") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"severity": -1.0})"),
                         doctest::Contains("severity"), config_error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"frobnicate": 1})"),
                         doctest::Contains("frobnicate"), config_error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"algorithm": "GGA"})"), doctest::Contains("GGA"),
                         config_error);
    CHECK_THROWS_AS(parse_config("not json at all"), config_error);
    CHECK_THROWS_AS(parse_config(R"({"budget": 100, "report_at": 200})"), config_error);
}

TEST_CASE("experiment spec validation") {
    ExperimentSpec exp;
    exp.budget = 100;
    exp.report_at = 100;
    CHECK_NOTHROW(exp.validate());
    exp.report_at = 101;
    CHECK_THROWS_AS(exp.validate(), config_error);
    exp.report_at = 50;
    exp.runs = 0;
    CHECK_THROWS_AS(exp.validate(), config_error);
}

TEST_CASE("config round-trips through serialization") {
    MatrixSpec spec = tiny_matrix();
    spec.algorithms = {Algorithm::HGA, Algorithm::ERS};
    spec.dynamics = {DynamicsKind::Circular, DynamicsKind::Random};
    spec.severities = {0.01, 0.5};
    MatrixSpec again = parse_config(serialize_config(spec));
    CHECK(again == spec);
}

TEST_CASE("run seeds are distinct across cells and runs") {
    MatrixSpec spec = tiny_matrix();
    spec.algorithms = {Algorithm::HGA, Algorithm::SGA_M, Algorithm::ERS};
    spec.dynamics = {DynamicsKind::Linear, DynamicsKind::Circular, DynamicsKind::Random};
    spec.dimensions = {2, 5};
    spec.severities = {0.01, 0.1, 0.5};
    spec.update_freqs = {1000, 5000};
    spec.runs = 20;
    std::set<std::uint64_t> seen;
    for (const ExperimentCell& cell : spec.cells())
        for (std::uint64_t r = 0; r < spec.runs; ++r) seen.insert(run_seed(spec, cell, r));
    CHECK(seen.size() == spec.cells().size() * spec.runs);
}

TEST_CASE("run_matrix: row counts and determinism across parallelism") {
    MatrixSpec spec = tiny_matrix();
    auto res1 = run_matrix(spec, 1);
    REQUIRE(res1.size() == 1);
    CHECK(res1[0].runs.size() == 3);
    CHECK(res1[0].failures.empty());
    for (const RunSummary& r : res1[0].runs) {
        CHECK(r.evals == 600);
        CHECK(r.changes_seen == 3);
        CHECK(r.offline_error >= 0.0);
    }

    auto res4 = run_matrix(spec, 4);
    CHECK(summary_csv(res1) == summary_csv(res4));  // byte-identical
}

TEST_CASE("summary csv shape: run rows plus one aggregate row per cell") {
    MatrixSpec spec = tiny_matrix();
    auto results = run_matrix(spec, 2);
    std::string csv = summary_csv(results);
    auto rows = parse_summary_csv(csv);
    REQUIRE(rows.size() == 4);  // 3 runs + 1 aggregate
    int aggregates = 0;
    for (const SummaryRow& r : rows)
        if (r.seed == "mean") ++aggregates;
    CHECK(aggregates == 1);
    CHECK(rows.back().seed == "mean");

    // the aggregate offline error matches the mean of the run rows
    double mean = (rows[0].offline_error + rows[1].offline_error + rows[2].offline_error) / 3.0;
    CHECK(rows[3].offline_error == doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("emit_summary writes atomically over an existing file") {
    MatrixSpec spec = tiny_matrix();
    auto results = run_matrix(spec, 2);
    auto path = temp_path("dynopt_test_summary.csv");
    emit_summary(results, path.string());
    std::string first = read_file(path.string());
    emit_summary(results, path.string());
    std::string second = read_file(path.string());
    CHECK(first == second);
    CHECK(first.rfind("algo,dynamics,", 0) == 0);
    std::filesystem::remove(path);
}

TEST_CASE("rendered table holds one cell per dynamics/parameter/algorithm") {
    MatrixSpec spec = tiny_matrix();
    spec.algorithms = {Algorithm::SGA_M, Algorithm::ERS};
    spec.dynamics = {DynamicsKind::Linear, DynamicsKind::Random};
    auto results = run_matrix(spec, 2);
    auto rows = parse_summary_csv(summary_csv(results));
    std::string table = render_table(rows);
    CHECK(table.find("SGA_M") != std::string::npos);
    CHECK(table.find("ERS") != std::string::npos);
    CHECK(table.find("linear") != std::string::npos);
    CHECK(table.find("random") != std::string::npos);
    // header + one line per (dynamics, parameter) combination
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
}

TEST_CASE("trace plot data: stride plus epoch boundaries, deduplicated") {
    // synthetic 50,000-record trace with an epoch boundary every 5,000
    RunTrace trace;
    for (std::uint64_t i = 1; i <= 50000; ++i)
        trace.records.push_back({i, 1.0, 0.0, (i - 1) / 5000});

    auto path = temp_path("dynopt_test_trace.csv");
    emit_trace_plotdata(trace, path.string(), 1000);
    std::string text = read_file(path.string());
    std::size_t lines = std::count(text.begin(), text.end(), '\n');
    std::size_t rows = lines - 1;  // minus header
    CHECK(rows >= 60);             // 50 samples + 10 boundaries, deduplicated
    CHECK(rows <= 61);

    // and stride 1 keeps everything
    emit_trace_plotdata(trace, path.string(), 1);
    text = read_file(path.string());
    CHECK(std::count(text.begin(), text.end(), '\n') == 50001);

    // output is sorted by eval index
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::uint64_t prev = 0;
    while (std::getline(in, line)) {
        std::uint64_t idx = std::stoull(line.substr(0, line.find(',')));
        CHECK(idx > prev);
        prev = idx;
    }
    std::filesystem::remove(path);
}

TEST_CASE("offset trajectory dump") {
    DynamicsSpec spec{DynamicsKind::Circular, 0.5, 100, 25, 2};
    auto path = temp_path("dynopt_test_offsets.csv");
    emit_offsets(spec, 3, 25, path.string());
    std::string text = read_file(path.string());
    CHECK(text.rfind("update_index,delta_1,delta_2", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 27);  // header + initial + 25 updates
    std::filesystem::remove(path);
}

TEST_CASE("single run summary slices the offline error at report_at") {
    MatrixSpec spec = tiny_matrix();
    spec.report_at = 300;
    ExperimentCell cell = spec.cells()[0];
    RunTrace trace;
    RunSummary s = run_single(cell, spec, run_seed(spec, cell, 0), &trace);
    CHECK(s.evals == 600);
    CHECK(trace.total_evals() == 600);
    CHECK(s.offline_error == doctest::Approx(offline_error(trace, 300)).epsilon(1e-15));
    CHECK(s.final_best == trace.records.back().best_since_change);
}
