#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dynopt/harness.hpp"
#include "dynopt/metrics.hpp"

namespace dynopt {

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// write-then-rename so re-emission over an existing file is atomic
inline void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

}  // namespace detail

inline constexpr const char* kSummaryHeader =
    "algo,dynamics,dim,severity,update_freq,seed,offline_error,evals,changes_seen,final_best";

// One parsed summary-CSV row (run row or aggregate row).
struct SummaryRow {
    std::string algo;
    std::string dynamics;
    std::size_t dim = 0;
    double severity = 0.0;
    std::uint64_t update_freq = 0;
    std::string seed;  // run seed, or "mean" for the aggregate row
    double offline_error = 0.0;
    double evals = 0.0;
    double changes_seen = 0.0;
    double final_best = 0.0;
};

// Renders the matrix results as CSV text: one row per run plus one
// aggregate row per cell. The aggregate row keeps the schema, with the
// seed column holding "mean", the offline_error/evals/changes_seen columns
// holding per-cell means, and final_best holding the sample standard
// deviation of the offline error.
inline std::string summary_csv(const std::vector<CellResult>& results) {
    std::ostringstream out;
    out << kSummaryHeader << "\n";
    for (const CellResult& cr : results) {
        std::string prefix = std::string(to_string(cr.cell.algo)) + "," +
                             to_string(cr.cell.dynamics) + "," + std::to_string(cr.cell.dim) +
                             "," + detail::format_double(cr.cell.severity) + "," +
                             std::to_string(cr.cell.update_freq) + ",";
        std::vector<double> errs, evals, changes, finals;
        for (const RunSummary& r : cr.runs) {
            out << prefix << r.seed << "," << detail::format_double(r.offline_error) << ","
                << r.evals << "," << r.changes_seen << ","
                << detail::format_double(r.final_best) << "\n";
            errs.push_back(r.offline_error);
            evals.push_back(static_cast<double>(r.evals));
            changes.push_back(static_cast<double>(r.changes_seen));
            finals.push_back(static_cast<double>(r.final_best));
        }
        if (!errs.empty()) {
            SummaryStats se = summarize_runs(errs);
            SummaryStats sv = summarize_runs(evals);
            SummaryStats sc = summarize_runs(changes);
            out << prefix << "mean," << detail::format_double(se.mean) << ","
                << detail::format_double(sv.mean) << "," << detail::format_double(sc.mean) << ","
                << detail::format_double(se.stddev) << "\n";
        }
    }
    return out.str();
}

inline void emit_summary(const std::vector<CellResult>& results, const std::string& path) {
    detail::atomic_write(path, summary_csv(results));
}

inline std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("summary CSV is empty");
    if (line != kSummaryHeader)
        throw std::runtime_error("summary CSV has an unexpected header: " + line);
    std::vector<SummaryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) f.push_back(field);
        if (f.size() != 10) throw std::runtime_error("bad summary CSV row: " + line);
        SummaryRow r;
        r.algo = f[0];
        r.dynamics = f[1];
        r.dim = std::stoul(f[2]);
        r.severity = std::stod(f[3]);
        r.update_freq = std::stoull(f[4]);
        r.seed = f[5];
        r.offline_error = std::stod(f[6]);
        r.evals = std::stod(f[7]);
        r.changes_seen = std::stod(f[8]);
        r.final_best = std::stod(f[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// Plain-text comparison table: one line per (dynamics, dim, severity,
// update_freq) combination, one column per algorithm, each cell mean±sd
// of the offline error across runs.
inline std::string render_table(const std::vector<SummaryRow>& rows) {
    struct CellKey {
        std::string dynamics;
        std::size_t dim;
        double severity;
        std::uint64_t update_freq;
        auto operator<=>(const CellKey&) const = default;
    };
    std::vector<std::string> algos;
    std::map<CellKey, std::map<std::string, std::vector<double>>> grid;
    for (const SummaryRow& r : rows) {
        if (r.seed == "mean") continue;  // aggregates are recomputed from run rows
        if (std::find(algos.begin(), algos.end(), r.algo) == algos.end()) algos.push_back(r.algo);
        grid[{r.dynamics, r.dim, r.severity, r.update_freq}][r.algo].push_back(r.offline_error);
    }

    auto fmt_cell = [](const std::vector<double>& errs) {
        SummaryStats s = summarize_runs(errs);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f±%.2f", s.mean, s.stddev);
        return std::string(buf);
    };

    std::ostringstream out;
    const int label_w = 34, col_w = 16;
    out << std::left << std::setw(label_w) << "dynamics dim severity update_freq";
    for (const std::string& a : algos) out << std::right << std::setw(col_w) << a;
    out << "\n";
    for (const auto& [key, per_algo] : grid) {
        std::ostringstream label;
        label << key.dynamics << " n=" << key.dim << " s=" << detail::format_double(key.severity)
              << " dg=" << key.update_freq;
        out << std::left << std::setw(label_w) << label.str();
        for (const std::string& a : algos) {
            auto it = per_algo.find(a);
            out << std::right << std::setw(col_w) << (it == per_algo.end() ? "-" : fmt_cell(it->second));
        }
        out << "\n";
    }
    return out.str();
}

// Down-sampled trace export: every stride-th record plus the first record
// of every epoch and the final record, in evaluation order.
inline void emit_trace_plotdata(const RunTrace& trace, const std::string& path,
                                std::uint64_t stride) {
    if (stride < 1) throw std::invalid_argument("emit_trace_plotdata: stride must be >= 1");
    std::ostringstream out;
    out << "eval_index,best_since_change,f_true,epoch\n";
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const TraceRecord& r = trace.records[i];
        bool sampled = r.eval_index % stride == 0;
        bool boundary = i == 0 || trace.records[i - 1].epoch != r.epoch;
        bool last = i + 1 == trace.records.size();
        if (!(sampled || boundary || last)) continue;
        out << r.eval_index << "," << detail::format_double(r.best_since_change) << ","
            << detail::format_double(r.f_true) << "," << r.epoch << "\n";
    }
    detail::atomic_write(path, out.str());
}

// Offset-trajectory dump for debugging: row 0 is the initial offset, each
// further row one applied update.
inline void emit_offsets(const DynamicsSpec& spec, std::uint64_t seed, std::uint64_t updates,
                         const std::string& path) {
    OffsetState state = initial_offset(spec);
    Rng rng(seed);
    std::ostringstream out;
    out << "update_index";
    for (std::size_t i = 1; i <= spec.dimension; ++i) out << ",delta_" << i;
    out << "\n";
    auto emit_row = [&] {
        out << state.update_count;
        for (double d : state.delta) out << "," << detail::format_double(d);
        out << "\n";
    };
    emit_row();
    for (std::uint64_t k = 1; k <= updates; ++k) {
        advance_offset(state, spec, k * spec.update_freq - 1, rng);
        emit_row();
    }
    detail::atomic_write(path, out.str());
}

}  // namespace dynopt
