#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynopt/environment.hpp"

namespace dynopt {

struct TraceRecord {
    std::uint64_t eval_index;   // 1-based, strictly increasing
    double best_since_change;   // running best within the record's epoch
    double f_true;              // true optimum value at this evaluation
    std::uint64_t epoch;        // epoch the evaluation was scored in
};

// Per-evaluation record of a single run, feeding the offline error.
struct RunTrace {
    std::vector<TraceRecord> records;

    std::uint64_t total_evals() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// Appends one record; must be called once per environment evaluation, in
// evaluation order. Starts a fresh best at epoch boundaries.
inline void record_evaluation(RunTrace& trace, double value, const DynamicEnvironment& env) {
    std::uint64_t index = env.evals();
    if (index != trace.records.size() + 1)
        throw std::logic_error("record_evaluation: out-of-order evaluation index");
    std::uint64_t epoch = env.last_eval_epoch();
    double best = value;
    if (!trace.records.empty()) {
        const TraceRecord& prev = trace.records.back();
        if (prev.epoch == epoch) best = std::min(prev.best_since_change, value);
    }
    trace.records.push_back({index, best, env.true_optimum_value(), epoch});
}

// Offline error over the first `upto` evaluations:
//   (1/T) * sum_i (f_best_i - f_true_i)
inline double offline_error(const RunTrace& trace, std::uint64_t upto) {
    if (trace.records.empty()) throw std::invalid_argument("offline_error: empty trace");
    std::uint64_t t = std::min<std::uint64_t>(upto, trace.records.size());
    if (t == 0) throw std::invalid_argument("offline_error: zero-length slice");
    double acc = 0.0;
    for (std::uint64_t i = 0; i < t; ++i)
        acc += trace.records[i].best_since_change - trace.records[i].f_true;
    return acc / static_cast<double>(t);
}

inline double offline_error(const RunTrace& trace) {
    return offline_error(trace, trace.records.size());
}

struct SummaryStats {
    double mean;
    double stddev;  // sample deviation (n-1), 0 when n == 1
    double min;
    double max;
};

inline SummaryStats summarize_runs(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("summarize_runs: empty list");
    double sum = 0.0, lo = values[0], hi = values[0];
    for (double v : values) {
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double mean = sum / static_cast<double>(values.size());
    double dev = 0.0;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return {mean, dev, lo, hi};
}

// One run's headline numbers, as emitted to the summary CSV.
struct RunSummary {
    double offline_error = 0.0;
    std::uint64_t evals = 0;
    std::uint64_t changes_seen = 0;
    double final_best = 0.0;
    std::uint64_t seed = 0;
};

}  // namespace dynopt
