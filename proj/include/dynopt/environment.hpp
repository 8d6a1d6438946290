#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dynopt/objective.hpp"
#include "dynopt/rng.hpp"

namespace dynopt {

enum class DynamicsKind { Linear, Circular, Random };

inline const char* to_string(DynamicsKind k) {
    switch (k) {
        case DynamicsKind::Linear: return "linear";
        case DynamicsKind::Circular: return "circular";
        case DynamicsKind::Random: return "random";
    }
    return "?";
}

struct DynamicsSpec {
    DynamicsKind kind = DynamicsKind::Linear;
    double severity = 0.1;
    std::uint64_t update_freq = 5000;  // evaluations between offset updates
    std::uint64_t gamma = 25;          // cycle length, circular only
    std::size_t dimension = 5;

    void validate() const {
        if (severity < 0.0) throw std::invalid_argument("DynamicsSpec: severity must be >= 0");
        if (update_freq < 1) throw std::invalid_argument("DynamicsSpec: update_freq must be >= 1");
        if (gamma < 1) throw std::invalid_argument("DynamicsSpec: gamma must be >= 1");
        if (dimension < 1) throw std::invalid_argument("DynamicsSpec: dimension must be >= 1");
    }
};

struct OffsetState {
    std::vector<double> delta;
    std::uint64_t update_count = 0;
};

// Offset before any update has been applied. Circular dynamics starts at
// 0 for odd coordinates and severity for even ones (1-based parity).
inline OffsetState initial_offset(const DynamicsSpec& spec) {
    spec.validate();
    OffsetState state;
    state.delta.assign(spec.dimension, 0.0);
    if (spec.kind == DynamicsKind::Circular) {
        for (std::size_t i = 0; i < spec.dimension; ++i)
            if ((i + 1) % 2 == 0) state.delta[i] = spec.severity;
    }
    return state;
}

// Applies one offset update at evaluation index t; only legal when
// (t+1) mod update_freq == 0. Random dynamics draws one normal deviate per
// coordinate, in index order, from the supplied stream.
inline void advance_offset(OffsetState& state, const DynamicsSpec& spec, std::uint64_t t,
                           Rng& rng) {
    if ((t + 1) % spec.update_freq != 0)
        throw std::logic_error("advance_offset: called at a non-update evaluation index");
    if (state.delta.size() != spec.dimension)
        throw std::invalid_argument("advance_offset: offset dimension mismatch");
    switch (spec.kind) {
        case DynamicsKind::Linear:
            // closed form k*s rather than accumulation, so the offset is
            // exact for any number of updates
            for (double& d : state.delta)
                d = static_cast<double>(state.update_count + 1) * spec.severity;
            break;
        case DynamicsKind::Circular: {
            double phase = kTwoPi * static_cast<double>(t / spec.update_freq) /
                           static_cast<double>(spec.gamma);
            for (std::size_t i = 0; i < state.delta.size(); ++i) {
                bool odd = ((i + 1) % 2 == 1);
                state.delta[i] += spec.severity * (odd ? std::sin(phase) : std::cos(phase));
            }
            break;
        }
        case DynamicsKind::Random:
            for (double& d : state.delta) d += spec.severity * rng.normal();
            break;
    }
    ++state.update_count;
}

struct EvalClock {
    std::uint64_t t = 0;      // completed evaluations
    std::uint64_t epoch = 0;  // environment changes so far
    bool changed_since_last_read = false;
};

// Raised when an evaluation is attempted past the configured hard budget.
// Run loops treat it as normal termination.
class budget_exhausted : public std::runtime_error {
  public:
    explicit budget_exhausted(std::uint64_t budget)
        : std::runtime_error("evaluation budget exhausted"), budget_(budget) {}
    std::uint64_t budget() const { return budget_; }

  private:
    std::uint64_t budget_;
};

// Time-dependent Rastrigin objective. The clock is identified with the
// number of evaluations: every call to evaluate() ticks it, and the offset
// updates after the evaluation whose post-increment index is a multiple of
// update_freq, so the next evaluation sees the new offset.
//
// Sequential use only; distinct environments may live on distinct threads.
class DynamicEnvironment {
  public:
    explicit DynamicEnvironment(DynamicsSpec spec, std::uint64_t seed = 0,
                                std::uint64_t eval_budget = std::numeric_limits<std::uint64_t>::max())
        : spec_(spec), offset_(initial_offset(spec)), rng_(seed), eval_budget_(eval_budget) {
        if (eval_budget_ < 1) throw std::invalid_argument("DynamicEnvironment: eval_budget must be >= 1");
    }

    double evaluate(std::span<const double> x) {
        if (clock_.t >= eval_budget_) throw budget_exhausted(eval_budget_);
        double value = shifted_rastrigin(x, offset_.delta);
        last_eval_epoch_ = clock_.epoch;
        ++clock_.t;
        if (clock_.t % spec_.update_freq == 0) {
            advance_offset(offset_, spec_, clock_.t - 1, rng_);
            ++clock_.epoch;
            clock_.changed_since_last_read = true;
        }
        return value;
    }

    // Analytic gradient under the current offset. Does not tick the clock:
    // only objective evaluations count against the shared ledger.
    std::vector<double> gradient(std::span<const double> x) const {
        return shifted_rastrigin_gradient(x, offset_.delta);
    }

    // Read-once change flag.
    bool observe_change() {
        return std::exchange(clock_.changed_since_last_read, false);
    }

    // The benchmark's optimum: x = delta(t), value identically 0.
    std::pair<std::vector<double>, double> true_optimum() const {
        return {offset_.delta, 0.0};
    }
    double true_optimum_value() const { return 0.0; }

    const DynamicsSpec& spec() const { return spec_; }
    const OffsetState& offset_state() const { return offset_; }
    const std::vector<double>& offset() const { return offset_.delta; }
    const EvalClock& clock() const { return clock_; }
    std::uint64_t evals() const { return clock_.t; }
    std::uint64_t epoch() const { return clock_.epoch; }
    std::uint64_t eval_budget() const { return eval_budget_; }
    std::uint64_t evals_remaining() const { return eval_budget_ - clock_.t; }

    // Epoch the most recent evaluation was scored in (the update an
    // evaluation triggers belongs to the following epoch).
    std::uint64_t last_eval_epoch() const { return last_eval_epoch_; }

  private:
    DynamicsSpec spec_;
    OffsetState offset_;
    EvalClock clock_;
    Rng rng_;
    std::uint64_t eval_budget_;
    std::uint64_t last_eval_epoch_ = 0;
};

}  // namespace dynopt
