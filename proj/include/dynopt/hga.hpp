#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynopt/environment.hpp"
#include "dynopt/local_search.hpp"
#include "dynopt/metrics.hpp"
#include "dynopt/objective.hpp"
#include "dynopt/rng.hpp"

namespace dynopt {

// One population member. The genotype lives in unconstrained y-space and
// is never moved by refinement; `refined` is the x-space local optimum the
// descent reached from it, and `fitness` its objective value.
struct Individual {
    std::vector<double> genotype;
    std::optional<std::vector<double>> refined;
    std::optional<double> fitness;
    std::uint64_t refine_epoch = 0;  // environment epoch the refinement belongs to

    bool is_refined() const { return refined.has_value(); }
    void invalidate() {
        refined.reset();
        fitness.reset();
    }
};

struct HgaConfig {
    std::size_t pop_size = 100;
    std::uint64_t max_generations = std::numeric_limits<std::uint64_t>::max();
    std::size_t tournament_size = 2;
    double sim_fitness_tol = 1e-6;  // relative-plus-absolute fitness closeness
    double sim_point_tol = 1e-3;    // inf-norm closeness of refined points
    double small_norm_tol = 1e-8;   // degenerate-mutation threshold on ||Y1-Y2||_2
    LsConfig ls;
    std::size_t elitism_count = 1;
    std::uint64_t seed = 1;
    // Optional rate gating of the operator choice; the similarity rule
    // alone decides when this is off (the default).
    bool rate_gating = false;
    double crossover_rate = 0.6;
    double mutation_rate = 0.2;

    void validate() const {
        if (pop_size < 2) throw std::invalid_argument("HgaConfig: pop_size must be >= 2");
        if (tournament_size < 1) throw std::invalid_argument("HgaConfig: tournament_size must be >= 1");
        if (!(sim_fitness_tol > 0.0 && sim_point_tol > 0.0 && small_norm_tol > 0.0))
            throw std::invalid_argument("HgaConfig: tolerances must be positive");
        ls.validate();
    }
};

// Refinement budget for the finite-difference descent: every gradient
// costs 2n charged evaluations, and BFGS needs about n+2 line searches to
// close out the smoothed landscape.
inline LsConfig hga_refinement_defaults(std::size_t dim) {
    LsConfig ls;
    ls.max_iterations = 2 * static_cast<int>(dim) + 8;
    ls.grad_tolerance = 1e-6;
    std::uint64_t n = dim;
    ls.eval_budget = (2 * n + 8) * (2 * n + 3) + 2 * n + 2;
    return ls;
}

// Probe step for the refinement gradient. Central differences this coarse
// see the quadratic bowl of the benchmark rather than its unit-period
// ripple, which is what lets a descent re-acquire the optimum after a
// shift regardless of which basin its start point sits in.
inline constexpr double kRefineFdStep = 1.0;

// N genotypes drawn uniformly from [-pi/2, pi/2]^n, which covers the box
// exactly once through the sine transform. Nothing is refined yet.
inline std::vector<Individual> initialize_population(const HgaConfig& cfg, Rng& rng,
                                                     std::size_t dim) {
    std::vector<Individual> pop(cfg.pop_size);
    for (Individual& ind : pop) {
        ind.genotype.resize(dim);
        for (double& y : ind.genotype) y = rng.uniform(-kPi / 2.0, kPi / 2.0);
    }
    return pop;
}

namespace detail {

// Probe the best cached refined point under the current landscape: one
// recorded evaluation that re-anchors best-since-change right after a
// change, long before the next descent finishes.
inline void reevaluate_incumbent(const std::vector<Individual>& pop, DynamicEnvironment& env,
                                 RunTrace& trace) {
    const Individual* best = nullptr;
    for (const Individual& ind : pop)
        if (ind.is_refined() && (!best || *ind.fitness < *best->fitness)) best = &ind;
    if (!best) return;
    record_evaluation(trace, env.evaluate(*best->refined), env);
}

// Composite objective y -> f(transform(y), t). Every evaluation, probes
// included, ticks the shared clock, lands in the trace, and counts against
// the per-descent budget. When an anchor population is attached, a change
// observed mid-descent immediately re-evaluates its incumbent so the
// best-since-change ledger recovers without waiting for the descent.
struct CompositeObjective {
    DynamicEnvironment& env;
    const BoxDomain& domain;
    RunTrace& trace;
    std::uint64_t budget;
    const std::vector<Individual>* anchor_pop = nullptr;
    mutable std::uint64_t used = 0;
    mutable std::uint64_t epoch_seen = 0;
    mutable bool anchoring = false;

    double eval_x(std::span<const double> x) const {
        if (used >= budget) throw detail::ls_budget_hit{};
        ++used;
        double v = env.evaluate(x);
        record_evaluation(trace, v, env);
        if (anchor_pop && !anchoring && env.epoch() != epoch_seen) {
            anchoring = true;
            reevaluate_incumbent(*anchor_pop, env, trace);
            anchoring = false;
            epoch_seen = env.epoch();
        }
        return v;
    }

    double operator()(std::span<const double> y) const {
        return eval_x(transform_y_to_x(y, domain));
    }

    // charged central differences in decision space, chained through the
    // sine transform
    std::vector<double> gradient(std::span<const double> y) const {
        std::vector<double> x = transform_y_to_x(y, domain);
        std::vector<double> g(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            double keep = x[i];
            x[i] = keep + kRefineFdStep;
            double hi = eval_x(x);
            x[i] = keep - kRefineFdStep;
            double lo = eval_x(x);
            x[i] = keep;
            g[i] = (hi - lo) / (2.0 * kRefineFdStep) *
                   transform_slope(y[i], domain.lower[i], domain.upper[i]);
        }
        return g;
    }

    // diagonal curvature of the smoothed bowl in y, clamped positive;
    // seeds the descent's inverse Hessian
    std::vector<double> curvature(std::span<const double> y) const {
        std::vector<double> x = transform_y_to_x(y, domain);
        const std::vector<double>& delta = env.offset();
        std::vector<double> c(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            double amp = 0.5 * (domain.lower[i] - domain.upper[i]);
            double slope = amp * std::cos(y[i]);
            double bend = -amp * std::sin(y[i]);
            double h = 2.0 * slope * slope + 2.0 * (x[i] - delta[i]) * bend;
            c[i] = std::max(std::abs(h), 1.0);
        }
        return c;
    }
};

}  // namespace detail

// Local search on one individual: descend the composite objective from the
// genotype and cache the refined x-space point and its fitness. The anchor
// population, when given, supplies the incumbent for mid-descent change
// recovery.
inline void refine_individual(Individual& ind, DynamicEnvironment& env, const BoxDomain& domain,
                              const LsConfig& ls, RunTrace& trace,
                              const std::vector<Individual>* anchor_pop = nullptr) {
    detail::CompositeObjective f{env, domain, trace, ls.eval_budget, anchor_pop};
    f.epoch_seen = env.epoch();
    std::uint64_t start_epoch = env.epoch();
    LsResult r = bfgs_minimize(
        std::ref(f), [&](std::span<const double> y) { return f.gradient(y); }, ind.genotype, ls,
        nullptr, [&](std::span<const double> y) { return f.curvature(y); });
    ind.refined = transform_y_to_x(r.x_opt, domain);
    ind.fitness = r.f_opt;
    ind.refine_epoch = start_epoch;  // stale on purpose if a change hit mid-descent
}

// Refines every individual that is new or whose refinement predates the
// current epoch, the stale ones in ascending order of their previous
// fitness so the incumbent recovers first after a change.
inline void refine_population(std::vector<Individual>& pop, DynamicEnvironment& env,
                              const BoxDomain& domain, const LsConfig& ls, RunTrace& trace) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < pop.size(); ++i)
        if (!pop[i].is_refined() || pop[i].refine_epoch != env.epoch()) order.push_back(i);
    if (order.empty()) return;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double fa = pop[a].fitness.value_or(std::numeric_limits<double>::infinity());
        double fb = pop[b].fitness.value_or(std::numeric_limits<double>::infinity());
        return fa < fb;
    });
    for (std::size_t i : order) refine_individual(pop[i], env, domain, ls, trace, &pop);
}

// Two refined individuals are similar when they carry the same fitness and
// their refined points coincide: same basin of attraction for practical
// purposes.
inline bool similar(const Individual& a, const Individual& b, const HgaConfig& cfg) {
    if (!a.is_refined() || !b.is_refined())
        throw std::logic_error("similar: both individuals must be refined");
    double fa = *a.fitness, fb = *b.fitness;
    double ftol = cfg.sim_fitness_tol * (1.0 + std::max(std::abs(fa), std::abs(fb)));
    if (std::abs(fa - fb) > ftol) return false;
    const std::vector<double>& xa = *a.refined;
    const std::vector<double>& xb = *b.refined;
    for (std::size_t i = 0; i < xa.size(); ++i)
        if (std::abs(xa[i] - xb[i]) > cfg.sim_point_tol) return false;
    return true;
}

// Y' = alpha*Y1 + (1-alpha)*Y2 with a single alpha ~ U[0,1].
inline std::vector<double> crossover(std::span<const double> y1, std::span<const double> y2,
                                     Rng& rng) {
    if (y1.size() != y2.size()) throw std::invalid_argument("crossover: length mismatch");
    double alpha = rng.uniform();
    std::vector<double> child(y1.size());
    for (std::size_t i = 0; i < child.size(); ++i)
        child[i] = alpha * y1[i] + (1.0 - alpha) * y2[i];
    return child;
}

// Y' = Y + pi*(Y1 - Y2). When the parents nearly coincide the difference is
// replaced by a random +-1 vector; in the change-reaction generation pi is
// replaced by u ~ U[0, 2pi] and the difference by a standard-normal vector.
inline std::vector<double> mutate(std::span<const double> y, std::span<const double> y1,
                                  std::span<const double> y2, const HgaConfig& cfg, Rng& rng,
                                  bool change_reaction = false) {
    if (y.size() != y1.size() || y1.size() != y2.size())
        throw std::invalid_argument("mutate: length mismatch");
    std::vector<double> child(y.begin(), y.end());
    if (change_reaction) {
        double u = rng.uniform(0.0, kTwoPi);
        for (double& c : child) c += u * rng.normal();
        return child;
    }
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < y1.size(); ++i) {
        double d = y1[i] - y2[i];
        norm_sq += d * d;
    }
    if (std::sqrt(norm_sq) < cfg.small_norm_tol) {
        for (double& c : child) c += kPi * rng.sign();
    } else {
        for (std::size_t i = 0; i < child.size(); ++i) child[i] += kPi * (y1[i] - y2[i]);
    }
    return child;
}

// Per-generation operator counts, mostly for tests and diagnostics.
struct GenerationStats {
    std::size_t crossover_children = 0;
    std::size_t mutation_children = 0;
    std::size_t copied_children = 0;  // rate gating only
    std::size_t elitism_copies = 0;
};

namespace detail {

inline const Individual& tournament_pick(const std::vector<Individual>& pop, std::size_t k,
                                         Rng& rng) {
    const Individual* winner = &pop[rng.uniform_index(pop.size())];
    for (std::size_t i = 1; i < k; ++i) {
        const Individual& c = pop[rng.uniform_index(pop.size())];
        if (*c.fitness < *winner->fitness) winner = &c;
    }
    return *winner;
}

}  // namespace detail

// One generational step: N tournament pair selections, similarity-gated
// reproduction, refinement of the children, single elitism. The parent
// population must be refined.
inline std::vector<Individual> hga_generation(const std::vector<Individual>& pop,
                                              DynamicEnvironment& env, const BoxDomain& domain,
                                              const HgaConfig& cfg, Rng& rng, RunTrace& trace,
                                              bool change_reaction = false,
                                              GenerationStats* stats = nullptr) {
    const std::size_t n_children = pop.size();
    std::vector<Individual> children;
    children.reserve(n_children);
    enum class Origin : std::uint8_t { Crossover, Mutation, Copied, Elitism };
    std::vector<Origin> origin(n_children);

    for (std::size_t i = 0; i < n_children; ++i) {
        const Individual& p1 = detail::tournament_pick(pop, cfg.tournament_size, rng);
        const Individual& p2 = detail::tournament_pick(pop, cfg.tournament_size, rng);
        const Individual& fitter = (*p1.fitness <= *p2.fitness) ? p1 : p2;
        Individual child;
        if (similar(p1, p2, cfg)) {
            if (cfg.rate_gating && rng.uniform() >= cfg.mutation_rate) {
                child.genotype = fitter.genotype;
                origin[i] = Origin::Copied;
            } else {
                child.genotype =
                    mutate(fitter.genotype, p1.genotype, p2.genotype, cfg, rng, change_reaction);
                origin[i] = Origin::Mutation;
            }
        } else {
            if (cfg.rate_gating && rng.uniform() >= cfg.crossover_rate) {
                child.genotype = fitter.genotype;
                origin[i] = Origin::Copied;
            } else {
                child.genotype = crossover(p1.genotype, p2.genotype, rng);
                origin[i] = Origin::Crossover;
            }
        }
        children.push_back(std::move(child));
    }

    // refine the children, anchored against the parents' cached points
    for (Individual& child : children)
        refine_individual(child, env, domain, cfg.ls, trace, &pop);

    // single elitism: the best parent survives over the worst child
    for (std::size_t e = 0; e < cfg.elitism_count; ++e) {
        std::size_t best_parent = 0, worst_child = 0;
        for (std::size_t i = 1; i < pop.size(); ++i)
            if (*pop[i].fitness < *pop[best_parent].fitness) best_parent = i;
        for (std::size_t i = 1; i < children.size(); ++i)
            if (*children[i].fitness > *children[worst_child].fitness) worst_child = i;
        if (*pop[best_parent].fitness < *children[worst_child].fitness) {
            children[worst_child] = pop[best_parent];
            origin[worst_child] = Origin::Elitism;
        }
    }

    if (stats) {
        GenerationStats local;
        for (Origin o : origin) {
            switch (o) {
                case Origin::Crossover: ++local.crossover_children; break;
                case Origin::Mutation: ++local.mutation_children; break;
                case Origin::Copied: ++local.copied_children; break;
                case Origin::Elitism: ++local.elitism_copies; break;
            }
        }
        *stats = local;
    }
    return children;
}

// Full HGA run: initialize, refine, iterate generations until the budget
// or the generation cap is exhausted. After a change the whole population
// is re-refined and the mutation override is armed for exactly one
// generation.
inline RunTrace run_hga(DynamicEnvironment& env, const BoxDomain& domain, const HgaConfig& cfg) {
    cfg.validate();
    RunTrace trace;
    Rng rng(cfg.seed);
    std::vector<Individual> pop = initialize_population(cfg, rng, domain.dimension());
    bool change_reaction = false;
    try {
        refine_population(pop, env, domain, cfg.ls, trace);
        for (std::uint64_t gen = 0; gen < cfg.max_generations; ++gen) {
            refine_population(pop, env, domain, cfg.ls, trace);
            pop = hga_generation(pop, env, domain, cfg, rng, trace, change_reaction);
            change_reaction = false;
            if (env.observe_change()) {
                for (Individual& ind : pop) ind.invalidate();
                change_reaction = true;
            }
            if (env.evals_remaining() == 0) break;
        }
    } catch (const budget_exhausted&) {
        // normal termination: the trace holds every completed evaluation
    }
    return trace;
}

}  // namespace dynopt
