#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "dynopt/environment.hpp"
#include "dynopt/local_search.hpp"
#include "dynopt/metrics.hpp"
#include "dynopt/objective.hpp"
#include "dynopt/rng.hpp"

namespace dynopt {

// FIFO archive of past best-of-generation snapshots.
struct MemoryModule {
    std::size_t capacity = 10;
    std::deque<std::pair<std::vector<double>, double>> entries;  // (point, stored fitness)
};

struct BaselineConfig {
    std::size_t pop_size = 100;
    double crossover_rate = 0.6;
    double mutation_rate = 0.2;  // per coordinate
    double sbx_eta = 0.7;        // distribution index, crossover and mutation
    std::size_t tournament_size = 2;
    std::size_t elitism_count = 1;
    std::size_t memory_capacity = 10;
    std::size_t immigrants_count = 25;   // RI25/M
    double hyper_rate = 0.5;             // HM/M
    std::uint64_t hyper_duration = 5;    // generations
    std::uint64_t hillclimb_budget = 0;  // ERS; 0 = 2n+10
    std::uint64_t max_generations = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t seed = 1;

    void validate() const {
        if (pop_size < 2) throw std::invalid_argument("BaselineConfig: pop_size must be >= 2");
        if (crossover_rate < 0.0 || crossover_rate > 1.0 || mutation_rate < 0.0 ||
            mutation_rate > 1.0 || hyper_rate < 0.0 || hyper_rate > 1.0)
            throw std::invalid_argument("BaselineConfig: rates must lie in [0, 1]");
        if (!(sbx_eta > 0.0)) throw std::invalid_argument("BaselineConfig: sbx_eta must be > 0");
        if (tournament_size < 1)
            throw std::invalid_argument("BaselineConfig: tournament_size must be >= 1");
    }
};

// Simulated binary crossover. Per coordinate, with u ~ U(0,1):
//   beta = (2u)^(1/(eta+1))            if u <= 0.5
//        = (1/(2(1-u)))^(1/(eta+1))    otherwise
// children are (1±beta)/2 * p1 + (1∓beta)/2 * p2, clamped to the box.
inline std::pair<std::vector<double>, std::vector<double>> sbx_crossover(
    std::span<const double> p1, std::span<const double> p2, double eta, Rng& rng,
    const BoxDomain& bounds) {
    if (p1.size() != p2.size()) throw std::invalid_argument("sbx_crossover: length mismatch");
    if (!(eta > 0.0)) throw std::invalid_argument("sbx_crossover: eta must be > 0");
    std::vector<double> c1(p1.size()), c2(p1.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
        double u = rng.uniform();
        double beta = (u <= 0.5) ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                                 : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
        c1[i] = 0.5 * ((1.0 + beta) * p1[i] + (1.0 - beta) * p2[i]);
        c2[i] = 0.5 * ((1.0 - beta) * p1[i] + (1.0 + beta) * p2[i]);
    }
    bounds.clamp(c1);
    bounds.clamp(c2);
    return {std::move(c1), std::move(c2)};
}

// Polynomial mutation with distribution index eta; each coordinate mutates
// with probability `rate` and stays inside the box.
inline std::vector<double> polynomial_mutation(std::span<const double> p, double eta, double rate,
                                               Rng& rng, const BoxDomain& bounds) {
    if (rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("polynomial_mutation: rate must lie in [0, 1]");
    std::vector<double> out(p.begin(), p.end());
    double mut_pow = 1.0 / (eta + 1.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (rng.uniform() > rate) continue;
        double lo = bounds.lower[i], hi = bounds.upper[i];
        double span = hi - lo;
        double d1 = (out[i] - lo) / span;
        double d2 = (hi - out[i]) / span;
        double u = rng.uniform();
        double deltaq;
        if (u <= 0.5) {
            double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
            deltaq = std::pow(val, mut_pow) - 1.0;
        } else {
            double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
            deltaq = 1.0 - std::pow(val, mut_pow);
        }
        out[i] += deltaq * span;
        if (out[i] < lo) out[i] = lo;
        if (out[i] > hi) out[i] = hi;
    }
    return out;
}

// x-space individual used by the baseline algorithms.
struct XIndividual {
    std::vector<double> x;
    double fitness = 0.0;
};

// Snapshot the population's best into the memory, evicting the oldest
// entry beyond capacity. The snapshot is an independent copy.
inline void memory_store(MemoryModule& mem, const std::vector<XIndividual>& pop) {
    if (pop.empty()) throw std::invalid_argument("memory_store: empty population");
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (pop[i].fitness < pop[best].fitness) best = i;
    mem.entries.emplace_back(pop[best].x, pop[best].fitness);
    while (mem.entries.size() > mem.capacity) mem.entries.pop_front();
}

namespace detail {

// Evaluate-and-record shorthand shared by the baseline runners.
struct RecordingEval {
    DynamicEnvironment& env;
    RunTrace& trace;
    double operator()(std::span<const double> x) const {
        double v = env.evaluate(x);
        record_evaluation(trace, v, env);
        return v;
    }
};

}  // namespace detail

// Change-time injection: re-evaluate every stored entry under the new
// landscape and let entries that beat the current worst replace it.
inline void memory_retrieve(MemoryModule& mem, std::vector<XIndividual>& pop,
                            DynamicEnvironment& env, RunTrace& trace) {
    detail::RecordingEval eval{env, trace};
    for (auto& [point, stored_fitness] : mem.entries) {
        stored_fitness = eval(point);
        std::size_t worst = 0;
        for (std::size_t i = 1; i < pop.size(); ++i)
            if (pop[i].fitness > pop[worst].fitness) worst = i;
        if (stored_fitness < pop[worst].fitness) pop[worst] = {point, stored_fitness};
    }
}

// Replace the worst `count` individuals with fresh uniform-random points.
inline void inject_immigrants(std::vector<XIndividual>& pop, std::size_t count,
                              const BoxDomain& bounds, Rng& rng, DynamicEnvironment& env,
                              RunTrace& trace) {
    detail::RecordingEval eval{env, trace};
    count = std::min(count, pop.size());
    // partial selection of the `count` worst slots
    std::vector<std::size_t> idx(pop.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                      [&](std::size_t a, std::size_t b) { return pop[a].fitness > pop[b].fitness; });
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> fresh = bounds.sample_uniform(rng);
        double f = eval(fresh);
        pop[idx[k]] = {std::move(fresh), f};
    }
}

namespace detail {

struct BaselineOptions {
    bool use_memory = false;
    bool immigrants = false;
    bool hypermutation = false;
    bool hillclimb = false;
};

inline const XIndividual& x_tournament(const std::vector<XIndividual>& pop, std::size_t k,
                                       Rng& rng) {
    const XIndividual* winner = &pop[rng.uniform_index(pop.size())];
    for (std::size_t i = 1; i < k; ++i) {
        const XIndividual& c = pop[rng.uniform_index(pop.size())];
        if (c.fitness < winner->fitness) winner = &c;
    }
    return *winner;
}

// Generational GA shared by the four baselines: binary tournament, SBX at
// crossover_rate, polynomial mutation at mutation_rate, single elitism,
// direct fitness. Memory, immigrants, hypermutation and the ERS hill-climb
// are toggled per variant.
inline RunTrace run_baseline(DynamicEnvironment& env, const BoxDomain& domain,
                             const BaselineConfig& cfg, const BaselineOptions& opt) {
    cfg.validate();
    RunTrace trace;
    Rng rng(cfg.seed);
    RecordingEval eval{env, trace};
    MemoryModule mem{cfg.memory_capacity, {}};
    std::uint64_t hyper_left = 0;

    try {
        std::vector<XIndividual> pop(cfg.pop_size);
        for (XIndividual& ind : pop) {
            ind.x = domain.sample_uniform(rng);
            ind.fitness = eval(ind.x);
        }
        if (opt.use_memory) memory_store(mem, pop);

        for (std::uint64_t gen = 0; gen < cfg.max_generations; ++gen) {
            if (env.observe_change()) {
                for (XIndividual& ind : pop) ind.fitness = eval(ind.x);  // reevaluation
                if (opt.immigrants)
                    inject_immigrants(pop, cfg.immigrants_count, domain, rng, env, trace);
                if (opt.use_memory) memory_retrieve(mem, pop, env, trace);
                if (opt.hypermutation) hyper_left = cfg.hyper_duration;
            }

            double rate = cfg.mutation_rate;
            if (hyper_left > 0) {
                rate = cfg.hyper_rate;
                --hyper_left;
            }

            std::vector<XIndividual> children;
            children.reserve(cfg.pop_size);
            while (children.size() < cfg.pop_size) {
                const XIndividual& p1 = x_tournament(pop, cfg.tournament_size, rng);
                const XIndividual& p2 = x_tournament(pop, cfg.tournament_size, rng);
                std::vector<double> c1, c2;
                if (rng.uniform() < cfg.crossover_rate) {
                    std::tie(c1, c2) = sbx_crossover(p1.x, p2.x, cfg.sbx_eta, rng, domain);
                } else {
                    c1 = p1.x;
                    c2 = p2.x;
                }
                for (std::vector<double>* c : {&c1, &c2}) {
                    if (children.size() >= cfg.pop_size) break;
                    std::vector<double> m = polynomial_mutation(*c, cfg.sbx_eta, rate, rng, domain);
                    double f = eval(m);
                    children.push_back({std::move(m), f});
                }
            }

            // single elitism
            for (std::size_t e = 0; e < cfg.elitism_count; ++e) {
                std::size_t best = 0, worst = 0;
                for (std::size_t i = 1; i < pop.size(); ++i)
                    if (pop[i].fitness < pop[best].fitness) best = i;
                for (std::size_t i = 1; i < children.size(); ++i)
                    if (children[i].fitness > children[worst].fitness) worst = i;
                if (pop[best].fitness < children[worst].fitness) children[worst] = pop[best];
            }
            pop = std::move(children);

            if (opt.hillclimb) {
                std::size_t best = 0;
                for (std::size_t i = 1; i < pop.size(); ++i)
                    if (pop[i].fitness < pop[best].fitness) best = i;
                LsConfig ls;
                ls.eval_budget = cfg.hillclimb_budget > 0
                                     ? cfg.hillclimb_budget
                                     : 2 * static_cast<std::uint64_t>(domain.dimension()) + 10;
                LsResult r = bfgs_minimize(
                    eval, [&](std::span<const double> x) { return env.gradient(x); }, pop[best].x,
                    ls, &domain);
                if (r.f_opt <= pop[best].fitness) pop[best] = {r.x_opt, r.f_opt};
            }

            if (opt.use_memory) memory_store(mem, pop);
        }
    } catch (const budget_exhausted&) {
        // normal termination
    }
    return trace;
}

}  // namespace detail

// SGA/M: standard generational GA with a memory module.
inline RunTrace run_sga_m(DynamicEnvironment& env, const BoxDomain& domain,
                          const BaselineConfig& cfg) {
    return detail::run_baseline(env, domain, cfg, {.use_memory = true});
}

// RI25/M: on every change the worst 25 individuals are replaced by random
// immigrants; memory as in SGA/M.
inline RunTrace run_ri_m(DynamicEnvironment& env, const BoxDomain& domain,
                         const BaselineConfig& cfg) {
    return detail::run_baseline(env, domain, cfg, {.use_memory = true, .immigrants = true});
}

// HM/M: hypermutation burst after every change; memory as in SGA/M.
inline RunTrace run_hm_m(DynamicEnvironment& env, const BoxDomain& domain,
                         const BaselineConfig& cfg) {
    return detail::run_baseline(env, domain, cfg, {.use_memory = true, .hypermutation = true});
}

// ERS: GA unified with a per-generation hill-climb of the elite, no memory.
inline RunTrace run_ers(DynamicEnvironment& env, const BoxDomain& domain,
                        const BaselineConfig& cfg) {
    return detail::run_baseline(env, domain, cfg, {.hillclimb = true});
}

}  // namespace dynopt
