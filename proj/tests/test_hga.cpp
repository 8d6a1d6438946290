#include <doctest.h>

#include <cmath>
#include <vector>

#include "dynopt/hga.hpp"

using namespace dynopt;

namespace {

HgaConfig small_config(std::size_t dim, std::uint64_t seed = 1) {
    HgaConfig cfg;
    cfg.pop_size = 10;
    cfg.ls = hga_refinement_defaults(dim);
    cfg.seed = seed;
    return cfg;
}

DynamicEnvironment static_env(std::size_t dim, std::uint64_t budget = 1'000'000'000) {
    // severity zero and a huge update interval: effectively stationary
    DynamicsSpec spec{DynamicsKind::Linear, 0.0, 1'000'000'000, 25, dim};
    return DynamicEnvironment(spec, 0, budget);
}

Individual refined_at(std::vector<double> x, double fitness) {
    Individual ind;
    ind.genotype = std::vector<double>(x.size(), 0.0);
    ind.refined = std::move(x);
    ind.fitness = fitness;
    return ind;
}

}  // namespace

TEST_CASE("initialize_population: size, range, determinism") {
    HgaConfig cfg = small_config(4);
    cfg.pop_size = 100;
    Rng rng(cfg.seed);
    auto pop = initialize_population(cfg, rng, 4);
    CHECK(pop.size() == 100);
    BoxDomain box = BoxDomain::symmetric(4, 50.0);
    for (const Individual& ind : pop) {
        CHECK_FALSE(ind.is_refined());
        for (double y : ind.genotype) {
            CHECK(y >= -kPi / 2);
            CHECK(y <= kPi / 2);
        }
        CHECK(box.contains(transform_y_to_x(ind.genotype, box)));
    }
    Rng rng2(cfg.seed);
    auto pop2 = initialize_population(cfg, rng2, 4);
    for (std::size_t i = 0; i < pop.size(); ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(pop[i].genotype[j] == pop2[i].genotype[j]);
}

TEST_CASE("crossover is a consistent convex combination") {
    Rng rng(3);
    std::vector<double> y1{0.0, 0.0, 2.0}, y2{2.0, 4.0, 2.0};
    for (int trial = 0; trial < 200; ++trial) {
        auto child = crossover(y1, y2, rng);
        double alpha = (child[1] - y2[1]) / (y1[1] - y2[1]);
        CHECK(alpha >= 0.0);
        CHECK(alpha <= 1.0);
        // the same alpha applies to every coordinate
        CHECK(child[0] == doctest::Approx(alpha * y1[0] + (1 - alpha) * y2[0]).epsilon(1e-12));
        CHECK(child[2] == doctest::Approx(2.0).epsilon(1e-12));
        for (std::size_t i = 0; i < child.size(); ++i) {
            CHECK(child[i] >= std::min(y1[i], y2[i]) - 1e-12);
            CHECK(child[i] <= std::max(y1[i], y2[i]) + 1e-12);
        }
    }
    CHECK_THROWS_AS(crossover(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}, rng),
                    std::invalid_argument);
}

TEST_CASE("mutate applies the pi-scaled parent difference") {
    HgaConfig cfg = small_config(2);
    Rng rng(5);
    std::vector<double> y{0.0, 0.0}, y1{1.0, 0.0}, y2{0.0, 0.0};
    auto child = mutate(y, y1, y2, cfg, rng);
    CHECK(child[0] == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(child[1] == doctest::Approx(0.0));
}

TEST_CASE("mutate degenerates to a +-pi jump for coincident parents") {
    HgaConfig cfg = small_config(3);
    Rng rng(6);
    std::vector<double> y{0.3, -0.7, 1.1}, same{2.0, 2.0, 2.0};
    for (int trial = 0; trial < 50; ++trial) {
        auto child = mutate(y, same, same, cfg, rng);
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK(std::abs(child[i] - y[i]) == doctest::Approx(kPi).epsilon(1e-15));
    }
}

TEST_CASE("mutate change-reaction draw is reproducible and pi-free") {
    HgaConfig cfg = small_config(2);
    std::vector<double> y{0.1, 0.2}, y1{1.0, 0.0}, y2{0.0, 0.0};
    Rng a(42), b(42);
    auto ca = mutate(y, y1, y2, cfg, a, true);
    auto cb = mutate(y, y1, y2, cfg, b, true);
    CHECK(ca[0] == cb[0]);
    CHECK(ca[1] == cb[1]);
    // the override form does not reproduce the literal pi * (y1 - y2) step
    CHECK(ca[0] != doctest::Approx(y[0] + kPi).epsilon(1e-12));
}

TEST_CASE("similarity needs both equal fitness and coincident points") {
    HgaConfig cfg = small_config(2);
    Individual at_origin = refined_at({0.0, 0.0}, 0.0);
    CHECK(similar(at_origin, at_origin, cfg));

    // two distinct Rastrigin basin centers: far apart and different value
    Individual basin_one = refined_at({0.99496, 0.0}, rastrigin(std::vector<double>{0.99496, 0.0}));
    CHECK_FALSE(similar(at_origin, basin_one, cfg));

    // equal fitness but distant refined points
    Individual mirror = refined_at({1.0, 0.0}, 0.0);
    CHECK_FALSE(similar(at_origin, mirror, cfg));

    // symmetry on a sample of random pairs
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        Individual p = refined_at({rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(0, 2));
        Individual q = refined_at({rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(0, 2));
        CHECK(similar(p, q, cfg) == similar(q, p, cfg));
        CHECK(similar(p, p, cfg));
    }

    Individual unrefined;
    unrefined.genotype = {0.0, 0.0};
    CHECK_THROWS_AS(similar(unrefined, at_origin, cfg), std::logic_error);
}

TEST_CASE("refine_population caches, refines at the optimum, never worsens") {
    DynamicEnvironment env = static_env(2);
    BoxDomain box = BoxDomain::symmetric(2, 50.0);
    HgaConfig cfg = small_config(2);
    RunTrace trace;

    std::vector<Individual> pop(3);
    pop[0].genotype = {0.0, 0.0};  // transform(0) = 0 = the optimum
    pop[1].genotype = {0.2, -0.1};
    pop[2].genotype = {1.0, 0.4};
    refine_population(pop, env, box, cfg.ls, trace);

    CHECK(*pop[0].fitness == doctest::Approx(0.0).epsilon(1e-10));
    for (const Individual& ind : pop) {
        CHECK(ind.is_refined());
        double unrefined = rastrigin(transform_y_to_x(ind.genotype, box));
        CHECK(*ind.fitness <= unrefined + 1e-12);
        // stationary environment: stored fitness is the objective at the point
        CHECK(rastrigin(*ind.refined) == doctest::Approx(*ind.fitness).epsilon(1e-12));
    }

    // second pass is a no-op: everything is cached for this epoch
    std::uint64_t evals_before = env.evals();
    refine_population(pop, env, box, cfg.ls, trace);
    CHECK(env.evals() == evals_before);
}

TEST_CASE("a change forces a full re-refinement of the population") {
    DynamicsSpec spec{DynamicsKind::Linear, 0.1, 400, 25, 2};
    DynamicEnvironment env(spec, 0);
    BoxDomain box = BoxDomain::symmetric(2, 50.0);
    HgaConfig cfg = small_config(2);
    RunTrace trace;

    std::vector<Individual> pop(5);
    Rng rng(3);
    for (Individual& ind : pop)
        ind.genotype = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    refine_population(pop, env, box, cfg.ls, trace);

    // push the clock over the update boundary, keeping the trace in step
    std::vector<double> probe{0.0, 0.0};
    while (!env.observe_change()) record_evaluation(trace, env.evaluate(probe), env);

    std::uint64_t evals_before = env.evals();
    refine_population(pop, env, box, cfg.ls, trace);
    CHECK(env.evals() - evals_before >= pop.size());
    for (const Individual& ind : pop) CHECK(ind.refine_epoch == env.epoch());
}

TEST_CASE("hga_generation: all-similar population mutates everywhere") {
    DynamicEnvironment env = static_env(2);
    BoxDomain box = BoxDomain::symmetric(2, 50.0);
    HgaConfig cfg = small_config(2);
    RunTrace trace;
    Rng rng(9);

    std::vector<Individual> pop(8);
    for (Individual& ind : pop) ind.genotype = {0.25, -0.4};
    refine_population(pop, env, box, cfg.ls, trace);

    GenerationStats stats;
    auto children = hga_generation(pop, env, box, cfg, rng, trace, false, &stats);
    CHECK(children.size() == pop.size());
    CHECK(stats.crossover_children == 0);
    CHECK(stats.mutation_children + stats.elitism_copies == pop.size());
    CHECK(stats.mutation_children + stats.elitism_copies + stats.crossover_children +
              stats.copied_children ==
          pop.size());
}

TEST_CASE("hga_generation: elitism never loses the best fitness") {
    DynamicEnvironment env = static_env(3);
    BoxDomain box = BoxDomain::symmetric(3, 50.0);
    HgaConfig cfg = small_config(3);
    RunTrace trace;
    Rng rng(10);

    std::vector<Individual> pop = initialize_population(cfg, rng, 3);
    refine_population(pop, env, box, cfg.ls, trace);
    auto best_of = [](const std::vector<Individual>& p) {
        double best = *p[0].fitness;
        for (const Individual& ind : p) best = std::min(best, *ind.fitness);
        return best;
    };
    double old_best = best_of(pop);
    for (int gen = 0; gen < 3; ++gen) {
        pop = hga_generation(pop, env, box, cfg, rng, trace);
        double new_best = best_of(pop);
        CHECK(new_best <= old_best + 1e-12);
        old_best = new_best;
        CHECK(pop.size() == cfg.pop_size);
    }
}

TEST_CASE("change-reaction generation uses the override form for every mutation") {
    DynamicEnvironment env = static_env(2);
    BoxDomain box = BoxDomain::symmetric(2, 50.0);
    HgaConfig cfg = small_config(2);
    RunTrace trace;
    Rng rng(11);

    // identical parents: every pair is similar, every child is a mutation,
    // and without the override each child would sit exactly +-pi from the
    // base genotype
    std::vector<Individual> pop(6);
    for (Individual& ind : pop) ind.genotype = {0.3, 0.3};
    refine_population(pop, env, box, cfg.ls, trace);

    GenerationStats stats;
    auto children = hga_generation(pop, env, box, cfg, rng, trace, true, &stats);
    CHECK(stats.mutation_children + stats.elitism_copies == pop.size());
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (children[i].genotype == pop[0].genotype) continue;  // elitism copy
        bool pi_jump = true;
        for (double c : children[i].genotype)
            if (std::abs(std::abs(c - 0.3) - kPi) > 1e-9) pi_jump = false;
        CHECK_FALSE(pi_jump);
    }
}

TEST_CASE("rate gating off by default, gating copies when rates are zero") {
    DynamicEnvironment env = static_env(2);
    BoxDomain box = BoxDomain::symmetric(2, 50.0);
    HgaConfig cfg = small_config(2);
    cfg.rate_gating = true;
    cfg.crossover_rate = 0.0;
    cfg.mutation_rate = 0.0;
    RunTrace trace;
    Rng rng(12);
    std::vector<Individual> pop = initialize_population(cfg, rng, 2);
    refine_population(pop, env, box, cfg.ls, trace);
    GenerationStats stats;
    auto children = hga_generation(pop, env, box, cfg, rng, trace, false, &stats);
    CHECK(stats.crossover_children == 0);
    CHECK(stats.mutation_children == 0);
    CHECK(stats.copied_children + stats.elitism_copies == pop.size());
}

TEST_CASE("run_hga: trace accounting, change events, determinism") {
    DynamicsSpec spec{DynamicsKind::Linear, 0.1, 500, 25, 2};
    BoxDomain box = BoxDomain::symmetric(2, 50.0);
    HgaConfig cfg = small_config(2, 77);

    DynamicEnvironment env1(spec, 3, 2000);
    RunTrace t1 = run_hga(env1, box, cfg);
    CHECK(t1.total_evals() == 2000);        // budget-bound run consumes it exactly
    CHECK(t1.total_evals() == env1.evals());
    CHECK(env1.epoch() == 4);               // floor(2000 / 500)

    DynamicEnvironment env2(spec, 3, 2000);
    RunTrace t2 = run_hga(env2, box, cfg);
    REQUIRE(t2.total_evals() == t1.total_evals());
    for (std::size_t i = 0; i < t1.records.size(); ++i) {
        CHECK(t1.records[i].best_since_change == t2.records[i].best_since_change);
        CHECK(t1.records[i].epoch == t2.records[i].epoch);
    }
}

TEST_CASE("run_hga respects max_generations on a static landscape") {
    DynamicEnvironment env = static_env(2);
    BoxDomain box = BoxDomain::symmetric(2, 50.0);
    HgaConfig cfg = small_config(2);
    cfg.max_generations = 2;
    RunTrace trace = run_hga(env, box, cfg);
    CHECK(trace.total_evals() == env.evals());
    CHECK(trace.total_evals() > 0);
    // generations stopped the run, not the (infinite) budget
    CHECK(env.evals_remaining() > 0);
}
