#include "helpers.hpp"

#include "modalforge/ga.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>

using namespace modalforge;
using namespace modalforge::ga;
using doctest::Approx;
using testing::expect_error;

namespace {

bool in_bounds(const GaConfig& cfg, const dataset::ParameterTriple& p) {
    // decode goes through pow(10, log10(x)), so allow a few ulps at the edges
    auto inside = [](const dataset::Interval& iv, double x) { return x >= iv.lo * (1 - 1e-12) && x <= iv.hi * (1 + 1e-12); };
    return inside(cfg.m_bounds, p.m) && inside(cfg.k_bounds, p.k) && inside(cfg.c_bounds, p.c);
}

GaConfig quick_config(std::uint64_t seed) {
    GaConfig cfg;
    cfg.population = 20;
    cfg.generations = 15;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_SUITE("ga") {

TEST_CASE("configuration validation") {
    GaConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.population = 1;
    expect_error(ErrorKind::Config, [&] { cfg.validate(); });
    cfg = {};
    cfg.elites = cfg.population;
    expect_error(ErrorKind::Config, [&] { cfg.validate(); });
    cfg = {};
    cfg.tournament = 0;
    expect_error(ErrorKind::Config, [&] { cfg.validate(); });
    cfg.tournament = cfg.population + 1;
    expect_error(ErrorKind::Config, [&] { cfg.validate(); });
    cfg = {};
    cfg.crossover_probability = 1.5;
    expect_error(ErrorKind::Config, [&] { cfg.validate(); });
    cfg = {};
    cfg.mutation_probability = -0.1;
    expect_error(ErrorKind::Config, [&] { cfg.validate(); });
    cfg = {};
    cfg.k_bounds = {10.0, 1.0};
    expect_error(ErrorKind::Config, [&] { cfg.validate(); });
    cfg = {};
    cfg.generations = 0;
    expect_error(ErrorKind::Config, [&] { cfg.validate(); });
}

TEST_CASE("initial population") {
    GaConfig cfg;
    const auto pop = init_population(cfg);
    REQUIRE(pop.size() == 50);
    for (const auto& ch : pop) CHECK(in_bounds(cfg, ch.decode()));
    CHECK(init_population(cfg) == pop);
    cfg.seed = 99;
    CHECK(init_population(cfg) != pop);

    cfg.m_bounds = {10.0, 10.0};
    for (const auto& ch : init_population(cfg)) CHECK(ch.genes[0] == 1.0);
}

TEST_CASE("tournament selection") {
    GaConfig cfg;
    cfg.population = 2;
    cfg.elites = 1;
    cfg.tournament = 2;
    Rng rng(1);
    const std::vector<double> fit{1.0, 2.0};
    const int trials = 100000;
    int first = 0;
    for (int i = 0; i < trials; ++i) first += tournament_select(fit, cfg, rng) == 0 ? 1 : 0;
    CHECK(static_cast<double>(first) / trials == Approx(0.75).epsilon(0.01 / 0.75));

    cfg.population = 4;
    cfg.tournament = 1;
    const std::vector<double> four{4.0, 1.0, 3.0, 2.0};
    std::array<int, 4> counts{};
    for (int i = 0; i < 40000; ++i) ++counts[tournament_select(four, cfg, rng)];
    for (int c : counts) CHECK(c / 40000.0 == Approx(0.25).epsilon(0.02 / 0.25));

    cfg.tournament = 4;
    const std::vector<double> flat(4, 1.0);
    // with equal fitness the lowest index drawn wins; index 0 wins whenever drawn
    int zero = 0;
    for (int i = 0; i < 20000; ++i) zero += tournament_select(flat, cfg, rng) == 0 ? 1 : 0;
    CHECK(zero / 20000.0 == Approx(1.0 - std::pow(0.75, 4)).epsilon(0.03));

    std::vector<Chromosome> pop(4);
    pop[1].genes = {1.0, 2.0, 3.0};
    CHECK(tournament_select(pop, four, {.population = 4, .tournament = 4}, rng).genes.size() == 3);
    expect_error(ErrorKind::InvalidInput, [&] { (void)tournament_select(std::vector<double>{}, cfg, rng); });
}

TEST_CASE("blend crossover") {
    GaConfig cfg;
    cfg.m_bounds = {1e-3, 1e3};
    cfg.k_bounds = {1e-3, 1e3};
    cfg.c_bounds = {1e-3, 1e3};
    cfg.crossover_probability = 1.0;
    Rng rng(4);

    const Chromosome same{{0.3, -1.0, 2.0}};
    const auto [s1, s2] = blend_crossover(same, same, cfg, rng);
    CHECK(s1 == same);
    CHECK(s2 == same);

    const Chromosome a{{0.0, 0.0, 0.0}}, b{{1.0, 1.0, 1.0}};
    double sum = 0.0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
        const auto [c1, c2] = blend_crossover(a, b, cfg, rng);
        CHECK(c1.genes[0] >= -0.5);
        CHECK(c1.genes[0] <= 1.5);
        sum += c1.genes[0];
    }
    CHECK(sum / trials == Approx(0.5).epsilon(0.01 / 0.5));

    cfg.crossover_probability = 0.0;
    const auto [c1, c2] = blend_crossover(a, b, cfg, rng);
    CHECK(c1 == a);
    CHECK(c2 == b);

    cfg.crossover_probability = 1.0;
    cfg.m_bounds = {1.0, 10.0};
    for (int i = 0; i < 1000; ++i) {
        const auto [x, y] = blend_crossover(a, b, cfg, rng);
        CHECK(x.genes[0] >= 0.0);
        CHECK(x.genes[0] <= 1.0);
        CHECK(y.genes[0] >= 0.0);
    }
}

TEST_CASE("gaussian mutation") {
    GaConfig cfg;
    Rng rng(8);
    const Chromosome x{{1.0, 0.5, -0.5}};
    cfg.mutation_probability = 0.0;
    CHECK(gaussian_mutate(x, cfg, rng) == x);
    cfg.mutation_probability = 1.0;
    cfg.mutation_sigma = 0.0;
    CHECK(gaussian_mutate(x, cfg, rng) == x);

    cfg.mutation_sigma = 0.1;
    const double top = std::log10(cfg.m_bounds.hi);
    const Chromosome at_top{{top, 0.0, 0.0}};
    int pinned = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
        const auto y = gaussian_mutate(at_top, cfg, rng);
        CHECK(y.genes[0] <= top);
        pinned += y.genes[0] == top ? 1 : 0;
    }
    CHECK(static_cast<double>(pinned) / trials == Approx(0.5).epsilon(0.02));
}

TEST_CASE("the quadratic test fitness is solved") {
    const auto r = evolve(quadratic_test_fitness, GaConfig{});
    CHECK(r.best_params.m == Approx(10.0).epsilon(0.05));
    CHECK(r.best_params.k == Approx(10.0).epsilon(0.05));
    CHECK(r.best_params.c == Approx(1.0).epsilon(0.05));
    CHECK(quadratic_test_fitness(10.0, 10.0, 1.0) == 0.0);
}

TEST_CASE("constant fitness") {
    const auto r = evolve([](double, double, double) { return 0.25; }, quick_config(1));
    for (const auto& g : r.history) {
        CHECK(g.best_fitness == 0.25);
        CHECK(g.mean_fitness == 0.25);
    }
}

TEST_CASE("property: elitism, bound closure, budget and determinism") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto cfg = quick_config(seed);
        std::atomic<std::size_t> calls{0};
        std::atomic<bool> outside{false};
        const auto fitness = [&](double m, double k, double c) {
            ++calls;
            if (!in_bounds(cfg, {m, k, c})) outside = true;
            return std::abs(std::sin(3.0 * std::log10(m))) + std::log10(k) * std::log10(k) + std::log10(c + 1.0);
        };
        const auto a = evolve(fitness, cfg);
        CHECK_FALSE(outside.load());
        CHECK(calls.load() == cfg.population * cfg.generations);
        CHECK(a.evaluations == cfg.population * cfg.generations);
        REQUIRE(a.history.size() == cfg.generations);
        for (std::size_t g = 1; g < a.history.size(); ++g) CHECK(a.history[g].best_fitness <= a.history[g - 1].best_fitness);
        CHECK(a.best_fitness == a.history.back().best_fitness);
        CHECK(in_bounds(cfg, a.best_params));

        const auto b = evolve(fitness, cfg);
        CHECK(a.best == b.best);
        CHECK(a.best_fitness == b.best_fitness);
        cfg.workers = 3;
        const auto c = evolve(fitness, cfg);
        CHECK(a.best == c.best);
        for (std::size_t g = 0; g < a.history.size(); ++g) CHECK(a.history[g].mean_fitness == c.history[g].mean_fitness);
    }
}

TEST_CASE("different seeds take different paths") {
    const auto a = evolve(quadratic_test_fitness, quick_config(1));
    const auto b = evolve(quadratic_test_fitness, quick_config(2));
    CHECK(a.history.front().mean_fitness != b.history.front().mean_fitness);
}

TEST_CASE("non-finite fitness aborts naming the triple") {
    const auto msg = expect_error(ErrorKind::Numerical, [] {
        (void)evolve([](double m, double, double) { return m > 1.0 ? NAN : 1.0; }, quick_config(3));
    });
    CHECK(msg.find("m=") != std::string::npos);
    expect_error(ErrorKind::Config, [] { (void)evolve(FitnessFn{}, quick_config(3)); });
}

TEST_CASE("surrogate fitness is pure and positive") {
    gnn::NormStats norm;
    const auto model = std::make_shared<const gnn::GnnModel>(
        gnn::GnnModel::initialized({2, 8, gnn::Activation::Tanh}, norm, 3));
    const auto f = surrogate_fitness(model);
    CHECK(f(2.0, 3.0, 0.5) == f(2.0, 3.0, 0.5));
    const auto pop = init_population(GaConfig{});
    for (const auto& ch : pop) {
        const auto p = ch.decode();
        CHECK(f(p.m, p.k, p.c) > 0.0);
    }
    expect_error(ErrorKind::Config, [] { (void)surrogate_fitness(nullptr); });
}

TEST_CASE("direct fitness") {
    const auto zero = direct_fitness(excitation::Free{}, 0.02, 5.0);
    CHECK(zero(1.0, 2.0, 0.3) == 0.0);

    const auto spec = excitation::BaseRecord{excitation::load_ground_motion(testing::fixture_motion()), 1.0};
    const auto f = direct_fitness(spec, 0.02, 10.0);
    dataset::ParameterSpace space;
    space.sampling = dataset::LogUniformSampling{5, 17};
    const auto ds = dataset::generate_dataset(space, spec, 0.02, 10.0);
    for (const auto& r : ds.records) CHECK(f(r.m, r.k, r.c) == r.u_max);
}

TEST_CASE("convergence log") {
    GaResult r;
    r.history = {{0.5, 1.0}, {0.25, 0.75}};
    std::ostringstream out;
    write_convergence_csv(r, out, {"note"});
    CHECK(out.str() == "# note\ngeneration,best_fitness_m,mean_fitness_m\n0,0.5,1\n1,0.25,0.75\n");
}

}
