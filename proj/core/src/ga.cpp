#include "modalforge/ga.hpp"

#include "modalforge/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

namespace modalforge::ga {
namespace {

double uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return lo + (hi - lo) * unit(rng);
}

bool coin(Rng& rng, double probability) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return unit(rng) < probability;
}

std::string format_double(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return {buf, res.ptr};
}

void evaluate_all(const FitnessFn& fitness, std::span<const Chromosome> population, std::span<double> out,
                  unsigned workers) {
    std::vector<std::exception_ptr> errors(population.size());
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const auto p = population[i].decode();
                out[i] = fitness(p.m, p.k, p.c);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1 || population.size() < 2) {
        run(0, population.size());
    } else {
        const std::size_t n = population.size();
        const std::size_t count = std::min<std::size_t>(workers, n);
        const std::size_t chunk = (n + count - 1) / count;
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < count; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            pool.emplace_back(run, begin, std::min(n, begin + chunk));
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (std::size_t i = 0; i < population.size(); ++i) {
        if (!std::isfinite(out[i])) {
            const auto p = population[i].decode();
            fail(ErrorKind::Numerical, "non-finite fitness at (m=" + format_double(p.m) + ", k=" + format_double(p.k) +
                                           ", c=" + format_double(p.c) + ")");
        }
    }
}

}  // namespace

void GaConfig::validate() const {
    if (population < 2) fail(ErrorKind::Config, "population must be at least 2");
    if (generations < 1) fail(ErrorKind::Config, "generations must be at least 1");
    if (elites >= population) fail(ErrorKind::Config, "elite count must be smaller than the population");
    if (tournament < 1 || tournament > population) {
        fail(ErrorKind::Config, "tournament size must lie in [1, population]");
    }
    for (double p : {crossover_probability, mutation_probability}) {
        if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Config, "probabilities must lie in [0, 1]");
    }
    if (!(blend_alpha >= 0.0) || !std::isfinite(blend_alpha)) fail(ErrorKind::Config, "blend alpha must be >= 0");
    if (!(mutation_sigma >= 0.0) || !std::isfinite(mutation_sigma)) {
        fail(ErrorKind::Config, "mutation sigma must be >= 0");
    }
    for (const auto* iv : {&m_bounds, &k_bounds, &c_bounds}) {
        if (!(iv->lo > 0.0) || !(iv->lo <= iv->hi) || !std::isfinite(iv->hi)) {
            fail(ErrorKind::Config, "GA bounds must be positive with lower <= upper");
        }
    }
}

std::array<dataset::Interval, 3> GaConfig::gene_bounds() const {
    auto lg = [](const dataset::Interval& iv) { return dataset::Interval{std::log10(iv.lo), std::log10(iv.hi)}; };
    return {lg(m_bounds), lg(k_bounds), lg(c_bounds)};
}

dataset::ParameterTriple Chromosome::decode() const {
    return {std::pow(10.0, genes[0]), std::pow(10.0, genes[1]), std::pow(10.0, genes[2])};
}

std::vector<Chromosome> init_population(const GaConfig& config, Rng& rng) {
    config.validate();
    const auto bounds = config.gene_bounds();
    std::vector<Chromosome> population(config.population);
    for (auto& ch : population) {
        for (std::size_t g = 0; g < 3; ++g) ch.genes[g] = uniform(rng, bounds[g].lo, bounds[g].hi);
    }
    return population;
}

std::vector<Chromosome> init_population(const GaConfig& config) {
    Rng rng(config.seed);
    return init_population(config, rng);
}

std::size_t tournament_select(std::span<const double> fitnesses, const GaConfig& config, Rng& rng) {
    if (fitnesses.empty()) fail(ErrorKind::InvalidInput, "cannot select from an empty population");
    std::uniform_int_distribution<std::size_t> pick(0, fitnesses.size() - 1);
    std::size_t best = pick(rng);
    for (std::size_t draw = 1; draw < config.tournament; ++draw) {
        const std::size_t i = pick(rng);
        if (fitnesses[i] < fitnesses[best] || (fitnesses[i] == fitnesses[best] && i < best)) best = i;
    }
    return best;
}

const Chromosome& tournament_select(std::span<const Chromosome> population, std::span<const double> fitnesses,
                                    const GaConfig& config, Rng& rng) {
    if (population.size() != fitnesses.size()) fail(ErrorKind::InvalidInput, "one fitness per individual required");
    return population[tournament_select(fitnesses, config, rng)];
}

std::pair<Chromosome, Chromosome> blend_crossover(const Chromosome& a, const Chromosome& b, const GaConfig& config,
                                                  Rng& rng) {
    if (!coin(rng, config.crossover_probability)) return {a, b};
    const auto bounds = config.gene_bounds();
    Chromosome ca, cb;
    for (std::size_t g = 0; g < 3; ++g) {
        const double lo = std::min(a.genes[g], b.genes[g]);
        const double hi = std::max(a.genes[g], b.genes[g]);
        const double ext = config.blend_alpha * (hi - lo);
        ca.genes[g] = std::clamp(uniform(rng, lo - ext, hi + ext), bounds[g].lo, bounds[g].hi);
        cb.genes[g] = std::clamp(uniform(rng, lo - ext, hi + ext), bounds[g].lo, bounds[g].hi);
    }
    return {ca, cb};
}

Chromosome gaussian_mutate(Chromosome chromosome, const GaConfig& config, Rng& rng) {
    const auto bounds = config.gene_bounds();
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t g = 0; g < 3; ++g) {
        if (!coin(rng, config.mutation_probability)) continue;
        const double step = config.mutation_sigma * normal(rng);
        chromosome.genes[g] = std::clamp(chromosome.genes[g] + step, bounds[g].lo, bounds[g].hi);
    }
    return chromosome;
}

GaResult evolve(const FitnessFn& fitness, const GaConfig& config) {
    config.validate();
    if (!fitness) fail(ErrorKind::Config, "no fitness function");
    Rng rng(config.seed);
    auto population = init_population(config, rng);
    std::vector<double> fit(config.population);

    GaResult result;
    result.best_fitness = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> rank(config.population);

    for (std::size_t gen = 0; gen < config.generations; ++gen) {
        evaluate_all(fitness, population, fit, config.workers);
        result.evaluations += population.size();

        std::iota(rank.begin(), rank.end(), std::size_t{0});
        std::stable_sort(rank.begin(), rank.end(), [&](std::size_t x, std::size_t y) { return fit[x] < fit[y]; });
        const double mean = std::accumulate(fit.begin(), fit.end(), 0.0) / static_cast<double>(fit.size());
        result.history.push_back({fit[rank[0]], mean});
        if (fit[rank[0]] < result.best_fitness) {
            result.best_fitness = fit[rank[0]];
            result.best = population[rank[0]];
        }
        if (gen + 1 == config.generations) break;

        std::vector<Chromosome> next;
        next.reserve(config.population);
        for (std::size_t e = 0; e < config.elites; ++e) next.push_back(population[rank[e]]);
        while (next.size() < config.population) {
            const auto& pa = tournament_select(population, fit, config, rng);
            const auto& pb = tournament_select(population, fit, config, rng);
            auto [ca, cb] = blend_crossover(pa, pb, config, rng);
            next.push_back(gaussian_mutate(ca, config, rng));
            if (next.size() < config.population) next.push_back(gaussian_mutate(cb, config, rng));
        }
        population = std::move(next);
    }
    result.best_params = result.best.decode();
    return result;
}

FitnessFn surrogate_fitness(std::shared_ptr<const gnn::GnnModel> model) {
    if (!model) fail(ErrorKind::Config, "surrogate fitness needs a model");
    model->norm().validate();
    return [model = std::move(model)](double m, double k, double c) { return gnn::predict(*model, m, k, c); };
}

FitnessFn direct_fitness(excitation::ExcitationSpec spec, double dt, double duration) {
    excitation::validate(spec);
    const std::size_t n = dataset::sample_count(dt, duration);
    auto shared = std::make_shared<const excitation::ExcitationSpec>(std::move(spec));
    return [shared, dt, n](double m, double k, double c) {
        return dataset::simulate_peak({m, k, c}, *shared, dt, n);
    };
}

double quadratic_test_fitness(double m, double k, double c) {
    const double dm = std::log10(m) - 1.0;
    const double dk = std::log10(k) - 1.0;
    const double dc = std::log10(c);
    return dm * dm + dk * dk + dc * dc;
}

void write_convergence_csv(const GaResult& result, std::ostream& out, const std::vector<std::string>& comments) {
    for (const auto& line : comments) out << "# " << line << '\n';
    out << "generation,best_fitness_m,mean_fitness_m\n";
    for (std::size_t g = 0; g < result.history.size(); ++g) {
        out << g << ',' << format_double(result.history[g].best_fitness) << ','
            << format_double(result.history[g].mean_fitness) << '\n';
    }
}

}  // namespace modalforge::ga
