// Real-coded genetic algorithm over log10-encoded (m, k, c).
#pragma once

#include "modalforge/dataset.hpp"
#include "modalforge/excitation.hpp"
#include "modalforge/gnn.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace modalforge::ga {

using Rng = std::mt19937_64;

/// Peak displacement as a function of (m, k, c); lower is better.
using FitnessFn = std::function<double(double m, double k, double c)>;

struct GaConfig {
    std::size_t population = 50;
    std::size_t generations = 100;
    std::size_t tournament = 3;
    double crossover_probability = 0.9;
    double blend_alpha = 0.5;
    double mutation_probability = 0.2;  ///< per gene
    double mutation_sigma = 0.1;        ///< log10 units
    std::size_t elites = 1;
    dataset::Interval m_bounds{0.1, 1000.0};
    dataset::Interval k_bounds{0.01, 1000.0};
    dataset::Interval c_bounds{0.02, 100.0};
    std::uint64_t seed = 2024;
    unsigned workers = 1;  ///< concurrent fitness evaluations per generation

    /// Throws ErrorKind::Config.
    void validate() const;
    /// log10 bounds per gene.
    [[nodiscard]] std::array<dataset::Interval, 3> gene_bounds() const;
};

/// Genes are (log10 m, log10 k, log10 c).
struct Chromosome {
    std::array<double, 3> genes{};

    [[nodiscard]] dataset::ParameterTriple decode() const;
    friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

struct GenerationStats {
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
};

struct GaResult {
    Chromosome best;
    dataset::ParameterTriple best_params;
    double best_fitness = 0.0;
    std::vector<GenerationStats> history;
    std::size_t evaluations = 0;
};

[[nodiscard]] std::vector<Chromosome> init_population(const GaConfig& config, Rng& rng);
[[nodiscard]] std::vector<Chromosome> init_population(const GaConfig& config);

/// Index of the fittest of `tournament` uniform draws with replacement; ties
/// go to the lowest population index.
[[nodiscard]] std::size_t tournament_select(std::span<const double> fitnesses, const GaConfig& config, Rng& rng);
[[nodiscard]] const Chromosome& tournament_select(std::span<const Chromosome> population,
                                                  std::span<const double> fitnesses, const GaConfig& config,
                                                  Rng& rng);

/// BLX-alpha: with the crossover probability, each child gene is uniform on
/// [min - alpha*d, max + alpha*d] (d = |x - y|), clipped to bounds.
[[nodiscard]] std::pair<Chromosome, Chromosome> blend_crossover(const Chromosome& a, const Chromosome& b,
                                                                const GaConfig& config, Rng& rng);

/// Per-gene Gaussian perturbation in log10 units, clipped to bounds.
[[nodiscard]] Chromosome gaussian_mutate(Chromosome chromosome, const GaConfig& config, Rng& rng);

/// Generational loop with elitism. Evaluates population x generations
/// fitness calls; throws ErrorKind::Numerical on a non-finite fitness.
[[nodiscard]] GaResult evolve(const FitnessFn& fitness, const GaConfig& config);

[[nodiscard]] FitnessFn surrogate_fitness(std::shared_ptr<const gnn::GnnModel> model);
[[nodiscard]] FitnessFn direct_fitness(excitation::ExcitationSpec spec, double dt, double duration);

/// Separable log-space quadratic with its minimum at (10, 10, 1).
[[nodiscard]] double quadratic_test_fitness(double m, double k, double c);

void write_convergence_csv(const GaResult& result, std::ostream& out, const std::vector<std::string>& comments = {});

}  // namespace modalforge::ga
