// Run configuration for the modal-forge command line: one TOML file with a
// section per stage, plus command-line overrides.
#pragma once

#include "modalforge/dataset.hpp"
#include "modalforge/excitation.hpp"
#include "modalforge/ga.hpp"
#include "modalforge/gnn.hpp"
#include "modalforge/sdof.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace modalforge::cli {

inline constexpr std::string_view kToolName = "modal-forge";
inline constexpr std::string_view kToolVersion = "0.1.0";

struct SystemSection {
    std::optional<double> m;
    std::optional<double> k;
    std::optional<double> c;
    std::optional<double> zeta;

    /// Requires m, k and exactly one of c or zeta.
    [[nodiscard]] dyno::SdofSystem build() const;
};

struct SolverSection {
    double dt = 0.02;
    double duration = 40.0;
    double gamma = 0.5;
    double beta = 0.25;
};

struct ExcitationSection {
    std::string kind = "base_record";
    double amplitude = 0.0;
    double omega = 0.0;
    double p0 = 0.0;
    double td = 0.0;
    double scale = 1.0;
};

struct TrainingSection {
    gnn::Architecture architecture;
    gnn::TrainConfig train;
    double test_fraction = 0.2;
    std::uint64_t split_seed = 7;
    double validation_fraction = 0.1;  ///< carved from the training split for early stopping
};

enum class OptimizeMode { Surrogate, Direct, QuadraticTest };

struct GaSection {
    ga::GaConfig config;
    OptimizeMode mode = OptimizeMode::Surrogate;
};

struct PathsSection {
    std::optional<std::filesystem::path> ground_motion;
    std::optional<std::filesystem::path> dataset;
    std::optional<std::filesystem::path> checkpoint;
    std::optional<std::filesystem::path> best;
    std::filesystem::path output_dir = "out";
};

struct RunConfig {
    SystemSection system;
    dyno::InitialConditions initial;
    ExcitationSection excitation;
    SolverSection solver;
    dataset::ParameterSpace space;
    unsigned sweep_workers = 0;
    TrainingSection training;
    GaSection ga;
    PathsSection paths;
    std::size_t timing_calls = 200;
    std::string hash;  ///< SHA-256 of the config text and overrides

    [[nodiscard]] std::filesystem::path dataset_path() const;
    [[nodiscard]] std::filesystem::path checkpoint_path() const;
    [[nodiscard]] std::filesystem::path best_path() const;
    [[nodiscard]] std::filesystem::path output(std::string_view name) const;

    /// Line placed atop every emitted CSV (without the leading "# ").
    [[nodiscard]] std::string provenance_line() const;
    /// `_meta` object embedded in every emitted JSON file.
    [[nodiscard]] nlohmann::json provenance() const;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
};

/// Parses TOML text. Relative paths resolve against `base_dir`. Throws
/// ErrorKind::Config naming the offending field.
[[nodiscard]] RunConfig parse_run_config(std::string_view toml_text, const std::filesystem::path& base_dir,
                                         const Overrides& overrides = {});
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides = {});

struct LoadedExcitation {
    excitation::ExcitationSpec spec;
    std::optional<std::string> ground_motion_sha256;
    bool resampled = false;
};

/// Builds the excitation at the solver time step, loading and resampling the
/// ground-motion file for base_record.
[[nodiscard]] LoadedExcitation build_excitation(const RunConfig& config);

}  // namespace modalforge::cli
