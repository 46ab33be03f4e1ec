// Design-space sampling, peak-displacement sweeps and dataset persistence.
#pragma once

#include "modalforge/excitation.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace modalforge::dataset {

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Log-spaced Cartesian grid; an axis with count 1 takes the geometric midpoint.
struct GridSampling {
    std::size_t m_count = 1;
    std::size_t k_count = 1;
    std::size_t c_count = 1;
};

/// Each coordinate is 10^U with U uniform on [log10 lo, log10 hi].
struct LogUniformSampling {
    std::size_t count = 2000;
    std::uint64_t seed = 42;
};

struct ParameterSpace {
    Interval m{0.1, 1000.0};
    Interval k{0.01, 1000.0};
    Interval c{0.02, 100.0};
    std::variant<GridSampling, LogUniformSampling> sampling = LogUniformSampling{};
    double damping_floor = 0.02;  ///< lowest admissible c lower bound for log sampling

    /// Throws ErrorKind::Config.
    void validate() const;
};

struct ParameterTriple {
    double m = 0.0;
    double k = 0.0;
    double c = 0.0;
    friend bool operator==(const ParameterTriple&, const ParameterTriple&) = default;
};

struct SampleRecord {
    double m = 0.0;
    double k = 0.0;
    double c = 0.0;
    double u_max = 0.0;
    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct Dataset {
    std::vector<SampleRecord> records;
    nlohmann::json excitation = nlohmann::json::object();  ///< descriptor, see describe_excitation
    double dt = 0.0;
    double duration = 0.0;
    std::uint64_t seed = 0;        ///< sampling seed
    std::uint64_t split_seed = 0;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::optional<std::string> ground_motion_sha256;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// m outermost, then k, then c.
[[nodiscard]] std::vector<ParameterTriple> sample_parameters(const ParameterSpace& space);

/// Number of solver samples covering [0, duration] at spacing dt.
[[nodiscard]] std::size_t sample_count(double dt, double duration);

/// Peak |u| of a zero-initial-condition Newmark run. Shared by the dataset sweep
/// and the direct GA fitness so both produce identical values.
[[nodiscard]] double simulate_peak(const ParameterTriple& params, const excitation::ExcitationSpec& spec,
                                   double dt, std::size_t n);

[[nodiscard]] nlohmann::json describe_excitation(const excitation::ExcitationSpec& spec);

struct GenerateOptions {
    unsigned workers = 1;  ///< 0 picks hardware concurrency
};

/// One record per sampled triple, in sample_parameters order regardless of
/// worker count. Every index starts in the training split.
[[nodiscard]] Dataset generate_dataset(const ParameterSpace& space, const excitation::ExcitationSpec& spec,
                                       double dt, double duration, const GenerateOptions& options = {});

/// Seeded shuffle; the first round(test_fraction * N) permuted indices form the
/// test split. Both lists are stored sorted.
[[nodiscard]] Dataset split_dataset(Dataset dataset, double test_fraction, std::uint64_t seed);

/// Lines emitted as `# ...` above the CSV header.
using CommentLines = std::vector<std::string>;

void write_dataset_csv(const Dataset& dataset, std::ostream& out, const CommentLines& comments = {});
void write_dataset_meta(const Dataset& dataset, std::ostream& out, const nlohmann::json& extra = {});

/// Parses the CSV; when `meta` is given it supplies excitation, split and seeds
/// and must agree with the record count.
[[nodiscard]] Dataset read_dataset(std::istream& csv, std::istream* meta = nullptr);

/// Sidecar path: "<csv>.meta.json".
[[nodiscard]] std::filesystem::path meta_path(const std::filesystem::path& csv_path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& csv_path, const CommentLines& comments = {},
                  const nlohmann::json& extra_meta = {});
/// Reads the sidecar too when it exists.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& csv_path);

}  // namespace modalforge::dataset
