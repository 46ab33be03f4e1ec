// Message-passing surrogate for peak SDOF displacement.
//
// An SDOF system becomes a two-node graph: a ground node and the mass node,
// joined by one undirected edge carrying stiffness and damping. Node inputs
// are [normalized log10 m, is_ground]; the edge input is
// [normalized log10 k, normalized log10 c]. Each round computes
//
//     msg(s->d) = act(W_e [h_s, h_d, e] + b_e)       (both directions)
//     h'_v      = act(W_n [h_v, sum of msgs into v] + b_n)
//
// and the readout W_r h_mass + b_r is a z-scored log10 displacement.
#pragma once

#include "modalforge/dataset.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modalforge::gnn {

inline constexpr std::size_t kNodeFeatures = 2;
inline constexpr std::size_t kEdgeFeatures = 2;
inline constexpr int kCheckpointVersion = 1;

struct GraphEdge {
    std::size_t a = 0;
    std::size_t b = 1;
    std::array<double, kEdgeFeatures> features{};
};

struct SdofGraph {
    std::array<std::array<double, kNodeFeatures>, 2> nodes{};
    GraphEdge edge;
    std::size_t mass_node = 1;

    /// Throws ErrorKind::InvalidInput when the structure is not one ground node,
    /// one mass node and an edge between them.
    void validate() const;
};

/// log10-space z-score statistics; input channels are (m, k, c).
struct NormStats {
    std::array<double, 3> input_mean{0.0, 0.0, 0.0};
    std::array<double, 3> input_std{1.0, 1.0, 1.0};
    double target_mean = 0.0;
    double target_std = 1.0;

    void validate() const;
    friend bool operator==(const NormStats&, const NormStats&) = default;
};

/// Statistics over the given record indices (the training split).
[[nodiscard]] NormStats fit_norm_stats(std::span<const dataset::SampleRecord> records,
                                       std::span<const std::size_t> indices);

enum class Activation { Tanh, Relu };

[[nodiscard]] std::string_view activation_name(Activation act);
/// Throws ErrorKind::Checkpoint for unknown names.
[[nodiscard]] Activation parse_activation(std::string_view name);

struct Architecture {
    std::size_t rounds = 2;
    std::size_t hidden = 32;
    Activation activation = Activation::Tanh;

    void validate() const;
    friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Dense layer y = W x + b inside the flat parameter vector: W is row-major
/// rows x cols starting at `offset`, b follows with `rows` entries.
struct LayerSlot {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;

    [[nodiscard]] std::size_t weight_count() const noexcept { return rows * cols; }
    [[nodiscard]] std::size_t bias_offset() const noexcept { return offset + rows * cols; }
    [[nodiscard]] std::size_t size() const noexcept { return rows * cols + rows; }
};

class GnnModel {
public:
    /// All weights and biases zero.
    GnnModel(Architecture arch, NormStats norm, std::uint64_t seed = 0);

    /// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    [[nodiscard]] static GnnModel initialized(Architecture arch, NormStats norm, std::uint64_t seed);

    [[nodiscard]] const Architecture& architecture() const noexcept { return arch_; }
    [[nodiscard]] const NormStats& norm() const noexcept { return norm_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    [[nodiscard]] std::span<double> parameters() noexcept { return params_; }
    [[nodiscard]] std::span<const double> parameters() const noexcept { return params_; }

    [[nodiscard]] const LayerSlot& edge_layer(std::size_t round) const { return edge_.at(round); }
    [[nodiscard]] const LayerSlot& node_layer(std::size_t round) const { return node_.at(round); }
    [[nodiscard]] const LayerSlot& readout_layer() const noexcept { return readout_; }

    /// Input width of round r: node features for r = 0, hidden afterwards.
    [[nodiscard]] std::size_t state_width(std::size_t round) const noexcept {
        return round == 0 ? kNodeFeatures : arch_.hidden;
    }

    friend bool operator==(const GnnModel&, const GnnModel&) = default;

private:
    Architecture arch_;
    NormStats norm_;
    std::uint64_t seed_ = 0;
    std::vector<LayerSlot> edge_;
    std::vector<LayerSlot> node_;
    LayerSlot readout_;
    std::vector<double> params_;
};

/// Throws ErrorKind::InvalidParameter for non-positive or non-finite inputs.
[[nodiscard]] SdofGraph encode_graph(double m, double k, double c, const NormStats& norm);

/// Normalized readout (z-scored log10 displacement).
[[nodiscard]] double forward_normalized(const GnnModel& model, const SdofGraph& graph);
/// Predicted peak displacement [m], always > 0.
[[nodiscard]] double forward(const GnnModel& model, const SdofGraph& graph);
[[nodiscard]] double predict(const GnnModel& model, double m, double k, double c);

struct LabeledGraph {
    SdofGraph graph;
    double target = 0.0;  ///< raw peak displacement [m]
};

[[nodiscard]] std::vector<LabeledGraph> make_samples(const GnnModel& model,
                                                     std::span<const dataset::SampleRecord> records,
                                                     std::span<const std::size_t> indices);

struct LossAndGradients {
    double loss = 0.0;
    std::vector<double> gradients;  ///< same layout as GnnModel::parameters()
};

/// Mean squared error in normalized log10 space and its exact gradient,
/// accumulated by reverse-mode differentiation. Throws ErrorKind::Data when a
/// target is not positive.
[[nodiscard]] LossAndGradients loss_and_gradients(const GnnModel& model, std::span<const LabeledGraph> batch);
[[nodiscard]] double loss(const GnnModel& model, std::span<const LabeledGraph> batch);

struct TrainConfig {
    double learning_rate = 1e-3;
    double momentum = 0.9;
    std::size_t epochs = 300;
    std::size_t batch_size = 32;
    std::uint64_t seed = 7;
    std::size_t patience = 30;  ///< 0 disables early stopping

    void validate() const;
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    GnnModel model;
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0;
};

/// Mini-batch SGD with momentum. Returns the weights with the lowest validation
/// loss (training loss when `val` is empty). Throws ErrorKind::TrainingFailure
/// when the loss stops being finite.
[[nodiscard]] TrainResult train(const GnnModel& initial, std::span<const LabeledGraph> train_set,
                                std::span<const LabeledGraph> val_set, const TrainConfig& config);

struct Metrics {
    std::optional<double> r2;  ///< absent when the targets have zero variance
    double mae = 0.0;
    double mape = 0.0;  ///< percent
    std::size_t count = 0;
};

[[nodiscard]] Metrics compute_metrics(std::span<const double> truth, std::span<const double> predicted);
[[nodiscard]] Metrics evaluate(const GnnModel& model, std::span<const dataset::SampleRecord> records,
                               std::span<const std::size_t> indices);
/// R^2 of a Metrics value; throws ErrorKind::InvalidInput when undefined.
[[nodiscard]] double require_r2(const Metrics& metrics);

/// Max relative discrepancy between analytic gradients and central differences.
[[nodiscard]] double gradient_check(const GnnModel& model, const LabeledGraph& sample, double step = 1e-5);
/// Same comparison against a caller-supplied analytic gradient vector.
[[nodiscard]] double gradient_check(const GnnModel& model, const LabeledGraph& sample,
                                    std::span<const double> analytic, double step = 1e-5);

void save_model(const GnnModel& model, std::ostream& out, const nlohmann::json& extra = {});
[[nodiscard]] GnnModel load_model(std::istream& in);
[[nodiscard]] nlohmann::json model_to_json(const GnnModel& model);
[[nodiscard]] GnnModel model_from_json(const nlohmann::json& j);

/// Throws ErrorKind::Checkpoint naming both values when the model does not
/// match the expected architecture.
void expect_architecture(const GnnModel& model, const Architecture& expected);

}  // namespace modalforge::gnn
