#include "modalforge/gnn.hpp"

#include "modalforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace modalforge::gnn {
namespace {

double activate(Activation act, double z) {
    return act == Activation::Tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// Derivative expressed through the activation output.
double activate_grad(Activation act, double y) {
    return act == Activation::Tanh ? 1.0 - y * y : (y > 0.0 ? 1.0 : 0.0);
}

// y = act(W x + b)
void dense_forward(const LayerSlot& layer, std::span<const double> params, std::span<const double> x,
                   std::span<double> y, Activation act) {
    const double* w = params.data() + layer.offset;
    const double* b = params.data() + layer.bias_offset();
    for (std::size_t r = 0; r < layer.rows; ++r) {
        const double* row = w + r * layer.cols;
        double z = b[r];
        for (std::size_t j = 0; j < layer.cols; ++j) z += row[j] * x[j];
        y[r] = activate(act, z);
    }
}

// Given dL/dz, accumulate dL/dW, dL/db and add W^T dz into dx.
void dense_backward(const LayerSlot& layer, std::span<const double> params, std::span<const double> x,
                    std::span<const double> dz, std::span<double> grads, std::span<double> dx) {
    const double* w = params.data() + layer.offset;
    double* gw = grads.data() + layer.offset;
    double* gb = grads.data() + layer.bias_offset();
    for (std::size_t r = 0; r < layer.rows; ++r) {
        const double d = dz[r];
        if (d == 0.0) continue;
        gb[r] += d;
        const double* row = w + r * layer.cols;
        double* grow = gw + r * layer.cols;
        for (std::size_t j = 0; j < layer.cols; ++j) {
            grow[j] += d * x[j];
            dx[j] += d * row[j];
        }
    }
}

// Activations of one message-passing round.
struct RoundTape {
    std::array<std::vector<double>, 2> edge_in;  // direction 0: a->b, direction 1: b->a
    std::array<std::vector<double>, 2> message;
    std::array<std::vector<double>, 2> node_in;  // [h_v, aggregated messages]
    std::array<std::vector<double>, 2> node_out;
};

struct Tape {
    std::vector<RoundTape> rounds;
    std::array<std::vector<double>, 2> initial;
    double readout = 0.0;
};

const std::vector<double>& state_after(const Tape& tape, std::size_t round, std::size_t node) {
    return round == 0 ? tape.initial[node] : tape.rounds[round - 1].node_out[node];
}

void run_forward(const GnnModel& model, const SdofGraph& g, Tape& tape) {
    const auto& arch = model.architecture();
    const auto params = model.parameters();
    const std::size_t hidden = arch.hidden;
    const std::size_t a = g.edge.a;
    const std::size_t b = g.edge.b;

    for (std::size_t v = 0; v < 2; ++v) tape.initial[v].assign(g.nodes[v].begin(), g.nodes[v].end());
    tape.rounds.resize(arch.rounds);

    for (std::size_t r = 0; r < arch.rounds; ++r) {
        const std::size_t d = model.state_width(r);
        auto& rt = tape.rounds[r];
        const auto& ha = state_after(tape, r, a);
        const auto& hb = state_after(tape, r, b);
        const std::array<std::pair<const std::vector<double>*, const std::vector<double>*>, 2> dirs{
            std::pair{&ha, &hb}, std::pair{&hb, &ha}};
        for (std::size_t dir = 0; dir < 2; ++dir) {
            auto& x = rt.edge_in[dir];
            x.resize(2 * d + kEdgeFeatures);
            std::copy(dirs[dir].first->begin(), dirs[dir].first->end(), x.begin());
            std::copy(dirs[dir].second->begin(), dirs[dir].second->end(), x.begin() + static_cast<std::ptrdiff_t>(d));
            std::copy(g.edge.features.begin(), g.edge.features.end(), x.begin() + static_cast<std::ptrdiff_t>(2 * d));
            rt.message[dir].resize(hidden);
            dense_forward(model.edge_layer(r), params, x, rt.message[dir], arch.activation);
        }
        // Each node receives exactly one message: direction 0 lands on b, 1 on a.
        for (std::size_t v = 0; v < 2; ++v) {
            const auto& h = state_after(tape, r, v);
            const auto& incoming = rt.message[v == b ? 0 : 1];
            auto& y = rt.node_in[v];
            y.resize(d + hidden);
            std::copy(h.begin(), h.end(), y.begin());
            std::copy(incoming.begin(), incoming.end(), y.begin() + static_cast<std::ptrdiff_t>(d));
            rt.node_out[v].resize(hidden);
            dense_forward(model.node_layer(r), params, y, rt.node_out[v], arch.activation);
        }
    }

    const auto& h_mass = state_after(tape, arch.rounds, g.mass_node);
    const auto& ro = model.readout_layer();
    double s = params[ro.bias_offset()];
    for (std::size_t j = 0; j < ro.cols; ++j) s += params[ro.offset + j] * h_mass[j];
    tape.readout = s;
}

// Adds d(loss)/d(params) for one sample, given d(loss)/d(readout).
void run_backward(const GnnModel& model, const SdofGraph& g, const Tape& tape, double d_readout,
                  std::span<double> grads) {
    const auto& arch = model.architecture();
    const auto params = model.parameters();
    const std::size_t hidden = arch.hidden;
    const std::size_t a = g.edge.a;
    const std::size_t b = g.edge.b;

    const auto& ro = model.readout_layer();
    const auto& h_mass = state_after(tape, arch.rounds, g.mass_node);
    std::array<std::vector<double>, 2> dh;
    for (auto& v : dh) v.assign(model.state_width(arch.rounds), 0.0);
    grads[ro.bias_offset()] += d_readout;
    for (std::size_t j = 0; j < ro.cols; ++j) {
        grads[ro.offset + j] += d_readout * h_mass[j];
        dh[g.mass_node][j] = d_readout * params[ro.offset + j];
    }

    std::vector<double> dz(hidden);
    for (std::size_t r = arch.rounds; r-- > 0;) {
        const std::size_t d = model.state_width(r);
        const auto& rt = tape.rounds[r];
        std::array<std::vector<double>, 2> dh_prev;
        for (auto& v : dh_prev) v.assign(d, 0.0);
        std::array<std::vector<double>, 2> d_message;
        for (auto& v : d_message) v.assign(hidden, 0.0);

        for (std::size_t v = 0; v < 2; ++v) {
            for (std::size_t i = 0; i < hidden; ++i) dz[i] = dh[v][i] * activate_grad(arch.activation, rt.node_out[v][i]);
            std::vector<double> dy(d + hidden, 0.0);
            dense_backward(model.node_layer(r), params, rt.node_in[v], dz, grads, dy);
            for (std::size_t j = 0; j < d; ++j) dh_prev[v][j] += dy[j];
            auto& dm = d_message[v == b ? 0 : 1];
            for (std::size_t i = 0; i < hidden; ++i) dm[i] += dy[d + i];
        }
        const std::array<std::size_t, 2> src{a, b};
        const std::array<std::size_t, 2> dst{b, a};
        for (std::size_t dir = 0; dir < 2; ++dir) {
            for (std::size_t i = 0; i < hidden; ++i) {
                dz[i] = d_message[dir][i] * activate_grad(arch.activation, rt.message[dir][i]);
            }
            std::vector<double> dx(2 * d + kEdgeFeatures, 0.0);
            dense_backward(model.edge_layer(r), params, rt.edge_in[dir], dz, grads, dx);
            for (std::size_t j = 0; j < d; ++j) {
                dh_prev[src[dir]][j] += dx[j];
                dh_prev[dst[dir]][j] += dx[d + j];
            }
        }
        dh = std::move(dh_prev);
    }
}

double normalized_target(const NormStats& norm, double target) {
    if (!(target > 0.0) || !std::isfinite(target)) {
        fail(ErrorKind::Data, "target displacement must be positive and finite, got " + std::to_string(target));
    }
    return (std::log10(target) - norm.target_mean) / norm.target_std;
}

std::vector<double> flatten_layer(const GnnModel& model, const LayerSlot& slot, bool bias) {
    const auto p = model.parameters();
    const std::size_t begin = bias ? slot.bias_offset() : slot.offset;
    const std::size_t count = bias ? slot.rows : slot.weight_count();
    return {p.begin() + static_cast<std::ptrdiff_t>(begin), p.begin() + static_cast<std::ptrdiff_t>(begin + count)};
}

nlohmann::json layer_json(const GnnModel& model, const LayerSlot& slot) {
    return {{"rows", slot.rows},
            {"cols", slot.cols},
            {"weights", flatten_layer(model, slot, false)},
            {"bias", flatten_layer(model, slot, true)}};
}

[[noreturn]] void checkpoint_error(const std::string& what) { fail(ErrorKind::Checkpoint, "checkpoint: " + what); }

void read_layer(const nlohmann::json& j, const LayerSlot& slot, const std::string& name, std::size_t hidden,
                std::span<double> params) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    if (rows != slot.rows) {
        if (slot.rows == hidden) {
            checkpoint_error("layer " + name + " has width " + std::to_string(rows) +
                             " but the declared hidden width is " + std::to_string(hidden));
        }
        checkpoint_error("layer " + name + " has " + std::to_string(rows) + " rows, expected " +
                         std::to_string(slot.rows));
    }
    if (cols != slot.cols) {
        checkpoint_error("layer " + name + " has " + std::to_string(cols) + " columns, expected " +
                         std::to_string(slot.cols) + " for hidden width " + std::to_string(hidden));
    }
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto b = j.at("bias").get<std::vector<double>>();
    if (w.size() != slot.weight_count()) {
        checkpoint_error("shape mismatch in layer " + name + ": " + std::to_string(w.size()) + " weights, expected " +
                         std::to_string(slot.weight_count()));
    }
    if (b.size() != slot.rows) {
        checkpoint_error("shape mismatch in layer " + name + ": " + std::to_string(b.size()) + " biases, expected " +
                         std::to_string(slot.rows));
    }
    std::copy(w.begin(), w.end(), params.begin() + static_cast<std::ptrdiff_t>(slot.offset));
    std::copy(b.begin(), b.end(), params.begin() + static_cast<std::ptrdiff_t>(slot.bias_offset()));
}

}  // namespace

void SdofGraph::validate() const {
    if (edge.a > 1 || edge.b > 1 || edge.a == edge.b) {
        fail(ErrorKind::InvalidInput, "graph edge must join the two distinct nodes");
    }
    if (mass_node > 1) fail(ErrorKind::InvalidInput, "mass node index out of range");
    const auto& ground = nodes[1 - mass_node];
    if (ground[1] != 1.0 || ground[0] != 0.0) {
        fail(ErrorKind::InvalidInput, "ground node must carry features [0, 1]");
    }
    if (nodes[mass_node][1] != 0.0) fail(ErrorKind::InvalidInput, "mass node must have is_ground = 0");
}

void NormStats::validate() const {
    for (std::size_t i = 0; i < 3; ++i) {
        if (!std::isfinite(input_mean[i]) || !(input_std[i] > 0.0) || !std::isfinite(input_std[i])) {
            fail(ErrorKind::InvalidParameter, "normalization statistics must be finite with positive spread");
        }
    }
    if (!std::isfinite(target_mean) || !(target_std > 0.0) || !std::isfinite(target_std)) {
        fail(ErrorKind::InvalidParameter, "target normalization must be finite with positive spread");
    }
}

NormStats fit_norm_stats(std::span<const dataset::SampleRecord> records, std::span<const std::size_t> indices) {
    if (indices.empty()) fail(ErrorKind::InvalidInput, "cannot fit normalization on an empty split");
    std::array<double, 4> sum{}, sum_sq{};
    for (std::size_t idx : indices) {
        const auto& r = records[idx];
        const std::array<double, 4> raw{r.m, r.k, r.c, r.u_max};
        for (std::size_t ch = 0; ch < 4; ++ch) {
            if (!(raw[ch] > 0.0)) {
                fail(ErrorKind::Data, "record " + std::to_string(idx) + " has a non-positive value; log10 undefined");
            }
            const double x = std::log10(raw[ch]);
            sum[ch] += x;
            sum_sq[ch] += x * x;
        }
    }
    const auto n = static_cast<double>(indices.size());
    NormStats norm;
    std::array<double, 4> mean{}, sd{};
    for (std::size_t ch = 0; ch < 4; ++ch) {
        mean[ch] = sum[ch] / n;
        const double var = std::max(0.0, sum_sq[ch] / n - mean[ch] * mean[ch]);
        // A constant channel keeps unit spread so the z-score stays defined.
        sd[ch] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    for (std::size_t ch = 0; ch < 3; ++ch) {
        norm.input_mean[ch] = mean[ch];
        norm.input_std[ch] = sd[ch];
    }
    norm.target_mean = mean[3];
    norm.target_std = sd[3];
    return norm;
}

std::string_view activation_name(Activation act) { return act == Activation::Tanh ? "tanh" : "relu"; }

Activation parse_activation(std::string_view name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    checkpoint_error("unknown activation '" + std::string(name) + "'");
}

void Architecture::validate() const {
    if (rounds == 0) fail(ErrorKind::Config, "message-passing rounds must be at least 1");
    if (hidden == 0) fail(ErrorKind::Config, "hidden width must be at least 1");
}

GnnModel::GnnModel(Architecture arch, NormStats norm, std::uint64_t seed)
    : arch_(arch), norm_(norm), seed_(seed) {
    arch_.validate();
    norm_.validate();
    std::size_t offset = 0;
    auto place = [&](std::size_t rows, std::size_t cols) {
        LayerSlot slot{rows, cols, offset};
        offset += slot.size();
        return slot;
    };
    for (std::size_t r = 0; r < arch_.rounds; ++r) {
        const std::size_t d = state_width(r);
        edge_.push_back(place(arch_.hidden, 2 * d + kEdgeFeatures));
        node_.push_back(place(arch_.hidden, d + arch_.hidden));
    }
    readout_ = place(1, arch_.hidden);
    params_.assign(offset, 0.0);
}

GnnModel GnnModel::initialized(Architecture arch, NormStats norm, std::uint64_t seed) {
    GnnModel model(arch, norm, seed);
    std::mt19937_64 rng(seed);
    auto fill = [&](const LayerSlot& slot) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(slot.cols));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (std::size_t i = 0; i < slot.size(); ++i) model.params_[slot.offset + i] = dist(rng);
    };
    for (std::size_t r = 0; r < arch.rounds; ++r) {
        fill(model.edge_[r]);
        fill(model.node_[r]);
    }
    fill(model.readout_);
    return model;
}

SdofGraph encode_graph(double m, double k, double c, const NormStats& norm) {
    const std::array<double, 3> raw{m, k, c};
    static constexpr const char* names[] = {"mass", "stiffness", "damping"};
    std::array<double, 3> z{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!(raw[i] > 0.0) || !std::isfinite(raw[i])) {
            fail(ErrorKind::InvalidParameter, std::string("cannot encode non-positive ") + names[i] + " " +
                                                  std::to_string(raw[i]));
        }
        z[i] = (std::log10(raw[i]) - norm.input_mean[i]) / norm.input_std[i];
    }
    SdofGraph g;
    g.nodes[0] = {0.0, 1.0};
    g.nodes[1] = {z[0], 0.0};
    g.edge = {0, 1, {z[1], z[2]}};
    g.mass_node = 1;
    return g;
}

double forward_normalized(const GnnModel& model, const SdofGraph& graph) {
    thread_local Tape tape;  // reused buffers; inference sits in the GA inner loop
    run_forward(model, graph, tape);
    return tape.readout;
}

double forward(const GnnModel& model, const SdofGraph& graph) {
    const auto& norm = model.norm();
    return std::pow(10.0, forward_normalized(model, graph) * norm.target_std + norm.target_mean);
}

double predict(const GnnModel& model, double m, double k, double c) {
    return forward(model, encode_graph(m, k, c, model.norm()));
}

std::vector<LabeledGraph> make_samples(const GnnModel& model, std::span<const dataset::SampleRecord> records,
                                       std::span<const std::size_t> indices) {
    std::vector<LabeledGraph> out;
    out.reserve(indices.size());
    for (std::size_t idx : indices) {
        const auto& r = records[idx];
        out.push_back({encode_graph(r.m, r.k, r.c, model.norm()), r.u_max});
    }
    return out;
}

LossAndGradients loss_and_gradients(const GnnModel& model, std::span<const LabeledGraph> batch) {
    if (batch.empty()) fail(ErrorKind::InvalidInput, "batch is empty");
    LossAndGradients out;
    out.gradients.assign(model.parameters().size(), 0.0);
    const auto n = static_cast<double>(batch.size());
    Tape tape;
    for (const auto& sample : batch) {
        const double t = normalized_target(model.norm(), sample.target);
        run_forward(model, sample.graph, tape);
        const double residual = tape.readout - t;
        out.loss += residual * residual / n;
        run_backward(model, sample.graph, tape, 2.0 * residual / n, out.gradients);
    }
    return out;
}

double loss(const GnnModel& model, std::span<const LabeledGraph> batch) {
    if (batch.empty()) fail(ErrorKind::InvalidInput, "batch is empty");
    double total = 0.0;
    Tape tape;
    for (const auto& sample : batch) {
        const double t = normalized_target(model.norm(), sample.target);
        run_forward(model, sample.graph, tape);
        const double residual = tape.readout - t;
        total += residual * residual;
    }
    return total / static_cast<double>(batch.size());
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        fail(ErrorKind::Config, "learning rate must be non-negative");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) fail(ErrorKind::Config, "momentum must lie in [0, 1)");
    if (epochs == 0) fail(ErrorKind::Config, "epochs must be at least 1");
    if (batch_size == 0) fail(ErrorKind::Config, "batch size must be at least 1");
}

TrainResult train(const GnnModel& initial, std::span<const LabeledGraph> train_set,
                  std::span<const LabeledGraph> val_set, const TrainConfig& config) {
    config.validate();
    if (train_set.empty()) fail(ErrorKind::InvalidInput, "training set is empty");

    GnnModel model = initial;
    auto params = model.parameters();
    std::vector<double> velocity(params.size(), 0.0);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed);

    TrainResult result{initial, {}, 0};
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    std::vector<LabeledGraph> batch;
    batch.reserve(config.batch_size);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
            const auto lg = loss_and_gradients(model, batch);
            if (!std::isfinite(lg.loss)) {
                fail(ErrorKind::TrainingFailure, "training loss became non-finite at epoch " + std::to_string(epoch));
            }
            epoch_loss += lg.loss * static_cast<double>(batch.size());
            for (std::size_t i = 0; i < params.size(); ++i) {
                velocity[i] = config.momentum * velocity[i] - config.learning_rate * lg.gradients[i];
                params[i] += velocity[i];
            }
        }
        epoch_loss /= static_cast<double>(order.size());
        const double val_loss = val_set.empty() ? loss(model, train_set) : loss(model, val_set);
        if (!std::isfinite(epoch_loss) || !std::isfinite(val_loss)) {
            fail(ErrorKind::TrainingFailure, "training loss became non-finite at epoch " + std::to_string(epoch));
        }
        result.history.push_back({epoch, epoch_loss, val_loss});
        if (val_loss < best_val) {
            best_val = val_loss;
            result.model = model;
            result.best_epoch = epoch;
            since_best = 0;
        } else if (config.patience > 0 && ++since_best >= config.patience) {
            break;
        }
    }
    return result;
}

Metrics compute_metrics(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != predicted.size()) fail(ErrorKind::InvalidInput, "metric series lengths differ");
    if (truth.empty()) fail(ErrorKind::InvalidInput, "cannot compute metrics on an empty split");
    const auto n = static_cast<double>(truth.size());
    const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
    double ss_res = 0.0, ss_tot = 0.0, abs_sum = 0.0, pct_sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0.0) fail(ErrorKind::InvalidInput, "percentage error undefined for a zero target");
        const double err = truth[i] - predicted[i];
        ss_res += err * err;
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
        abs_sum += std::abs(err);
        pct_sum += std::abs(err) / std::abs(truth[i]);
    }
    Metrics m;
    m.count = truth.size();
    m.mae = abs_sum / n;
    m.mape = 100.0 * pct_sum / n;
    if (ss_tot > 0.0) m.r2 = 1.0 - ss_res / ss_tot;
    return m;
}

Metrics evaluate(const GnnModel& model, std::span<const dataset::SampleRecord> records,
                 std::span<const std::size_t> indices) {
    std::vector<double> truth, pred;
    truth.reserve(indices.size());
    pred.reserve(indices.size());
    for (std::size_t idx : indices) {
        const auto& r = records[idx];
        if (!(r.u_max > 0.0)) fail(ErrorKind::Data, "record " + std::to_string(idx) + " has a non-positive target");
        truth.push_back(r.u_max);
        pred.push_back(predict(model, r.m, r.k, r.c));
    }
    return compute_metrics(truth, pred);
}

double require_r2(const Metrics& metrics) {
    if (!metrics.r2) fail(ErrorKind::InvalidInput, "R^2 undefined: targets have zero variance");
    return *metrics.r2;
}

double gradient_check(const GnnModel& model, const LabeledGraph& sample, double step) {
    const std::array<LabeledGraph, 1> batch{sample};
    const auto analytic = loss_and_gradients(model, batch).gradients;
    return gradient_check(model, sample, analytic, step);
}

double gradient_check(const GnnModel& model, const LabeledGraph& sample, std::span<const double> analytic,
                      double step) {
    if (analytic.size() != model.parameters().size()) fail(ErrorKind::InvalidInput, "gradient size mismatch");
    const std::array<LabeledGraph, 1> batch{sample};
    GnnModel probe = model;
    auto params = probe.parameters();
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + step;
        const double up = loss(probe, batch);
        params[i] = saved - step;
        const double down = loss(probe, batch);
        params[i] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

nlohmann::json model_to_json(const GnnModel& model) {
    const auto& arch = model.architecture();
    const auto& norm = model.norm();
    nlohmann::json j;
    j["format"] = "modal-forge-gnn";
    j["format_version"] = kCheckpointVersion;
    j["rounds"] = arch.rounds;
    j["hidden"] = arch.hidden;
    j["activation"] = std::string(activation_name(arch.activation));
    j["seed"] = model.seed();
    j["norm"] = {{"input_mean", norm.input_mean},
                 {"input_std", norm.input_std},
                 {"target_mean", norm.target_mean},
                 {"target_std", norm.target_std}};
    nlohmann::json edge = nlohmann::json::array();
    nlohmann::json node = nlohmann::json::array();
    for (std::size_t r = 0; r < arch.rounds; ++r) {
        edge.push_back(layer_json(model, model.edge_layer(r)));
        node.push_back(layer_json(model, model.node_layer(r)));
    }
    j["layers"] = {{"edge", edge}, {"node", node}, {"readout", layer_json(model, model.readout_layer())}};
    return j;
}

GnnModel model_from_json(const nlohmann::json& j) {
    try {
        if (!j.contains("format_version")) checkpoint_error("missing format_version");
        const int version = j.at("format_version").get<int>();
        if (version != kCheckpointVersion) {
            checkpoint_error("unsupported format version " + std::to_string(version) + " (this build reads " +
                             std::to_string(kCheckpointVersion) + ")");
        }
        Architecture arch;
        arch.rounds = j.at("rounds").get<std::size_t>();
        arch.hidden = j.at("hidden").get<std::size_t>();
        arch.activation = parse_activation(j.at("activation").get<std::string>());
        if (arch.rounds == 0 || arch.hidden == 0) checkpoint_error("rounds and hidden width must be positive");

        if (!j.contains("norm") || j.at("norm").is_null()) checkpoint_error("missing normalization statistics");
        const auto& jn = j.at("norm");
        NormStats norm;
        norm.input_mean = jn.at("input_mean").get<std::array<double, 3>>();
        norm.input_std = jn.at("input_std").get<std::array<double, 3>>();
        norm.target_mean = jn.at("target_mean").get<double>();
        norm.target_std = jn.at("target_std").get<double>();
        try {
            norm.validate();
        } catch (const Error& e) {
            checkpoint_error(e.what());
        }

        GnnModel model(arch, norm, j.value("seed", std::uint64_t{0}));
        const auto& layers = j.at("layers");
        const auto& edge = layers.at("edge");
        const auto& node = layers.at("node");
        if (edge.size() != arch.rounds || node.size() != arch.rounds) {
            checkpoint_error("expected " + std::to_string(arch.rounds) + " edge and node layers, found " +
                             std::to_string(edge.size()) + " and " + std::to_string(node.size()));
        }
        auto params = model.parameters();
        for (std::size_t r = 0; r < arch.rounds; ++r) {
            read_layer(edge[r], model.edge_layer(r), "edge[" + std::to_string(r) + "]", arch.hidden, params);
            read_layer(node[r], model.node_layer(r), "node[" + std::to_string(r) + "]", arch.hidden, params);
        }
        read_layer(layers.at("readout"), model.readout_layer(), "readout", arch.hidden, params);
        for (double w : params) {
            if (!std::isfinite(w)) checkpoint_error("non-finite weight");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        checkpoint_error(e.what());
    }
}

void save_model(const GnnModel& model, std::ostream& out, const nlohmann::json& extra) {
    auto j = model_to_json(model);
    if (extra.is_object()) {
        for (const auto& [key, value] : extra.items()) j[key] = value;
    }
    out << j.dump(1) << '\n';
}

GnnModel load_model(std::istream& in) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        checkpoint_error(std::string("not valid JSON: ") + e.what());
    }
    return model_from_json(j);
}

void expect_architecture(const GnnModel& model, const Architecture& expected) {
    const auto& arch = model.architecture();
    if (arch.hidden != expected.hidden) {
        checkpoint_error("incompatible hidden width: checkpoint has " + std::to_string(arch.hidden) +
                         ", configuration expects " + std::to_string(expected.hidden));
    }
    if (arch.rounds != expected.rounds) {
        checkpoint_error("incompatible round count: checkpoint has " + std::to_string(arch.rounds) +
                         ", configuration expects " + std::to_string(expected.rounds));
    }
    if (arch.activation != expected.activation) {
        checkpoint_error("incompatible activation: checkpoint has " + std::string(activation_name(arch.activation)) +
                         ", configuration expects " + std::string(activation_name(expected.activation)));
    }
}

}  // namespace modalforge::gnn
