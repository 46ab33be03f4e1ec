#include "config.hpp"

#include "modalforge/checksum.hpp"
#include "modalforge/error.hpp"

#include <toml.hpp>

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace modalforge::cli {
namespace {

[[noreturn]] void config_error(const std::string& what) { fail(ErrorKind::Config, what); }

// Typed access to one TOML table; flags keys it does not recognise.
class Section {
public:
    Section(const toml::table& root, std::string name) : name_(std::move(name)) {
        if (const auto* node = root.get(name_)) {
            table_ = node->as_table();
            if (table_ == nullptr) config_error("[" + name_ + "] must be a table");
        }
    }

    [[nodiscard]] bool present() const noexcept { return table_ != nullptr; }

    std::optional<double> number(std::string_view key) {
        const auto* node = find(key);
        if (node == nullptr) return std::nullopt;
        if (!node->is_number()) config_error(field(key) + " must be a number");
        return node->value<double>();
    }

    std::optional<std::int64_t> integer(std::string_view key) {
        const auto* node = find(key);
        if (node == nullptr) return std::nullopt;
        if (!node->is_integer()) config_error(field(key) + " must be an integer");
        return node->value<std::int64_t>();
    }

    std::optional<std::size_t> count(std::string_view key) {
        const auto v = integer(key);
        if (!v) return std::nullopt;
        if (*v < 0) config_error(field(key) + " must be non-negative");
        return static_cast<std::size_t>(*v);
    }

    std::optional<std::string> string(std::string_view key) {
        const auto* node = find(key);
        if (node == nullptr) return std::nullopt;
        if (!node->is_string()) config_error(field(key) + " must be a string");
        return node->value<std::string>();
    }

    std::optional<std::vector<double>> numbers(std::string_view key, std::size_t expected) {
        const auto* node = find(key);
        if (node == nullptr) return std::nullopt;
        const auto* arr = node->as_array();
        if (arr == nullptr || arr->size() != expected) {
            config_error(field(key) + " must be an array of " + std::to_string(expected) + " numbers");
        }
        std::vector<double> out;
        for (const auto& item : *arr) {
            if (!item.is_number()) config_error(field(key) + " must contain only numbers");
            out.push_back(*item.value<double>());
        }
        return out;
    }

    std::optional<dataset::Interval> range(std::string_view key) {
        const auto v = numbers(key, 2);
        if (!v) return std::nullopt;
        return dataset::Interval{(*v)[0], (*v)[1]};
    }

    void finish() const {
        if (table_ == nullptr) return;
        for (const auto& [key, node] : *table_) {
            if (!used_.contains(std::string(key.str()))) config_error("unknown key " + field(key.str()));
        }
    }

    [[nodiscard]] std::string field(std::string_view key) const { return name_ + "." + std::string(key); }

private:
    const toml::node* find(std::string_view key) {
        used_.insert(std::string(key));
        return table_ == nullptr ? nullptr : table_->get(key);
    }

    std::string name_;
    const toml::table* table_ = nullptr;
    std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    return (p.is_absolute() ? p : base / p).lexically_normal();
}

}  // namespace

dyno::SdofSystem SystemSection::build() const {
    if (!m) config_error("system.m is required");
    if (!k) config_error("system.k is required");
    if (c.has_value() == zeta.has_value()) config_error("system needs exactly one of system.c or system.zeta");
    try {
        const double damping = c ? *c : dyno::damping_from_ratio(*m, *k, *zeta);
        return dyno::SdofSystem(*m, *k, damping);
    } catch (const Error& e) {
        config_error(std::string("system: ") + e.what());
    }
}

std::filesystem::path RunConfig::dataset_path() const { return paths.dataset.value_or(output("dataset.csv")); }
std::filesystem::path RunConfig::checkpoint_path() const { return paths.checkpoint.value_or(output("model.json")); }
std::filesystem::path RunConfig::best_path() const { return paths.best.value_or(output("best_params.json")); }
std::filesystem::path RunConfig::output(std::string_view name) const { return paths.output_dir / name; }

std::string RunConfig::provenance_line() const {
    return std::string(kToolName) + " " + std::string(kToolVersion) + " config_sha256=" + hash;
}

nlohmann::json RunConfig::provenance() const {
    return {{"tool", kToolName}, {"version", kToolVersion}, {"config_sha256", hash}};
}

RunConfig parse_run_config(std::string_view toml_text, const std::filesystem::path& base_dir,
                           const Overrides& overrides) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "config parse error at line " << e.source().begin.line << ": " << e.description();
        config_error(msg.str());
    }

    static const std::set<std::string> known{"system", "initial", "excitation", "solver", "space",
                                             "training", "ga", "paths", "validate"};
    for (const auto& [key, node] : root) {
        if (!known.contains(std::string(key.str()))) config_error("unknown section [" + std::string(key.str()) + "]");
    }

    RunConfig cfg;

    Section system(root, "system");
    cfg.system.m = system.number("m");
    cfg.system.k = system.number("k");
    cfg.system.c = system.number("c");
    cfg.system.zeta = system.number("zeta");
    if (cfg.system.c && cfg.system.zeta) config_error("system needs exactly one of system.c or system.zeta");
    system.finish();

    Section initial(root, "initial");
    cfg.initial.u0 = initial.number("u0").value_or(0.0);
    cfg.initial.v0 = initial.number("v0").value_or(0.0);
    initial.finish();

    Section exc(root, "excitation");
    cfg.excitation.kind = exc.string("kind").value_or(cfg.excitation.kind);
    cfg.excitation.amplitude = exc.number("amplitude").value_or(0.0);
    cfg.excitation.omega = exc.number("omega").value_or(0.0);
    cfg.excitation.p0 = exc.number("p0").value_or(0.0);
    cfg.excitation.td = exc.number("td").value_or(0.0);
    cfg.excitation.scale = exc.number("scale").value_or(1.0);
    exc.finish();
    static const std::set<std::string> kinds{"free", "sine", "half_sine", "base_record"};
    if (!kinds.contains(cfg.excitation.kind)) {
        config_error("excitation.kind must be one of free, sine, half_sine, base_record; got '" +
                     cfg.excitation.kind + "'");
    }

    Section solver(root, "solver");
    cfg.solver.dt = solver.number("dt").value_or(cfg.solver.dt);
    cfg.solver.duration = solver.number("duration").value_or(cfg.solver.duration);
    cfg.solver.gamma = solver.number("gamma").value_or(cfg.solver.gamma);
    cfg.solver.beta = solver.number("beta").value_or(cfg.solver.beta);
    solver.finish();
    try {
        dyno::NewmarkParams{cfg.solver.gamma, cfg.solver.beta, cfg.solver.dt}.validate();
    } catch (const Error& e) {
        config_error(std::string("solver: ") + e.what());
    }
    if (!(cfg.solver.duration > 0.0)) config_error("solver.duration must be positive");

    Section space(root, "space");
    if (auto r = space.range("m")) cfg.space.m = *r;
    if (auto r = space.range("k")) cfg.space.k = *r;
    if (auto r = space.range("c")) cfg.space.c = *r;
    cfg.space.damping_floor = space.number("damping_floor").value_or(cfg.space.damping_floor);
    const std::string sampling = space.string("sampling").value_or("log_uniform");
    const auto count = space.count("count");
    const auto seed = space.count("seed");
    const auto grid = space.numbers("grid", 3);
    if (sampling == "log_uniform") {
        dataset::LogUniformSampling lu;
        lu.count = count.value_or(lu.count);
        lu.seed = seed.value_or(lu.seed);
        cfg.space.sampling = lu;
    } else if (sampling == "grid") {
        if (!grid) config_error("space.grid = [m_count, k_count, c_count] is required for grid sampling");
        for (double g : *grid) {
            if (g < 1.0 || g != static_cast<double>(static_cast<std::size_t>(g))) {
                config_error("space.grid entries must be positive integers");
            }
        }
        cfg.space.sampling = dataset::GridSampling{static_cast<std::size_t>((*grid)[0]),
                                                   static_cast<std::size_t>((*grid)[1]),
                                                   static_cast<std::size_t>((*grid)[2])};
    } else {
        config_error("space.sampling must be 'log_uniform' or 'grid'");
    }
    cfg.sweep_workers = static_cast<unsigned>(space.count("workers").value_or(0));
    space.finish();

    Section training(root, "training");
    auto& tr = cfg.training;
    tr.architecture.rounds = training.count("rounds").value_or(tr.architecture.rounds);
    tr.architecture.hidden = training.count("hidden").value_or(tr.architecture.hidden);
    if (auto act = training.string("activation")) {
        if (*act == "tanh") {
            tr.architecture.activation = gnn::Activation::Tanh;
        } else if (*act == "relu") {
            tr.architecture.activation = gnn::Activation::Relu;
        } else {
            config_error("training.activation must be 'tanh' or 'relu'");
        }
    }
    tr.train.learning_rate = training.number("learning_rate").value_or(tr.train.learning_rate);
    tr.train.momentum = training.number("momentum").value_or(tr.train.momentum);
    tr.train.epochs = training.count("epochs").value_or(tr.train.epochs);
    tr.train.batch_size = training.count("batch_size").value_or(tr.train.batch_size);
    tr.train.patience = training.count("patience").value_or(tr.train.patience);
    tr.train.seed = training.count("seed").value_or(tr.train.seed);
    tr.test_fraction = training.number("test_fraction").value_or(tr.test_fraction);
    tr.split_seed = training.count("split_seed").value_or(tr.split_seed);
    tr.validation_fraction = training.number("validation_fraction").value_or(tr.validation_fraction);
    training.finish();
    if (!(tr.test_fraction >= 0.0 && tr.test_fraction < 1.0)) config_error("training.test_fraction must lie in [0, 1)");
    if (!(tr.validation_fraction >= 0.0 && tr.validation_fraction < 1.0)) {
        config_error("training.validation_fraction must lie in [0, 1)");
    }
    tr.architecture.validate();
    tr.train.validate();

    Section gas(root, "ga");
    auto& gc = cfg.ga.config;
    gc.population = gas.count("population").value_or(gc.population);
    gc.generations = gas.count("generations").value_or(gc.generations);
    gc.tournament = gas.count("tournament").value_or(gc.tournament);
    gc.crossover_probability = gas.number("crossover_probability").value_or(gc.crossover_probability);
    gc.blend_alpha = gas.number("blend_alpha").value_or(gc.blend_alpha);
    gc.mutation_probability = gas.number("mutation_probability").value_or(gc.mutation_probability);
    gc.mutation_sigma = gas.number("mutation_sigma").value_or(gc.mutation_sigma);
    gc.elites = gas.count("elites").value_or(gc.elites);
    gc.seed = gas.count("seed").value_or(gc.seed);
    gc.workers = static_cast<unsigned>(gas.count("workers").value_or(1));
    gc.m_bounds = gas.range("m").value_or(cfg.space.m);
    gc.k_bounds = gas.range("k").value_or(cfg.space.k);
    gc.c_bounds = gas.range("c").value_or(cfg.space.c);
    const std::string mode = gas.string("mode").value_or("surrogate");
    if (mode == "surrogate") {
        cfg.ga.mode = OptimizeMode::Surrogate;
    } else if (mode == "direct") {
        cfg.ga.mode = OptimizeMode::Direct;
    } else if (mode == "quadratic-test") {
        cfg.ga.mode = OptimizeMode::QuadraticTest;
    } else {
        config_error("ga.mode must be 'surrogate', 'direct' or 'quadratic-test'");
    }
    gas.finish();

    Section paths(root, "paths");
    if (auto p = paths.string("ground_motion")) cfg.paths.ground_motion = resolve(base_dir, *p);
    if (auto p = paths.string("dataset")) cfg.paths.dataset = resolve(base_dir, *p);
    if (auto p = paths.string("checkpoint")) cfg.paths.checkpoint = resolve(base_dir, *p);
    if (auto p = paths.string("best")) cfg.paths.best = resolve(base_dir, *p);
    cfg.paths.output_dir = resolve(base_dir, paths.string("output_dir").value_or("out"));
    paths.finish();

    Section validate(root, "validate");
    cfg.timing_calls = validate.count("timing_calls").value_or(cfg.timing_calls);
    validate.finish();
    if (cfg.timing_calls == 0) config_error("validate.timing_calls must be at least 1");

    std::string hashed(toml_text);
    if (overrides.seed) {
        const std::uint64_t s = *overrides.seed;
        if (auto* lu = std::get_if<dataset::LogUniformSampling>(&cfg.space.sampling)) lu->seed = s;
        cfg.training.split_seed = s;
        cfg.training.train.seed = s;
        cfg.ga.config.seed = s;
        hashed += "\n--seed=" + std::to_string(s);
    }
    if (overrides.output_dir) cfg.paths.output_dir = *overrides.output_dir;
    try {
        cfg.space.validate();
        cfg.ga.config.validate();
    } catch (const Error& e) {
        config_error(e.what());
    }
    cfg.hash = sha256_hex(hashed);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) config_error("cannot open config file " + path.string());
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_run_config(text, base, overrides);
}

LoadedExcitation build_excitation(const RunConfig& config) {
    const auto& e = config.excitation;
    LoadedExcitation out;
    try {
        if (e.kind == "free") {
            out.spec = excitation::Free{};
        } else if (e.kind == "sine") {
            out.spec = excitation::Sine{e.amplitude, e.omega};
        } else if (e.kind == "half_sine") {
            out.spec = excitation::HalfSinePulse{e.p0, e.td};
        } else {
            if (!config.paths.ground_motion) config_error("paths.ground_motion is required for base_record excitation");
            auto record = excitation::load_ground_motion(*config.paths.ground_motion);
            out.ground_motion_sha256 = sha256_file(*config.paths.ground_motion);
            if (record.dt != config.solver.dt) {
                record = excitation::resample_record(record, config.solver.dt);
                out.resampled = true;
            }
            out.spec = excitation::BaseRecord{std::move(record), e.scale};
        }
        excitation::validate(out.spec);
    } catch (const Error& err) {
        if (err.kind() == ErrorKind::InvalidParameter) config_error(std::string("excitation: ") + err.what());
        throw;
    }
    return out;
}

}  // namespace modalforge::cli
