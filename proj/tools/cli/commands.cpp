#include "commands.hpp"

#include "modalforge/checksum.hpp"
#include "modalforge/error.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <random>

namespace modalforge::cli {
namespace {

std::string num(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Data, "cannot write " + path.string());
    return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

std::vector<std::string> csv_header(const RunConfig& config) { return {config.provenance_line()}; }

gnn::GnnModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Data, "cannot open checkpoint " + path.string());
    return gnn::load_model(in);
}

// Used where the checkpoint must match the configured architecture; a
// mismatch is a configuration problem rather than bad data.
gnn::GnnModel load_compatible_checkpoint(const RunConfig& config) {
    try {
        auto model = load_checkpoint(config.checkpoint_path());
        gnn::expect_architecture(model, config.training.architecture);
        return model;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Checkpoint) {
            fail(ErrorKind::Config, "checkpoint " + config.checkpoint_path().string() + ": " + e.what());
        }
        throw;
    }
}

nlohmann::json metrics_json(const gnn::Metrics& m) {
    nlohmann::json j{{"mae_m", m.mae}, {"mape_percent", m.mape}, {"count", m.count}};
    j["r2"] = m.r2 ? nlohmann::json(*m.r2) : nlohmann::json(nullptr);
    return j;
}

void print_metrics(std::ostream& out, const std::string& title, const gnn::Metrics& m) {
    out << title << " (" << m.count << " samples)\n";
    out << "  Metric        Value\n";
    out << "  R2 Score      " << (m.r2 ? num(*m.r2) : std::string("undefined (constant targets)")) << '\n';
    out << "  MAE (m)       " << num(m.mae) << '\n';
    out << "  MAPE (%)      " << num(m.mape) << '\n';
}

template <class Fn>
double mean_latency(std::size_t calls, Fn&& fn) {
    volatile double sink = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < calls; ++i) sink = sink + fn();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return elapsed.count() / static_cast<double>(calls);
}

}  // namespace

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::InvalidParameter:
            return 2;
        case ErrorKind::Data:
        case ErrorKind::InvalidInput:
        case ErrorKind::Checkpoint:
            return 3;
        default:
            return 4;
    }
}

void cmd_simulate(const RunConfig& config, std::ostream& out) {
    const auto system = config.system.build();
    const auto exc = build_excitation(config);
    const std::size_t n = dataset::sample_count(config.solver.dt, config.solver.duration);
    const auto force = excitation::synthesize_force(exc.spec, system.mass(), config.solver.dt, n);
    const dyno::NewmarkParams params{config.solver.gamma, config.solver.beta, config.solver.dt};
    const auto history = dyno::newmark_solve(system, config.initial, force, params);

    const auto path = config.output("time_history.csv");
    auto csv = open_output(path);
    csv << "# " << config.provenance_line() << '\n';
    csv << "# m=" << num(system.mass()) << " k=" << num(system.stiffness()) << " c=" << num(system.damping())
        << " excitation=" << excitation::kind_name(exc.spec) << '\n';
    csv << "t,u_m,v_mps,a_mps2,p_N\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        csv << num(history.time(i)) << ',' << num(history.u[i]) << ',' << num(history.v[i]) << ','
            << num(history.a[i]) << ',' << num(history.p[i]) << '\n';
    }

    const auto modal = dyno::derive_modal(system);
    out << "system: m=" << num(system.mass()) << " kg, k=" << num(system.stiffness())
        << " N/m, c=" << num(system.damping()) << " N*s/m (zeta=" << num(modal.zeta)
        << ", T_n=" << num(modal.t_n) << " s)\n";
    out << "steps: " << n << " at dt=" << num(config.solver.dt) << " s\n";
    out << "u_max = " << num(dyno::max_abs_displacement(history)) << " m\n";
    out << "wrote " << path.string() << '\n';
}

void cmd_sweep(const RunConfig& config, std::ostream& out) {
    const auto exc = build_excitation(config);
    dataset::GenerateOptions options;
    options.workers = config.sweep_workers;

    const auto start = std::chrono::steady_clock::now();
    auto ds = dataset::generate_dataset(config.space, exc.spec, config.solver.dt, config.solver.duration, options);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    ds = dataset::split_dataset(std::move(ds), config.training.test_fraction, config.training.split_seed);
    ds.ground_motion_sha256 = exc.ground_motion_sha256;

    const auto path = config.dataset_path();
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    nlohmann::json extra{{"_meta", config.provenance()}};
    if (const auto* base = std::get_if<excitation::BaseRecord>(&exc.spec)) {
        extra["ground_motion_label"] = base->record.label;
        extra["resampled"] = exc.resampled;
    }
    dataset::save_dataset(ds, path, csv_header(config), extra);

    out << "samples: " << ds.records.size() << " (" << ds.train.size() << " train, " << ds.test.size()
        << " test)\n";
    out << "steps per sample: " << dataset::sample_count(config.solver.dt, config.solver.duration) << '\n';
    out << "wall time: " << std::fixed << std::setprecision(3) << wall.count() << " s\n";
    out.unsetf(std::ios::floatfield);
    out << "wrote " << path.string() << " and " << dataset::meta_path(path).string() << '\n';
}

void cmd_train(const RunConfig& config, std::ostream& out) {
    const auto ds = dataset::load_dataset(config.dataset_path());
    if (ds.train.empty()) fail(ErrorKind::Data, "dataset has an empty training split");
    const auto& tr = config.training;

    // Early-stopping monitor carved from the training split.
    std::vector<std::size_t> fit_idx = ds.train;
    std::vector<std::size_t> val_idx;
    const auto n_val = static_cast<std::size_t>(std::floor(tr.validation_fraction * static_cast<double>(fit_idx.size())));
    if (n_val > 0 && n_val < fit_idx.size()) {
        std::mt19937_64 rng(tr.train.seed);
        std::shuffle(fit_idx.begin(), fit_idx.end(), rng);
        val_idx.assign(fit_idx.end() - static_cast<std::ptrdiff_t>(n_val), fit_idx.end());
        fit_idx.resize(fit_idx.size() - n_val);
        std::sort(fit_idx.begin(), fit_idx.end());
        std::sort(val_idx.begin(), val_idx.end());
    }

    const auto norm = gnn::fit_norm_stats(ds.records, ds.train);
    const auto initial = gnn::GnnModel::initialized(tr.architecture, norm, tr.train.seed);
    const auto train_set = gnn::make_samples(initial, ds.records, fit_idx);
    const auto val_set = gnn::make_samples(initial, ds.records, val_idx);

    const auto start = std::chrono::steady_clock::now();
    const auto result = gnn::train(initial, train_set, val_set, tr.train);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;

    const auto train_metrics = gnn::evaluate(result.model, ds.records, ds.train);
    std::optional<gnn::Metrics> test_metrics;
    if (!ds.test.empty()) test_metrics = gnn::evaluate(result.model, ds.records, ds.test);

    const auto ckpt = config.checkpoint_path();
    {
        auto f = open_output(ckpt);
        gnn::save_model(result.model, f,
                        {{"_meta", config.provenance()},
                         {"dataset_sha256", sha256_file(config.dataset_path())},
                         {"best_epoch", result.best_epoch}});
    }

    nlohmann::json metrics{{"_meta", config.provenance()},
                           {"best_epoch", result.best_epoch},
                           {"epochs_run", result.history.size()},
                           {"train", metrics_json(train_metrics)}};
    metrics["test"] = test_metrics ? metrics_json(*test_metrics) : nlohmann::json(nullptr);
    write_json(config.output("metrics.json"), metrics);

    {
        auto f = open_output(config.output("training_history.csv"));
        f << "# " << config.provenance_line() << '\n';
        f << "epoch,train_loss,val_loss\n";
        for (const auto& e : result.history) f << e.epoch << ',' << num(e.train_loss) << ',' << num(e.val_loss) << '\n';
    }
    {
        auto f = open_output(config.output("parity.csv"));
        f << "# " << config.provenance_line() << '\n';
        f << "# split=test\n";
        f << "u_true_m,u_pred_m\n";
        for (std::size_t i : ds.test) {
            const auto& r = ds.records[i];
            f << num(r.u_max) << ',' << num(gnn::predict(result.model, r.m, r.k, r.c)) << '\n';
        }
    }

    out << "trained on " << fit_idx.size() << " samples, monitored " << val_idx.size() << ", best epoch "
        << result.best_epoch << " of " << result.history.size() << " (" << std::fixed << std::setprecision(1)
        << wall.count() << " s)\n";
    out.unsetf(std::ios::floatfield);
    print_metrics(out, "train split", train_metrics);
    if (test_metrics) {
        print_metrics(out, "test split", *test_metrics);
    } else {
        out << "test split is empty\n";
    }
    out << "wrote " << ckpt.string() << '\n';
}

void cmd_evaluate(const RunConfig& config, std::ostream& out) {
    const auto ds = dataset::load_dataset(config.dataset_path());
    const auto model = load_compatible_checkpoint(config);
    nlohmann::json report{{"_meta", config.provenance()}};
    for (const auto& [name, idx] : {std::pair{"train", &ds.train}, std::pair{"test", &ds.test}}) {
        if (idx->empty()) {
            report[name] = nullptr;
            out << name << " split is empty\n";
            continue;
        }
        const auto m = gnn::evaluate(model, ds.records, *idx);
        report[name] = metrics_json(m);
        print_metrics(out, std::string(name) + " split", m);
    }
    write_json(config.output("evaluation.json"), report);
}

void cmd_optimize(const RunConfig& config, std::ostream& out) {
    ga::FitnessFn fitness;
    std::string mode;
    switch (config.ga.mode) {
        case OptimizeMode::Surrogate:
            fitness = ga::surrogate_fitness(std::make_shared<const gnn::GnnModel>(load_compatible_checkpoint(config)));
            mode = "surrogate";
            break;
        case OptimizeMode::Direct: {
            auto exc = build_excitation(config);
            fitness = ga::direct_fitness(std::move(exc.spec), config.solver.dt, config.solver.duration);
            mode = "direct";
            break;
        }
        case OptimizeMode::QuadraticTest:
            fitness = ga::quadratic_test_fitness;
            mode = "quadratic-test";
            break;
    }
    const auto& gc = config.ga.config;
    const auto result = ga::evolve(fitness, gc);

    {
        auto f = open_output(config.output("convergence.csv"));
        ga::write_convergence_csv(result, f, {config.provenance_line(), "mode=" + mode});
    }
    const nlohmann::json best{{"_meta", config.provenance()},
                              {"mode", mode},
                              {"m", result.best_params.m},
                              {"k", result.best_params.k},
                              {"c", result.best_params.c},
                              {"fitness", result.best_fitness},
                              {"evaluations", result.evaluations},
                              {"population", gc.population},
                              {"generations", gc.generations},
                              {"seed", gc.seed}};
    write_json(config.best_path(), best);

    out << "mode: " << mode << ", " << result.evaluations << " fitness evaluations\n";
    out << "best: m=" << num(result.best_params.m) << " kg, k=" << num(result.best_params.k)
        << " N/m, c=" << num(result.best_params.c) << " N*s/m\n";
    out << "best fitness: " << num(result.best_fitness) << '\n';
    out << "wrote " << config.best_path().string() << '\n';
}

ValidationReport make_validation_report(const dataset::ParameterTriple& optimal, double u_pred, double u_sim) {
    ValidationReport r;
    r.optimal = optimal;
    r.u_pred = u_pred;
    r.u_sim = u_sim;
    r.abs_diff = std::abs(u_pred - u_sim);
    if (u_sim > 0.0) r.rel_diff = 100.0 * r.abs_diff / u_sim;
    return r;
}

nlohmann::json to_json(const ValidationReport& r) {
    nlohmann::json j{{"optimal", {{"m", r.optimal.m}, {"k", r.optimal.k}, {"c", r.optimal.c}}},
                     {"u_pred_m", r.u_pred},
                     {"u_sim_m", r.u_sim},
                     {"abs_diff_m", r.abs_diff}};
    j["rel_diff_percent"] = r.rel_diff ? nlohmann::json(*r.rel_diff) : nlohmann::json(nullptr);
    j["runtime"] = {{"timing_calls", r.timing_calls},
                    {"surrogate_call_s", r.surrogate_call_s},
                    {"direct_call_s", r.direct_call_s}};
    j["runtime"]["speedup"] = r.speedup ? nlohmann::json(*r.speedup) : nlohmann::json(nullptr);
    return j;
}

ValidationReport cmd_validate(const RunConfig& config, std::ostream& out) {
    const auto best_path = config.best_path();
    std::ifstream in(best_path, std::ios::binary);
    if (!in) fail(ErrorKind::Data, "cannot open best-parameter record " + best_path.string());
    dataset::ParameterTriple optimal;
    try {
        const auto j = nlohmann::json::parse(in);
        optimal = {j.at("m").get<double>(), j.at("k").get<double>(), j.at("c").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Data, best_path.string() + ": " + e.what());
    }

    const auto model = load_compatible_checkpoint(config);
    auto exc = build_excitation(config);
    const auto surrogate = ga::surrogate_fitness(std::make_shared<const gnn::GnnModel>(model));
    const auto direct = ga::direct_fitness(std::move(exc.spec), config.solver.dt, config.solver.duration);

    auto report = make_validation_report(optimal, surrogate(optimal.m, optimal.k, optimal.c),
                                         direct(optimal.m, optimal.k, optimal.c));
    report.timing_calls = config.timing_calls;
    report.surrogate_call_s = mean_latency(config.timing_calls, [&] { return surrogate(optimal.m, optimal.k, optimal.c); });
    report.direct_call_s = mean_latency(config.timing_calls, [&] { return direct(optimal.m, optimal.k, optimal.c); });
    if (report.surrogate_call_s > 0.0) report.speedup = report.direct_call_s / report.surrogate_call_s;

    auto j = to_json(report);
    j["_meta"] = config.provenance();
    const ga::GaConfig& gc = config.ga.config;
    j["within_bounds"] = gc.m_bounds.contains(optimal.m) && gc.k_bounds.contains(optimal.k) &&
                         gc.c_bounds.contains(optimal.c);
    write_json(config.output("validation.json"), j);

    out << "optimal: m=" << num(optimal.m) << " kg, k=" << num(optimal.k) << " N/m, c=" << num(optimal.c)
        << " N*s/m\n";
    out << "u_pred (surrogate) = " << num(report.u_pred) << " m\n";
    out << "u_sim  (Newmark)   = " << num(report.u_sim) << " m\n";
    out << "abs_diff = " << num(report.abs_diff) << " m\n";
    out << "rel_diff = " << (report.rel_diff ? num(*report.rel_diff) + " %" : std::string("undefined (u_sim = 0)"))
        << '\n';
    out << "mean call latency: surrogate " << num(report.surrogate_call_s) << " s, direct "
        << num(report.direct_call_s) << " s";
    if (report.speedup) out << ", speedup " << num(*report.speedup) << "x";
    out << '\n';
    return report;
}

}  // namespace modalforge::cli
