#include "modalforge/dataset.hpp"

#include "modalforge/error.hpp"
#include "modalforge/sdof.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace modalforge::dataset {
namespace {

void check_interval(const Interval& iv, std::size_t count, const char* axis) {
    const std::string name(axis);
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) fail(ErrorKind::Config, name + " range must be finite");
    if (!(iv.lo > 0.0)) fail(ErrorKind::Config, name + " range lower bound must be positive");
    if (iv.lo > iv.hi) fail(ErrorKind::Config, name + " range has lower > upper");
    if (iv.lo == iv.hi && count > 1) {
        fail(ErrorKind::Config, name + " range is degenerate but " + std::to_string(count) + " samples requested");
    }
}

std::vector<double> log_axis(const Interval& iv, std::size_t count) {
    if (count == 1) return {std::sqrt(iv.lo * iv.hi)};
    std::vector<double> axis(count);
    const double lo = std::log10(iv.lo);
    const double hi = std::log10(iv.hi);
    for (std::size_t i = 0; i < count; ++i) {
        axis[i] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    axis.front() = iv.lo;
    axis.back() = iv.hi;
    return axis;
}

std::string format_double(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return {buf, res.ptr};
}

std::string describe(const ParameterTriple& t) {
    return "(m=" + format_double(t.m) + ", k=" + format_double(t.k) + ", c=" + format_double(t.c) + ")";
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

constexpr std::string_view kCsvHeader = "m_kg,k_N_per_m,c_Ns_per_m,u_max_m";

}  // namespace

void ParameterSpace::validate() const {
    std::size_t mc = 1, kc = 1, cc = 1;
    if (const auto* grid = std::get_if<GridSampling>(&sampling)) {
        if (grid->m_count == 0 || grid->k_count == 0 || grid->c_count == 0) {
            fail(ErrorKind::Config, "grid counts must be at least 1");
        }
        mc = grid->m_count;
        kc = grid->k_count;
        cc = grid->c_count;
    } else {
        const auto& lu = std::get<LogUniformSampling>(sampling);
        mc = kc = cc = lu.count;
        if (!(damping_floor > 0.0)) fail(ErrorKind::Config, "damping floor must be positive");
        if (c.lo < damping_floor) {
            fail(ErrorKind::Config, "damping range lower bound " + format_double(c.lo) + " is below the floor " +
                                        format_double(damping_floor));
        }
    }
    check_interval(m, mc, "mass");
    check_interval(k, kc, "stiffness");
    check_interval(c, cc, "damping");
}

std::vector<ParameterTriple> sample_parameters(const ParameterSpace& space) {
    space.validate();
    std::vector<ParameterTriple> out;
    if (const auto* grid = std::get_if<GridSampling>(&space.sampling)) {
        const auto ms = log_axis(space.m, grid->m_count);
        const auto ks = log_axis(space.k, grid->k_count);
        const auto cs = log_axis(space.c, grid->c_count);
        out.reserve(ms.size() * ks.size() * cs.size());
        for (double m : ms)
            for (double k : ks)
                for (double c : cs) out.push_back({m, k, c});
        return out;
    }
    const auto& lu = std::get<LogUniformSampling>(space.sampling);
    std::mt19937_64 rng(lu.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](const Interval& iv) {
        const double lo = std::log10(iv.lo);
        const double hi = std::log10(iv.hi);
        return std::clamp(std::pow(10.0, lo + (hi - lo) * unit(rng)), iv.lo, iv.hi);
    };
    out.reserve(lu.count);
    for (std::size_t i = 0; i < lu.count; ++i) {
        const double m = draw(space.m);
        const double k = draw(space.k);
        const double c = draw(space.c);
        out.push_back({m, k, c});
    }
    return out;
}

std::size_t sample_count(double dt, double duration) {
    if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorKind::Config, "time step must be positive");
    if (!std::isfinite(duration) || duration / dt < 2.0 - 1e-9) {
        fail(ErrorKind::Config, "duration must span at least two time steps");
    }
    return static_cast<std::size_t>(std::llround(duration / dt)) + 1;
}

double simulate_peak(const ParameterTriple& params, const excitation::ExcitationSpec& spec, double dt,
                     std::size_t n) {
    const dyno::SdofSystem system(params.m, params.k, params.c);
    const auto force = excitation::synthesize_force(spec, params.m, dt, n);
    const auto history = dyno::newmark_solve(system, {}, force, {.gamma = 0.5, .beta = 0.25, .dt = dt});
    return dyno::max_abs_displacement(history);
}

nlohmann::json describe_excitation(const excitation::ExcitationSpec& spec) {
    nlohmann::json j;
    j["kind"] = std::string(excitation::kind_name(spec));
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, excitation::Sine>) {
                j["amplitude"] = s.amplitude;
                j["omega"] = s.omega;
            } else if constexpr (std::is_same_v<T, excitation::HalfSinePulse>) {
                j["p0"] = s.p0;
                j["td"] = s.td;
            } else if constexpr (std::is_same_v<T, excitation::BaseRecord>) {
                j["label"] = s.record.label;
                j["record_dt"] = s.record.dt;
                j["record_samples"] = s.record.accel.size();
                j["scale"] = s.scale;
            }
        },
        spec);
    return j;
}

Dataset generate_dataset(const ParameterSpace& space, const excitation::ExcitationSpec& spec, double dt,
                         double duration, const GenerateOptions& options) {
    excitation::validate(spec);
    const std::size_t n = sample_count(dt, duration);
    const auto triples = sample_parameters(space);

    Dataset out;
    out.excitation = describe_excitation(spec);
    out.dt = dt;
    out.duration = duration;
    if (const auto* lu = std::get_if<LogUniformSampling>(&space.sampling)) out.seed = lu->seed;
    out.records.resize(triples.size());

    std::vector<std::exception_ptr> errors(triples.size());
    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const auto& t = triples[i];
                out.records[i] = {t.m, t.k, t.c, simulate_peak(t, spec, dt, n)};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    unsigned workers = options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.workers;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, triples.size())));
    if (workers <= 1) {
        run_range(0, triples.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (triples.size() + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(triples.size(), w * chunk);
            const std::size_t end = std::min(triples.size(), begin + chunk);
            pool.emplace_back(run_range, begin, end);
        }
    }

    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const Error& e) {
            throw Error(e.kind(), "sample " + std::to_string(i) + " " + describe(triples[i]) + ": " + e.what());
        }
    }

    out.train.resize(out.records.size());
    std::iota(out.train.begin(), out.train.end(), std::size_t{0});
    return out;
}

Dataset split_dataset(Dataset dataset, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) fail(ErrorKind::Config, "test fraction must lie in [0, 1)");
    const std::size_t n = dataset.records.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    dataset.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
    dataset.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
    std::sort(dataset.test.begin(), dataset.test.end());
    std::sort(dataset.train.begin(), dataset.train.end());
    dataset.split_seed = seed;
    return dataset;
}

void write_dataset_csv(const Dataset& dataset, std::ostream& out, const CommentLines& comments) {
    for (const auto& line : comments) out << "# " << line << '\n';
    out << kCsvHeader << '\n';
    for (const auto& r : dataset.records) {
        out << format_double(r.m) << ',' << format_double(r.k) << ',' << format_double(r.c) << ','
            << format_double(r.u_max) << '\n';
    }
}

void write_dataset_meta(const Dataset& dataset, std::ostream& out, const nlohmann::json& extra) {
    nlohmann::json j;
    j["format"] = "modal-forge-dataset";
    j["version"] = 1;
    j["record_count"] = dataset.records.size();
    j["excitation"] = dataset.excitation;
    j["dt"] = dataset.dt;
    j["duration"] = dataset.duration;
    j["seed"] = dataset.seed;
    j["split_seed"] = dataset.split_seed;
    j["split"] = {{"train", dataset.train}, {"test", dataset.test}};
    j["ground_motion_sha256"] =
        dataset.ground_motion_sha256 ? nlohmann::json(*dataset.ground_motion_sha256) : nlohmann::json(nullptr);
    if (extra.is_object()) {
        for (const auto& [key, value] : extra.items()) j[key] = value;
    }
    out << j.dump(2) << '\n';
}

Dataset read_dataset(std::istream& csv, std::istream* meta) {
    Dataset out;
    std::string raw;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(csv, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (!have_header) {
            if (line != kCsvHeader) {
                fail(ErrorKind::Data, "dataset line " + std::to_string(line_no) + ": expected header '" +
                                          std::string(kCsvHeader) + "'");
            }
            have_header = true;
            continue;
        }
        double values[4];
        std::size_t field = 0;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::string_view token =
                trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
            if (field >= 4) fail(ErrorKind::Data, "dataset line " + std::to_string(line_no) + ": too many fields");
            const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), values[field]);
            if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(values[field])) {
                fail(ErrorKind::Data, "dataset line " + std::to_string(line_no) + ": malformed value '" +
                                          std::string(token) + "'");
            }
            ++field;
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (field != 4) {
            fail(ErrorKind::Data, "dataset line " + std::to_string(line_no) + ": expected 4 fields, got " +
                                      std::to_string(field));
        }
        if (values[3] < 0.0) {
            fail(ErrorKind::Data, "dataset line " + std::to_string(line_no) + ": negative u_max");
        }
        out.records.push_back({values[0], values[1], values[2], values[3]});
    }
    if (!have_header) fail(ErrorKind::Data, "dataset has no header line");

    if (meta == nullptr) {
        out.train.resize(out.records.size());
        std::iota(out.train.begin(), out.train.end(), std::size_t{0});
        return out;
    }

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(*meta);
        if (j.at("record_count").get<std::size_t>() != out.records.size()) {
            fail(ErrorKind::Data, "dataset integrity: metadata declares " +
                                      std::to_string(j.at("record_count").get<std::size_t>()) +
                                      " records but CSV holds " + std::to_string(out.records.size()));
        }
        out.excitation = j.at("excitation");
        out.dt = j.at("dt").get<double>();
        out.duration = j.at("duration").get<double>();
        out.seed = j.at("seed").get<std::uint64_t>();
        out.split_seed = j.value("split_seed", std::uint64_t{0});
        out.train = j.at("split").at("train").get<std::vector<std::size_t>>();
        out.test = j.at("split").at("test").get<std::vector<std::size_t>>();
        if (const auto it = j.find("ground_motion_sha256"); it != j.end() && it->is_string()) {
            out.ground_motion_sha256 = it->get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Data, std::string("dataset metadata: ") + e.what());
    }

    std::set<std::size_t> seen;
    for (const auto* list : {&out.train, &out.test}) {
        for (std::size_t idx : *list) {
            if (idx >= out.records.size() || !seen.insert(idx).second) {
                fail(ErrorKind::Data, "dataset integrity: split index " + std::to_string(idx) +
                                          " is out of range or duplicated");
            }
        }
    }
    if (seen.size() != out.records.size()) {
        fail(ErrorKind::Data, "dataset integrity: split does not cover every record");
    }
    return out;
}

std::filesystem::path meta_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p += ".meta.json";
    return p;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& csv_path, const CommentLines& comments,
                  const nlohmann::json& extra_meta) {
    std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
    if (!csv) fail(ErrorKind::Data, "cannot write " + csv_path.string());
    write_dataset_csv(dataset, csv, comments);
    std::ofstream meta(meta_path(csv_path), std::ios::binary | std::ios::trunc);
    if (!meta) fail(ErrorKind::Data, "cannot write " + meta_path(csv_path).string());
    write_dataset_meta(dataset, meta, extra_meta);
}

Dataset load_dataset(const std::filesystem::path& csv_path) {
    std::ifstream csv(csv_path, std::ios::binary);
    if (!csv) fail(ErrorKind::Data, "cannot open dataset " + csv_path.string());
    const auto sidecar = meta_path(csv_path);
    if (std::filesystem::exists(sidecar)) {
        std::ifstream meta(sidecar, std::ios::binary);
        return read_dataset(csv, &meta);
    }
    return read_dataset(csv, nullptr);
}

}  // namespace modalforge::dataset
