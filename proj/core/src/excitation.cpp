#include "modalforge/excitation.hpp"

#include "modalforge/error.hpp"
#include "modalforge/sdof.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace modalforge::excitation {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Accepts ASCII '-' and the Unicode minus sign U+2212 as a leading sign.
bool parse_double(std::string_view token, double& value) {
    std::string normalized;
    constexpr std::string_view unicode_minus = "\xE2\x88\x92";
    if (token.starts_with(unicode_minus)) {
        normalized = "-";
        normalized.append(token.substr(unicode_minus.size()));
        token = normalized;
    }
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    return ec == std::errc{} && ptr == end;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
    fail(ErrorKind::Data, "ground motion line " + std::to_string(line) + ": " + what);
}

}  // namespace

void GroundMotionRecord::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorKind::InvalidParameter, "record dt must be positive");
    if (accel.empty()) fail(ErrorKind::InvalidParameter, "record has no samples");
    for (std::size_t i = 0; i < accel.size(); ++i) {
        if (!std::isfinite(accel[i])) {
            fail(ErrorKind::Data, "non-finite record sample at index " + std::to_string(i));
        }
    }
}

void validate(const ExcitationSpec& spec) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Sine>) {
                if (!std::isfinite(s.amplitude) || !std::isfinite(s.omega)) {
                    fail(ErrorKind::InvalidParameter, "sine amplitude and omega must be finite");
                }
            } else if constexpr (std::is_same_v<T, HalfSinePulse>) {
                if (!std::isfinite(s.p0)) fail(ErrorKind::InvalidParameter, "pulse amplitude must be finite");
                if (!(s.td > 0.0) || !std::isfinite(s.td)) {
                    fail(ErrorKind::InvalidParameter, "pulse duration must be positive");
                }
            } else if constexpr (std::is_same_v<T, BaseRecord>) {
                if (!std::isfinite(s.scale)) fail(ErrorKind::InvalidParameter, "record scale must be finite");
                s.record.validate();
            }
        },
        spec);
}

std::string_view kind_name(const ExcitationSpec& spec) {
    static constexpr std::string_view names[] = {"free", "sine", "half_sine", "base_record"};
    return names[spec.index()];
}

GroundMotionRecord parse_ground_motion(std::istream& in, std::string label) {
    GroundMotionRecord record;
    record.label = std::move(label);
    bool have_header = false;
    bool any_content = false;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        any_content = true;
        if (line.front() == '#') continue;
        if (!have_header) {
            if (!line.starts_with("dt=")) parse_error(line_no, "expected header 'dt=<seconds>'");
            double dt = 0.0;
            if (!parse_double(trim(line.substr(3)), dt)) parse_error(line_no, "dt value is not a number");
            if (!(dt > 0.0) || !std::isfinite(dt)) parse_error(line_no, "dt must be positive");
            record.dt = dt;
            have_header = true;
            continue;
        }
        double value = 0.0;
        if (!parse_double(line, value)) parse_error(line_no, "non-numeric token '" + std::string(line) + "'");
        if (!std::isfinite(value)) parse_error(line_no, "non-finite acceleration value");
        record.accel.push_back(value);
    }
    if (!any_content) fail(ErrorKind::Data, "ground motion input is empty");
    if (!have_header) fail(ErrorKind::Data, "ground motion input has no 'dt=' header");
    if (record.accel.empty()) fail(ErrorKind::Data, "ground motion record has a header but no samples");
    return record;
}

GroundMotionRecord parse_ground_motion(std::string_view text, std::string label) {
    std::istringstream in{std::string(text)};
    return parse_ground_motion(in, std::move(label));
}

GroundMotionRecord load_ground_motion(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Data, "cannot open ground motion file " + path.string());
    return parse_ground_motion(in, path.filename().string());
}

void write_ground_motion(const GroundMotionRecord& record, std::ostream& out) {
    if (!record.label.empty()) out << "# " << record.label << '\n';
    char buf[64];
    auto emit = [&](double x) {
        const auto res = std::to_chars(buf, buf + sizeof buf, x);
        out.write(buf, res.ptr - buf);
    };
    out << "dt=";
    emit(record.dt);
    out << '\n';
    for (double a : record.accel) {
        emit(a);
        out << '\n';
    }
}

std::vector<double> synthesize_force(const ExcitationSpec& spec, double mass, double dt, std::size_t n) {
    if (!(dt > 0.0)) fail(ErrorKind::InvalidParameter, "time step must be positive");
    if (n == 0) fail(ErrorKind::InvalidInput, "sample count must be at least 1");
    validate(spec);
    std::vector<double> force(n, 0.0);
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Sine>) {
                for (std::size_t i = 0; i < n; ++i) {
                    force[i] = s.amplitude * std::sin(s.omega * static_cast<double>(i) * dt);
                }
            } else if constexpr (std::is_same_v<T, HalfSinePulse>) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double t = static_cast<double>(i) * dt;
                    if (t > s.td) break;
                    force[i] = s.p0 * std::sin(std::numbers::pi * t / s.td);
                }
            } else if constexpr (std::is_same_v<T, BaseRecord>) {
                if (std::abs(s.record.dt - dt) > 1e-12 * std::max(dt, s.record.dt)) {
                    fail(ErrorKind::Config, "record dt " + std::to_string(s.record.dt) +
                                                " does not match solver dt " + std::to_string(dt) +
                                                "; resample the record first");
                }
                const std::size_t len = std::min(n, s.record.accel.size());
                for (std::size_t i = 0; i < len; ++i) force[i] = -mass * s.scale * s.record.accel[i];
            }
        },
        spec);
    return force;
}

GroundMotionRecord resample_record(const GroundMotionRecord& record, double new_dt) {
    record.validate();
    if (!(new_dt > 0.0) || !std::isfinite(new_dt)) fail(ErrorKind::InvalidParameter, "new dt must be positive");
    if (new_dt == record.dt) return record;

    const double duration = record.duration();
    const double steps = duration / new_dt;
    // Snap to the end point when the grid lands on it up to round-off.
    auto count = static_cast<std::size_t>(std::floor(steps + 1e-9)) + 1;
    const bool hits_end = std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps);

    GroundMotionRecord out;
    out.dt = new_dt;
    out.label = record.label;
    out.accel.resize(count);
    const std::size_t last = record.accel.size() - 1;
    for (std::size_t j = 0; j < count; ++j) {
        const double pos = static_cast<double>(j) * new_dt / record.dt;
        auto lo = static_cast<std::size_t>(std::floor(pos));
        if (lo >= last) {
            out.accel[j] = record.accel[last];
            continue;
        }
        const double frac = pos - static_cast<double>(lo);
        out.accel[j] = record.accel[lo] + frac * (record.accel[lo + 1] - record.accel[lo]);
    }
    out.accel.front() = record.accel.front();
    if (hits_end) out.accel.back() = record.accel.back();
    return out;
}

GroundMotionRecord synthesize_ground_motion(const SyntheticMotionSpec& spec) {
    if (!(spec.dt > 0.0) || !(spec.duration > spec.dt)) {
        fail(ErrorKind::InvalidParameter, "synthetic motion needs dt > 0 and duration > dt");
    }
    if (!(spec.pga > 0.0)) fail(ErrorKind::InvalidParameter, "synthetic motion pga must be positive");
    const auto n = static_cast<std::size_t>(std::llround(spec.duration / spec.dt)) + 1;

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> noise(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * spec.dt;
        double env = 1.0;
        if (t < spec.rise_time) {
            env = (t / spec.rise_time) * (t / spec.rise_time);
        } else if (t > spec.strong_end) {
            env = std::exp(-spec.decay_rate * (t - spec.strong_end));
        }
        noise[i] = env * normal(rng);
    }

    const dyno::NewmarkParams params{.gamma = 0.5, .beta = 0.25, .dt = spec.dt};
    auto unit_filter = [](double omega, double zeta) {
        return dyno::SdofSystem(1.0, omega * omega, 2.0 * zeta * omega);
    };

    // Kanai-Tajimi stage: absolute acceleration of the soil column.
    std::vector<double> drive(n);
    std::transform(noise.begin(), noise.end(), drive.begin(), [](double w) { return -w; });
    const auto soil = dyno::newmark_solve(unit_filter(spec.ground_omega, spec.ground_zeta), {}, drive, params);
    std::vector<double> filtered(n);
    for (std::size_t i = 0; i < n; ++i) filtered[i] = soil.a[i] + noise[i];

    // Clough-Penzien stage: relative acceleration of a low-frequency oscillator
    // removes the long-period content that would make ground displacement drift.
    std::transform(filtered.begin(), filtered.end(), drive.begin(), [](double a) { return -a; });
    const auto highpass =
        dyno::newmark_solve(unit_filter(spec.highpass_omega, spec.highpass_zeta), {}, drive, params);

    double peak = 0.0;
    for (double a : highpass.a) peak = std::max(peak, std::abs(a));
    GroundMotionRecord record;
    record.dt = spec.dt;
    record.label = "synthetic Kanai-Tajimi/Clough-Penzien accelerogram, seed " + std::to_string(spec.seed);
    record.accel.resize(n);
    for (std::size_t i = 0; i < n; ++i) record.accel[i] = highpass.a[i] * (spec.pga / peak);
    return record;
}

}  // namespace modalforge::excitation
