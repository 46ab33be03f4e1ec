// Forcing series for the SDOF solver: recorded ground motions, their text
// format, resampling, and the analytic load shapes.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace modalforge::excitation {

/// Uniformly sampled ground acceleration [m/s^2].
struct GroundMotionRecord {
    double dt = 0.0;
    std::vector<double> accel;
    std::string label;

    [[nodiscard]] double duration() const noexcept {
        return accel.empty() ? 0.0 : static_cast<double>(accel.size() - 1) * dt;
    }
    void validate() const;

    friend bool operator==(const GroundMotionRecord&, const GroundMotionRecord&) = default;
};

struct Free {
    friend bool operator==(const Free&, const Free&) = default;
};

/// p(t) = amplitude * sin(omega * t)
struct Sine {
    double amplitude = 0.0;
    double omega = 0.0;
    friend bool operator==(const Sine&, const Sine&) = default;
};

/// p(t) = p0 * sin(pi * t / td) for t <= td, zero afterwards.
struct HalfSinePulse {
    double p0 = 0.0;
    double td = 0.0;
    friend bool operator==(const HalfSinePulse&, const HalfSinePulse&) = default;
};

/// Base excitation: effective force -m * scale * accel.
struct BaseRecord {
    GroundMotionRecord record;
    double scale = 1.0;
    friend bool operator==(const BaseRecord&, const BaseRecord&) = default;
};

using ExcitationSpec = std::variant<Free, Sine, HalfSinePulse, BaseRecord>;

/// Throws ErrorKind::InvalidParameter on non-finite amplitudes, td <= 0, or an invalid record.
void validate(const ExcitationSpec& spec);

/// Short identifier: "free", "sine", "half_sine", "base_record".
[[nodiscard]] std::string_view kind_name(const ExcitationSpec& spec);

/// Parses the ground-motion text format:
///
///     # optional comment lines
///     dt=0.02
///     0.0
///     0.1
///
/// LF or CRLF line endings, blank lines skipped. Errors are ErrorKind::Data and
/// cite the 1-based line number.
[[nodiscard]] GroundMotionRecord parse_ground_motion(std::istream& in, std::string label = {});
[[nodiscard]] GroundMotionRecord parse_ground_motion(std::string_view text, std::string label = {});
[[nodiscard]] GroundMotionRecord load_ground_motion(const std::filesystem::path& path);

void write_ground_motion(const GroundMotionRecord& record, std::ostream& out);

/// Forcing series of length n at spacing dt for a system of mass m. Base
/// records are zero-padded past their end. A record whose dt differs from the
/// solver dt is a configuration error; resample it first.
[[nodiscard]] std::vector<double> synthesize_force(const ExcitationSpec& spec, double mass, double dt,
                                                   std::size_t n);

/// Linear interpolation onto t_j = j*new_dt for every t_j within the original
/// duration. The first sample is kept exactly, and so is the last one whenever
/// the new grid lands on it.
[[nodiscard]] GroundMotionRecord resample_record(const GroundMotionRecord& record, double new_dt);

/// Stochastic accelerogram: white noise shaped by a Kanai-Tajimi filter and a
/// Clough-Penzien high-pass, modulated by a trapezoidal-exponential envelope
/// and scaled to a target peak ground acceleration.
struct SyntheticMotionSpec {
    double dt = 0.02;
    double duration = 30.0;
    double pga = 3.13;            ///< [m/s^2]
    double ground_omega = 15.6;   ///< Kanai-Tajimi soil frequency [rad/s]
    double ground_zeta = 0.6;
    double highpass_omega = 1.5;  ///< Clough-Penzien corner [rad/s]
    double highpass_zeta = 0.6;
    double rise_time = 2.0;       ///< envelope ramp-up end [s]
    double strong_end = 10.0;     ///< strong-motion plateau end [s]
    double decay_rate = 0.25;     ///< envelope decay after the plateau [1/s]
    std::uint64_t seed = 1940;
};

[[nodiscard]] GroundMotionRecord synthesize_ground_motion(const SyntheticMotionSpec& spec);

}  // namespace modalforge::excitation
