// Single-degree-of-freedom systems: modal quantities, the Newmark-Beta
// integrator and the closed-form free-vibration response.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace modalforge::dyno {

/// Lumped mass-spring-dashpot governed by m*u'' + c*u' + k*u = p(t). SI units.
class SdofSystem {
public:
    /// Throws ErrorKind::InvalidParameter unless m > 0, k > 0, c >= 0, all finite.
    SdofSystem(double mass, double stiffness, double damping);

    [[nodiscard]] double mass() const noexcept { return m_; }
    [[nodiscard]] double stiffness() const noexcept { return k_; }
    [[nodiscard]] double damping() const noexcept { return c_; }

    friend bool operator==(const SdofSystem&, const SdofSystem&) = default;

private:
    double m_;
    double k_;
    double c_;
};

struct ModalProps {
    double omega_n = 0.0;           ///< natural circular frequency [rad/s]
    double zeta = 0.0;              ///< damping ratio
    std::optional<double> omega_d;  ///< damped frequency [rad/s], present only when zeta < 1
    double t_n = 0.0;               ///< natural period [s]
};

struct InitialConditions {
    double u0 = 0.0;  ///< [m]
    double v0 = 0.0;  ///< [m/s]
};

/// Newmark-Beta family parameters. The defaults give the average-acceleration
/// (trapezoidal) variant, which is unconditionally stable for linear systems.
struct NewmarkParams {
    double gamma = 0.5;
    double beta = 0.25;
    double dt = 0.01;

    /// Throws ErrorKind::InvalidParameter unless dt > 0, beta > 0, 0 <= gamma <= 1.
    void validate() const;
};

/// Sampled response; sample i is at t = i*dt. All four series share one length.
struct TimeHistory {
    double dt = 0.0;
    std::vector<double> u;  ///< displacement [m]
    std::vector<double> v;  ///< velocity [m/s]
    std::vector<double> a;  ///< acceleration [m/s^2]
    std::vector<double> p;  ///< applied force [N]

    [[nodiscard]] std::size_t size() const noexcept { return u.size(); }
    [[nodiscard]] double time(std::size_t i) const noexcept { return static_cast<double>(i) * dt; }
};

[[nodiscard]] ModalProps derive_modal(const SdofSystem& system);

/// c = 2*zeta*sqrt(k*m).
[[nodiscard]] double damping_from_ratio(double mass, double stiffness, double zeta);

/// Integrates the equation of motion over a force series sampled at params.dt.
///
/// The initial acceleration comes from equilibrium at t = 0. Each step solves
/// k_hat * u[i+1] = p_hat[i+1] and then updates velocity and acceleration with
/// the Newmark relations, so the output satisfies m*a + c*v + k*u = p at every
/// sample to round-off. Errors: empty series (InvalidInput), non-finite force
/// (Data, message carries the sample index).
[[nodiscard]] TimeHistory newmark_solve(const SdofSystem& system, const InitialConditions& ic,
                                        std::span<const double> forces, const NewmarkParams& params);

/// Closed-form underdamped free vibration, n samples at spacing dt. Throws
/// ErrorKind::UnsupportedRegime when zeta >= 1.
[[nodiscard]] TimeHistory analytic_free_vibration(const SdofSystem& system, const InitialConditions& ic,
                                                  double dt, std::size_t n);

/// max_i |u_i|. Throws ErrorKind::InvalidInput on an empty history.
[[nodiscard]] double max_abs_displacement(const TimeHistory& history);

/// Total acceleration of the mass under base excitation: relative + ground.
[[nodiscard]] std::vector<double> absolute_acceleration(const TimeHistory& history,
                                                        std::span<const double> ground_accel);

}  // namespace modalforge::dyno
