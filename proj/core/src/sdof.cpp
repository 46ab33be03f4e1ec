#include "modalforge/sdof.hpp"

#include "modalforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace modalforge::dyno {

SdofSystem::SdofSystem(double mass, double stiffness, double damping)
    : m_(mass), k_(stiffness), c_(damping) {
    if (!std::isfinite(mass) || !std::isfinite(stiffness) || !std::isfinite(damping)) {
        fail(ErrorKind::InvalidParameter, "SDOF parameters must be finite");
    }
    if (mass <= 0.0) fail(ErrorKind::InvalidParameter, "mass must be positive, got " + std::to_string(mass));
    if (stiffness <= 0.0) {
        fail(ErrorKind::InvalidParameter, "stiffness must be positive, got " + std::to_string(stiffness));
    }
    if (damping < 0.0) {
        fail(ErrorKind::InvalidParameter, "damping must be non-negative, got " + std::to_string(damping));
    }
}

void NewmarkParams::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorKind::InvalidParameter, "time step must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorKind::InvalidParameter, "beta must be positive");
    if (!(gamma >= 0.0 && gamma <= 1.0)) fail(ErrorKind::InvalidParameter, "gamma must lie in [0, 1]");
}

ModalProps derive_modal(const SdofSystem& system) {
    const double m = system.mass();
    const double k = system.stiffness();
    ModalProps props;
    props.omega_n = std::sqrt(k / m);
    props.zeta = system.damping() / (2.0 * std::sqrt(k * m));
    props.t_n = 2.0 * std::numbers::pi / props.omega_n;
    if (props.zeta < 1.0) props.omega_d = props.omega_n * std::sqrt(1.0 - props.zeta * props.zeta);
    return props;
}

double damping_from_ratio(double mass, double stiffness, double zeta) {
    if (!(mass > 0.0) || !(stiffness > 0.0)) {
        fail(ErrorKind::InvalidParameter, "mass and stiffness must be positive");
    }
    if (!(zeta >= 0.0) || !std::isfinite(zeta)) fail(ErrorKind::InvalidParameter, "damping ratio must be >= 0");
    return 2.0 * zeta * std::sqrt(stiffness * mass);
}

TimeHistory newmark_solve(const SdofSystem& system, const InitialConditions& ic, std::span<const double> forces,
                          const NewmarkParams& params) {
    params.validate();
    if (forces.empty()) fail(ErrorKind::InvalidInput, "force series is empty");
    if (!std::isfinite(ic.u0) || !std::isfinite(ic.v0)) {
        fail(ErrorKind::InvalidParameter, "initial conditions must be finite");
    }
    for (std::size_t i = 0; i < forces.size(); ++i) {
        if (!std::isfinite(forces[i])) fail(ErrorKind::Data, "non-finite force at sample " + std::to_string(i));
    }

    const double m = system.mass();
    const double k = system.stiffness();
    const double c = system.damping();
    const double dt = params.dt;
    const double gamma = params.gamma;
    const double beta = params.beta;

    const std::size_t n = forces.size();
    TimeHistory out;
    out.dt = dt;
    out.p.assign(forces.begin(), forces.end());
    out.u.resize(n);
    out.v.resize(n);
    out.a.resize(n);

    out.u[0] = ic.u0;
    out.v[0] = ic.v0;
    out.a[0] = (forces[0] - c * ic.v0 - k * ic.u0) / m;

    // Incremental coefficients of the Newmark scheme.
    const double a1 = 1.0 / (beta * dt * dt);
    const double a2 = 1.0 / (beta * dt);
    const double a3 = 1.0 / (2.0 * beta) - 1.0;
    const double b1 = gamma / (beta * dt);
    const double b2 = gamma / beta - 1.0;
    const double b3 = dt * (gamma / (2.0 * beta) - 1.0);
    const double k_hat = k + b1 * c + a1 * m;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double ui = out.u[i];
        const double vi = out.v[i];
        const double ai = out.a[i];
        const double p_hat = forces[i + 1] + m * (a1 * ui + a2 * vi + a3 * ai) + c * (b1 * ui + b2 * vi + b3 * ai);
        const double du = p_hat / k_hat - ui;
        out.u[i + 1] = ui + du;
        out.v[i + 1] = b1 * du - b2 * vi - b3 * ai;
        out.a[i + 1] = a1 * du - a2 * vi - a3 * ai;
    }
    return out;
}

TimeHistory analytic_free_vibration(const SdofSystem& system, const InitialConditions& ic, double dt,
                                    std::size_t n) {
    if (!(dt > 0.0)) fail(ErrorKind::InvalidParameter, "time step must be positive");
    if (n == 0) fail(ErrorKind::InvalidInput, "sample count must be at least 1");
    const ModalProps modal = derive_modal(system);
    if (!modal.omega_d) {
        fail(ErrorKind::UnsupportedRegime,
             "closed-form free vibration requires zeta < 1, got zeta = " + std::to_string(modal.zeta));
    }
    const double wn = modal.omega_n;
    const double wd = *modal.omega_d;
    const double decay = modal.zeta * wn;
    const double a_cos = ic.u0;
    const double a_sin = (ic.v0 + decay * ic.u0) / wd;

    TimeHistory out;
    out.dt = dt;
    out.u.resize(n);
    out.v.resize(n);
    out.a.resize(n);
    out.p.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double env = std::exp(-decay * t);
        const double cs = std::cos(wd * t);
        const double sn = std::sin(wd * t);
        const double osc = a_cos * cs + a_sin * sn;
        const double dosc = -a_cos * wd * sn + a_sin * wd * cs;
        const double ddosc = -wd * wd * osc;
        out.u[i] = env * osc;
        out.v[i] = env * (dosc - decay * osc);
        out.a[i] = env * (ddosc - 2.0 * decay * dosc + decay * decay * osc);
    }
    return out;
}

double max_abs_displacement(const TimeHistory& history) {
    if (history.u.empty()) fail(ErrorKind::InvalidInput, "time history is empty");
    double peak = 0.0;
    for (double u : history.u) peak = std::max(peak, std::abs(u));
    return peak;
}

std::vector<double> absolute_acceleration(const TimeHistory& history, std::span<const double> ground_accel) {
    if (history.a.size() != ground_accel.size()) {
        fail(ErrorKind::InvalidInput, "acceleration series lengths differ: " + std::to_string(history.a.size()) +
                                          " vs " + std::to_string(ground_accel.size()));
    }
    std::vector<double> out(history.a.size());
    std::transform(history.a.begin(), history.a.end(), ground_accel.begin(), out.begin(), std::plus<>{});
    return out;
}

}  // namespace modalforge::dyno
