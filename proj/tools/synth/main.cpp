// Writes a deterministic filtered-noise accelerogram in the ground-motion
// text format. Used to build the bundled fixture when no recorded motion is
// available.
#include "modalforge/excitation.hpp"
#include "modalforge/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    using namespace modalforge;
    excitation::SyntheticMotionSpec spec;
    std::string out_path;

    CLI::App app{"Synthesize a stationary-filtered, enveloped ground acceleration record", "modal-forge-synth"};
    app.add_option("--out", out_path, "Output file")->required();
    app.add_option("--dt", spec.dt, "Sampling interval [s]")->capture_default_str();
    app.add_option("--duration", spec.duration, "Record length [s]")->capture_default_str();
    app.add_option("--pga", spec.pga, "Peak ground acceleration [m/s^2]")->capture_default_str();
    app.add_option("--ground-omega", spec.ground_omega, "Soil filter frequency [rad/s]")->capture_default_str();
    app.add_option("--ground-zeta", spec.ground_zeta, "Soil filter damping")->capture_default_str();
    app.add_option("--seed", spec.seed, "Noise seed")->capture_default_str();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const auto record = excitation::synthesize_ground_motion(spec);
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            std::cerr << "cannot write " << out_path << '\n';
            return 3;
        }
        excitation::write_ground_motion(record, out);
        std::cout << record.accel.size() << " samples at dt=" << record.dt << " s\n";
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    return 0;
}
