// The six pipeline commands. Each reads a RunConfig, writes its artifacts
// under the configured output directory and prints a short summary.
#pragma once

#include "config.hpp"

#include "modalforge/error.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <ostream>

namespace modalforge::cli {

struct ValidationReport {
    dataset::ParameterTriple optimal;
    double u_pred = 0.0;
    double u_sim = 0.0;
    double abs_diff = 0.0;
    std::optional<double> rel_diff;  ///< percent; undefined when u_sim is zero
    std::size_t timing_calls = 0;
    double surrogate_call_s = 0.0;   ///< mean latency of one surrogate fitness call
    double direct_call_s = 0.0;      ///< mean latency of one Newmark fitness call
    std::optional<double> speedup;   ///< direct / surrogate
};

[[nodiscard]] ValidationReport make_validation_report(const dataset::ParameterTriple& optimal, double u_pred,
                                                      double u_sim);
[[nodiscard]] nlohmann::json to_json(const ValidationReport& report);

void cmd_simulate(const RunConfig& config, std::ostream& out);
void cmd_sweep(const RunConfig& config, std::ostream& out);
void cmd_train(const RunConfig& config, std::ostream& out);
void cmd_evaluate(const RunConfig& config, std::ostream& out);
void cmd_optimize(const RunConfig& config, std::ostream& out);
ValidationReport cmd_validate(const RunConfig& config, std::ostream& out);

/// Process exit code for an error category: 2 config, 3 data, 4 numerical.
[[nodiscard]] int exit_code(ErrorKind kind) noexcept;

}  // namespace modalforge::cli
