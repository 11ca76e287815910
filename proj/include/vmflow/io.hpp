#pragma once

#include "vmflow/diagnostics.hpp"
#include "vmflow/problems.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace vmflow {

/* Trajectory CSV: header `t,u_0,...,u_{d-1},residual[,objective]`, one row
 * per recorded sample, floats printed with 17 significant digits so that a
 * read-back reproduces every double bit-exactly. */
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
std::string trajectory_csv(const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);

/// Run configuration parsed from a schemaVersion-1 JSON document. Exactly
/// one of builtinName / inlineSpec is set.
struct RunConfig {
    std::optional<std::string> builtinName;
    std::optional<FlowSpec> inlineSpec;
    std::optional<Vector> u0;
    std::optional<Vector> x0; // compare command only
    std::optional<IntegratorConfig::Method> method;
    std::optional<double> h, relTol, absTol, tEnd;
    std::optional<int> recordStride;
    std::string trajectoryPath = "trajectory.csv";
    std::string reportPath = "report.txt";
};

/// Parse a config document. Errors carry the offending field's path.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// The config resolved against the builtin registry: a concrete spec,
/// start point and integrator settings, plus ground truth when the
/// problem is a builtin.
struct ResolvedRun {
    std::string problemName;
    FlowSpec spec;
    Vector u0;
    IntegratorConfig cfg;
    std::optional<Vector> solution;
    std::optional<Vector> flowFixedPoint;
};

ResolvedRun resolve_run(const RunConfig& rc);

/// Plain-text run report (the same rendering the CLI writes to disk).
std::string render_run_report(const ResolvedRun& run, const Trajectory& traj,
                              const ConvergenceReport& rep);

} // namespace vmflow
