#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "ptycho/config.hpp"
#include "ptycho/core.hpp"
#include "ptycho/lens.hpp"
#include "ptycho/solvers.hpp"

namespace ptycho {

/// File names used inside simulation and solve directories.
inline constexpr const char* kLensFile = "lens.ptyc";
inline constexpr const char* kMeasurementFile = "measurements.ptyc";
inline constexpr const char* kObjectFile = "psi0.ptyc";
inline constexpr const char* kPositionFile = "positions.ptyc";
inline constexpr const char* kSimulateReport = "simulate_report.txt";
inline constexpr const char* kReconstructionFile = "psi_hat.ptyc";
inline constexpr const char* kTraceFile = "trace.csv";

struct LensOutcome {
    ComplexGrid omega;
    std::optional<BlrReport> report;  // BLR only
};

LensOutcome build_lens(const LensSpec& spec);

/// Writes the lens and prints the BLR design report.
void cli_lens(const LensSpec& spec, const std::filesystem::path& out, std::ostream& log);

struct Simulation {
    IlluminationScheme scheme;
    ComplexGrid omega;
    ComplexGrid psi0;
    MeasurementStack a;
    double eps_sigma = 0.0;
    std::string report;
};

/// Builds scheme, lens and object and measures. Scheme failures surface as
/// ValidationError carrying the coverage diagnostics.
Simulation simulate(const ExperimentConfig& cfg);

/// simulate() followed by writing the four arrays and the text report into
/// cfg.output_dir.
Simulation cli_simulate(const ExperimentConfig& cfg, std::ostream& log);

/// Header `iter,eps_a,eps_fq,eps_afq,eps_0,eps_delta` preceded by a comment
/// line echoing the solver settings; missing values are empty cells.
std::string format_trace_csv(const ConvergenceTrace& trace, const SolverConfig& cfg);

/// Loads lens, positions, measurements (and psi0 when present) from
/// input_dir, checks them against the config, solves and writes psi_hat and
/// the trace into cfg.output_dir.
SolveResult cli_solve(const ExperimentConfig& cfg, const std::filesystem::path& input_dir, std::ostream& log);

}  // namespace ptycho
