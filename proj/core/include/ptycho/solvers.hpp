#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptycho/forward.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/projectors.hpp"
#include "ptycho/spectral.hpp"
#include "ptycho/types.hpp"

namespace ptycho {

enum class Algorithm { AP, RAAR, SynchroRAAR, SynchroCG };
enum class InitMethod { Random, TPS, GCL };
enum class SyncKernel { K, CurlyK };

struct SolverConfig {
    Algorithm algorithm = Algorithm::AP;
    std::size_t iterations = 100;
    double beta = 0.9;
    InitMethod init = InitMethod::Random;
    SyncKernel sync_kernel = SyncKernel::K;
    double alpha_max = 2.0;
    double line_tol = 1e-6;
    std::uint64_t seed = 0;
    double percentile_keep = 0.8;  // t-PS truncation
    double eig_tol = 1e-8;
    std::size_t eig_max_iter = 5000;
    /// Optional early exit once eps_0 drops to this level (needs psi0).
    std::optional<double> stop_eps0;
};

/// Throws ValidationError on out-of-range fields.
void validate(const SolverConfig& cfg);

std::string to_string(Algorithm a);
std::string to_string(InitMethod m);
std::string to_string(SyncKernel k);
Algorithm parse_algorithm(const std::string& s);
InitMethod parse_init(const std::string& s);
SyncKernel parse_sync_kernel(const std::string& s);

/// P_FQ P_a zeta.
FrameStack ap_step(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const FrameStack& zeta);

/// 2 beta P_FQ P_a zeta + (1 - 2 beta) P_a zeta + beta (zeta - P_FQ zeta).
FrameStack raar_step(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const FrameStack& zeta, double beta);

struct FrameSyncState {
    CVec xi;            // per-frame factors, gauge fixed so that sum xi/|xi| is real positive
    CVec kernel;        // K x K row-major Hermitian kernel
    bool converged = false;
    std::size_t eig_iterations = 0;
};

/// Builds the K x K frame kernel from z = F* P_a zeta and takes its top
/// eigenvector. On a failed eigensolve xi is all ones. A non-empty warm_start
/// seeds the power iteration.
FrameSyncState frame_sync_kernel(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const FrameStack& zeta,
                                 SyncKernel variant, const CVec& warm_start = {});

/// Multiplies frame k by xi_k / |xi_k| (zero entries count as 1).
FrameStack apply_frame_phases(const FrameStack& x, std::span<const cplx> xi);

/// P_FQ diag(B xi/|xi|) x: phases first, then the range projection.
FrameStack synced_range(const RangeProjector& Pfq, const FrameStack& x, std::span<const cplx> xi);

/// RAAR update with P_FQ replaced by synced_range(., xi).
FrameStack raar_step_synced(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const FrameStack& zeta,
                            double beta, std::span<const cplx> xi);

/// One frame-sync solve followed by the synced RAAR update. The state, when
/// given, provides the warm start and receives the new kernel.
FrameStack synchro_raar_step(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const FrameStack& zeta,
                             double beta, SyncKernel variant, FrameSyncState* state = nullptr);

/// argmin over [0, alpha_max] of || |zeta + alpha dir| - a || by 32 equispaced
/// samples and golden-section refinement around the best one.
double line_search_alpha(std::span<const cplx> zeta, std::span<const cplx> dir, std::span<const double> a,
                         double alpha_max = 2.0, double tol = 1e-6);

struct CgState {
    FrameStack zeta;
    FrameStack delta_prev;  // empty before the first step
    FrameStack dir_prev;
    FrameSyncState sync;
    double alpha = 0.0;
    double beta_pr = 0.0;
};

/// Synchronized conjugate-gradient step with PR+ coefficient and line search.
void cg_step(CgState& state, const RangeProjector& Pfq, const AmplitudeProjector& Pa, SyncKernel variant,
             double alpha_max = 2.0, double line_tol = 1e-6);

/// (Q*Q)^+ Q* F* zeta.
ComplexGrid reconstruct_object(const ForwardModel& model, const FrameStack& zeta);

struct SolveResult {
    ComplexGrid psi;
    FrameStack zeta;
    ConvergenceTrace trace;
    std::optional<EigenResult> init_eig;
};

/// Initializes, iterates and records one metric row per iterate. The row of
/// iterate l carries eps_delta = ||zeta^l - zeta^{l+1}|| / ||a|| except for the
/// last row. eps_0 is recorded only when psi0 is supplied.
SolveResult run(const SolverConfig& cfg, const ForwardModel& model, const MeasurementStack& a,
                const ComplexGrid* psi0 = nullptr);

struct StartingPoint {
    FrameStack zeta;
    std::optional<EigenResult> eig;  // absent for the random start
};

/// Starting stack for the configured initializer.
StartingPoint initialize(const SolverConfig& cfg, const ForwardModel& model, const RangeProjector& Pfq,
                      const AmplitudeProjector& Pa);

}  // namespace ptycho
