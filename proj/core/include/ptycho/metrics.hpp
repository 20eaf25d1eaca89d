#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ptycho/projectors.hpp"
#include "ptycho/types.hpp"

namespace ptycho {

struct PhaseAlignment {
    double t = 0.0;     // minimizer of ||u - exp(i t) v||
    double dist = 0.0;  // the minimum
};

/// Closed-form alignment through c = sum conj(u) v; t = 0 when c = 0.
/// The distance is evaluated as the norm of the aligned difference, which
/// keeps full relative accuracy near zero.
PhaseAlignment global_phase_align(std::span<const cplx> u, std::span<const cplx> v);

struct MetricRow {
    std::size_t iter = 0;
    double eps_a = 0.0;
    double eps_fq = 0.0;
    double eps_afq = 0.0;
    std::optional<double> eps_0;
    std::optional<double> eps_delta;
};

struct ConvergenceTrace {
    std::vector<MetricRow> rows;
    double norm_a = 0.0;
};

/// The five monitoring quantities, all normalized by ||a||.
MetricRow compute_metrics(const FrameStack& zeta, const FrameStack* zeta_next, const AmplitudeProjector& Pa,
                          const RangeProjector& Pfq, const FrameStack* reference);

}  // namespace ptycho
