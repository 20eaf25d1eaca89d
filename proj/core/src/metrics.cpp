#include "ptycho/metrics.hpp"

#include <cmath>

#include "ptycho/vecops.hpp"

namespace ptycho {

PhaseAlignment global_phase_align(std::span<const cplx> u, std::span<const cplx> v) {
    if (u.size() != v.size()) throw ValidationError("global_phase_align: length mismatch");
    const cplx c = inner(u, v);
    PhaseAlignment out;
    out.t = std::abs(c) > 0.0 ? -std::arg(c) : 0.0;
    const cplx rot = std::polar(1.0, out.t);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += std::norm(u[k] - rot * v[k]);
    out.dist = std::sqrt(s);
    return out;
}

MetricRow compute_metrics(const FrameStack& zeta, const FrameStack* zeta_next, const AmplitudeProjector& Pa,
                          const RangeProjector& Pfq, const FrameStack* reference) {
    const double na = Pa.norm_a();
    if (!(na > 0.0)) throw ValidationError("compute_metrics: ||a|| must be positive");
    const FrameStack pa = Pa.apply(zeta);
    const FrameStack pf = Pfq.apply(zeta);
    MetricRow row;
    row.eps_a = distance(zeta.data, pa.data) / na;
    row.eps_fq = distance(zeta.data, pf.data) / na;
    row.eps_afq = distance(pa.data, pf.data) / na;
    if (reference) row.eps_0 = global_phase_align(zeta.data, reference->data).dist / na;
    if (zeta_next) row.eps_delta = distance(zeta.data, zeta_next->data) / na;
    return row;
}

}  // namespace ptycho
