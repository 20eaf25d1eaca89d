#include "ptycho/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "ptycho/fft.hpp"
#include "ptycho/vecops.hpp"

namespace ptycho {

void validate(const SolverConfig& cfg) {
    if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) throw ValidationError(fmt::format("beta {} not in (0, 1)", cfg.beta));
    if (!(cfg.alpha_max > 0.0)) throw ValidationError("alpha_max must be positive");
    if (!(cfg.line_tol > 0.0)) throw ValidationError("line search tolerance must be positive");
    if (!(cfg.percentile_keep > 0.0 && cfg.percentile_keep <= 1.0))
        throw ValidationError(fmt::format("percentile_keep {} not in (0, 1]", cfg.percentile_keep));
    if (cfg.eig_max_iter == 0) throw ValidationError("eig_max_iter must be positive");
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::AP: return "ap";
        case Algorithm::RAAR: return "raar";
        case Algorithm::SynchroRAAR: return "synchro-raar";
        case Algorithm::SynchroCG: return "synchro-cg";
    }
    return "?";
}

std::string to_string(InitMethod m) {
    switch (m) {
        case InitMethod::Random: return "random";
        case InitMethod::TPS: return "tps";
        case InitMethod::GCL: return "gcl";
    }
    return "?";
}

std::string to_string(SyncKernel k) { return k == SyncKernel::K ? "K" : "curlyK"; }

Algorithm parse_algorithm(const std::string& s) {
    for (Algorithm a : {Algorithm::AP, Algorithm::RAAR, Algorithm::SynchroRAAR, Algorithm::SynchroCG})
        if (s == to_string(a)) return a;
    throw ValidationError(fmt::format("unknown algorithm '{}' (ap, raar, synchro-raar, synchro-cg)", s));
}

InitMethod parse_init(const std::string& s) {
    for (InitMethod m : {InitMethod::Random, InitMethod::TPS, InitMethod::GCL})
        if (s == to_string(m)) return m;
    throw ValidationError(fmt::format("unknown init method '{}' (random, tps, gcl)", s));
}

SyncKernel parse_sync_kernel(const std::string& s) {
    if (s == "K") return SyncKernel::K;
    if (s == "curlyK") return SyncKernel::CurlyK;
    throw ValidationError(fmt::format("unknown sync kernel '{}' (K, curlyK)", s));
}

FrameStack ap_step(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const FrameStack& zeta) {
    return Pfq.apply(Pa.apply(zeta));
}

namespace {

// 2 beta P'(P_a z) + (1 - 2 beta) P_a z + beta (z - P' z) for a given range map P'.
template <class RangeMap>
FrameStack raar_combine(const RangeMap& range, const AmplitudeProjector& Pa, const FrameStack& zeta, double beta) {
    const FrameStack pa = Pa.apply(zeta);
    const FrameStack ppa = range(pa);
    const FrameStack pz = range(zeta);
    FrameStack out(zeta.frames, zeta.side);
    for (std::size_t p = 0; p < out.size(); ++p)
        out.data[p] = 2.0 * beta * ppa.data[p] + (1.0 - 2.0 * beta) * pa.data[p] + beta * (zeta.data[p] - pz.data[p]);
    return out;
}

}  // namespace

FrameStack raar_step(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const FrameStack& zeta, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw ValidationError(fmt::format("raar_step: beta {} not in (0, 1)", beta));
    return raar_combine([&](const FrameStack& x) { return Pfq.apply(x); }, Pa, zeta, beta);
}

FrameSyncState frame_sync_kernel(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const FrameStack& zeta,
                                 SyncKernel variant, const CVec& warm_start) {
    const ForwardModel& model = Pfq.model();
    const std::size_t K = model.frames(), m = model.m(), L = m * m;
    if (K < 2) throw ValidationError("frame_sync_kernel: needs at least two frames");

    // g_i = Q_i^* z_i on window coordinates, z = F* P_a zeta.
    FrameStack g = Pa.apply(zeta);
    dft2_frames(g, Direction::Inverse);
    RVec scale(K, 0.0);
    const MeasurementStack& a = Pa.amplitudes();
    const RealGrid& qtq = model.qtq();
    for (std::size_t i = 0; i < K; ++i) {
        auto gi = g.frame(i);
        const ComplexGrid& p = model.probe(i);
        const WindowAnchor& w = model.anchor(i);
        double weighted = 0.0;
        for (std::size_t r = 0; r < L; ++r) {
            weighted += qtq(w.row + r / m, w.col + r % m) * std::norm(gi[r]);
            gi[r] *= std::conj(p.data[r]);
        }
        const double nrm = variant == SyncKernel::K ? norm(a.frame(i)) : std::sqrt(weighted);
        scale[i] = nrm > 0.0 ? 1.0 / nrm : 0.0;
    }

    FrameSyncState st;
    st.kernel.assign(K * K, cplx{0.0, 0.0});
    const RealGrid& pinv = model.qtq_pinv();
    const auto mm = static_cast<std::ptrdiff_t>(m);
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = i; j < K; ++j) {
            const FrameOffset d = frame_offset(model, i, j);
            if (std::abs(d.dr) >= mm || std::abs(d.dc) >= mm) continue;
            const WindowAnchor& wi = model.anchor(i);
            auto gi = g.frame(i);
            auto gj = g.frame(j);
            cplx acc{0.0, 0.0};
            for (std::ptrdiff_t s = std::max<std::ptrdiff_t>(0, -d.dr); s < std::min(mm, mm - d.dr); ++s)
                for (std::ptrdiff_t t = std::max<std::ptrdiff_t>(0, -d.dc); t < std::min(mm, mm - d.dc); ++t) {
                    const auto us = static_cast<std::size_t>(s), ut = static_cast<std::size_t>(t);
                    const double wgt =
                        variant == SyncKernel::K ? pinv(wi.row + us, wi.col + ut) : 1.0;
                    acc += std::conj(gi[us * m + ut]) * gj[static_cast<std::size_t>(s + d.dr) * m +
                                                            static_cast<std::size_t>(t + d.dc)] * wgt;
                }
            acc *= scale[i] * scale[j];
            st.kernel[i * K + j] = acc;
            st.kernel[j * K + i] = std::conj(acc);
        }
        st.kernel[i * K + i] = st.kernel[i * K + i].real();
    }

    // The kernel is Hermitian, so the row-major buffer read column-major is its
    // conjugate; conjugate back before use.
    const auto kk = static_cast<Eigen::Index>(K);
    const Eigen::MatrixXcd kernel = Eigen::Map<const Eigen::MatrixXcd>(st.kernel.data(), kk, kk).conjugate();
    PowerOptions opt;
    opt.start = warm_start.size() == K ? warm_start : CVec(K, cplx{1.0, 0.0});
    const EigenResult eig = power_top_eigpair(
        [&](std::span<const cplx> x, std::span<cplx> y) {
            Eigen::Map<Eigen::VectorXcd>(y.data(), kk) = kernel * Eigen::Map<const Eigen::VectorXcd>(x.data(), kk);
        },
        K, opt);
    st.converged = eig.converged;
    st.eig_iterations = eig.iterations;
    if (!eig.converged) {
        st.xi.assign(K, cplx{1.0, 0.0});
        return st;
    }
    st.xi = eig.vector;
    cplx total{0.0, 0.0};
    for (const cplx& x : st.xi)
        if (std::abs(x) > 0.0) total += x / std::abs(x);
    if (std::abs(total) > 0.0) {
        const cplx fix = std::conj(total) / std::abs(total);
        for (cplx& x : st.xi) x *= fix;
    }
    return st;
}

FrameStack apply_frame_phases(const FrameStack& x, std::span<const cplx> xi) {
    if (xi.size() != x.frames) throw ValidationError("apply_frame_phases: one factor per frame required");
    FrameStack out = x;
    for (std::size_t k = 0; k < x.frames; ++k) {
        const double r = std::abs(xi[k]);
        if (r == 0.0) continue;
        const cplx u = xi[k] / r;
        for (cplx& v : out.frame(k)) v *= u;
    }
    return out;
}

FrameStack synced_range(const RangeProjector& Pfq, const FrameStack& x, std::span<const cplx> xi) {
    return Pfq.apply(apply_frame_phases(x, xi));
}

FrameStack raar_step_synced(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const FrameStack& zeta,
                            double beta, std::span<const cplx> xi) {
    if (!(beta > 0.0 && beta < 1.0)) throw ValidationError(fmt::format("raar_step: beta {} not in (0, 1)", beta));
    return raar_combine([&](const FrameStack& x) { return synced_range(Pfq, x, xi); }, Pa, zeta, beta);
}

FrameStack synchro_raar_step(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const FrameStack& zeta,
                             double beta, SyncKernel variant, FrameSyncState* state) {
    const CVec warm = state ? state->xi : CVec{};
    FrameSyncState st = frame_sync_kernel(Pfq, Pa, zeta, variant, warm);
    FrameStack out = raar_step_synced(Pfq, Pa, zeta, beta, st.xi);
    if (state) *state = std::move(st);
    return out;
}

double line_search_alpha(std::span<const cplx> zeta, std::span<const cplx> dir, std::span<const double> a,
                         double alpha_max, double tol) {
    if (!(alpha_max > 0.0)) throw ValidationError("line_search_alpha: alpha_max must be positive");
    if (zeta.size() != dir.size() || zeta.size() != a.size()) throw ValidationError("line_search_alpha: length mismatch");
    if (norm2(dir) == 0.0) return 0.0;
    auto f = [&](double alpha) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double d = std::abs(zeta[k] + alpha * dir[k]) - a[k];
            s += d * d;
        }
        return std::sqrt(s);
    };
    constexpr int kSamples = 32;
    const double h = alpha_max / (kSamples - 1);
    int best = 0;
    double fbest = f(0.0);
    for (int k = 1; k < kSamples; ++k) {
        const double v = f(k * h);
        if (v < fbest) {
            fbest = v;
            best = k;
        }
    }
    double lo = std::max(0.0, (best - 1) * h);
    double hi = std::min(alpha_max, (best + 1) * h);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = f(x2);
        }
    }
    const double mid = 0.5 * (lo + hi);
    return f(mid) <= fbest ? mid : best * h;
}

void cg_step(CgState& s, const RangeProjector& Pfq, const AmplitudeProjector& Pa, SyncKernel variant,
             double alpha_max, double line_tol) {
    s.sync = frame_sync_kernel(Pfq, Pa, s.zeta, variant, s.sync.xi);
    const FrameStack target = synced_range(Pfq, Pa.apply(s.zeta), s.sync.xi);
    FrameStack delta(s.zeta.frames, s.zeta.side);
    for (std::size_t p = 0; p < delta.size(); ++p) delta.data[p] = target.data[p] - s.zeta.data[p];

    s.beta_pr = 0.0;
    const bool have_prev = s.delta_prev.size() == delta.size();
    if (have_prev) {
        const double prev2 = norm2(s.delta_prev.data);
        if (std::sqrt(prev2) >= 1e-14 * Pa.norm_a()) {
            cplx num{0.0, 0.0};
            for (std::size_t p = 0; p < delta.size(); ++p)
                num += std::conj(delta.data[p]) * (delta.data[p] - s.delta_prev.data[p]);
            s.beta_pr = std::max(0.0, num.real() / prev2);
        }
    }
    FrameStack dir = delta;
    if (have_prev && s.beta_pr > 0.0)
        for (std::size_t p = 0; p < dir.size(); ++p) dir.data[p] += s.beta_pr * s.dir_prev.data[p];

    s.alpha = line_search_alpha(s.zeta.data, dir.data, Pa.amplitudes().data, alpha_max, line_tol);
    for (std::size_t p = 0; p < dir.size(); ++p) s.zeta.data[p] += s.alpha * dir.data[p];
    s.delta_prev = std::move(delta);
    s.dir_prev = std::move(dir);
}

ComplexGrid reconstruct_object(const ForwardModel& model, const FrameStack& zeta) {
    return RangeProjector(model).object_of(zeta);
}

StartingPoint initialize(const SolverConfig& cfg, const ForwardModel& model, const RangeProjector& Pfq,
                         const AmplitudeProjector& Pa) {
    PowerOptions opt;
    opt.tol = cfg.eig_tol;
    opt.max_iter = cfg.eig_max_iter;
    opt.seed = cfg.seed;
    switch (cfg.init) {
        case InitMethod::Random:
            return {forward_frames(model, random_object(model.n(), cfg.seed)), std::nullopt};
        case InitMethod::TPS: {
            const TruncationMask mask = truncation_mask(Pa.amplitudes(), cfg.percentile_keep);
            InitResult r = tps_init(Pfq, Pa, mask, opt);
            return {std::move(r.zeta), std::move(r.eig)};
        }
        case InitMethod::GCL: {
            const ConnectionGraph graph = build_gcl(model, Pa.amplitudes());
            InitResult r = gcl_ps_init(graph, Pfq, Pa, opt);
            return {std::move(r.zeta), std::move(r.eig)};
        }
    }
    throw ValidationError("unknown init method");
}

SolveResult run(const SolverConfig& cfg, const ForwardModel& model, const MeasurementStack& a,
                const ComplexGrid* psi0) {
    validate(cfg);
    if (a.frames != model.frames() || a.side != model.m()) throw ValidationError("run: data shape does not match model");
    const RangeProjector Pfq(model);
    const AmplitudeProjector Pa(a);
    if (!(Pa.norm_a() > 0.0)) throw ValidationError("run: measurements are identically zero");

    std::optional<FrameStack> reference;
    if (psi0) reference = forward_frames(model, *psi0);
    const FrameStack* ref = reference ? &*reference : nullptr;

    SolveResult out;
    out.trace.norm_a = Pa.norm_a();
    StartingPoint start = initialize(cfg, model, Pfq, Pa);
    out.init_eig = std::move(start.eig);
    FrameStack zeta = std::move(start.zeta);

    CgState cg;
    FrameSyncState sync;
    std::size_t l = 0;
    try {
        for (;; ++l) {
            MetricRow row = compute_metrics(zeta, nullptr, Pa, Pfq, ref);
            row.iter = l;
            const bool reached = cfg.stop_eps0 && row.eps_0 && *row.eps_0 <= *cfg.stop_eps0;
            if (l == cfg.iterations || reached) {
                out.trace.rows.push_back(row);
                break;
            }
            FrameStack next;
            switch (cfg.algorithm) {
                case Algorithm::AP: next = ap_step(Pfq, Pa, zeta); break;
                case Algorithm::RAAR: next = raar_step(Pfq, Pa, zeta, cfg.beta); break;
                case Algorithm::SynchroRAAR:
                    next = synchro_raar_step(Pfq, Pa, zeta, cfg.beta, cfg.sync_kernel, &sync);
                    break;
                case Algorithm::SynchroCG:
                    cg.zeta = zeta;
                    cg_step(cg, Pfq, Pa, cfg.sync_kernel, cfg.alpha_max, cfg.line_tol);
                    next = cg.zeta;
                    break;
            }
            row.eps_delta = distance(zeta.data, next.data) / Pa.norm_a();
            out.trace.rows.push_back(row);
            zeta = std::move(next);
        }
    } catch (const Error& e) {
        throw Error(fmt::format("iteration {}: {}", l, e.what()));
    }
    out.psi = reconstruct_object(model, zeta);
    out.zeta = std::move(zeta);
    return out;
}

}  // namespace ptycho
