#include "ptycho/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "ptycho/fft.hpp"
#include "ptycho/vecops.hpp"

namespace ptycho {

EigenResult power_top_eigpair(const LinearOp& apply, std::size_t dim, const PowerOptions& opt) {
    if (dim == 0) throw ValidationError("power_top_eigpair: dimension must be positive");
    EigenResult res;
    CVec v(dim);
    if (!opt.start.empty()) {
        if (opt.start.size() != dim) throw ValidationError("power_top_eigpair: start vector has wrong length");
        v = opt.start;
    } else {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (cplx& x : v) {
            const double re = unif(rng);
            const double im = unif(rng);
            x = {re, im};
        }
    }
    double nv = norm(v);
    if (nv == 0.0) throw ValidationError("power_top_eigpair: start vector is zero");
    for (cplx& x : v) x /= nv;

    CVec av(dim);
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        apply(v, av);
        res.iterations = it;
        res.eigenvalue = inner(v, av).real();
        double r2 = 0.0;
        for (std::size_t k = 0; k < dim; ++k) r2 += std::norm(av[k] - res.eigenvalue * v[k]);
        res.residual = std::sqrt(r2);
        if (res.residual <= opt.tol * std::abs(res.eigenvalue)) {
            res.converged = true;
            break;
        }
        for (std::size_t k = 0; k < dim; ++k) av[k] += opt.shift * v[k];
        const double nw = norm(av);
        if (nw == 0.0) break;  // v lies in the null space of A + shift I
        for (std::size_t k = 0; k < dim; ++k) v[k] = av[k] / nw;
    }
    res.vector = std::move(v);
    return res;
}

CVec omega_tilde(const ComplexGrid& omega) {
    const ComplexGrid f = dft2(omega, Direction::Forward);
    CVec out(f.size());
    for (std::size_t r = 0; r < f.size(); ++r) {
        const double mag = std::abs(f.data[r]);
        out[r] = mag > 0.0 ? f.data[r] / mag : cplx{1.0, 0.0};
    }
    return out;
}

FrameOffset frame_offset(const ForwardModel& model, std::size_t i, std::size_t j) {
    const WindowAnchor& ai = model.anchor(i);
    const WindowAnchor& aj = model.anchor(j);
    return {static_cast<std::ptrdiff_t>(ai.row) - static_cast<std::ptrdiff_t>(aj.row),
            static_cast<std::ptrdiff_t>(ai.col) - static_cast<std::ptrdiff_t>(aj.col)};
}

bool windows_overlap(const ForwardModel& model, std::size_t i, std::size_t j) {
    const FrameOffset d = frame_offset(model, i, j);
    const auto m = static_cast<std::ptrdiff_t>(model.m());
    return std::abs(d.dr) < m && std::abs(d.dc) < m;
}

ComplexGrid overlap_kernel(const ForwardModel& model, std::size_t i, std::size_t j) {
    if (!windows_overlap(model, i, j)) throw ValidationError(fmt::format("frames {} and {} do not overlap", i, j));
    const auto m = static_cast<std::ptrdiff_t>(model.m());
    const FrameOffset d = frame_offset(model, i, j);
    const WindowAnchor& ai = model.anchor(i);
    const ComplexGrid& pi = model.probe(i);
    const ComplexGrid& pj = model.probe(j);
    const RealGrid& pinv = model.qtq_pinv();
    ComplexGrid M(model.m(), model.m());
    for (std::ptrdiff_t s = std::max<std::ptrdiff_t>(0, -d.dr); s < std::min(m, m - d.dr); ++s)
        for (std::ptrdiff_t t = std::max<std::ptrdiff_t>(0, -d.dc); t < std::min(m, m - d.dc); ++t) {
            const auto us = static_cast<std::size_t>(s), ut = static_cast<std::size_t>(t);
            M(us, ut) = pi(us, ut) * std::conj(pj(static_cast<std::size_t>(s + d.dr), static_cast<std::size_t>(t + d.dc))) *
                        pinv(ai.row + us, ai.col + ut);
        }
    return M;
}

ComplexGrid ambiguity_kernel(const ForwardModel& model, std::size_t i, std::size_t j) {
    const ComplexGrid M = overlap_kernel(model, i, j);
    const std::size_t m = model.m();
    const double w = 2.0 * std::numbers::pi / static_cast<double>(m);
    const double scale = 1.0 / static_cast<double>(m * m);
    ComplexGrid V(m, m);
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q) {
            cplx acc{0.0, 0.0};
            for (std::size_t s = 0; s < m; ++s)
                for (std::size_t t = 0; t < m; ++t) {
                    if (M(s, t) == cplx{0.0, 0.0}) continue;
                    acc += M(s, t) * std::polar(1.0, w * static_cast<double>((p * s + q * t) % m));
                }
            V(p, q) = acc * scale;
        }
    return V;
}

ComplexGrid ambiguity_kernel_fft(const ForwardModel& model, std::size_t i, std::size_t j) {
    ComplexGrid V = dft2(overlap_kernel(model, i, j), Direction::Forward);
    const double scale = 1.0 / static_cast<double>(model.m());
    for (cplx& v : V.data) v *= scale;
    return V;
}

cplx omega_entry(const ForwardModel& model, const ComplexGrid& V, std::size_t i, std::size_t j, std::size_t mu,
                 std::size_t nu) {
    const std::size_t m = model.m();
    const FrameOffset d = frame_offset(model, i, j);
    const std::size_t mu_r = mu / m, mu_c = mu % m, nu_r = nu / m, nu_c = nu % m;
    const std::size_t lag_r = (mu_r + m - nu_r) % m, lag_c = (mu_c + m - nu_c) % m;
    const auto mm = static_cast<std::ptrdiff_t>(m);
    // nu . Delta reduced mod m keeps the phase argument small.
    const std::ptrdiff_t dot =
        ((static_cast<std::ptrdiff_t>(nu_r) * d.dr + static_cast<std::ptrdiff_t>(nu_c) * d.dc) % mm + mm) % mm;
    const double ph = -2.0 * std::numbers::pi * static_cast<double>(dot) / static_cast<double>(m);
    return std::polar(1.0, ph) * V(lag_r, lag_c);
}

ConnectionGraph::ConnectionGraph(const ForwardModel& model, const MeasurementStack& a) : model_(&model), a_(a) {
    const std::size_t K = model.frames(), m = model.m(), L = m * m;
    if (a.frames != K || a.side != m) throw ValidationError("build_gcl: measurement shape does not match the model");
    for (double v : a.data)
        if (!(v >= 0.0)) throw ValidationError("build_gcl: amplitudes must be non-negative");

    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j)
            if (windows_overlap(model, i, j)) pairs_.emplace_back(i, j);

    omega_tilde_ = omega_tilde(model.omega());
    weight_.resize(a.size());
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t r = 0; r < L; ++r) weight_[k * L + r] = a.data[k * L + r] * omega_tilde_[r];

    // D(i, mu) = a_i(mu) sum_j sum_nu |V_ij(mu - nu)| a_j(nu): a circular
    // convolution, evaluated as m * F^{-1}(F|V| . F a_j) under the unitary DFT.
    std::vector<CVec> fa(K);
    for (std::size_t j = 0; j < K; ++j) {
        fa[j].assign(a.frame(j).begin(), a.frame(j).end());
        dft2_inplace(fa[j], m, Direction::Forward);
    }
    std::vector<CVec> acc(K, CVec(L, cplx{0.0, 0.0}));
    for (const auto& [i, j] : pairs_) {
        ComplexGrid V = ambiguity_kernel_fft(model, i, j);
        CVec mag(L);
        for (std::size_t r = 0; r < L; ++r) mag[r] = std::abs(V.data[r]);
        dft2_inplace(mag, m, Direction::Forward);
        for (std::size_t r = 0; r < L; ++r) acc[i][r] += mag[r] * fa[j][r];
    }
    degree_.resize(a.size());
    inv_sqrt_degree_.resize(a.size());
    for (std::size_t i = 0; i < K; ++i) {
        dft2_inplace(acc[i], m, Direction::Inverse);
        for (std::size_t r = 0; r < L; ++r) {
            const double row = static_cast<double>(m) * acc[i][r].real();
            const double dval = a.data[i * L + r] * row;
            if (!(dval > 0.0))
                throw DegenerateError(
                    fmt::format("connection graph vertex (frame {}, pixel {}) has zero degree", i, r));
            degree_[i * L + r] = dval;
            inv_sqrt_degree_[i * L + r] = 1.0 / std::sqrt(dval);
        }
    }
}

void ConnectionGraph::apply_S(std::span<const cplx> in, std::span<cplx> out) const {
    const std::size_t K = model_->frames(), m = model_->m();
    if (in.size() != dim() || out.size() != dim()) throw ValidationError("apply_S: length mismatch");
    FrameStack z(K, m);
    for (std::size_t p = 0; p < dim(); ++p) z.data[p] = std::conj(weight_[p]) * in[p];
    const FrameStack y = RangeProjector(*model_).apply(z);
    for (std::size_t p = 0; p < dim(); ++p) out[p] = weight_[p] * y.data[p];
}

void ConnectionGraph::apply_S_pairwise(std::span<const cplx> in, std::span<cplx> out) const {
    const std::size_t K = model_->frames(), m = model_->m(), L = m * m;
    if (in.size() != dim() || out.size() != dim()) throw ValidationError("apply_S_pairwise: length mismatch");
    // t_j = F* (conj(a w~) x_j), then u_i(s) = sum_j M_ij(s) t_j(s + Delta_ij).
    std::vector<CVec> t(K, CVec(L));
    for (std::size_t j = 0; j < K; ++j) {
        for (std::size_t r = 0; r < L; ++r) t[j][r] = std::conj(weight_[j * L + r]) * in[j * L + r];
        dft2_inplace(t[j], m, Direction::Inverse);
    }
    std::vector<CVec> u(K, CVec(L, cplx{0.0, 0.0}));
    for (const auto& [i, j] : pairs_) {
        const ComplexGrid M = overlap_kernel(*model_, i, j);
        const FrameOffset d = frame_offset(*model_, i, j);
        for (std::size_t s = 0; s < m; ++s)
            for (std::size_t c = 0; c < m; ++c) {
                const cplx k = M(s, c);
                if (k == cplx{0.0, 0.0}) continue;
                const auto sr = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s) + d.dr);
                const auto sc = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(c) + d.dc);
                u[i][s * m + c] += k * t[j][sr * m + sc];
            }
    }
    for (std::size_t i = 0; i < K; ++i) {
        dft2_inplace(u[i], m, Direction::Forward);
        for (std::size_t r = 0; r < L; ++r) out[i * L + r] = weight_[i * L + r] * u[i][r];
    }
}

void ConnectionGraph::apply_normalized(std::span<const cplx> in, std::span<cplx> out) const {
    CVec x(dim());
    for (std::size_t p = 0; p < dim(); ++p) x[p] = inv_sqrt_degree_[p] * in[p];
    apply_S(x, out);
    for (std::size_t p = 0; p < dim(); ++p) out[p] *= inv_sqrt_degree_[p];
}

ConnectionGraph build_gcl(const ForwardModel& model, const MeasurementStack& a) { return ConnectionGraph(model, a); }

namespace {

FrameStack project_through_range(const RangeProjector& Pfq, const AmplitudeProjector& Pa, std::span<const cplx> v) {
    const MeasurementStack& a = Pa.amplitudes();
    FrameStack z(a.frames, a.side);
    project_amplitude_into(v, a.data, z.data);
    return Pfq.apply(z);
}

}  // namespace

InitResult gcl_ps_init(const ConnectionGraph& graph, const RangeProjector& Pfq, const AmplitudeProjector& Pa,
                       PowerOptions opt, bool remove_lens_phase) {
    if (graph.dim() != Pa.amplitudes().size()) throw ValidationError("gcl_ps_init: graph and data sizes differ");
    // Spectrum of the normalized operator lies in [-1, 1].
    opt.shift = 1.0;
    InitResult out;
    out.eig = power_top_eigpair([&](std::span<const cplx> x, std::span<cplx> y) { graph.apply_normalized(x, y); },
                                graph.dim(), opt);
    const RVec& deg = graph.degree();
    const std::size_t L = Pa.amplitudes().side * Pa.amplitudes().side;
    CVec v(graph.dim());
    for (std::size_t p = 0; p < v.size(); ++p) {
        v[p] = out.eig.vector[p] / std::sqrt(deg[p]);
        if (remove_lens_phase) v[p] *= std::conj(graph.lens_phase()[p % L]);
    }
    out.zeta = project_through_range(Pfq, Pa, v);
    return out;
}

InitResult tps_init(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const TruncationMask& mask,
                    PowerOptions opt) {
    const MeasurementStack& a = Pa.amplitudes();
    if (mask.keep.size() != a.size()) throw ValidationError("tps_init: mask length does not match the data");
    FrameStack buf(a.frames, a.side);
    auto op = [&](std::span<const cplx> x, std::span<cplx> y) {
        for (std::size_t p = 0; p < x.size(); ++p) buf.data[p] = mask.keep[p] ? x[p] : cplx{0.0, 0.0};
        const FrameStack r = Pfq.apply(buf);
        for (std::size_t p = 0; p < x.size(); ++p) y[p] = mask.keep[p] ? r.data[p] : cplx{0.0, 0.0};
    };
    InitResult out;
    out.eig = power_top_eigpair(op, a.size(), opt);
    out.zeta = project_through_range(Pfq, Pa, out.eig.vector);
    return out;
}

}  // namespace ptycho
