#include "ptycho/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "ptycho/array_file.hpp"
#include "ptycho/core.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/projectors.hpp"
#include "ptycho/spectral.hpp"
#include "ptycho/theory.hpp"
#include "ptycho/vecops.hpp"

namespace ptycho {

namespace {

CVec random_cvec(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CVec v(n);
    for (cplx& x : v) x = {g(rng), g(rng)};
    return v;
}

RVec random_amplitudes(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.5, 2.0);
    RVec a(n);
    for (double& x : a) x = u(rng);
    return a;
}

CVec shifted(std::span<const cplx> z, std::span<const cplx> w, double t) {
    CVec out(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k] + t * w[k];
    return out;
}

FrameStack random_stack(std::size_t K, std::size_t m, std::mt19937_64& rng) {
    FrameStack z(K, m);
    z.data = random_cvec(z.size(), rng);
    return z;
}

double max_abs_diff(std::span<const cplx> u, std::span<const cplx> v) {
    double d = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) d = std::max(d, std::abs(u[k] - v[k]));
    return d;
}

PropertyResult check(std::string name, double measured, double tol, std::string note = {}) {
    return {std::move(name), measured <= tol, measured, tol, std::move(note)};
}

ForwardModel small_model(std::size_t n, std::size_t m, double d, std::uint64_t seed) {
    SchemeParams sp;
    sp.n = n;
    sp.m = m;
    sp.dx = sp.dy = d;
    sp.seed = seed;
    return ForwardModel(build_scheme(sp), random_lens(m, seed + 1));
}

}  // namespace

ComplexGrid random_lens(std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mod(0.5, 1.5), ph(0.0, 2.0 * std::numbers::pi);
    ComplexGrid w(m, m);
    for (cplx& v : w.data) {
        const double r = mod(rng);
        v = std::polar(r, ph(rng));
    }
    return w;
}

double gradient_fd_error(const GradientFn& grad, std::uint64_t seed, std::size_t directions) {
    std::mt19937_64 rng(seed);
    const std::size_t M = 12;
    const CVec z = random_cvec(M, rng);
    const RVec a = random_amplitudes(M, rng);
    const CVec g = grad(z, a);
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t d = 0; d < directions; ++d) {
        const CVec w = random_cvec(M, rng);
        const double fd = (rho(shifted(z, w, h), a) - rho(shifted(z, w, -h), a)) / (2.0 * h);
        const double an = 2.0 * inner(g, w).real();
        worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
    }
    return worst;
}

double hessian_fd_error(std::uint64_t seed, std::size_t directions) {
    std::mt19937_64 rng(seed);
    const std::size_t M = 12;
    const CVec z = random_cvec(M, rng);
    const RVec a = random_amplitudes(M, rng);
    const double h = 1e-4;
    const double r0 = rho(z, a);
    double worst = 0.0;
    for (std::size_t d = 0; d < directions; ++d) {
        const CVec w = random_cvec(M, rng);
        const double fd = (rho(shifted(z, w, h), a) - 2.0 * r0 + rho(shifted(z, w, -h), a)) / (h * h);
        const double an = hessian_form(z, w, a);
        worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
    }
    return worst;
}

std::string StepWitness::describe() const {
    if (!found) return "no step-size increase found";
    return fmt::format("generic frame N={} M={} seed {} random start: step {:.6e} at l={} then {:.6e}", N, M, seed,
                       step_before, iteration, step_after);
}

StepWitness find_step_increase_witness(std::uint64_t first_seed, std::size_t max_seeds) {
    StepWitness w;
    w.N = 2;
    w.M = 6;
    for (std::uint64_t s = first_seed; s < first_seed + max_seeds; ++s) {
        const GenericFrameLab lab(w.N, w.M, s);
        const LabRun run = lab.run_ap(lab.random_start(s), 200, 0.0);
        for (std::size_t l = 1; l < run.step.size(); ++l) {
            // run.step[l - 1] = ||zeta^l - zeta^{l-1}||; require a clear increase.
            if (run.step[l] > run.step[l - 1] * (1.0 + 1e-6) && run.step[l - 1] > 1e-10) {
                w.found = true;
                w.seed = s;
                w.iteration = l;
                w.step_before = run.step[l - 1];
                w.step_after = run.step[l];
                return w;
            }
        }
    }
    return w;
}

std::vector<PropertyResult> run_property_suite() {
    std::vector<PropertyResult> out;
    std::mt19937_64 rng(2024);

    {
        const ForwardModel model = small_model(8, 4, 2.0, 3);
        const RangeProjector P(model);
        FrameStack a0 = random_stack(model.frames(), model.m(), rng);
        MeasurementStack a(model.frames(), model.m());
        for (std::size_t p = 0; p < a.size(); ++p) a.data[p] = std::abs(a0.data[p]);
        const AmplitudeProjector Pa(a);
        const FrameStack z = random_stack(model.frames(), model.m(), rng);
        const FrameStack w = random_stack(model.frames(), model.m(), rng);
        const FrameStack pa = Pa.apply(z);
        out.push_back(check("amplitude projector is idempotent", max_abs_diff(Pa.apply(pa).data, pa.data), 1e-12));
        const FrameStack pz = P.apply(z);
        out.push_back(check("range projector is idempotent", max_abs_diff(P.apply(pz).data, pz.data), 1e-12));
        const FrameStack pw = P.apply(w);
        out.push_back(check("range projector is self-adjoint",
                            std::abs(inner(pz.data, w.data) - inner(z.data, pw.data)), 1e-12));

        // AP step equals the projected gradient step on the range.
        double worst = 0.0;
        for (int t = 0; t < 5; ++t) {
            const FrameStack zr = P.apply(random_stack(model.frames(), model.m(), rng));
            FrameStack g(zr.frames, zr.side);
            g.data = grad_rho(zr.data, a.data);
            const FrameStack pg = P.apply(g);
            const FrameStack ap = P.apply(Pa.apply(zr));
            CVec lhs(zr.size());
            for (std::size_t p = 0; p < lhs.size(); ++p) lhs[p] = zr.data[p] - 2.0 * pg.data[p];
            worst = std::max(worst, max_abs_diff(lhs, ap.data) / norm(zr.data));
        }
        out.push_back(check("AP step equals projected gradient step", worst, 1e-12));
    }

    out.push_back(check("grad_rho matches central differences", gradient_fd_error(grad_rho, 11), 1e-6));
    {
        const GradientFn flipped = [](std::span<const cplx> z, std::span<const double> a) {
            CVec g = grad_rho(z, a);
            for (cplx& v : g) v = -v;
            return g;
        };
        const double err = gradient_fd_error(flipped, 11);
        PropertyResult r{"mutation canary: sign-flipped gradient is rejected", err > 1e-6, err, 1e-6,
                         "the gradient check fails on the mutant as required"};
        out.push_back(r);
    }
    out.push_back(check("hessian_form matches second differences", hessian_fd_error(12), 1e-4));
    {
        double worst_neg = 0.0;
        const RVec a = random_amplitudes(10, rng);
        CVec z = random_cvec(10, rng);
        for (std::size_t k = 0; k < z.size(); ++k) z[k] = a[k] * z[k] / std::abs(z[k]);
        for (int t = 0; t < 1000; ++t) worst_neg = std::max(worst_neg, -hessian_form(z, random_cvec(10, rng), a));
        out.push_back(check("hessian_form is non-negative on the torus", worst_neg, 0.0));
    }
    {
        std::uniform_real_distribution<double> u(0.0, 3.0), ph(0.0, 2.0 * std::numbers::pi);
        double worst = 0.0;
        bool counts_ok = true;
        for (int t = 0; t < 1000; ++t) {
            const double a = 0.1 + u(rng);
            const cplx zeta = t % 100 == 0 ? cplx{0.0, 0.0} : std::polar(u(rng), ph(rng));
            const ResidualPreimage pre = invert_residual_scalar(zeta, a);
            auto residual = [&](cplx eta) {
                return std::abs(eta - a * eta / std::abs(eta) - zeta);
            };
            if (const auto* one = std::get_if<UniquePreimage>(&pre)) {
                worst = std::max(worst, residual(one->eta));
                counts_ok = counts_ok && std::abs(zeta) >= a;
            } else if (const auto* two = std::get_if<PairPreimage>(&pre)) {
                worst = std::max({worst, residual(two->eta_inner), residual(two->eta_outer)});
                counts_ok = counts_ok && std::abs(zeta) > 0.0 && std::abs(zeta) < a;
            } else {
                const double r = std::get<CirclePreimage>(pre).radius;
                worst = std::max(worst, residual(std::polar(r, ph(rng))));
                counts_ok = counts_ok && zeta == cplx{0.0, 0.0};
            }
        }
        out.push_back(check("residual preimages solve (I - P_a) eta = zeta", worst, 1e-14));
        out.push_back({"preimage count matches the branch of |zeta|", counts_ok, counts_ok ? 0.0 : 1.0, 0.0, {}});
    }
    {
        const ForwardModel model = small_model(16, 4, 2.0, 5);
        const RangeProjector P(model);
        const AmplitudeProjector Pa(forward_measure(model, random_object(16, 6)));
        FrameStack z = forward_frames(model, random_object(16, 7));
        RVec ra, rs;
        double worst_gap = 0.0;
        FrameStack prev;
        for (int l = 0; l < 200; ++l) {
            const FrameStack pa = Pa.apply(z);
            const FrameStack next = P.apply(pa);
            ra.push_back(distance(pa.data, z.data));
            rs.push_back(distance(next.data, pa.data));
            if (l > 0) worst_gap = std::min(worst_gap, key_step_gap(Pa.amplitudes().data, prev.data, z.data) + 1e-10);
            prev = z;
            z = next;
        }
        const ResidualRatios rr = residual_ratios(ra, rs, Pa.norm_a());
        double worst = 0.0;
        for (double x : rr.alpha) worst = std::max(worst, x - 1.0);
        for (double x : rr.beta) worst = std::max(worst, x - 1.0);
        out.push_back(check("AP residual ratios never exceed one", worst, 1e-12));
        out.push_back(check("phase-step inequality holds along AP", -worst_gap, 0.0));
    }
    {
        const ForwardModel model = small_model(8, 4, 1.0, 9);
        double worst = 0.0;
        for (std::size_t i = 0; i < model.frames(); ++i)
            for (std::size_t j = 0; j < model.frames(); ++j) {
                if (!windows_overlap(model, i, j)) continue;
                worst = std::max(worst, max_abs_diff(ambiguity_kernel(model, i, j).data,
                                                     ambiguity_kernel_fft(model, i, j).data));
            }
        out.push_back(check("ambiguity kernel: FFT route equals direct sum", worst, 1e-10));

        const MeasurementStack a = forward_measure(model, random_object(8, 10));
        const ConnectionGraph graph = build_gcl(model, a);
        const CVec x = random_cvec(graph.dim(), rng);
        CVec y1(x.size()), y2(x.size());
        graph.apply_S(x, y1);
        graph.apply_S_pairwise(x, y2);
        out.push_back(check("connection matrix: projector route equals pairwise sum",
                            max_abs_diff(y1, y2) / norm(y2), 1e-10));
    }
    {
        const ArrayFile f = to_array(random_lens(5, 3));
        const bool same = decode_array(encode_array(f)) == f;
        out.push_back({"array file round trip is bit-exact", same, same ? 0.0 : 1.0, 0.0, {}});
    }
    {
        const StepWitness w = find_step_increase_witness();
        out.push_back({"AP step size is not monotone (witness)", w.found, w.step_after - w.step_before, 0.0,
                       w.describe()});
    }
    return out;
}

std::string format_report(const std::vector<PropertyResult>& results) {
    std::string s;
    for (const PropertyResult& r : results) {
        s += fmt::format("{} {}  (measured {:.3e}, tolerance {:.1e})", r.passed ? "PASS" : "FAIL", r.name, r.measured,
                         r.tolerance);
        if (!r.note.empty()) s += "  [" + r.note + "]";
        s += "\n";
    }
    return s;
}

}  // namespace ptycho
