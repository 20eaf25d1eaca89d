#include "ptycho/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "ptycho/metrics.hpp"
#include "ptycho/projectors.hpp"
#include "ptycho/vecops.hpp"

namespace ptycho {
namespace {

void require_same_length(std::size_t x, std::size_t y, const char* what) {
    if (x != y) throw ValidationError(fmt::format("{}: length mismatch ({} vs {})", what, x, y));
}

}  // namespace

double rho(std::span<const cplx> z, std::span<const double> a) {
    require_same_length(z.size(), a.size(), "rho");
    double s = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double d = std::abs(z[k]) - a[k];
        s += d * d;
    }
    return 0.5 * s;
}

CVec grad_rho(std::span<const cplx> z, std::span<const double> a) {
    require_same_length(z.size(), a.size(), "grad_rho");
    CVec g(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double c = std::abs(z[k]);
        if (c == 0.0) throw DomainError(fmt::format("grad_rho: entry {} is zero", k));
        g[k] = 0.5 * (c - a[k]) * (z[k] / c);
    }
    return g;
}

double hessian_form(std::span<const cplx> z, std::span<const cplx> w, std::span<const double> a) {
    require_same_length(z.size(), a.size(), "hessian_form");
    require_same_length(z.size(), w.size(), "hessian_form");
    double s = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double c = std::abs(z[j]);
        if (c == 0.0) throw DomainError(fmt::format("hessian_form: entry {} of z is zero", j));
        const double b = std::abs(w[j]);
        const double theta = b == 0.0 ? 0.0 : std::arg(w[j]);
        const double sn = std::sin(theta - std::arg(z[j]));
        s += b * b * (1.0 - (a[j] / c) * sn * sn);
    }
    return s;
}

PolarVector PolarVector::from(std::span<const cplx> z) {
    PolarVector p;
    p.b.resize(z.size());
    p.phi.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        p.b[k] = std::abs(z[k]);
        double t = p.b[k] == 0.0 ? 0.0 : std::arg(z[k]);
        if (t < 0.0) t += 2.0 * std::numbers::pi;
        if (t >= 2.0 * std::numbers::pi) t = 0.0;
        p.phi[k] = t;
    }
    return p;
}

CVec PolarVector::to_complex() const {
    CVec z(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) z[k] = std::polar(b[k], phi[k]);
    return z;
}

ResidualPreimage invert_residual_scalar(cplx zeta, double a) {
    if (!(a > 0.0)) throw ValidationError(fmt::format("invert_residual_scalar: a must be positive (a={})", a));
    const double r = std::abs(zeta);
    if (r == 0.0) return CirclePreimage{a};
    const cplx u = zeta / r;
    if (r >= a) return UniquePreimage{(r + a) * u};
    return PairPreimage{(r - a) * u, (r + a) * u};
}

Region classify_region(std::span<const cplx> eta, std::span<const double> a) {
    require_same_length(eta.size(), a.size(), "classify_region");
    Region reg;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        const double e = std::abs(eta[i]);
        if (e == 0.0) throw DomainError(fmt::format("classify_region: entry {} of eta is zero", i));
        if (!(a[i] > 0.0)) throw ValidationError("classify_region: a must be positive");
        if (std::abs(e - a[i]) <= 1e-12 * a[i]) {
            reg.infinite = true;
            continue;
        }
        if (e < 2.0 * a[i]) ++reg.k;
    }
    if (reg.infinite) reg.k = 0;
    return reg;
}

double stagnation_sphere_residual(std::span<const cplx> eta, std::span<const double> a) {
    require_same_length(eta.size(), a.size(), "stagnation_sphere_residual");
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k < eta.size(); ++k) {
        const double d = std::abs(eta[k]) - 0.5 * a[k];
        lhs += d * d;
        rhs += a[k] * a[k];
    }
    return lhs - 0.25 * rhs;
}

ResidualRatios residual_ratios(std::span<const double> amp_residuals, std::span<const double> range_residuals,
                               double norm_a) {
    require_same_length(amp_residuals.size(), range_residuals.size(), "residual_ratios");
    ResidualRatios out;
    const double floor = 1e-14 * norm_a;
    for (std::size_t l = 0; l < amp_residuals.size(); ++l) {
        if (amp_residuals[l] < floor || range_residuals[l] < floor) {
            out.terminal_step = l;
            break;
        }
        if (l == 0) continue;
        out.alpha.push_back(amp_residuals[l] / amp_residuals[l - 1]);
        out.beta.push_back(range_residuals[l] / range_residuals[l - 1]);
    }
    return out;
}

double key_step_gap(std::span<const double> a, std::span<const cplx> zeta_prev, std::span<const cplx> zeta) {
    require_same_length(a.size(), zeta.size(), "key_step_gap");
    require_same_length(a.size(), zeta_prev.size(), "key_step_gap");
    const PolarVector prev = PolarVector::from(zeta_prev);
    const PolarVector cur = PolarVector::from(zeta);
    double lhs = 0.0, before = 0.0, after = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        lhs += 2.0 * a[k] * cur.b[k] * (1.0 - std::cos(cur.phi[k] - prev.phi[k]));
        before += (a[k] - prev.b[k]) * (a[k] - prev.b[k]);
        after += (a[k] - cur.b[k]) * (a[k] - cur.b[k]);
    }
    return (before - after) - lhs;
}

CVec GenericFrame::apply(std::span<const cplx> psi) const {
    const Eigen::Map<const Eigen::VectorXcd> x(psi.data(), static_cast<Eigen::Index>(psi.size()));
    const Eigen::VectorXcd y = S * x;
    return CVec(y.data(), y.data() + y.size());
}

CVec GenericFrame::project(std::span<const cplx> z) const {
    const Eigen::Map<const Eigen::VectorXcd> x(z.data(), static_cast<Eigen::Index>(z.size()));
    const Eigen::VectorXcd y = basis * (basis.adjoint() * x);
    return CVec(y.data(), y.data() + y.size());
}

GenericFrame make_generic_frame(std::size_t N, std::size_t M, std::uint64_t seed) {
    if (N == 0 || M < N) throw ValidationError(fmt::format("generic frame needs M >= N >= 1 (M={}, N={})", M, N));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    GenericFrame f;
    f.M = M;
    f.N = N;
    f.below_injectivity_bound = M + 2 < 4 * N;
    for (;;) {
        f.S.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(N));
        for (Eigen::Index c = 0; c < f.S.cols(); ++c)
            for (Eigen::Index r = 0; r < f.S.rows(); ++r) {
                const double re = gauss(rng);
                const double im = gauss(rng);
                f.S(r, c) = cplx{re, im};
            }
        const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(f.S);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) > 0.0 && sv(0) / sv(sv.size() - 1) <= 1e12) break;
    }
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(f.S);
    f.basis = qr.householderQ() * Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(N));
    return f;
}

GenericFrameLab::GenericFrameLab(std::size_t N, std::size_t M, std::uint64_t seed)
    : frame_(make_generic_frame(N, M, seed)) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    for (;;) {
        psi0_.resize(N);
        for (cplx& v : psi0_) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            v = {re, im};
        }
        solution_ = frame_.apply(psi0_);
        a_.resize(M);
        for (std::size_t k = 0; k < M; ++k) a_[k] = std::abs(solution_[k]);
        const double amax = *std::max_element(a_.begin(), a_.end());
        if (std::all_of(a_.begin(), a_.end(), [&](double v) { return v >= 1e-12 * amax; })) break;
    }
    norm_a_ = norm(std::span<const double>(a_));
}

CVec GenericFrameLab::perturbed_start(double rel, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVec delta(frame_.M);
    for (cplx& v : delta) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v = {re, im};
    }
    const double scale = rel * norm(solution_) / norm(delta);
    CVec z = solution_;
    for (std::size_t k = 0; k < z.size(); ++k) z[k] += scale * delta[k];
    return z;
}

CVec GenericFrameLab::random_start(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    CVec psi(frame_.N);
    for (cplx& v : psi) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v = {re, im};
    }
    return frame_.apply(psi);
}

LabRun GenericFrameLab::run_ap(CVec zeta0, std::size_t max_iter, double tol, double step_tol) const {
    if (zeta0.size() != frame_.M) throw ValidationError("run_ap: start vector has wrong length");
    LabRun run;
    run.zeta = std::move(zeta0);
    CVec pa(frame_.M);
    auto record = [&](const CVec& z) {
        project_amplitude_into(z, a_, pa);
        const CVec ps = frame_.project(pa);
        run.eps0.push_back(global_phase_align(z, solution_).dist / norm_a_);
        run.amp_residual.push_back(distance(pa, z) / norm_a_);
        run.range_residual.push_back(distance(ps, pa) / norm_a_);
        return ps;
    };
    CVec next = record(run.zeta);
    for (std::size_t l = 0;; ++l) {
        const bool small = run.eps0.back() < tol && run.amp_residual.back() < tol && run.range_residual.back() < tol;
        if (small) {
            run.converged = true;
            break;
        }
        if (l == max_iter) break;
        run.step.push_back(distance(next, run.zeta) / norm_a_);
        run.zeta = std::move(next);
        ++run.iterations;
        next = record(run.zeta);
        if (run.step.back() < step_tol) break;
    }
    return run;
}

}  // namespace ptycho
