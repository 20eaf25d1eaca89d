#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ptycho/metrics.hpp"
#include "ptycho/theory.hpp"
#include "ptycho/verify.hpp"
#include "ptycho/vecops.hpp"
#include "support.hpp"

using namespace ptycho;

namespace {

RVec positive(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    RVec a(n);
    for (double& x : a) x = u(rng);
    return a;
}

CVec on_torus(const RVec& a, std::uint64_t seed) {
    CVec z = test::random_cvec(a.size(), seed);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = a[k] * z[k] / std::abs(z[k]);
    return z;
}

}  // namespace

TEST_CASE("rho") {
    const RVec a = positive(6, 1);
    CHECK(rho(on_torus(a, 2), a) < 1e-28);
    CHECK(rho(CVec(6), a) == doctest::Approx(0.5 * std::pow(norm(std::span<const double>(a)), 2)));
    const CVec z = test::random_cvec(6, 3);
    double s = 0.0;
    for (std::size_t k = 0; k < 6; ++k) s += 0.5 * (std::abs(z[k]) - a[k]) * (std::abs(z[k]) - a[k]);
    CHECK(rho(z, a) == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("grad_rho closed forms and domain") {
    const RVec a = positive(5, 4);
    for (const cplx& g : grad_rho(on_torus(a, 5), a)) CHECK(std::abs(g) < 1e-15);
    CVec z(5);
    for (std::size_t k = 0; k < 5; ++k) z[k] = 2.0 * a[k];
    const CVec g = grad_rho(z, a);
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(g[k] - 0.5 * a[k]) < 1e-15);
    z[2] = 0.0;
    CHECK_THROWS_AS(grad_rho(z, a), DomainError);
}

TEST_CASE("grad_rho against central differences along real directions") {
    const std::size_t M = 8;
    const RVec a = positive(M, 6);
    const CVec z = test::random_cvec(M, 7);
    const CVec g = grad_rho(z, a);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double h = 1e-5;
    for (int d = 0; d < 20; ++d) {
        CVec w(M), zp(M), zm(M);
        for (auto& v : w) v = {n01(rng), n01(rng)};  // a direction in R^{2M}
        for (std::size_t k = 0; k < M; ++k) {
            zp[k] = z[k] + h * w[k];
            zm[k] = z[k] - h * w[k];
        }
        const double fd = (rho(zp, a) - rho(zm, a)) / (2.0 * h);
        const double an = 2.0 * inner(g, w).real();
        CHECK(std::abs(fd - an) <= 1e-6 * std::abs(an));
    }
    CHECK(gradient_fd_error(grad_rho, 3) < 1e-6);
}

TEST_CASE("hessian_form special cases, finite differences and convexity on the torus") {
    const RVec a = positive(7, 9);
    const CVec z = test::random_cvec(7, 10);
    CVec w(7);
    for (std::size_t k = 0; k < 7; ++k) w[k] = (0.5 + static_cast<double>(k)) * z[k] / std::abs(z[k]);
    CHECK(std::abs(hessian_form(z, w, a) - norm2(w)) < 1e-12 * norm2(w));

    const CVec t = on_torus(a, 11);
    for (std::size_t k = 0; k < 7; ++k) w[k] = cplx{0.0, 1.0} * (1.0 + static_cast<double>(k)) * t[k] / std::abs(t[k]);
    CHECK(std::abs(hessian_form(t, w, a)) < 1e-12);

    CHECK(hessian_fd_error(4) < 1e-4);
    for (std::uint64_t s = 0; s < 1000; ++s) CHECK(hessian_form(t, test::random_cvec(7, 1000 + s), a) >= 0.0);

    CVec zz = z;
    zz[0] = 0.0;
    CHECK_THROWS_AS(hessian_form(zz, w, a), DomainError);
}

TEST_CASE("PolarVector round trip and phase convention") {
    CVec z = test::random_cvec(9, 12);
    z[4] = 0.0;
    const PolarVector p = PolarVector::from(z);
    CHECK(p.b[4] == 0.0);
    CHECK(p.phi[4] == 0.0);
    for (double phi : p.phi) {
        CHECK(phi >= 0.0);
        CHECK(phi < 2.0 * std::numbers::pi);
    }
    CHECK(test::max_abs_diff(p.to_complex(), z) < 1e-14);
}

TEST_CASE("invert_residual_scalar cases") {
    const auto one = std::get<UniquePreimage>(invert_residual_scalar(2.0, 1.0));
    CHECK(std::abs(one.eta - 3.0) < 1e-15);
    const auto two = std::get<PairPreimage>(invert_residual_scalar(0.5, 1.0));
    CHECK(std::abs(two.eta_inner - (-0.5)) < 1e-15);
    CHECK(std::abs(two.eta_outer - 1.5) < 1e-15);
    CHECK(std::get<CirclePreimage>(invert_residual_scalar(0.0, 1.0)).radius == 1.0);
    CHECK_THROWS_AS(invert_residual_scalar(1.0, 0.0), ValidationError);
}

TEST_CASE("classify_region") {
    const RVec a(4, 1.0);
    CVec eta(4, cplx{3.0, 0.0});
    CHECK(classify_region(eta, a) == Region{false, 0});
    const RVec a3(3, 2.0);
    CVec e3{{6.0, 0.0}, {0.0, 1.0}, {-7.0, 0.0}};
    CHECK(classify_region(e3, a3) == Region{false, 1});
    e3[0] = 2.0;
    CHECK(classify_region(e3, a3).infinite);
    e3[0] = 0.0;
    CHECK_THROWS_AS(classify_region(e3, a3), DomainError);
}

TEST_CASE("region count equals the brute-force preimage count") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.05, 3.0), ph(0.0, 2.0 * std::numbers::pi);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t M = 6;
        RVec a(M);
        CVec eta(M);
        for (std::size_t k = 0; k < M; ++k) {
            a[k] = u(rng);
            eta[k] = std::polar(u(rng) * a[k], ph(rng));
        }
        const Region r = classify_region(eta, a);
        REQUIRE_FALSE(r.infinite);
        std::size_t count = 1;
        for (std::size_t k = 0; k < M; ++k) {
            const cplx zeta = eta[k] - a[k] * eta[k] / std::abs(eta[k]);
            count *= std::holds_alternative<PairPreimage>(invert_residual_scalar(zeta, a[k])) ? 2 : 1;
        }
        CHECK(count == (std::size_t{1} << r.k));
    }
}

TEST_CASE("stagnation sphere residual") {
    const RVec a = positive(5, 14);
    CHECK(std::abs(stagnation_sphere_residual(on_torus(a, 15), a)) < 1e-14);
    CHECK(std::abs(stagnation_sphere_residual(CVec(5), a)) < 1e-14);
    const RVec ones(4, 1.0);
    CHECK(stagnation_sphere_residual(CVec(4, cplx{2.0, 0.0}), ones) == doctest::Approx(8.0));
}

TEST_CASE("residual ratios") {
    const RVec ra{4.0, 2.0, 1.0}, rs{3.0, 3.0, 1.5};
    const ResidualRatios r = residual_ratios(ra, rs, 1.0);
    CHECK(r.alpha == RVec{0.5, 0.5});
    CHECK(r.beta == RVec{1.0, 0.5});
    CHECK_FALSE(r.terminal_step.has_value());

    const ResidualRatios z = residual_ratios(RVec{0.0, 0.0}, RVec{0.0, 0.0}, 1.0);
    CHECK(z.terminal_step == std::optional<std::size_t>{0});
    CHECK(z.alpha.empty());
}

TEST_CASE("generic frame lab") {
    const GenericFrameLab lab(2, 6, 1);
    CHECK_FALSE(lab.frame().below_injectivity_bound);
    CHECK(GenericFrameLab(3, 6, 1).frame().below_injectivity_bound);

    const LabRun exact = lab.run_ap(lab.solution(), 10, 1e-12);
    CHECK(exact.converged);
    CHECK(exact.iterations == 0);
    CHECK(exact.eps0[0] < 1e-15);

    CVec rotated = lab.solution();
    for (cplx& v : rotated) v *= std::polar(1.0, 2.0);
    const LabRun rot = lab.run_ap(rotated, 10, 1e-12);
    CHECK(rot.iterations == 0);
    CHECK(rot.eps0[0] < 1e-14);

    const LabRun local = lab.run_ap(lab.perturbed_start(1e-3, 2), 500, 1e-8);
    CHECK(local.converged);
    CHECK(local.eps0.back() < 1e-8);
    CHECK(local.amp_residual.back() < 1e-8);
    CHECK(local.range_residual.back() < 1e-8);
}

TEST_CASE("key step inequality holds along a generic AP run") {
    const GenericFrameLab lab(3, 12, 5);
    const LabRun run = lab.run_ap(lab.random_start(6), 200, 0.0);
    CHECK(run.iterations == 200);
    // Replay the iterates to feed consecutive pairs.
    CVec z = lab.random_start(6);
    for (int l = 0; l < 200; ++l) {
        const CVec next = lab.frame().project(project_amplitude(z, lab.amplitudes()));
        CHECK(key_step_gap(lab.amplitudes(), z, next) > -1e-10);
        z = next;
    }
}
