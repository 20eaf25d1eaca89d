#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ptycho/fft.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/vecops.hpp"
#include "support.hpp"

using namespace ptycho;

namespace {

ComplexGrid naive_dft(const ComplexGrid& f, double sign) {
    const std::size_t m = f.rows;
    ComplexGrid out(m, m);
    for (std::size_t mu = 0; mu < m; ++mu)
        for (std::size_t nu = 0; nu < m; ++nu) {
            cplx s{0.0, 0.0};
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = 0; b < m; ++b)
                    s += std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(mu * a + nu * b) /
                                             static_cast<double>(m)) *
                         f(a, b);
            out(mu, nu) = s / static_cast<double>(m);
        }
    return out;
}

}  // namespace

TEST_CASE("dft2 scaling on constant and delta frames") {
    const ComplexGrid one = dft2(test::constant_grid(4, {1.0, 0.0}), Direction::Forward);
    CHECK(std::abs(one(0, 0) - 4.0) < 1e-14);
    for (std::size_t p = 1; p < 16; ++p) CHECK(std::abs(one.data[p]) < 1e-14);

    ComplexGrid delta(4, 4);
    delta(0, 0) = 1.0;
    for (const cplx& v : dft2(delta, Direction::Forward).data) CHECK(std::abs(v - 0.25) < 1e-15);
}

TEST_CASE("dft2 matches the direct double sum with a positive exponent") {
    const ComplexGrid f = test::random_grid(8, 8, 5);
    CHECK(test::max_abs_diff(dft2(f, Direction::Forward).data, naive_dft(f, +1.0).data) < 1e-12);
    CHECK(test::max_abs_diff(dft2(f, Direction::Inverse).data, naive_dft(f, -1.0).data) < 1e-12);
}

TEST_CASE("dft2 is unitary and inverted by its adjoint") {
    const ComplexGrid f = test::random_grid(16, 16, 6);
    const ComplexGrid F = dft2(f, Direction::Forward);
    CHECK(std::abs(norm(F.data) - norm(f.data)) < 1e-12 * norm(f.data));
    CHECK(test::max_abs_diff(dft2(F, Direction::Inverse).data, f.data) < 1e-13);
    CHECK_THROWS_AS(dft2(ComplexGrid(3, 4), Direction::Forward), ValidationError);
}

TEST_CASE("extract_frames is the identity for one full window and unit lens") {
    const ComplexGrid psi = test::random_grid(6, 6, 7);
    const ForwardModel model(IlluminationScheme{6, 6, {{0.0, 0.0}}}, test::constant_grid(6, {1.0, 0.0}));
    const FrameStack z = extract_frames(model, psi);
    CHECK(test::max_abs_diff(z.data, psi.data) == 0.0);
    for (const cplx& v : extract_frames(model, ComplexGrid(6, 6)).data) CHECK(v == cplx{0.0, 0.0});
}

TEST_CASE("extract_frames per-pixel oracle at integer positions") {
    const ComplexGrid omega = test::random_grid(4, 4, 8);
    const ForwardModel model = test::lattice_model(10, 4, 3.0, omega);
    const ComplexGrid psi = test::random_grid(10, 10, 9);
    const FrameStack z = extract_frames(model, psi);
    for (std::size_t k = 0; k < model.frames(); ++k) {
        const Position& p = model.scheme().positions[k];
        const auto r0 = static_cast<std::size_t>(p.y), c0 = static_cast<std::size_t>(p.x);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) CHECK(z.frame(k)[a * 4 + b] == omega(a, b) * psi(r0 + a, c0 + b));
    }
}

TEST_CASE("Q is linear and scatter_adjoint is its adjoint") {
    const ForwardModel model = test::lattice_model(16, 6, 2.5, test::random_grid(6, 6, 1), 0.7, true, 2);
    const ComplexGrid p1 = test::random_grid(16, 16, 3), p2 = test::random_grid(16, 16, 4);
    const cplx al{0.3, -1.2}, be{2.0, 0.5};
    ComplexGrid mix(16, 16);
    for (std::size_t p = 0; p < mix.size(); ++p) mix.data[p] = al * p1.data[p] + be * p2.data[p];
    const FrameStack z1 = extract_frames(model, p1), z2 = extract_frames(model, p2), zm = extract_frames(model, mix);
    double worst = 0.0;
    for (std::size_t p = 0; p < zm.size(); ++p)
        worst = std::max(worst, std::abs(zm.data[p] - (al * z1.data[p] + be * z2.data[p])));
    CHECK(worst < 1e-13);

    const FrameStack z = test::random_stack(model.frames(), 6, 5);
    const cplx lhs = inner(extract_frames(model, p1).data, z.data);
    const cplx rhs = inner(p1.data, scatter_adjoint(model, z).data);
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(lhs));
}

TEST_CASE("scatter_adjoint of identical overlapping unit windows doubles the frame") {
    // The model constructor accepts repeated positions; only validate_scheme flags them.
    const ForwardModel model(IlluminationScheme{6, 4, {{1.0, 1.0}, {1.0, 1.0}}}, test::constant_grid(4, {1.0, 0.0}));
    FrameStack z(2, 4);
    const CVec f = test::random_cvec(16, 11);
    std::copy(f.begin(), f.end(), z.frame(0).begin());
    std::copy(f.begin(), f.end(), z.frame(1).begin());
    const ComplexGrid psi = scatter_adjoint(model, z);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) CHECK(psi(a + 1, b + 1) == 2.0 * f[a * 4 + b]);
    CHECK(psi(0, 0) == cplx{0.0, 0.0});
    const RealGrid q = qtq_diagonal(model);
    CHECK(q(2, 2) == 2.0);
}

TEST_CASE("qtq_diagonal on an exact tiling and against the dense Q") {
    // Exact tilings fail the overlap condition of build_scheme, so the scheme is spelled out.
    const ForwardModel tiling(IlluminationScheme{8, 4, {{0.0, 0.0}, {4.0, 0.0}, {0.0, 4.0}, {4.0, 4.0}}},
                              test::constant_grid(4, {1.0, 0.0}));
    for (double v : qtq_diagonal(tiling).data) CHECK(v == 1.0);

    const ForwardModel model = test::lattice_model(16, 6, 2.0, test::random_grid(6, 6, 12), 0.8, true, 13);
    const Eigen::MatrixXcd Q = test::dense_Q(model);
    const Eigen::VectorXd colsum = Q.cwiseAbs2().colwise().sum().transpose();
    const RealGrid q = qtq_diagonal(model);
    for (std::size_t p = 0; p < q.size(); ++p) CHECK(std::abs(q.data[p] - colsum(static_cast<Eigen::Index>(p))) < 1e-12);

    // Spot check against Q*Q applied to pixel deltas.
    for (std::size_t p : {0u, 17u, 100u, 255u}) {
        ComplexGrid d(16, 16);
        d.data[p] = 1.0;
        CHECK(std::abs(scatter_adjoint(model, extract_frames(model, d)).data[p] - q.data[p]) < 1e-12);
    }
}

TEST_CASE("a covered pixel with zero illumination is rejected") {
    ComplexGrid omega = test::constant_grid(4, {1.0, 0.0});
    omega(0, 0) = 0.0;
    CHECK_THROWS_AS(ForwardModel(IlluminationScheme{4, 4, {{0.0, 0.0}}}, omega), DegenerateError);
}

TEST_CASE("forward_measure basics") {
    const ForwardModel one(IlluminationScheme{4, 4, {{0.0, 0.0}}}, test::constant_grid(4, {1.0, 0.0}));
    const MeasurementStack a = forward_measure(one, test::constant_grid(4, {1.0, 0.0}));
    CHECK(std::abs(a.data[0] - 4.0) < 1e-14);
    for (std::size_t p = 1; p < 16; ++p) CHECK(a.data[p] < 1e-14);

    const ForwardModel model = test::lattice_model(16, 6, 2.0, test::random_grid(6, 6, 2), 0.5, true, 3);
    const ComplexGrid psi = test::random_grid(16, 16, 4);
    const MeasurementStack b = forward_measure(model, psi);
    const FrameStack z = extract_frames(model, psi);
    for (std::size_t k = 0; k < model.frames(); ++k) {
        const auto bk = b.frame(k);
        CHECK(std::abs(norm(std::span<const double>(bk.data(), bk.size())) - norm(z.frame(k))) < 1e-12);
    }
    ComplexGrid rotated = psi;
    for (cplx& v : rotated.data) v *= std::polar(1.0, 1.1);
    const MeasurementStack c = forward_measure(model, rotated);
    double worst = 0.0;
    for (std::size_t p = 0; p < b.size(); ++p) worst = std::max(worst, std::abs(b.data[p] - c.data[p]));
    CHECK(worst < 1e-13);
}

TEST_CASE("add_noise") {
    const ForwardModel model = test::lattice_model(16, 6, 2.0, test::random_grid(6, 6, 2));
    const MeasurementStack a = forward_measure(model, test::random_grid(16, 16, 4));
    const NoisyMeasurement clean = add_noise(a, {0.0, 1});
    CHECK(clean.eps_sigma == 0.0);
    CHECK(clean.a.data == a.data);
    CHECK(add_noise(a, {0.01, 5}).a.data == add_noise(a, {0.01, 5}).a.data);
    CHECK_THROWS_AS(add_noise(a, {-1.0, 0}), ValidationError);

    double prev = 0.0;
    for (double s : {1e-4, 1e-3, 1e-2, 1e-1}) {
        double mean = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) mean += add_noise(a, {s, seed}).eps_sigma / 10.0;
        CHECK(mean > prev);
        prev = mean;
    }
}

TEST_CASE("phantom is a unit-modulus phase object and random_object is seeded") {
    const ComplexGrid p = make_phantom(32);
    for (const cplx& v : p.data) CHECK(std::abs(std::abs(v) - 1.0) < 1e-14);
    CHECK(random_object(8, 3).data == random_object(8, 3).data);
    CHECK(random_object(8, 3).data != random_object(8, 4).data);
}
