#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "ptycho/core.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/lens.hpp"
#include "ptycho/spectral.hpp"
#include "ptycho/types.hpp"
#include "ptycho/verify.hpp"

namespace ptycho::test {

inline CVec random_cvec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CVec v(n);
    for (cplx& x : v) x = {g(rng), g(rng)};
    return v;
}

inline FrameStack random_stack(std::size_t K, std::size_t m, std::uint64_t seed) {
    FrameStack z(K, m);
    z.data = random_cvec(z.size(), seed);
    return z;
}

inline ComplexGrid random_grid(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    ComplexGrid g(rows, cols);
    g.data = random_cvec(rows * cols, seed);
    return g;
}

inline ComplexGrid constant_grid(std::size_t m, cplx v) { return ComplexGrid(m, m, v); }

inline double max_abs_diff(std::span<const cplx> u, std::span<const cplx> v) {
    double d = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) d = std::max(d, std::abs(u[k] - v[k]));
    return d;
}

inline ForwardModel lattice_model(std::size_t n, std::size_t m, double d, const ComplexGrid& omega, double jitter = 0.0,
                                  bool shear = false, std::uint64_t seed = 0) {
    SchemeParams sp;
    sp.n = n;
    sp.m = m;
    sp.dx = sp.dy = d;
    sp.jitter = jitter;
    sp.shear = shear;
    sp.seed = seed;
    return ForwardModel(build_scheme(sp), omega);
}

/// The desk instance: n = 64, m = 16, step 4, jitter 0.5, shear, BLR lens.
inline ForwardModel desk_model(std::uint64_t scheme_seed = 3, std::uint64_t lens_seed = 7) {
    LensSpec ls;
    ls.seed = lens_seed;
    return lattice_model(64, 16, 4.0, make_blr_lens(ls).omega, 0.5, true, scheme_seed);
}

/// Dense matrix of a linear map given by its action on the standard basis.
template <class Apply>
Eigen::MatrixXcd dense_of(std::size_t dim_in, std::size_t dim_out, Apply&& apply) {
    Eigen::MatrixXcd A(static_cast<Eigen::Index>(dim_out), static_cast<Eigen::Index>(dim_in));
    CVec e(dim_in), y(dim_out);
    for (std::size_t j = 0; j < dim_in; ++j) {
        std::fill(e.begin(), e.end(), cplx{0.0, 0.0});
        e[j] = 1.0;
        apply(std::span<const cplx>(e), std::span<cplx>(y));
        for (std::size_t i = 0; i < dim_out; ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = y[i];
    }
    return A;
}

/// Explicit Q as an (K m^2) x (n^2) matrix built from the per-pixel rule.
inline Eigen::MatrixXcd dense_Q(const ForwardModel& model) {
    const std::size_t n = model.n(), m = model.m(), K = model.frames();
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(K * m * m), static_cast<Eigen::Index>(n * n));
    for (std::size_t k = 0; k < K; ++k) {
        const WindowAnchor& w = model.anchor(k);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                Q(static_cast<Eigen::Index>(k * m * m + a * m + b),
                  static_cast<Eigen::Index>((w.row + a) * n + w.col + b)) = model.probe(k)(a, b);
    }
    return Q;
}

/// Explicit unitary DFT matrix on m x m blocks, kernel exp(+2 pi i (mu a + nu b)/m) / m.
inline Eigen::MatrixXcd dense_F(std::size_t m) {
    const auto L = static_cast<Eigen::Index>(m * m);
    Eigen::MatrixXcd F(L, L);
    const double tau = 2.0 * 3.14159265358979323846 / static_cast<double>(m);
    for (std::size_t mu = 0; mu < m; ++mu)
        for (std::size_t nu = 0; nu < m; ++nu)
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = 0; b < m; ++b)
                    F(static_cast<Eigen::Index>(mu * m + nu), static_cast<Eigen::Index>(a * m + b)) =
                        std::polar(1.0 / static_cast<double>(m), tau * static_cast<double>(mu * a + nu * b));
    return F;
}

inline Eigen::MatrixXcd block_diag(const Eigen::MatrixXcd& B, std::size_t K) {
    const Eigen::Index L = B.rows();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(L * static_cast<Eigen::Index>(K), L * static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k) out.block(static_cast<Eigen::Index>(k) * L, static_cast<Eigen::Index>(k) * L, L, L) = B;
    return out;
}

inline Eigen::VectorXcd as_eigen(std::span<const cplx> v) {
    return Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace ptycho::test
