#pragma once

#include <cmath>
#include <span>

#include "ptycho/types.hpp"

namespace ptycho {

/// Hermitian inner product sum conj(u_k) v_k.
inline cplx inner(std::span<const cplx> u, std::span<const cplx> v) {
    cplx s{0.0, 0.0};
    for (std::size_t k = 0; k < u.size(); ++k) s += std::conj(u[k]) * v[k];
    return s;
}

inline double norm2(std::span<const cplx> u) {
    double s = 0.0;
    for (const cplx& x : u) s += std::norm(x);
    return s;
}

inline double norm(std::span<const cplx> u) { return std::sqrt(norm2(u)); }

inline double norm(std::span<const double> u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    return std::sqrt(s);
}

/// ||u - v||.
inline double distance(std::span<const cplx> u, std::span<const cplx> v) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += std::norm(u[k] - v[k]);
    return std::sqrt(s);
}

}  // namespace ptycho
