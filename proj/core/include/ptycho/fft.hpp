#pragma once

#include <span>

#include "ptycho/types.hpp"

namespace ptycho {

enum class Direction { Forward, Inverse };

/// Unitary 2D DFT of an m x m row-major block, in place.
///
/// Forward: (Ff)(mu, nu) = (1/m) sum_{a,b} exp(+2 pi i (mu a + nu b) / m) f(a, b).
/// Inverse is the exact adjoint. DC sits at index (0, 0); no shift is applied.
void dft2_inplace(std::span<cplx> block, std::size_t m, Direction dir);

ComplexGrid dft2(const ComplexGrid& f, Direction dir);

/// Applies dft2 to every frame of the stack.
void dft2_frames(FrameStack& z, Direction dir);

}  // namespace ptycho
