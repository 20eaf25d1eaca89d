#pragma once

#include <cstdint>
#include <string>

#include "ptycho/types.hpp"

namespace ptycho {

enum class LensKind { Small, BLR };

/// Radii are in cycles per pixel (Nyquist = 0.5). A frequency index pair
/// (mu, nu) with signed representatives (fm, fn) has |q| = hypot(fm, fn) / m.
struct LensSpec {
    LensKind kind = LensKind::BLR;
    std::size_t m = 16;
    double r_inner = 0.1;   // beam-stop or annulus inner radius
    double r_outer = 0.45;
    double focus_radius = 5.0;  // pixels, BLR only
    std::size_t design_iters = 200;
    std::uint64_t seed = 0;
};

/// Throws ValidationError: 0 <= r_inner < r_outer <= 0.5, m >= 2, and for BLR
/// design_iters >= 1 and 0 < focus_radius < m/2.
void validate(const LensSpec& spec);

std::string to_string(LensKind k);
LensKind parse_lens_kind(const std::string& s);

/// 1 where r_inner < |q| <= r_outer, 0 elsewhere; DC at (0, 0).
RealGrid annulus_mask(std::size_t m, double r_inner, double r_outer);

/// Pixels with (y - m/2)^2 + (x - m/2)^2 <= R^2.
RealGrid focus_disk(std::size_t m, double radius);

/// Unit-energy lens whose unitary DFT has constant modulus on the annulus and
/// vanishes off it. Real-valued, centered at (m/2, m/2).
ComplexGrid make_small_lens(const LensSpec& spec);

struct BlrReport {
    double outside_fraction = 0.0;   // energy outside the focus disk / total
    double annulus_deviation = 0.0;  // max | |F w| - const | on the annulus, relative
    std::size_t iterations = 0;
    bool stagnated = false;  // residual non-decreasing over > design_iters/2 consecutive steps
    std::string describe() const;
};

struct BlrLens {
    ComplexGrid omega;
    BlrReport report;
};

/// Alternating design ending on the Fourier projection, so the band limit is
/// exact and the focus constraint approximate.
BlrLens make_blr_lens(const LensSpec& spec);

/// Dispatches on spec.kind.
ComplexGrid make_lens(const LensSpec& spec);

}  // namespace ptycho
