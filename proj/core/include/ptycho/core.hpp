#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ptycho/types.hpp"

namespace ptycho {

/// Row-major position of (alpha, beta) inside an m x m frame.
std::size_t index_linear(std::size_t alpha, std::size_t beta, std::size_t m);

/// Position of pixel r of frame k inside the stacked vector.
std::size_t index_ell(std::size_t k, std::size_t r_linear, std::size_t m, std::size_t frames);

/// Raster position in pixel units; x is the column offset, y the row offset.
struct Position {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Position&, const Position&) = default;
};

struct IlluminationScheme {
    std::size_t n = 0;  // object side
    std::size_t m = 0;  // window side
    std::vector<Position> positions;

    std::size_t frames() const { return positions.size(); }
};

struct SchemeParams {
    std::size_t n = 64;
    std::size_t m = 16;
    double dx = 4.0;
    double dy = 4.0;
    double jitter = 0.0;
    bool shear = false;
    std::uint64_t seed = 0;
};

/// Lattice scheme with optional odd-row shear and uniform jitter.
///
/// Per axis the lattice has floor((n-m)/d)+1 points. Jittered coordinates are
/// clamped into [0, n-m]; the first and last lattice row and column are pinned
/// to the object border so the windows always reach every edge pixel.
/// Throws ValidationError naming the violated condition.
IlluminationScheme build_scheme(const SchemeParams& params);

struct SchemeReport {
    std::vector<std::pair<std::size_t, std::size_t>> duplicates;  // condition 1
    std::size_t uncovered_pixels = 0;                               // condition 2
    std::vector<std::size_t> isolated_windows;                      // condition 3
    std::vector<std::string> structural;                            // out-of-range positions, bad sizes

    bool ok() const {
        return duplicates.empty() && uncovered_pixels == 0 && isolated_windows.empty() && structural.empty();
    }
    std::string describe() const;
};

/// Checks distinctness, coverage and overlap of the windows anchored at
/// floor(position).
SchemeReport validate_scheme(const IlluminationScheme& scheme);

/// Integer anchor and fractional remainder of a position.
struct WindowAnchor {
    std::size_t row = 0;
    std::size_t col = 0;
    double frac_x = 0.0;
    double frac_y = 0.0;
};

WindowAnchor anchor_of(const Position& p);

/// Bilinear sample of omega at (alpha - fy, beta - fx); samples outside the
/// m x m support are zero. With fx = fy = 0 the lens is returned unchanged.
ComplexGrid shifted_probe(const ComplexGrid& omega, double fx, double fy);

}  // namespace ptycho
