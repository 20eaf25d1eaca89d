#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "ptycho/types.hpp"

namespace ptycho {

/// Binary P5; magnitude mapped linearly from [0, max] to [0, 255].
std::string encode_pgm(const ComplexGrid& psi);
/// Binary P6; hue (arg + pi) / 2 pi, saturation 1, value |psi| / max.
std::string encode_ppm(const ComplexGrid& psi);

/// Standard HSV to 8-bit RGB with h, s, v in [0, 1].
std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v);

struct PnmHeader {
    std::string magic;
    std::size_t width = 0;
    std::size_t height = 0;
    unsigned maxval = 0;
    std::size_t data_offset = 0;
};

/// Parses a P5/P6 header; throws FormatError.
PnmHeader parse_pnm_header(const std::string& bytes);

/// Writes <prefix>.pgm and <prefix>.ppm. Throws ValidationError on
/// non-finite entries.
void export_images(const ComplexGrid& psi, const std::filesystem::path& prefix);

}  // namespace ptycho
