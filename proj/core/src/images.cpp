#include "ptycho/images.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "ptycho/array_file.hpp"

namespace ptycho {

namespace {

double max_modulus(const ComplexGrid& psi) {
    double mx = 0.0;
    for (const cplx& v : psi.data) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw ValidationError("image export: non-finite entry");
        mx = std::max(mx, std::abs(v));
    }
    return mx;
}

std::uint8_t to_byte(double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); }

}  // namespace

std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
    h = h - std::floor(h);
    const double h6 = h * 6.0;
    const int sector = static_cast<int>(h6) % 6;
    const double f = h6 - std::floor(h6);
    const double p = v * (1.0 - s), q = v * (1.0 - s * f), t = v * (1.0 - s * (1.0 - f));
    double r = v, g = t, b = p;
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    return {to_byte(r), to_byte(g), to_byte(b)};
}

std::string encode_pgm(const ComplexGrid& psi) {
    const double mx = max_modulus(psi);
    std::string out = fmt::format("P5\n{} {}\n255\n", psi.cols, psi.rows);
    for (const cplx& v : psi.data) out.push_back(static_cast<char>(mx > 0.0 ? to_byte(std::abs(v) / mx) : 0));
    return out;
}

std::string encode_ppm(const ComplexGrid& psi) {
    const double mx = max_modulus(psi);
    std::string out = fmt::format("P6\n{} {}\n255\n", psi.cols, psi.rows);
    for (const cplx& v : psi.data) {
        const double hue = (std::arg(v) + std::numbers::pi) / (2.0 * std::numbers::pi);
        const auto rgb = hsv_to_rgb(hue, 1.0, mx > 0.0 ? std::abs(v) / mx : 0.0);
        for (auto c : rgb) out.push_back(static_cast<char>(c));
    }
    return out;
}

PnmHeader parse_pnm_header(const std::string& bytes) {
    std::istringstream is(bytes);
    PnmHeader h;
    if (!(is >> h.magic >> h.width >> h.height >> h.maxval) || (h.magic != "P5" && h.magic != "P6"))
        throw FormatError("not a binary PGM/PPM header");
    is.get();
    h.data_offset = static_cast<std::size_t>(is.tellg());
    const std::size_t channels = h.magic == "P6" ? 3 : 1;
    if (bytes.size() - h.data_offset != h.width * h.height * channels) throw FormatError("PNM payload length mismatch");
    return h;
}

void export_images(const ComplexGrid& psi, const std::filesystem::path& prefix) {
    std::filesystem::path pgm = prefix, ppm = prefix;
    pgm += ".pgm";
    ppm += ".ppm";
    write_atomic(pgm, encode_pgm(psi));
    write_atomic(ppm, encode_ppm(psi));
}

}  // namespace ptycho
