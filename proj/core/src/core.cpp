#include "ptycho/core.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace ptycho {

std::size_t index_linear(std::size_t alpha, std::size_t beta, std::size_t m) {
    if (alpha >= m || beta >= m)
        throw std::out_of_range(fmt::format("index_linear: ({}, {}) outside {}x{} frame", alpha, beta, m, m));
    return alpha * m + beta;
}

std::size_t index_ell(std::size_t k, std::size_t r_linear, std::size_t m, std::size_t frames) {
    if (k >= frames || r_linear >= m * m)
        throw std::out_of_range(
            fmt::format("index_ell: frame {} pixel {} outside {} frames of {} pixels", k, r_linear, frames, m * m));
    return k * m * m + r_linear;
}

std::string SchemeReport::describe() const {
    if (ok()) return "valid";
    std::string out;
    for (const auto& s : structural) out += s + "; ";
    if (!duplicates.empty())
        out += fmt::format("condition 1 (distinct positions) violated by {} pair(s), first ({}, {}); ",
                           duplicates.size(), duplicates.front().first, duplicates.front().second);
    if (uncovered_pixels > 0)
        out += fmt::format("condition 2 (windows cover the object) violated: {} uncovered pixel(s); ",
                           uncovered_pixels);
    if (!isolated_windows.empty())
        out += fmt::format("condition 3 (every window overlaps another) violated by {} window(s), first {}; ",
                           isolated_windows.size(), isolated_windows.front());
    out.resize(out.size() - 2);
    return out;
}

WindowAnchor anchor_of(const Position& p) {
    const double fr = std::floor(p.y);
    const double fc = std::floor(p.x);
    return {static_cast<std::size_t>(fr), static_cast<std::size_t>(fc), p.x - fc, p.y - fr};
}

SchemeReport validate_scheme(const IlluminationScheme& s) {
    SchemeReport rep;
    const std::size_t K = s.frames();
    if (K == 0) rep.structural.push_back("scheme has no positions");
    if (s.m == 0 || s.m > s.n) rep.structural.push_back(fmt::format("window side {} invalid for object side {}", s.m, s.n));
    if (!rep.structural.empty()) return rep;

    const double hi = static_cast<double>(s.n - s.m);
    for (std::size_t k = 0; k < K; ++k) {
        const Position& p = s.positions[k];
        if (!(p.x >= 0.0 && p.x <= hi && p.y >= 0.0 && p.y <= hi))
            rep.structural.push_back(fmt::format("position {} ({}, {}) outside [0, {}]", k, p.x, p.y, hi));
    }
    if (!rep.structural.empty()) return rep;

    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i + 1; j < K; ++j)
            if (s.positions[i] == s.positions[j]) rep.duplicates.emplace_back(i, j);

    std::vector<WindowAnchor> anchors(K);
    for (std::size_t k = 0; k < K; ++k) anchors[k] = anchor_of(s.positions[k]);

    std::vector<unsigned char> covered(s.n * s.n, 0);
    for (const WindowAnchor& w : anchors)
        for (std::size_t a = 0; a < s.m; ++a)
            std::fill_n(covered.begin() + static_cast<std::ptrdiff_t>((w.row + a) * s.n + w.col), s.m, 1);
    rep.uncovered_pixels = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), 0));

    const auto m = static_cast<std::ptrdiff_t>(s.m);
    for (std::size_t i = 0; i < K; ++i) {
        bool partner = false;
        for (std::size_t j = 0; j < K && !partner; ++j) {
            if (j == i) continue;
            const auto dr = static_cast<std::ptrdiff_t>(anchors[i].row) - static_cast<std::ptrdiff_t>(anchors[j].row);
            const auto dc = static_cast<std::ptrdiff_t>(anchors[i].col) - static_cast<std::ptrdiff_t>(anchors[j].col);
            partner = std::abs(dr) < m && std::abs(dc) < m;
        }
        if (!partner) rep.isolated_windows.push_back(i);
    }
    return rep;
}

IlluminationScheme build_scheme(const SchemeParams& p) {
    if (p.m == 0 || p.m > p.n) throw ValidationError(fmt::format("build_scheme: need 0 < m <= n (m={}, n={})", p.m, p.n));
    if (!(p.dx >= 1.0) || !(p.dy >= 1.0))
        throw ValidationError(fmt::format("build_scheme: spacings must be >= 1 (dx={}, dy={})", p.dx, p.dy));
    if (!(p.jitter >= 0.0)) throw ValidationError("build_scheme: jitter must be >= 0");

    const double span = static_cast<double>(p.n - p.m);
    const auto cx = static_cast<std::size_t>(std::floor(span / p.dx)) + 1;
    const auto cy = static_cast<std::size_t>(std::floor(span / p.dy)) + 1;

    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> unif(-p.jitter, p.jitter);

    IlluminationScheme s{p.n, p.m, {}};
    s.positions.reserve(cx * cy);
    for (std::size_t iy = 0; iy < cy; ++iy) {
        for (std::size_t ix = 0; ix < cx; ++ix) {
            double x = static_cast<double>(ix) * p.dx + ((p.shear && iy % 2 == 1) ? p.dx / 2.0 : 0.0);
            double y = static_cast<double>(iy) * p.dy;
            if (p.jitter > 0.0) {
                x += unif(rng);
                y += unif(rng);
            }
            x = std::clamp(x, 0.0, span);
            y = std::clamp(y, 0.0, span);
            if (ix == 0) x = 0.0;
            if (ix + 1 == cx) x = span;
            if (iy == 0) y = 0.0;
            if (iy + 1 == cy) y = span;
            s.positions.push_back({x, y});
        }
    }

    const SchemeReport rep = validate_scheme(s);
    if (!rep.ok()) throw ValidationError("build_scheme: " + rep.describe());
    return s;
}

ComplexGrid shifted_probe(const ComplexGrid& omega, double fx, double fy) {
    if (omega.rows != omega.cols) throw ValidationError("shifted_probe: lens must be square");
    const std::size_t m = omega.rows;
    auto at = [&](std::ptrdiff_t r, std::ptrdiff_t c) -> cplx {
        if (r < 0 || c < 0) return {0.0, 0.0};
        return omega(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    };
    ComplexGrid out(m, m);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            const auto r = static_cast<std::ptrdiff_t>(a);
            const auto c = static_cast<std::ptrdiff_t>(b);
            out(a, b) = (1.0 - fy) * (1.0 - fx) * at(r, c) + (1.0 - fy) * fx * at(r, c - 1) +
                        fy * (1.0 - fx) * at(r - 1, c) + fy * fx * at(r - 1, c - 1);
        }
    }
    return out;
}

}  // namespace ptycho
