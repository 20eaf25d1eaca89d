#include "ptycho/lens.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "ptycho/fft.hpp"
#include "ptycho/vecops.hpp"

namespace ptycho {

namespace {

double signed_freq(std::size_t k, std::size_t m) {
    return 2 * k < m ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(m);
}

// Circular shift by (m/2, m/2): moves the origin to the window center.
ComplexGrid center(const ComplexGrid& g) {
    const std::size_t m = g.rows, h = m / 2;
    ComplexGrid out(m, m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) out((r + h) % m, (c + h) % m) = g(r, c);
    return out;
}

void normalize(ComplexGrid& g) {
    const double nrm = norm(g.data);
    if (!(nrm > 0.0)) throw DegenerateError("lens has zero energy");
    for (cplx& v : g.data) v /= nrm;
}

double outside_energy(const ComplexGrid& w, const RealGrid& disk) {
    double out = 0.0, total = 0.0;
    for (std::size_t p = 0; p < w.data.size(); ++p) {
        const double e = std::norm(w.data[p]);
        total += e;
        if (disk.data[p] == 0.0) out += e;
    }
    return total > 0.0 ? out / total : 0.0;
}

}  // namespace

void validate(const LensSpec& s) {
    if (s.m < 2) throw ValidationError(fmt::format("lens side {} must be at least 2", s.m));
    if (!(s.r_inner >= 0.0 && s.r_inner < s.r_outer && s.r_outer <= 0.5))
        throw ValidationError(
            fmt::format("lens radii need 0 <= inner < outer <= 0.5 (got {}, {})", s.r_inner, s.r_outer));
    if (s.kind == LensKind::BLR) {
        if (s.design_iters < 1) throw ValidationError("BLR design_iters must be at least 1");
        if (!(s.focus_radius > 0.0 && s.focus_radius < 0.5 * static_cast<double>(s.m)))
            throw ValidationError(fmt::format("BLR focus radius {} not in (0, m/2)", s.focus_radius));
    }
}

std::string to_string(LensKind k) { return k == LensKind::Small ? "small" : "blr"; }

LensKind parse_lens_kind(const std::string& s) {
    if (s == "small") return LensKind::Small;
    if (s == "blr") return LensKind::BLR;
    throw ValidationError(fmt::format("unknown lens kind '{}' (small, blr)", s));
}

RealGrid annulus_mask(std::size_t m, double r_inner, double r_outer) {
    RealGrid mask(m, m);
    const double md = static_cast<double>(m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) {
            const double q = std::hypot(signed_freq(r, m), signed_freq(c, m)) / md;
            mask(r, c) = (q > r_inner && q <= r_outer) ? 1.0 : 0.0;
        }
    return mask;
}

RealGrid focus_disk(std::size_t m, double radius) {
    RealGrid disk(m, m);
    const double h = static_cast<double>(m / 2);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) {
            const double dy = static_cast<double>(r) - h, dx = static_cast<double>(c) - h;
            disk(r, c) = dy * dy + dx * dx <= radius * radius ? 1.0 : 0.0;
        }
    return disk;
}

ComplexGrid make_small_lens(const LensSpec& spec) {
    LensSpec s = spec;
    s.kind = LensKind::Small;
    validate(s);
    const RealGrid mask = annulus_mask(s.m, s.r_inner, s.r_outer);
    ComplexGrid spectrum(s.m, s.m);
    bool any = false;
    for (std::size_t p = 0; p < mask.data.size(); ++p) {
        spectrum.data[p] = mask.data[p];
        any = any || mask.data[p] != 0.0;
    }
    if (!any) throw ValidationError(fmt::format("empty annulus ({}, {}] at m={}", s.r_inner, s.r_outer, s.m));
    ComplexGrid w = center(dft2(spectrum, Direction::Inverse));
    normalize(w);
    return w;
}

std::string BlrReport::describe() const {
    std::string out = fmt::format("blr design: {} iterations, outside-focus energy fraction {:.6g}, "
                                  "annulus amplitude deviation {:.3g}",
                                  iterations, outside_fraction, annulus_deviation);
    if (stagnated) out += "\nwarning: design residual stagnated for more than half of the iterations";
    return out;
}

BlrLens make_blr_lens(const LensSpec& spec) {
    LensSpec s = spec;
    s.kind = LensKind::BLR;
    validate(s);
    const std::size_t m = s.m;
    const RealGrid mask = annulus_mask(m, s.r_inner, s.r_outer);
    const RealGrid disk = focus_disk(m, s.focus_radius);
    std::size_t support = 0;
    for (double v : mask.data) support += v != 0.0;
    if (support == 0) throw ValidationError(fmt::format("empty annulus ({}, {}] at m={}", s.r_inner, s.r_outer, m));

    // Unit amplitude on the annulus, seeded uniform phase; the spectrum is
    // taken relative to the centered lens so the focus disk sits at m/2.
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    ComplexGrid spectrum(m, m);
    for (std::size_t p = 0; p < spectrum.data.size(); ++p) {
        const double t = phase(rng);
        spectrum.data[p] = mask.data[p] != 0.0 ? std::polar(1.0, t) : cplx{0.0, 0.0};
    }

    ComplexGrid w = center(dft2(spectrum, Direction::Inverse));
    BlrReport rep;
    double prev = outside_energy(w, disk);
    std::size_t run = 0, longest = 0;
    for (std::size_t it = 0; it < s.design_iters; ++it) {
        for (std::size_t p = 0; p < w.data.size(); ++p)
            if (disk.data[p] == 0.0) w.data[p] = 0.0;
        ComplexGrid f = dft2(w, Direction::Forward);
        for (std::size_t p = 0; p < f.data.size(); ++p) {
            if (mask.data[p] == 0.0) {
                f.data[p] = 0.0;
                continue;
            }
            const double r = std::abs(f.data[p]);
            f.data[p] = r > 0.0 ? f.data[p] / r : cplx{1.0, 0.0};
        }
        w = dft2(f, Direction::Inverse);
        const double cur = outside_energy(w, disk);
        run = cur >= prev ? run + 1 : 0;
        longest = std::max(longest, run);
        prev = cur;
        rep.iterations = it + 1;
    }
    normalize(w);

    rep.outside_fraction = outside_energy(w, disk);
    const ComplexGrid f = dft2(w, Direction::Forward);
    const double level = 1.0 / std::sqrt(static_cast<double>(support));
    for (std::size_t p = 0; p < f.data.size(); ++p)
        if (mask.data[p] != 0.0)
            rep.annulus_deviation = std::max(rep.annulus_deviation, std::abs(std::abs(f.data[p]) - level) / level);
    rep.stagnated = 2 * longest > s.design_iters;
    return {std::move(w), rep};
}

ComplexGrid make_lens(const LensSpec& spec) {
    return spec.kind == LensKind::Small ? make_small_lens(spec) : make_blr_lens(spec).omega;
}

}  // namespace ptycho
