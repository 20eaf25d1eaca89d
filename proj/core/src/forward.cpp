#include "ptycho/forward.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "ptycho/fft.hpp"

namespace ptycho {
namespace {

RealGrid accumulate_qtq(const ForwardModel& model, std::vector<unsigned char>* covered) {
    const std::size_t n = model.n(), m = model.m();
    RealGrid q(n, n, 0.0);
    if (covered) covered->assign(n * n, 0);
    for (std::size_t k = 0; k < model.frames(); ++k) {
        const WindowAnchor& w = model.anchor(k);
        const ComplexGrid& p = model.probe(k);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) {
                q(w.row + a, w.col + b) += std::norm(p(a, b));
                if (covered) (*covered)[(w.row + a) * n + w.col + b] = 1;
            }
    }
    return q;
}

void check_covered_nonzero(const RealGrid& q, const std::vector<unsigned char>& covered) {
    for (std::size_t p = 0; p < q.size(); ++p)
        if (covered[p] && q.data[p] == 0.0)
            throw DegenerateError(fmt::format("Q*Q vanishes at covered pixel ({}, {}): lens is zero there in every window",
                                              p / q.cols, p % q.cols));
}

}  // namespace

ForwardModel::ForwardModel(IlluminationScheme scheme, ComplexGrid omega)
    : scheme_(std::move(scheme)), omega_(std::move(omega)) {
    const std::size_t m = scheme_.m;
    if (omega_.rows != m || omega_.cols != m)
        throw ValidationError(fmt::format("lens is {}x{}, scheme window is {}x{}", omega_.rows, omega_.cols, m, m));
    if (m == 0 || m > scheme_.n) throw ValidationError("window side must satisfy 0 < m <= n");
    const double hi = static_cast<double>(scheme_.n - m);
    anchors_.reserve(scheme_.frames());
    probes_.reserve(scheme_.frames());
    for (const Position& p : scheme_.positions) {
        if (!(p.x >= 0.0 && p.x <= hi && p.y >= 0.0 && p.y <= hi))
            throw ValidationError(fmt::format("position ({}, {}) leaves the object", p.x, p.y));
        const WindowAnchor w = anchor_of(p);
        ComplexGrid probe = shifted_probe(omega_, w.frac_x, w.frac_y);
        for (cplx& v : probe.data)
            if (std::abs(v) < kLensZero) v = 0.0;
        anchors_.push_back(w);
        probes_.push_back(std::move(probe));
    }
    std::vector<unsigned char> covered;
    qtq_ = accumulate_qtq(*this, &covered);
    check_covered_nonzero(qtq_, covered);
    qtq_pinv_ = RealGrid(scheme_.n, scheme_.n, 0.0);
    for (std::size_t p = 0; p < qtq_.size(); ++p)
        if (qtq_.data[p] > 0.0) qtq_pinv_.data[p] = 1.0 / qtq_.data[p];
}

FrameStack extract_frames(const ForwardModel& model, const ComplexGrid& psi) {
    const std::size_t n = model.n(), m = model.m();
    if (psi.rows != n || psi.cols != n) throw ValidationError("extract_frames: object size mismatch");
    FrameStack z(model.frames(), m);
    for (std::size_t k = 0; k < model.frames(); ++k) {
        const WindowAnchor& w = model.anchor(k);
        const ComplexGrid& p = model.probe(k);
        auto f = z.frame(k);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) f[a * m + b] = p(a, b) * psi(w.row + a, w.col + b);
    }
    return z;
}

ComplexGrid scatter_adjoint(const ForwardModel& model, const FrameStack& z) {
    const std::size_t n = model.n(), m = model.m();
    if (z.frames != model.frames() || z.side != m) throw ValidationError("scatter_adjoint: stack shape mismatch");
    ComplexGrid out(n, n);
    for (std::size_t k = 0; k < model.frames(); ++k) {
        const WindowAnchor& w = model.anchor(k);
        const ComplexGrid& p = model.probe(k);
        auto f = z.frame(k);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) out(w.row + a, w.col + b) += std::conj(p(a, b)) * f[a * m + b];
    }
    return out;
}

RealGrid qtq_diagonal(const ForwardModel& model) {
    std::vector<unsigned char> covered;
    RealGrid q = accumulate_qtq(model, &covered);
    check_covered_nonzero(q, covered);
    return q;
}

FrameStack forward_frames(const ForwardModel& model, const ComplexGrid& psi) {
    FrameStack z = extract_frames(model, psi);
    dft2_frames(z, Direction::Forward);
    return z;
}

MeasurementStack forward_measure(const ForwardModel& model, const ComplexGrid& psi) {
    const FrameStack z = forward_frames(model, psi);
    MeasurementStack a(z.frames, z.side);
    for (std::size_t i = 0; i < z.size(); ++i) a.data[i] = std::abs(z.data[i]);
    return a;
}

NoisyMeasurement add_noise(const MeasurementStack& a, const NoiseSpec& spec) {
    if (!(spec.sigma_std >= 0.0)) throw ValidationError("add_noise: sigma_std must be >= 0");
    NoisyMeasurement out{a, 0.0};
    if (spec.sigma_std == 0.0) return out;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, spec.sigma_std);
    double diff = 0.0, total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = a.data[i];
        if (ai < 0.0) throw ValidationError("add_noise: amplitudes must be non-negative");
        const double sigma = gauss(rng);
        const double noisy = std::sqrt(std::abs(ai * ai + sigma * ai));
        out.a.data[i] = noisy;
        diff += (noisy - ai) * (noisy - ai);
        total += noisy * noisy;
    }
    out.eps_sigma = total > 0.0 ? std::sqrt(diff / total) : 0.0;
    return out;
}

ComplexGrid make_phantom(std::size_t n) {
    struct Blob {
        double cx, cy, r, v;
    };
    static constexpr Blob blobs[] = {
        {0.30, 0.30, 0.15, 0.6}, {0.70, 0.40, 0.10, -0.5}, {0.50, 0.75, 0.20, 0.4}, {0.20, 0.70, 0.08, 0.7},
        {0.80, 0.80, 0.06, 0.5},
    };
    RealGrid g(n, n);
    double lo = 1e300, hi = -1e300;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double y = static_cast<double>(r) / static_cast<double>(n);
            const double x = static_cast<double>(c) / static_cast<double>(n);
            double v = 0.3 * std::sin(2.0 * std::numbers::pi * 3.0 * x) * std::cos(2.0 * std::numbers::pi * 2.0 * y);
            for (const Blob& b : blobs)
                v += b.v * std::exp(-((x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy)) / (2.0 * b.r * b.r));
            g(r, c) = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    ComplexGrid psi(n, n);
    const double scale = hi > lo ? 1.0 / (hi - lo) : 0.0;
    for (std::size_t p = 0; p < g.size(); ++p)
        psi.data[p] = std::polar(1.0, std::numbers::pi * (g.data[p] - lo) * scale);
    return psi;
}

ComplexGrid random_object(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    ComplexGrid psi(n, n);
    for (cplx& v : psi.data) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v = {re, im};
    }
    return psi;
}

}  // namespace ptycho
