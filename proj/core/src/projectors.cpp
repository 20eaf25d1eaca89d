#include "ptycho/projectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ptycho/fft.hpp"
#include "ptycho/vecops.hpp"

namespace ptycho {

void project_amplitude_into(std::span<const cplx> z, std::span<const double> a, std::span<cplx> out) {
    if (z.size() != a.size() || out.size() != z.size()) throw ValidationError("project_amplitude: length mismatch");
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double r = std::sqrt(std::norm(z[i]));
        out[i] = r > kZeroModulus ? z[i] * (a[i] / r) : cplx{a[i], 0.0};
    }
}

CVec project_amplitude(std::span<const cplx> z, std::span<const double> a) {
    CVec out(z.size());
    project_amplitude_into(z, a, out);
    return out;
}

AmplitudeProjector::AmplitudeProjector(MeasurementStack a) : a_(std::move(a)) {
    for (double v : a_.data)
        if (!(v >= 0.0)) throw ValidationError("AmplitudeProjector: amplitudes must be non-negative");
    norm_a_ = norm(std::span<const double>(a_.data));
}

FrameStack AmplitudeProjector::apply(const FrameStack& z) const {
    if (z.frames != a_.frames || z.side != a_.side) throw ValidationError("project_amplitude: stack shape mismatch");
    FrameStack out(z.frames, z.side);
    project_amplitude_into(z.data, a_.data, out.data);
    return out;
}

FrameStack project_amplitude(const AmplitudeProjector& P, const FrameStack& z) { return P.apply(z); }

ComplexGrid RangeProjector::object_of(const FrameStack& z) const {
    FrameStack tmp = z;
    dft2_frames(tmp, Direction::Inverse);
    ComplexGrid psi = scatter_adjoint(*model_, tmp);
    const RealGrid& pinv = model_->qtq_pinv();
    for (std::size_t p = 0; p < psi.size(); ++p) psi.data[p] *= pinv.data[p];
    return psi;
}

FrameStack RangeProjector::apply(const FrameStack& z) const { return forward_frames(*model_, object_of(z)); }

FrameStack project_range(const RangeProjector& P, const FrameStack& z) { return P.apply(z); }

std::size_t TruncationMask::kept() const {
    return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 1));
}

TruncationMask truncation_mask(std::span<const double> a, double percentile_keep) {
    if (!(percentile_keep > 0.0 && percentile_keep <= 1.0))
        throw ValidationError(fmt::format("truncation_mask: keep fraction {} not in (0, 1]", percentile_keep));
    TruncationMask mask;
    const std::size_t L = a.size();
    if (L == 0) return mask;
    std::vector<double> sorted(a.begin(), a.end());
    std::sort(sorted.begin(), sorted.end());
    // Tolerate keep*L landing a rounding error above an integer.
    const auto kept = static_cast<std::size_t>(std::ceil(percentile_keep * static_cast<double>(L) - 1e-9));
    const std::size_t dropped = L - std::min(kept, L);
    mask.threshold = dropped == 0 ? std::nextafter(sorted.front(), -std::numeric_limits<double>::infinity())
                                  : sorted[dropped - 1];
    mask.keep.resize(L);
    for (std::size_t i = 0; i < L; ++i) mask.keep[i] = a[i] > mask.threshold ? 1 : 0;
    return mask;
}

TruncationMask truncation_mask(const MeasurementStack& a, double percentile_keep) {
    return truncation_mask(std::span<const double>(a.data), percentile_keep);
}

}  // namespace ptycho
