#pragma once

#include <span>
#include <vector>

#include "ptycho/forward.hpp"
#include "ptycho/types.hpp"

namespace ptycho {

/// Moduli at or below this are treated as zero by the amplitude projector.
inline constexpr double kZeroModulus = 1e-300;

/// Entrywise a(i) z(i)/|z(i)|, and a(i) (phase 0) where z(i) is zero.
void project_amplitude_into(std::span<const cplx> z, std::span<const double> a, std::span<cplx> out);
CVec project_amplitude(std::span<const cplx> z, std::span<const double> a);

/// Nearest-point map onto the torus {z : |z| = a}.
class AmplitudeProjector {
public:
    explicit AmplitudeProjector(MeasurementStack a);
    const MeasurementStack& amplitudes() const { return a_; }
    double norm_a() const { return norm_a_; }
    FrameStack apply(const FrameStack& z) const;

private:
    MeasurementStack a_;
    double norm_a_ = 0.0;
};

FrameStack project_amplitude(const AmplitudeProjector& P, const FrameStack& z);

/// Orthogonal projector onto the range of FQ, applied matrix-free as
/// F Q (Q*Q)^+ Q* F*. Holds a reference; the model must outlive it.
class RangeProjector {
public:
    explicit RangeProjector(const ForwardModel& model) : model_(&model) {}
    const ForwardModel& model() const { return *model_; }

    FrameStack apply(const FrameStack& z) const;
    /// (Q*Q)^+ Q* F* z.
    ComplexGrid object_of(const FrameStack& z) const;

private:
    const ForwardModel* model_;
};

FrameStack project_range(const RangeProjector& P, const FrameStack& z);

/// keep(i) = a(i) > threshold, threshold the (1 - keep) quantile of a.
struct TruncationMask {
    std::vector<unsigned char> keep;
    double threshold = 0.0;
    std::size_t kept() const;
};

/// Drops the L - ceil(keep L) smallest entries (and any ties with the largest
/// dropped value). With keep = 1 the threshold lies strictly below min(a).
TruncationMask truncation_mask(const MeasurementStack& a, double percentile_keep);
TruncationMask truncation_mask(std::span<const double> a, double percentile_keep);

}  // namespace ptycho
