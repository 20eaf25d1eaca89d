#pragma once

#include <cstdint>
#include <vector>

#include "ptycho/core.hpp"
#include "ptycho/types.hpp"

namespace ptycho {

/// Lens magnitudes below this are treated as exact zeros.
inline constexpr double kLensZero = 1e-12;

/// The linear map Q (object -> frames) together with the diagonal of Q*Q.
///
/// Frame k multiplies the object window anchored at floor(x_k) by the lens
/// shifted by the fractional part of x_k. Immutable after construction.
class ForwardModel {
public:
    /// Throws DegenerateError when a pixel inside some window receives zero
    /// illumination from every window covering it.
    ForwardModel(IlluminationScheme scheme, ComplexGrid omega);

    const IlluminationScheme& scheme() const { return scheme_; }
    const ComplexGrid& omega() const { return omega_; }
    std::size_t n() const { return scheme_.n; }
    std::size_t m() const { return scheme_.m; }
    std::size_t frames() const { return scheme_.frames(); }

    const WindowAnchor& anchor(std::size_t k) const { return anchors_[k]; }
    /// Effective per-frame lens (fractionally shifted, tiny entries zeroed).
    const ComplexGrid& probe(std::size_t k) const { return probes_[k]; }
    /// Diagonal of Q*Q; zero exactly on pixels outside every window.
    const RealGrid& qtq() const { return qtq_; }
    /// Pseudo-inverse of the diagonal of Q*Q.
    const RealGrid& qtq_pinv() const { return qtq_pinv_; }

private:
    IlluminationScheme scheme_;
    ComplexGrid omega_;
    std::vector<WindowAnchor> anchors_;
    std::vector<ComplexGrid> probes_;
    RealGrid qtq_;
    RealGrid qtq_pinv_;
};

/// Q psi.
FrameStack extract_frames(const ForwardModel& model, const ComplexGrid& psi);

/// Q* z, the exact adjoint of extract_frames.
ComplexGrid scatter_adjoint(const ForwardModel& model, const FrameStack& z);

/// Diagonal of Q*Q recomputed from the probes. Throws DegenerateError if a
/// covered pixel is zero.
RealGrid qtq_diagonal(const ForwardModel& model);

/// F Q psi with the unitary frame-wise DFT.
FrameStack forward_frames(const ForwardModel& model, const ComplexGrid& psi);

/// a = |F Q psi|.
MeasurementStack forward_measure(const ForwardModel& model, const ComplexGrid& psi);

struct NoiseSpec {
    double sigma_std = 0.0;
    std::uint64_t seed = 0;
};

struct NoisyMeasurement {
    MeasurementStack a;
    double eps_sigma = 0.0;  // ||a_noisy - a|| / ||a_noisy||
};

/// Intensity noise a_noisy = sqrt(|a^2 + sigma a|), sigma ~ N(0, sigma_std^2)
/// drawn i.i.d. per entry.
NoisyMeasurement add_noise(const MeasurementStack& a, const NoiseSpec& spec);

/// Smooth gray-scale image g in [0, 1] mapped onto the unit circle,
/// psi = exp(i pi g).
ComplexGrid make_phantom(std::size_t n);

/// Complex Gaussian n x n grid with E|psi(p)|^2 = 1.
ComplexGrid random_object(std::size_t n, std::uint64_t seed);

}  // namespace ptycho
