#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ptycho/forward.hpp"
#include "ptycho/projectors.hpp"
#include "ptycho/types.hpp"

namespace ptycho {

/// out = A in for a Hermitian operator A.
using LinearOp = std::function<void(std::span<const cplx> in, std::span<cplx> out)>;

struct EigenResult {
    double eigenvalue = 0.0;  // Rayleigh quotient of A
    CVec vector;              // unit norm
    std::size_t iterations = 0;
    double residual = 0.0;  // ||A v - lambda v||
    bool converged = false;
};

struct PowerOptions {
    double tol = 1e-8;
    std::size_t max_iter = 5000;
    std::uint64_t seed = 0;
    /// Iterates with A + shift I so that the largest algebraic eigenvalue
    /// dominates when the spectrum of A is bounded below by -shift.
    double shift = 0.0;
    /// Optional start vector; the seeded uniform draw is used when empty.
    CVec start;
};

/// Power iteration; converged when ||A v - lambda v|| <= tol |lambda|.
/// Hitting max_iter returns the current iterate flagged unconverged.
EigenResult power_top_eigpair(const LinearOp& apply, std::size_t dim, const PowerOptions& opt = {});

/// Phase of the unitary DFT of the lens, 1 where the DFT vanishes.
CVec omega_tilde(const ComplexGrid& omega);

/// Integer offset A_i - A_j between window anchors (rows, cols).
struct FrameOffset {
    std::ptrdiff_t dr = 0;
    std::ptrdiff_t dc = 0;
};

FrameOffset frame_offset(const ForwardModel& model, std::size_t i, std::size_t j);
bool windows_overlap(const ForwardModel& model, std::size_t i, std::size_t j);

/// Coverage-normalized product kernel of frames i and j:
/// M_ij(s) = p_i(s) conj(p_j(s + Delta)) / (Q*Q)(A_i + s) on the overlap,
/// zero elsewhere, with Delta = A_i - A_j.
ComplexGrid overlap_kernel(const ForwardModel& model, std::size_t i, std::size_t j);

/// V_ij(Phi) = (1/m^2) sum_s M_ij(s) exp(+2 pi i Phi.s / m) on the m x m lag
/// grid, evaluated by the direct double sum. The block (i, j) of the range
/// projector is Omega(mu, nu) = exp(-2 pi i nu.Delta / m) V_ij(mu - nu).
/// Throws ValidationError for disjoint windows.
ComplexGrid ambiguity_kernel(const ForwardModel& model, std::size_t i, std::size_t j);

/// Same kernel through one unitary DFT: V_ij = dft2(M_ij) / m.
ComplexGrid ambiguity_kernel_fft(const ForwardModel& model, std::size_t i, std::size_t j);

/// Omega((i, mu), (j, nu)) assembled from the ambiguity kernel.
cplx omega_entry(const ForwardModel& model, const ComplexGrid& V, std::size_t i, std::size_t j, std::size_t mu,
                 std::size_t nu);

/// Connection graph on diffraction pixels:
/// S = diag(a w~) Omega diag(a w~)^*, D = row sums of a_i |Omega| a_j.
/// Holds a reference to the model; the model must outlive it.
class ConnectionGraph {
public:
    ConnectionGraph(const ForwardModel& model, const MeasurementStack& a);

    std::size_t dim() const { return a_.size(); }
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const { return pairs_; }
    const CVec& lens_phase() const { return omega_tilde_; }
    const RVec& degree() const { return degree_; }
    const MeasurementStack& amplitudes() const { return a_; }

    /// S x. Omega is the range projector, so the sum over overlap pairs is
    /// carried out as one inverse DFT, scatter, gather and forward DFT.
    void apply_S(std::span<const cplx> in, std::span<cplx> out) const;
    /// S x accumulated pair by pair from the product kernels.
    void apply_S_pairwise(std::span<const cplx> in, std::span<cplx> out) const;
    /// D^{-1/2} S D^{-1/2} x.
    void apply_normalized(std::span<const cplx> in, std::span<cplx> out) const;

private:
    const ForwardModel* model_;
    MeasurementStack a_;
    std::vector<std::pair<std::size_t, std::size_t>> pairs_;
    CVec omega_tilde_;
    CVec weight_;  // a * omega_tilde, per stacked entry
    RVec degree_;
    RVec inv_sqrt_degree_;
};

/// Throws DegenerateError naming the first vertex with zero degree.
ConnectionGraph build_gcl(const ForwardModel& model, const MeasurementStack& a);

struct InitResult {
    FrameStack zeta;
    EigenResult eig;
};

/// Top eigenvector u of D^{-1/2} S D^{-1/2}, v = D^{-1/2} u, zeta = P_FQ P_a v.
/// The lens phase w~ enters S as a diagonal unitary similarity, so the
/// eigenvector carries it as a factor; with remove_lens_phase it is divided
/// out before P_a.
InitResult gcl_ps_init(const ConnectionGraph& graph, const RangeProjector& Pfq, const AmplitudeProjector& Pa,
                       PowerOptions opt = {}, bool remove_lens_phase = true);

/// Top eigenvector of T_a P_FQ T_a, zeta = P_FQ P_a v.
InitResult tps_init(const RangeProjector& Pfq, const AmplitudeProjector& Pa, const TruncationMask& mask,
                    PowerOptions opt = {});

}  // namespace ptycho
