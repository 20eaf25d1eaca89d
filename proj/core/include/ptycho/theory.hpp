#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ptycho/types.hpp"

namespace ptycho {

/// rho(z) = 1/2 || |z| - a ||^2.
double rho(std::span<const cplx> z, std::span<const double> a);

/// Wirtinger gradient 1/2 (I - P_a) z; entry k is 1/2 (c_k - a_k) exp(i phi_k).
/// The directional derivative of rho along w is 2 Re <grad, w>.
/// Throws DomainError on a zero entry.
CVec grad_rho(std::span<const cplx> z, std::span<const double> a);

/// Second derivative of rho(z + t w) at t = 0:
/// sum_j b_j^2 (1 - (a_j / c_j) sin^2(theta_j - phi_j)).
double hessian_form(std::span<const cplx> z, std::span<const cplx> w, std::span<const double> a);

/// z = b exp(i phi) with phi in [0, 2 pi) and phi = 0 where b = 0.
struct PolarVector {
    RVec b;
    RVec phi;
    static PolarVector from(std::span<const cplx> z);
    CVec to_complex() const;
};

struct UniquePreimage {
    cplx eta;
};
struct PairPreimage {
    cplx eta_inner;  // (|zeta| - a) zeta / |zeta|
    cplx eta_outer;  // (|zeta| + a) zeta / |zeta|
};
struct CirclePreimage {
    double radius;
};
using ResidualPreimage = std::variant<UniquePreimage, PairPreimage, CirclePreimage>;

/// All eta with eta - P_a eta = zeta for a scalar zeta and a > 0.
ResidualPreimage invert_residual_scalar(cplx zeta, double a);

struct Region {
    bool infinite = false;  // Y_inf
    std::size_t k = 0;      // Y_k when finite
    friend bool operator==(const Region&, const Region&) = default;
};

/// Y_inf if some |eta_i| equals a_i (1e-12 relative), else Y_k with k the
/// number of entries having two preimage branches.
Region classify_region(std::span<const cplx> eta, std::span<const double> a);

/// sum (|eta| - a/2)^2 - 1/4 sum a^2; zero at every fixed point of AP.
double stagnation_sphere_residual(std::span<const cplx> eta, std::span<const double> a);

struct ResidualRatios {
    RVec alpha;
    RVec beta;
    /// First step whose residual fell below 1e-14 ||a||; ratios stop there.
    std::optional<std::size_t> terminal_step;
};

/// alpha_l = r_a[l] / r_a[l-1] and beta_l = r_s[l] / r_s[l-1], where
/// r_a[l] = ||(P_a - I) zeta^l|| and r_s[l] = ||(P_S - I) P_a zeta^l||.
ResidualRatios residual_ratios(std::span<const double> amp_residuals, std::span<const double> range_residuals,
                               double norm_a);

/// Right side minus left side of the phase-step inequality between two
/// consecutive AP iterates; positive off the fixed set.
double key_step_gap(std::span<const double> a, std::span<const cplx> zeta_prev, std::span<const cplx> zeta);

/// Dense frame S with i.i.d. complex standard normal entries.
struct GenericFrame {
    Eigen::MatrixXcd S;
    Eigen::MatrixXcd basis;  // orthonormal basis of range(S)
    std::size_t M = 0;
    std::size_t N = 0;
    bool below_injectivity_bound = false;  // M < 4N - 2

    CVec apply(std::span<const cplx> psi) const;
    /// S (S*S)^{-1} S* z.
    CVec project(std::span<const cplx> z) const;
    Eigen::MatrixXcd projector() const { return basis * basis.adjoint(); }
};

/// Redraws until cond(S) <= 1e12.
GenericFrame make_generic_frame(std::size_t N, std::size_t M, std::uint64_t seed);

struct LabRun {
    std::size_t iterations = 0;
    bool converged = false;
    CVec zeta;
    RVec eps0;            // phase-aligned distance to S psi0, / ||a||
    RVec amp_residual;    // ||(P_a - I) zeta^l|| / ||a||
    RVec range_residual;  // ||(P_S - I) P_a zeta^l|| / ||a||
    RVec step;            // ||zeta^{l+1} - zeta^l|| / ||a||
};

/// AP on a generic frame with a known solution S psi0.
class GenericFrameLab {
public:
    GenericFrameLab(std::size_t N, std::size_t M, std::uint64_t seed);

    const GenericFrame& frame() const { return frame_; }
    const CVec& psi0() const { return psi0_; }
    const CVec& solution() const { return solution_; }
    const RVec& amplitudes() const { return a_; }
    double norm_a() const { return norm_a_; }

    /// S psi0 + delta with ||delta|| = rel ||S psi0||.
    CVec perturbed_start(double rel, std::uint64_t seed) const;
    /// S applied to a complex Gaussian vector.
    CVec random_start(std::uint64_t seed) const;

    /// Runs AP for at most max_iter steps. Stops early once eps0 and both
    /// residuals are below tol, or once a step is shorter than step_tol ||a||.
    LabRun run_ap(CVec zeta0, std::size_t max_iter, double tol, double step_tol = 0.0) const;

private:
    GenericFrame frame_;
    CVec psi0_;
    CVec solution_;
    RVec a_;
    double norm_a_ = 0.0;
};

}  // namespace ptycho
