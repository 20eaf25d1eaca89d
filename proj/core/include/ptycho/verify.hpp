#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ptycho/types.hpp"

namespace ptycho {

struct PropertyResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string note;
};

using GradientFn = std::function<CVec(std::span<const cplx>, std::span<const double>)>;

/// Max relative error between central differences of rho along random
/// directions and 2 Re <grad(z), w>, at a random nowhere-zero z.
double gradient_fd_error(const GradientFn& grad, std::uint64_t seed, std::size_t directions = 10);

/// Max relative error between second differences of rho(z + t w) and
/// hessian_form(z, w).
double hessian_fd_error(std::uint64_t seed, std::size_t directions = 10);

/// An AP run on a generic frame where ||zeta^{l+1} - zeta^l|| exceeds
/// ||zeta^l - zeta^{l-1}||.
struct StepWitness {
    bool found = false;
    std::size_t N = 0;
    std::size_t M = 0;
    std::uint64_t seed = 0;
    std::size_t iteration = 0;  // l
    double step_before = 0.0;   // ||zeta^l - zeta^{l-1}|| / ||a||
    double step_after = 0.0;    // ||zeta^{l+1} - zeta^l|| / ||a||
    std::string describe() const;
};

/// Scans seeds of the N=2, M=6 lab with random starts.
StepWitness find_step_increase_witness(std::uint64_t first_seed = 0, std::size_t max_seeds = 200);

/// Lens with i.i.d. entries of modulus in [0.5, 1.5] and uniform phase.
ComplexGrid random_lens(std::size_t m, std::uint64_t seed);

/// Invariant and oracle checks at small built-in sizes.
std::vector<PropertyResult> run_property_suite();

/// One line per property; the witness and canary lines carry their details.
std::string format_report(const std::vector<PropertyResult>& results);

}  // namespace ptycho
