// Backward-Euler step for radial nonlinear diffusion
//
//     V(z_new) - dt * Lap z_new = v_old     (every node but the last)
//     z_r + robin * z = 0                   (last node)
//
// solved by Newton's method with a banded LU (LAPACK dgbsv).

#pragma once

#include "sobflow/radial.hpp"

#include <functional>
#include <span>
#include <vector>

namespace sobflow::detail {

struct Constitutive {
    std::function<double(int, double)> value;  // V(z) at node i
    std::function<double(int, double)> slope;  // V'(z) at node i
    std::function<double(int, double)> inverse;  // z = V^{-1}(v) at node i
    bool positive_unknown = false;             // z must stay > 0; convergence measured relative to |z|
    double scale_floor = 0.0;                  // lower bound of that relative scale
};

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double last_update = 0.0;
};

struct StepResult {
    bool ok = false;
    std::vector<double> v, z;
};

class ImplicitDiffusion {
public:
    /// robin = 0 gives a no-flux wall.
    ImplicitDiffusion(const RadialGrid& grid, double robin);

    NewtonOutcome step(std::span<const double> v_old, std::vector<double>& z, double dt, const Constitutive& law,
                       double tol, int max_iter) const;

    /// order 1: one backward-Euler step. order 2: local Richardson
    /// extrapolation 2 * (two half steps) - (one full step) in v.
    StepResult advance(std::span<const double> v_old, std::span<const double> z_old, double dt, const Constitutive& law,
                       double tol, int max_iter, int order) const;

    /// Lap z at every node (the last row uses the one-sided stencil).
    std::vector<double> laplacian(std::span<const double> z) const;

private:
    int n_;
    int kl_ = 0, ku_ = 0;
    double robin_;
    std::vector<OperatorRow> lap_;
    OperatorRow bc_;
};

}  // namespace sobflow::detail
