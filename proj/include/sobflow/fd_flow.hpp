/// @file fd_flow.hpp
/// @brief Radial fast diffusion  v_t = Lap v^m  with extinction handling, and
/// the functionals J, Q, Lambda, K, H_d, H_d' evaluated along it.
///
/// The scheme is backward Euler in time (by default with local Richardson
/// extrapolation), collocation with the 6th-order radial Laplacian in space,
/// and Newton's method for the unknown w = v^m.
/// For m = (d-2)/(d+2) the outer boundary carries the Robin condition of the
/// harmonic far field w ~ r^{2-d} (exact for the Aubin-Talenti profile); for
/// other exponents it is a no-flux wall.

#pragma once

#include "sobflow/check_report.hpp"
#include "sobflow/radial.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace sobflow {

enum class Boundary { automatic, harmonic_robin, no_flux };

struct FlowParams {
    int d = 5;
    double m = 3.0 / 7.0;
    /// Initial step; 0 picks T_upper/400 for the extinction flow and
    /// t_final/1000 otherwise.
    double dt0 = 0.0;
    /// With clock scaling the step is dt0 * (J/J0)^{2/d}, proportional to the
    /// remaining lifetime of the extinction flow.
    bool clock_scaled_dt = true;
    /// 1: backward Euler. 2: backward Euler with local Richardson
    /// extrapolation (second order, L-stable).
    int time_order = 2;
    double eps_ext = 1e-4;
    double t_final = std::numeric_limits<double>::infinity();
    int max_steps = 200000;
    double newton_tol = 1e-12;
    int newton_max_iter = 40;
    int max_halvings = 30;
    Boundary boundary = Boundary::automatic;
    /// Keep the field every k accepted steps (0: only t = 0 and the end).
    int snapshot_every = 0;
    /// Number of late samples used for the extinction-time fit.
    int extinction_fit_points = 12;

    /// m = (d-2)/(d+2).
    static FlowParams sobolev(int d);
    /// m = d/(d+2) (equals 1/2 for d = 2); runs to t_final.
    static FlowParams ccl(int d, double t_final);

    bool sobolev_exponent() const;
    /// m is one of the two exponents the theory is stated for.
    bool in_scope() const;
};

struct FunctionalSample {
    double t = 0.0;
    double J = 0.0;        // int v^{m+1}
    double Q = 0.0;        // ||grad v^m||^2 J^{-(d-2)/d}
    double Lambda = 0.0;   // ||grad v^m||^2 / J
    double K = 0.0;        // int v^{m-1} |Lap v^m + Lambda v|^2
    double H = 0.0;        // int v (-Lap)^{-1} v - S_d ||v||_{2d/(d+2)}^2  (NaN for d = 2)
    double Hprime = 0.0;   // analytic dH/dt along the flow (NaN for d = 2)
    double mass = 0.0;     // int v
    double grad_sq = 0.0;  // ||grad v^m||^2
    double sup_star = 0.0; // sup (1+r^2)^{d+2} v
    double K_masked_fraction = 0.0;
};

/// Functionals of v for exponent m. S_d comes from ConstantsTable::shared().
FunctionalSample functionals(const RadialField& v, double m);
FunctionalSample functionals(const RadialField& v, double m, double S);

struct Snapshot {
    double t;
    RadialField v;
};

enum class Termination { extinct, horizon, max_steps, error };
std::string to_string(Termination t);

struct FlowTrace {
    FlowParams params;
    std::vector<FunctionalSample> samples;
    std::vector<Snapshot> snapshots;  // t = 0, every snapshot_every steps, and the final state
    double T_hat = std::numeric_limits<double>::quiet_NaN();
    Termination termination = Termination::error;
    std::string message;
    int steps = 0;
    int rejections = 0;
    double dt0 = 0.0;
    int grid_n = 0;
    double r_max = 0.0;

    const FunctionalSample& initial() const { return samples.front(); }
};

using FlowObserver = std::function<void(double t, const RadialField& v)>;

/// Throws std::invalid_argument for bad initial data and NumericalError when
/// the step controller gives up.
FlowTrace run_flow(const RadialField& v0, const FlowParams& params, const FlowObserver& observer = {});

/// (1/4)(d+2) S_d J0^{2/d}.
double extinction_upper_bound(const RadialField& v0);

/// (2d/(d+2)) S_d^{-1} J0^{-2/d}.
double kappa(const RadialField& v0, int d);

/// Centered derivative of y(t) on a nonuniform grid at interior indices 1..n-2.
std::vector<double> centered_derivative(const std::vector<double>& t, const std::vector<double>& y);

/// Finite-difference dH/dt against 2 J^{2/d} [S_d ||grad w||^2 - ||w||_{2*}^2].
CheckReport hd_derivative_check(const FlowTrace& trace, double tol = 1e-2);

/// H'' = -(m+1) Lambda H' - 4 m S_d J^{2/d} K and Q' = -2 m J^{2/d-1} K,
/// plus monotonicity of Q. Refuses d < 5.
CheckReport second_derivative_check(const FlowTrace& trace, double tol = 3e-2);

/// The five estimates on J and T, evaluated with T = T_hat.
CheckReport decay_bounds_check(const FlowTrace& trace, double tol = 1e-2);

/// H nondecreasing per step and H <= 0.
CheckReport monotonicity_check(const FlowTrace& trace, double rel_tol = 1e-8);

struct VanishingPoint {
    double t;
    double lambda;
    double deviation;      // sup |v / vbar - 1| (weight exponent 0)
    double weighted;       // sup (1+r^2)^{d+2} |v / vbar - 1|
    double normalized;     // (T_hat - t)^{-(d+2)/4} * deviation
};

/// Late-time comparison of v with the best-fitting separated solution
/// lambda^{-(d+2)/2} vbar_T(t, x/lambda). Needs snapshots (snapshot_every > 0)
/// and an extinct trace.
std::vector<VanishingPoint> vanishing_profile_diagnostic(const FlowTrace& trace, double decades = 1.0);

/// CSV with header t,J,Q,Lambda,K,H,Hprime,mass.
std::string trace_csv(const FlowTrace& trace);

}  // namespace sobflow
