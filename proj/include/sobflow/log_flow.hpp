/// @file log_flow.hpp
/// @brief The two-dimensional side: v_t = Lap log(v/mu), H_2, the Onofri and
/// log-HLS deficits, the Legendre gap, the exponential-moment curve h(t), the
/// Onofri limit of the GN quotients and the Cauchy-Schwarz probe.
///
/// mu(x) = 1/(pi (1+|x|^2)^2) throughout.

#pragma once

#include "sobflow/check_report.hpp"
#include "sobflow/radial.hpp"

#include <limits>
#include <string>
#include <vector>

namespace sobflow {

/// int psi dmu with the far-field value of psi integrated exactly:
/// psi(r_max) + sum_i w_i mu_i (psi_i - psi(r_max)).
double mu_expectation(const RadialField& psi);

/// log int e^g dmu, evaluated in log-sum-exp form.
double log_exp_moment(const RadialField& g);

struct OnofriInput {
    RadialField g;
    double grad_sq;       // int |grad g|^2
    double mean;          // int g dmu
    double log_exp_mean;  // log int e^g dmu

    /// Throws std::invalid_argument unless g lives on a d = 2 grid and all
    /// cached integrals are finite.
    static OnofriInput make(RadialField g);
};

/// (1/16 pi) int |grad g|^2 + int g dmu - log int e^g dmu.
double onofri_deficit(const OnofriInput& g);

struct MassOneDensity {
    RadialField v;          // renormalized to unit mass
    double input_mass;      // mass before renormalization
    bool entropy_finite;    // int v log v
    bool log_moment_finite; // int (1 + log|x|^2) v

    static MassOneDensity make(const RadialField& v);
};

/// int f log(f/M) + (2/M) int int f(x) f(y) log|x-y| + M (1 + log pi), with the
/// double integral reduced to -2 pi int f (-Lap)^{-1} f.
double loghls_deficit(const RadialField& f, double M);

/// int v log(v/mu) - 4 pi int (v-mu) (-Lap)^{-1} (v-mu).
double legendre_gap(const MassOneDensity& v);

/// int (v-mu) (-Lap)^{-1} (v-mu) - (1/4 pi) int v log(v/mu).
double compute_H2(const MassOneDensity& v);

/// (1/16 pi) int |grad u|^2 - int (e^{u/2} - 1) u dmu with u = 2 log(v/mu).
double h2_rate(const RadialField& v);

struct LogFlowParams {
    double dt0 = 2e-4;
    double t_final = 0.2;
    int time_order = 2;
    double newton_tol = 1e-13;
    int newton_max_iter = 40;
    int max_halvings = 30;
    int max_steps = 1000000;
    /// Reject states with min(v/mu) < positivity_floor * max(v/mu).
    double positivity_floor = 1e-12;
    int snapshot_every = 0;
};

struct LogFlowSample {
    double t;
    double H2;
    double mass;
    double rhs_H2prime;
    double max_log_ratio;  // max |log(v/mu)|
};

struct LogFlowTrace {
    LogFlowParams params;
    std::vector<LogFlowSample> samples;
    std::vector<RadialField> snapshots;
    std::vector<double> snapshot_times;
    double max_step_change = 0.0;  // max over steps of max_i |v_{k+1} - v_k| / max v_k
    int steps = 0;
    int rejections = 0;
    int grid_n = 0;
    double r_max = 0.0;
};

LogFlowTrace run_log_flow(const MassOneDensity& v0, const LogFlowParams& params);

/// CSV with header t,H2,mass,rhs_H2prime.
std::string log_trace_csv(const LogFlowTrace& trace);

/// Finite-difference dH_2/dt against h2_rate; also rhs >= 0, H_2 monotone and
/// mass drift.
CheckReport h2_derivative_check(const LogFlowTrace& trace, double tol = 3e-2);

struct ExpMomentCurve {
    RadialField u;     // normalized: int e^{u/2} dmu = 1
    double shift;      // additive constant applied to the input
    std::vector<double> t, h, h1, h2, h3;
};

/// h(t) = log int e^{t u} dmu on n_t uniform points of [0,1] after shifting u
/// so that int e^{u/2} dmu = 1. The derivatives are the cumulants of u under
/// nu_t ~ e^{t u} mu (mean, variance, third central moment).
ExpMomentCurve exp_moment_curve(const RadialField& u, int n_t = 101);

/// h(1) >= h'(1/2) and (1/16 pi) int |grad u|^2 >= int (e^{u/2} - 1) u dmu for
/// the normalized u, plus the convexity of h and h'.
CheckReport lemma_loghlsder_check(const RadialField& u, int n_t = 101);

/// Q_p = C_{p,2} ||grad f||^theta ||f||_{p+1}^{1-theta} / ||f||_{2p} at
/// f = F_p (1 + g/(2p)), g shifted to mu-mean zero. Q_p >= 1 and Q_p -> 1.
/// Throws std::domain_error when 1 + g/(2p) <= 0 somewhere.
double onofri_gn_quotient(const OnofriInput& g, double p);

/// Q_p^{2p}, the GN quotient in the normalized form
/// (int|grad f|^2/int|grad F_p|^2)^{(p-1)/2} (int f^{p+1}/int F_p^{p+1}) / (int f^{2p}/int F_p^{2p}),
/// which tends to onofri_limit_value(g) as p -> infinity.
double onofri_limit_quotient(const OnofriInput& g, double p);

/// exp((1/16 pi) int |grad g|^2) / int e^g dmu for the mean-zero shift of g.
double onofri_limit_value(const OnofriInput& g);

/// J = int e^{u/2}(u-2) dmu, J' = -(1/2) int |grad u|^2,
/// J'' = int (Lap u)^2 e^{-u/2} dx/mu and M = int u^2 e^{u/2} dmu; checks
/// 4 J'^2 <= J'' M and reports 4 J'^2/(J J'') as a diagnostic.
CheckReport failed_scheme_probe(const RadialField& u);

}  // namespace sobflow
