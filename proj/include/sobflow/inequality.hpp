/// @file inequality.hpp
/// @brief Sobolev and HLS deficits, the gap identity along the extinction
/// flow, the explicit gap bound, the CCL identities, and the deterministic
/// verification suite that combines everything per dimension.

#pragma once

#include "sobflow/check_report.hpp"
#include "sobflow/fd_flow.hpp"
#include "sobflow/radial.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sobflow {

/// S_d ||grad w||^2 - ||w||_{2*}^2 (d >= 3).
double sobolev_deficit(const RadialField& w);

/// S_d ||v||_{2d/(d+2)}^2 - int v (-Lap)^{-1} v = -H_d[v] (d >= 3).
double hls_deficit(const RadialField& v);

/// Gap identity along v_t = Lap v^m from v0 = w^q:
///   -H_d(0) + 4 m S_d int_0^T int_0^t J^{2/d} K G(t,s) ds dt = H_d'(0) int_0^T G(t,0) dt,
/// G(t,s) = exp(-(m+1) int_s^t Lambda). The trace must come from an extinct
/// run of the m=(d-2)/(d+2) flow; time integrals use the trapezoid rule and
/// the part past the last sample uses the separated-solution asymptotics.
CheckReport theorem_gap_check(const FlowTrace& trace, double tol = 3e-2);
/// Runs the flow from w^q with `params` (d and m are set from w).
CheckReport theorem_gap_check(const RadialField& w, FlowParams params = {}, double tol = 3e-2);

/// LHS = hls_deficit(w^q) <= C ||w||_{2*}^{8/(d-2)} sobolev_deficit(w) = RHS,
/// C = (1 + 2/d)(1 - e^{-d/2}) S_d. Also reports LHS / (||w||^{8/(d-2)} deficit) / C.
CheckReport explicit_gap_check(const RadialField& w, double abs_tol = 1e-9);

/// |d(d-2)/(d-1)^2 S_d - C_{q,d}^{2q}| / S_d with q = (d+1)/(d-1) for d >= 3,
/// and |pi C_{3,2}^6 - 1| for d = 2. n is the grid size used for C_{q,d}.
CheckReport ccl_identity_check(int d, int n = 2048, double tol = 1e-5);

/// Flow v_t = Lap v^m, m = d/(d+2), from v0 on its grid up to t_final.
/// d >= 3: (1/2) dH_d/dt = d(d-2)/(d-1)^2 S_d ||u||_{q+1}^{4/(d-1)} ||grad u||^2 - ||u||_{2q}^{2q},
///         u = v^{(d-1)/(d+2)}, q = (d+1)/(d-1).
/// d = 2:  (M/8) d/dt[(4 pi/M) int v (-Lap)^{-1} v - int v log v] = ||u||_4^4 ||grad u||^2 - pi ||u||_6^6,
///         u = v^{1/4}; the value with pi ||v||_6^6 in place of pi ||u||_6^6 is recorded too.
CheckReport ccl_flow_derivative_check(const RadialField& v0, double t_final = 0.5, double dt0 = 0.0, double tol = 3e-2);

/// SplitMix64; the suite draws its random families from it so that reports are
/// identical across platforms.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);

private:
    std::uint64_t state_;
};

struct SuiteConfig {
    int d = 5;
    int n = 512;
    double r_max = 0.0;          // 0: per-profile default
    double dt0 = 0.0;            // 0: flow default
    double eps_ext = 1e-4;
    std::uint64_t seed = 1;
    std::map<std::string, double> tolerances;  // overrides, keyed by check name

    double tol(const std::string& name, double fallback) const;
};

/// All checks applicable to config.d, sorted by name. Never throws for
/// numerical trouble inside one check: that check is reported as failed.
std::vector<CheckReport> run_suite(const SuiteConfig& config);

/// Explicit gap bound over the deterministic test family (a lattice of bump
/// perturbations and scalings of F plus eight seeded draws). Skipped for d < 5.
CheckReport explicit_gap_family_check(const SuiteConfig& config);

/// Flow checks for one initial datum: "fd" (extinction flow and everything
/// read off its trace), "fd-ccl" (the CCL derivative identity) or "log"
/// (the H_2 identity). Report names get the suffix "@label".
std::vector<CheckReport> profile_checks(const SuiteConfig& config, const RadialField& v0, const std::string& label,
                                        const std::string& flow);

/// True iff no report has verdict fail.
bool suite_passed(const std::vector<CheckReport>& reports);

}  // namespace sobflow
