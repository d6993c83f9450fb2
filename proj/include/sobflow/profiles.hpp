/// @file profiles.hpp
/// @brief Closed-form profiles (Aubin-Talenti, GN optimizers, mu, separated
/// solution) and the optimal constants S_d, C_{p,d}, theta(p).

#pragma once

#include "sobflow/radial.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sobflow {

enum class ProfileKind { aubin_talenti, gn_optimizer, moon_measure, separated, custom_tabulated };

std::string to_string(ProfileKind kind);

/// A named profile plus an optional perturbation. The perturbation fields are
/// applied in order: f <- f + eps * bump(r, r0, width), then
/// f <- max(f, 0)^exponent when exponent != 1.
struct ProfileSpec {
    ProfileKind kind = ProfileKind::aubin_talenti;
    int d = 3;
    double p = 2.0;       // gn_optimizer
    double T = 1.0;       // separated
    double t = 0.0;       // separated: evaluation time
    double lambda = 1.0;  // coordinate scaling
    double x0 = 0.0;      // radial scope: must stay 0
    std::string path;     // custom_tabulated

    double eps = 0.0;
    double r0 = 0.0;
    double width = 1.0;
    double exponent = 1.0;
};

/// Parses "kind[:key=value,...]". Keys: d, p, T, t, lambda, x0, path, eps, r0,
/// width, exponent. `exponent=q` means (d+2)/(d-2), `exponent=m` means
/// (d-2)/(d+2). Throws std::invalid_argument on malformed text.
ProfileSpec parse_profile(const std::string& text, std::optional<int> default_d = std::nullopt);
std::string to_string(const ProfileSpec& spec);

/// Throws std::domain_error when the spec breaks its invariants.
void validate(const ProfileSpec& spec);

/// Gaussian ring at r0 mirrored through the origin, so that it is smooth on
/// R^d: (e^{-((r-r0)/w)^2} + e^{-((r+r0)/w)^2}) / (1 + e^{-(2 r0/w)^2}).
/// Equals e^{-(r/w)^2} for r0 = 0.
double bump(double r, double r0, double width);

/// Closed-form value at radius r (perturbation included). Not available for
/// custom_tabulated.
double profile_value(const ProfileSpec& spec, double r);

/// Samples the profile on the grid. custom_tabulated reads spec.path.
RadialField profile(const ProfileSpec& spec, GridPtr grid);

/// Convenience: F(r) = (1 + r^2)^{-(d-2)/2}, F_p(r) = (1 + r^2)^{-1/(p-1)},
/// mu(r) = 1/(pi (1 + r^2)^2).
double aubin_talenti(int d, double r);
double gn_optimizer(double p, double r);
double moon_measure(double r);

/// Parameters of the separated solution c (T - t)^alpha F^q.
struct SeparatedParams {
    double m;      // (d-2)/(d+2)
    double alpha;  // (d+2)/4
    double c;      // (4 m d)^{1/(1-m)}
    double q;      // (d+2)/(d-2)
};
SeparatedParams separated_params(int d);

/// Upper end of the GN window: +inf for d = 2, d/(d-2) otherwise.
double gn_p_max(int d);

/// theta(p) = ((p-1)/p) d / (d + 2 - p (d-2)). Throws std::domain_error
/// outside the GN window.
double theta(double p, int d);

/// Integrals of F_p over all of R^d: grid quadrature on [0, R_max] plus the
/// exact tail beyond R_max (incomplete beta function).
struct OptimizerIntegrals {
    double grad_sq;  // int |grad F_p|^2
    double pow_p1;   // int F_p^{p+1}
    double pow_2p;   // int F_p^{2p}
};
OptimizerIntegrals optimizer_integrals(double p, const GridPtr& grid);

/// Relative L2 residual of -Delta F = d(d-2) F^q on the grid.
double aubin_talenti_residual(const GridPtr& grid);

/// Threshold above which the constants refuse an under-resolved grid.
inline constexpr double kResolutionThreshold = 1e-4;

/// S_d = ||F||_{2*}^2 / ||grad F||^2 (d >= 3).
double sobolev_constant(int d, const GridPtr& grid);

/// C_{p,d} = ||F_p||_{2p} / (||grad F_p||^theta ||F_p||_{p+1}^{1-theta}).
double gn_constant(double p, int d, const GridPtr& grid);

/// Default truncation radius for a profile: tail of every functional used
/// with it below ~1e-8 of the total, capped at 1e16.
double default_r_max(const ProfileSpec& spec);
double default_r_max_for_dimension(int d);

/// Read-only table of constants computed once at construction.
class ConstantsTable {
public:
    struct Request {
        std::vector<int> dims;
        std::vector<std::pair<double, int>> gn;  // (p, d)
        int n = 2048;
    };

    explicit ConstantsTable(const Request& request);

    double S(int d) const;
    double C(double p, int d) const;
    static double theta(double p, int d) { return sobflow::theta(p, d); }

    /// Process-wide table for d = 2..8 and S-related p values, built lazily.
    static const ConstantsTable& shared();

private:
    std::map<int, double> s_;
    std::map<std::pair<double, int>, double> c_;
};

}  // namespace sobflow
