/// @file radial.hpp
/// @brief Radial grids, quadrature and differential operators on R^d.
///
/// A radial function v(|x|) on R^d is sampled on nodes r_0 = 0 < ... < r_{n-1}
/// = R_max. Nodes are images of a uniform parameter s_i = i/(n-1) under an odd
/// map r(s), so smooth even functions of r stay smooth and even in s and the
/// symmetry condition f'(0) = 0 is enforced by mirrored ghost nodes.
///
/// All integrals of the form  int_{R^d} f dx  are evaluated on the truncated
/// ball |x| <= R_max. Every profile used by the library decays algebraically,
/// so the discarded tail is estimated by tail_integral_estimate().

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobflow {

enum class Spacing { uniform, log_stretched };

std::string to_string(Spacing spacing);
Spacing spacing_from_string(const std::string& name);

/// Raised when a sampled field contains NaN/Inf or a grid is unusable.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2).
double sphere_area(int d);

/// Volume of the unit ball of R^d.
double unit_ball_volume(int d);

class RadialGrid {
public:
    /// Per-interval quadrature rule: integral over [s_j, s_{j+1}] in units of h
    /// equals sum_k weight[k] * g(s_{first + k}); `first` may be negative, in
    /// which case the node is a mirror image of node -index.
    struct IntervalRule {
        int first = 0;
        std::vector<double> weight;
    };

    /// Finite-difference stencil in the parameter s (unit spacing).
    struct Stencil {
        int first = 0;
        std::vector<double> weight;
    };

    RadialGrid(int d, double r_max, int n, Spacing spacing, double core_scale = 1.0);

    int dimension() const { return d_; }
    int size() const { return static_cast<int>(r_.size()); }
    double r_max() const { return r_.back(); }
    Spacing spacing() const { return spacing_; }
    double core_scale() const { return core_; }
    /// Parameter spacing h = 1/(n-1).
    double step() const { return h_; }

    std::span<const double> nodes() const { return r_; }
    double node(int i) const { return r_[static_cast<std::size_t>(i)]; }
    /// dr/ds and d^2r/ds^2 at the nodes.
    std::span<const double> jacobian() const { return dr_; }
    std::span<const double> jacobian2() const { return d2r_; }
    /// Quadrature weights: sum_i w_i f(r_i) ~ |S^{d-1}| int_0^R f r^{d-1} dr.
    std::span<const double> weights() const { return w_; }

    /// Finite-volume cells: face radii r_{i-1/2} (size n+1, first 0, last R)
    /// and exact cell volumes |S| (r_{i+1/2}^d - r_{i-1/2}^d)/d.
    std::span<const double> faces() const { return faces_; }
    std::span<const double> cell_volumes() const { return cell_volume_; }

    const std::vector<IntervalRule>& interval_rules() const { return intervals_; }
    const Stencil& first_derivative_stencil(int i) const { return d1_[static_cast<std::size_t>(i)]; }
    const Stencil& second_derivative_stencil(int i) const { return d2_[static_cast<std::size_t>(i)]; }

    /// r(s) for arbitrary s in [0,1].
    double map(double s) const;

    bool same_as(const RadialGrid& other) const;

private:
    int d_;
    Spacing spacing_;
    double core_;
    double stretch_;  // L in r = core * sinh(L s); unused for uniform spacing
    double h_;
    std::vector<double> r_, dr_, d2r_, w_, faces_, cell_volume_;
    std::vector<IntervalRule> intervals_;
    std::vector<Stencil> d1_, d2_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Builds a grid. Throws std::invalid_argument for d < 2, n < 16 or R_max <= 0.
GridPtr make_grid(int d, double r_max, int n, Spacing spacing = Spacing::log_stretched);

/// Sampled radial function on a grid. Immutable after construction except
/// through explicit value replacement.
class RadialField {
public:
    RadialField(GridPtr grid, std::vector<double> values);
    explicit RadialField(GridPtr grid);  // zero field

    template <class F>
    static RadialField sample(GridPtr grid, F&& f) {
        std::vector<double> v(static_cast<std::size_t>(grid->size()));
        for (int i = 0; i < grid->size(); ++i) v[static_cast<std::size_t>(i)] = f(grid->node(i));
        return RadialField(std::move(grid), std::move(v));
    }

    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    int dimension() const { return grid_->dimension(); }
    int size() const { return static_cast<int>(v_.size()); }
    std::span<const double> values() const { return v_; }
    double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
    double back() const { return v_.back(); }

    /// Pointwise transform.
    template <class F>
    RadialField map(F&& f) const {
        std::vector<double> out(v_.size());
        for (std::size_t i = 0; i < v_.size(); ++i) out[i] = f(v_[i]);
        return RadialField(grid_, std::move(out));
    }

    /// Pointwise transform with access to the node radius.
    template <class F>
    RadialField map_r(F&& f) const {
        std::vector<double> out(v_.size());
        for (std::size_t i = 0; i < v_.size(); ++i) out[i] = f(grid_->node(static_cast<int>(i)), v_[i]);
        return RadialField(grid_, std::move(out));
    }

    double max_value() const;
    double min_value() const;
    bool all_finite() const;

    friend RadialField operator+(const RadialField& a, const RadialField& b);
    friend RadialField operator-(const RadialField& a, const RadialField& b);
    friend RadialField operator*(const RadialField& a, const RadialField& b);
    friend RadialField operator*(double c, const RadialField& a);
    friend RadialField operator*(const RadialField& a, double c) { return c * a; }

private:
    GridPtr grid_;
    std::vector<double> v_;
};

/// sum_i w_i f(r_i). Throws NumericalError on non-finite samples.
double integrate(const RadialField& f);

/// (integrate |f|^p)^{1/p}.
double lp_norm(const RadialField& f, double p);

/// df/dr at the nodes (zero at r = 0 by symmetry).
RadialField radial_derivative(const RadialField& f);

/// |S^{d-1}| int (f')^2 r^{d-1} dr.
double dirichlet_energy(const RadialField& f);

/// |S^{d-1}| int f' g' r^{d-1} dr.
double dirichlet_form(const RadialField& f, const RadialField& g);

/// f'' + (d-1) f'/r, with d f''(0) at the origin.
RadialField radial_laplacian(const RadialField& f);

/// One row of a linear radial operator: (L f)_i = sum_k coeff[k] f_{first + k},
/// with mirrored ghost nodes already folded onto the grid.
struct OperatorRow {
    int first = 0;
    std::vector<double> coeff;
};

/// Rows of radial_laplacian and radial_derivative as explicit operators.
std::vector<OperatorRow> laplacian_rows(const RadialGrid& grid);
OperatorRow derivative_row(const RadialGrid& grid, int i);

/// Cumulative mass M(r_i) = |S| int_0^{r_i} f s^{d-1} ds.
std::vector<double> cumulative_mass(const RadialField& f);

struct PotentialOptions {
    /// Warn when the extrapolated mass beyond R_max exceeds this fraction of
    /// the total absolute mass.
    double tail_warn_fraction = 1e-6;
};

/// (-Delta)^{-1} f = G_d * f for the truncated radial density f.
RadialField newton_potential(const RadialField& f, const PotentialOptions& options = {});

/// max_i (1 + r_i^2)^{exponent} |f_i|. The default exponent is d + 2.
double sup_weighted_norm(const RadialField& f);
double sup_weighted_norm(const RadialField& f, double exponent);

/// Estimate of |S| int_{R}^{inf} f r^{d-1} dr assuming f ~ f(R) (R/r)^decay.
/// Returns +inf when decay <= d.
double tail_integral_estimate(const RadialField& f, double decay);

/// Sink for non-fatal numerical warnings (default: stderr).
void set_warning_sink(std::function<void(const std::string&)> sink);
void warn(const std::string& message);

}  // namespace sobflow
