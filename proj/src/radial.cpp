#include "sobflow/radial.hpp"

#include "stencil.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

namespace sobflow {

namespace {

// Per-interval quadrature uses 8 nodes (exact for degree 7); finite
// differences are 6th order. The quadrature order must exceed d + 1 for the
// Newton potential near the origin (see newton_potential).
constexpr int kQuadPoints = 8;
constexpr int kFdHalfWidth = 3;

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

std::function<void(const std::string&)>& sink() {
    static std::function<void(const std::string&)> s = [](const std::string& msg) {
        std::cerr << "sobflow warning: " << msg << '\n';
    };
    return s;
}

// Index of a possibly mirrored node and its sign for an integrand of the given
// parity (+1 even, -1 odd) in s.
inline std::pair<int, double> fold(int k, int parity) {
    if (k >= 0) return {k, 1.0};
    return {-k, parity > 0 ? 1.0 : -1.0};
}

// Integral of the sampled integrand g over each interval [s_j, s_{j+1}]
// (in units of h).
std::vector<double> interval_integrals(const RadialGrid& grid, std::span<const double> g, int parity) {
    const auto& rules = grid.interval_rules();
    std::vector<double> parts(rules.size(), 0.0);
    for (std::size_t j = 0; j < rules.size(); ++j) {
        const auto& rule = rules[j];
        double part = 0.0;
        for (std::size_t k = 0; k < rule.weight.size(); ++k) {
            auto [idx, sign] = fold(rule.first + static_cast<int>(k), parity);
            part += rule.weight[k] * sign * g[static_cast<std::size_t>(idx)];
        }
        parts[j] = part;
    }
    return parts;
}

// int_0^{s_i} g ds (in units of h).
std::vector<double> prefix_integral(const RadialGrid& grid, std::span<const double> g, int parity) {
    const auto parts = interval_integrals(grid, g, parity);
    std::vector<double> c(g.size(), 0.0);
    for (std::size_t j = 0; j < parts.size(); ++j) c[j + 1] = c[j] + parts[j];
    return c;
}

// int_{s_i}^1 g ds (in units of h), summed from the outer end so that small
// far-field values keep their relative accuracy.
std::vector<double> suffix_integral(const RadialGrid& grid, std::span<const double> g, int parity) {
    const auto parts = interval_integrals(grid, g, parity);
    std::vector<double> c(g.size(), 0.0);
    for (std::size_t j = parts.size(); j-- > 0;) c[j] = c[j + 1] + parts[j];
    return c;
}

double apply(const RadialGrid::Stencil& st, std::span<const double> f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < st.weight.size(); ++k) {
        auto [idx, sign] = fold(st.first + static_cast<int>(k), +1);
        acc += st.weight[k] * sign * f[static_cast<std::size_t>(idx)];
    }
    return acc;
}

void require_finite(const RadialField& f, const char* where) {
    if (!f.all_finite()) {
        throw NumericalError(std::string(where) + ": field contains non-finite values (corrupted field)");
    }
}

void require_same_grid(const RadialField& a, const RadialField& b) {
    if (a.grid_ptr() != b.grid_ptr() && !a.grid().same_as(b.grid())) {
        throw std::invalid_argument("fields live on different grids");
    }
}

}  // namespace

std::string to_string(Spacing spacing) {
    return spacing == Spacing::uniform ? "uniform" : "log_stretched";
}

Spacing spacing_from_string(const std::string& name) {
    if (name == "uniform") return Spacing::uniform;
    if (name == "log_stretched" || name == "log" || name == "log-stretched") return Spacing::log_stretched;
    throw std::invalid_argument("unknown grid spacing '" + name + "'");
}

double sphere_area(int d) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

RadialGrid::RadialGrid(int d, double r_max, int n, Spacing spacing, double core_scale)
    : d_(d), spacing_(spacing), core_(core_scale), stretch_(0.0), h_(0.0) {
    if (d < 2) throw std::invalid_argument("grid dimension must be >= 2");
    if (n < 16) throw std::invalid_argument("grid needs n >= 16 nodes (unusable resolution)");
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw std::invalid_argument("R_max must be positive and finite");
    if (!(core_scale > 0.0)) throw std::invalid_argument("core scale must be positive");

    const auto un = static_cast<std::size_t>(n);
    h_ = 1.0 / static_cast<double>(n - 1);
    stretch_ = spacing == Spacing::log_stretched ? std::asinh(r_max / core_) : 0.0;

    r_.resize(un);
    dr_.resize(un);
    d2r_.resize(un);
    for (int i = 0; i < n; ++i) {
        const double s = i * h_;
        const auto ui = static_cast<std::size_t>(i);
        if (spacing == Spacing::uniform) {
            r_[ui] = r_max * s;
            dr_[ui] = r_max;
            d2r_[ui] = 0.0;
        } else {
            r_[ui] = core_ * std::sinh(stretch_ * s);
            dr_[ui] = core_ * stretch_ * std::cosh(stretch_ * s);
            d2r_[ui] = core_ * stretch_ * stretch_ * std::sinh(stretch_ * s);
        }
    }
    r_.front() = 0.0;
    r_.back() = r_max;

    // Per-interval quadrature rules.
    intervals_.resize(un - 1);
    for (int j = 0; j + 1 < n; ++j) {
        int first = j - (kQuadPoints / 2 - 1);
        if (first + kQuadPoints - 1 > n - 1) first = n - kQuadPoints;
        std::vector<double> offsets(kQuadPoints);
        for (int k = 0; k < kQuadPoints; ++k) offsets[static_cast<std::size_t>(k)] = first + k - j;
        intervals_[static_cast<std::size_t>(j)] = {first, detail::interval_weights(offsets)};
    }

    // Composite weights for the integrand g(s) = f r^{d-1} dr/ds, whose parity
    // in s is (-1)^{d-1}.
    const int parity = (d % 2 == 1) ? +1 : -1;
    std::vector<double> unit(un, 0.0);
    for (const auto& rule : intervals_) {
        for (std::size_t k = 0; k < rule.weight.size(); ++k) {
            auto [idx, sign] = fold(rule.first + static_cast<int>(k), parity);
            unit[static_cast<std::size_t>(idx)] += sign * rule.weight[k];
        }
    }
    const double area = sphere_area(d);
    w_.resize(un);
    for (std::size_t i = 0; i < un; ++i) {
        w_[i] = area * h_ * unit[i] * std::pow(r_[i], d - 1) * dr_[i];
    }

    faces_.resize(un + 1);
    faces_.front() = 0.0;
    for (int i = 1; i < n; ++i) faces_[static_cast<std::size_t>(i)] = map((i - 0.5) * h_);
    faces_.back() = r_max;
    cell_volume_.resize(un);
    for (std::size_t i = 0; i < un; ++i) {
        cell_volume_[i] = area * (std::pow(faces_[i + 1], d) - std::pow(faces_[i], d)) / d;
    }

    // Finite-difference stencils in s (unit spacing); ghosts mirror evenly.
    d1_.resize(un);
    d2_.resize(un);
    for (int i = 0; i < n; ++i) {
        int first1 = i - kFdHalfWidth;
        int count1 = 2 * kFdHalfWidth + 1;
        int first2 = first1;
        int count2 = count1;
        if (i + kFdHalfWidth > n - 1) {
            count1 = 2 * kFdHalfWidth + 1;
            first1 = n - count1;
            count2 = 2 * kFdHalfWidth + 2;
            first2 = n - count2;
        }
        std::vector<double> off1(static_cast<std::size_t>(count1)), off2(static_cast<std::size_t>(count2));
        for (int k = 0; k < count1; ++k) off1[static_cast<std::size_t>(k)] = first1 + k - i;
        for (int k = 0; k < count2; ++k) off2[static_cast<std::size_t>(k)] = first2 + k - i;
        d1_[static_cast<std::size_t>(i)] = {first1, detail::fornberg_weights(off1, 0.0, 1)};
        d2_[static_cast<std::size_t>(i)] = {first2, detail::fornberg_weights(off2, 0.0, 2)};
    }
}

double RadialGrid::map(double s) const {
    if (spacing_ == Spacing::uniform) return r_.back() * s;
    return core_ * std::sinh(stretch_ * s);
}

bool RadialGrid::same_as(const RadialGrid& other) const {
    return d_ == other.d_ && spacing_ == other.spacing_ && r_ == other.r_;
}

GridPtr make_grid(int d, double r_max, int n, Spacing spacing) {
    return std::make_shared<const RadialGrid>(d, r_max, n, spacing);
}

RadialField::RadialField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), v_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("RadialField requires a grid");
    if (static_cast<int>(v_.size()) != grid_->size()) {
        throw std::invalid_argument("RadialField: value count does not match grid size");
    }
}

RadialField::RadialField(GridPtr grid)
    : RadialField(grid, std::vector<double>(static_cast<std::size_t>(grid ? grid->size() : 0), 0.0)) {}

double RadialField::max_value() const { return *std::max_element(v_.begin(), v_.end()); }
double RadialField::min_value() const { return *std::min_element(v_.begin(), v_.end()); }

bool RadialField::all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

RadialField operator+(const RadialField& a, const RadialField& b) {
    require_same_grid(a, b);
    std::vector<double> out(a.v_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.v_[i] + b.v_[i];
    return RadialField(a.grid_, std::move(out));
}

RadialField operator-(const RadialField& a, const RadialField& b) {
    require_same_grid(a, b);
    std::vector<double> out(a.v_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.v_[i] - b.v_[i];
    return RadialField(a.grid_, std::move(out));
}

RadialField operator*(const RadialField& a, const RadialField& b) {
    require_same_grid(a, b);
    std::vector<double> out(a.v_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.v_[i] * b.v_[i];
    return RadialField(a.grid_, std::move(out));
}

RadialField operator*(double c, const RadialField& a) {
    std::vector<double> out(a.v_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * a.v_[i];
    return RadialField(a.grid_, std::move(out));
}

double integrate(const RadialField& f) {
    require_finite(f, "integrate");
    const auto w = f.grid().weights();
    const auto v = f.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * v[i];
    return acc;
}

double lp_norm(const RadialField& f, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
    const double s = integrate(f.map([p](double x) { return std::pow(std::abs(x), p); }));
    return std::pow(s, 1.0 / p);
}

RadialField radial_derivative(const RadialField& f) {
    require_finite(f, "radial_derivative");
    const auto& g = f.grid();
    const auto v = f.values();
    const auto dr = g.jacobian();
    std::vector<double> out(v.size(), 0.0);
    for (int i = 1; i < g.size(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        out[ui] = apply(g.first_derivative_stencil(i), v) / (g.step() * dr[ui]);
    }
    return RadialField(f.grid_ptr(), std::move(out));
}

double dirichlet_energy(const RadialField& f) {
    const RadialField df = radial_derivative(f);
    return integrate(df * df);
}

double dirichlet_form(const RadialField& f, const RadialField& g) {
    require_same_grid(f, g);
    return integrate(radial_derivative(f) * radial_derivative(g));
}

RadialField radial_laplacian(const RadialField& f) {
    require_finite(f, "radial_laplacian");
    const auto& g = f.grid();
    const int d = g.dimension();
    const double h = g.step();
    const auto v = f.values();
    const auto r = g.nodes();
    const auto dr = g.jacobian();
    const auto d2r = g.jacobian2();
    std::vector<double> out(v.size());
    out[0] = d * apply(g.second_derivative_stencil(0), v) / (h * h * dr[0] * dr[0]);
    for (int i = 1; i < g.size(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double fs = apply(g.first_derivative_stencil(i), v) / h;
        const double fss = apply(g.second_derivative_stencil(i), v) / (h * h);
        const double fr = fs / dr[ui];
        const double frr = (fss - fs * d2r[ui] / dr[ui]) / (dr[ui] * dr[ui]);
        out[ui] = frr + (d - 1) * fr / r[ui];
    }
    return RadialField(f.grid_ptr(), std::move(out));
}

namespace {

// Adds scale * stencil (in s) to a dense row buffer indexed from `lo`.
void accumulate(std::vector<double>& row, int lo, const RadialGrid::Stencil& st, double scale) {
    for (std::size_t k = 0; k < st.weight.size(); ++k) {
        auto [idx, sign] = fold(st.first + static_cast<int>(k), +1);
        row[static_cast<std::size_t>(idx - lo)] += scale * sign * st.weight[k];
    }
}

std::pair<int, int> folded_span(const RadialGrid::Stencil& a, const RadialGrid::Stencil& b) {
    int lo = std::numeric_limits<int>::max(), hi = 0;
    for (const auto* st : {&a, &b}) {
        for (std::size_t k = 0; k < st->weight.size(); ++k) {
            const int idx = fold(st->first + static_cast<int>(k), +1).first;
            lo = std::min(lo, idx);
            hi = std::max(hi, idx);
        }
    }
    return {lo, hi};
}

}  // namespace

std::vector<OperatorRow> laplacian_rows(const RadialGrid& g) {
    const int d = g.dimension();
    const double h = g.step();
    const auto r = g.nodes();
    const auto dr = g.jacobian();
    const auto d2r = g.jacobian2();
    std::vector<OperatorRow> rows(static_cast<std::size_t>(g.size()));
    for (int i = 0; i < g.size(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const auto& s1 = g.first_derivative_stencil(i);
        const auto& s2 = g.second_derivative_stencil(i);
        const auto [lo, hi] = folded_span(s1, s2);
        std::vector<double> row(static_cast<std::size_t>(hi - lo + 1), 0.0);
        if (i == 0) {
            accumulate(row, lo, s2, d / (h * h * dr[0] * dr[0]));
        } else {
            const double j2 = dr[ui] * dr[ui];
            accumulate(row, lo, s2, 1.0 / (h * h * j2));
            accumulate(row, lo, s1, (-d2r[ui] / (dr[ui] * j2) + (d - 1) / (r[ui] * dr[ui])) / h);
        }
        rows[ui] = {lo, std::move(row)};
    }
    return rows;
}

OperatorRow derivative_row(const RadialGrid& g, int i) {
    const auto& s1 = g.first_derivative_stencil(i);
    const auto [lo, hi] = folded_span(s1, s1);
    std::vector<double> row(static_cast<std::size_t>(hi - lo + 1), 0.0);
    if (i > 0) accumulate(row, lo, s1, 1.0 / (g.step() * g.jacobian()[static_cast<std::size_t>(i)]));
    return {lo, std::move(row)};
}

std::vector<double> cumulative_mass(const RadialField& f) {
    require_finite(f, "cumulative_mass");
    const auto& g = f.grid();
    const int d = g.dimension();
    const auto r = g.nodes();
    const auto dr = g.jacobian();
    std::vector<double> integrand(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) integrand[i] = f.values()[i] * std::pow(r[i], d - 1) * dr[i];
    auto c = prefix_integral(g, integrand, d % 2 == 1 ? +1 : -1);
    const double scale = sphere_area(d) * g.step();
    for (auto& x : c) x *= scale;
    return c;
}

RadialField newton_potential(const RadialField& f, const PotentialOptions& options) {
    // Gauss's law: -u'(r) = M(r) / (|S| r^{d-1}); outside the truncated support
    // u is the exterior Green function of the total mass.
    const auto& g = f.grid();
    const int d = g.dimension();
    const auto r = g.nodes();
    const auto dr = g.jacobian();
    const double area = sphere_area(d);
    const std::vector<double> mass = cumulative_mass(f);
    const auto n = r.size();

    std::vector<double> field(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) field[i] = mass[i] / (area * std::pow(r[i], d - 1)) * dr[i];
    const std::vector<double> tail = suffix_integral(g, field, -1);

    const double total = mass.back();
    const double rmax = g.r_max();
    const double exterior = d == 2 ? -std::log(rmax) / (2.0 * std::numbers::pi)
                                   : std::pow(rmax, 2 - d) / ((d - 2) * area);
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = g.step() * tail[i] + total * exterior;

    if (options.tail_warn_fraction > 0.0 && n >= 2) {
        const double a = f[static_cast<int>(n) - 2], b = f.back();
        if (a > 0.0 && b > 0.0) {
            const double decay = -std::log(b / a) / std::log(r[n - 1] / r[n - 2]);
            const double tail = tail_integral_estimate(f, decay);
            const double abs_mass = integrate(f.map([](double x) { return std::abs(x); }));
            if (abs_mass > 0.0 && !(tail <= options.tail_warn_fraction * abs_mass)) {
                std::ostringstream os;
                os << "newton_potential: extrapolated tail mass beyond R_max=" << rmax << " is " << tail
                   << " (fraction " << tail / abs_mass << ")";
                warn(os.str());
            }
        }
    }
    return RadialField(f.grid_ptr(), std::move(u));
}

double sup_weighted_norm(const RadialField& f) { return sup_weighted_norm(f, f.dimension() + 2.0); }

double sup_weighted_norm(const RadialField& f, double exponent) {
    const auto r = f.grid().nodes();
    double best = 0.0;
    for (int i = 0; i < f.size(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        best = std::max(best, std::pow(1.0 + r[ui] * r[ui], exponent) * std::abs(f[i]));
    }
    return best;
}

double tail_integral_estimate(const RadialField& f, double decay) {
    const int d = f.dimension();
    if (!(decay > d)) return std::numeric_limits<double>::infinity();
    const double rmax = f.grid().r_max();
    return sphere_area(d) * std::abs(f.back()) * std::pow(rmax, d) / (decay - d);
}

void set_warning_sink(std::function<void(const std::string&)> s) {
    std::lock_guard lock(sink_mutex());
    sink() = std::move(s);
}

void warn(const std::string& message) {
    std::lock_guard lock(sink_mutex());
    if (sink()) sink()(message);
}

}  // namespace sobflow
