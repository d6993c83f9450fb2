#include "sobflow/profiles.hpp"

#include "sobflow/field_io.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace sobflow {

std::string to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::aubin_talenti: return "aubin_talenti";
        case ProfileKind::gn_optimizer: return "gn_optimizer";
        case ProfileKind::moon_measure: return "moon_measure";
        case ProfileKind::separated: return "separated";
        case ProfileKind::custom_tabulated: return "custom_tabulated";
    }
    return "?";
}

namespace {

ProfileKind kind_from_string(const std::string& s) {
    for (auto k : {ProfileKind::aubin_talenti, ProfileKind::gn_optimizer, ProfileKind::moon_measure,
                   ProfileKind::separated, ProfileKind::custom_tabulated}) {
        if (to_string(k) == s) return k;
    }
    throw std::invalid_argument("unknown profile kind '" + s + "'");
}

double parse_real(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(x)) {
        throw std::invalid_argument("profile parameter " + key + ": not a number: '" + value + "'");
    }
    return x;
}

}  // namespace

ProfileSpec parse_profile(const std::string& text, std::optional<int> default_d) {
    ProfileSpec spec;
    if (default_d) spec.d = *default_d;
    const auto colon = text.find(':');
    spec.kind = kind_from_string(text.substr(0, colon));
    if (spec.kind == ProfileKind::moon_measure) spec.d = 2;
    if (colon == std::string::npos) return spec;

    std::string exponent_text;
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("profile parameter without '=': '" + item + "'");
        const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
        if (key == "d") {
            const double d = parse_real(key, value);
            if (d != std::floor(d)) throw std::invalid_argument("profile parameter d must be an integer");
            spec.d = static_cast<int>(d);
        } else if (key == "p") {
            spec.p = parse_real(key, value);
        } else if (key == "T") {
            spec.T = parse_real(key, value);
        } else if (key == "t") {
            spec.t = parse_real(key, value);
        } else if (key == "lambda") {
            spec.lambda = parse_real(key, value);
        } else if (key == "x0") {
            spec.x0 = parse_real(key, value);
        } else if (key == "path") {
            spec.path = value;
        } else if (key == "eps") {
            spec.eps = parse_real(key, value);
        } else if (key == "r0") {
            spec.r0 = parse_real(key, value);
        } else if (key == "width") {
            spec.width = parse_real(key, value);
        } else if (key == "exponent") {
            exponent_text = value;
        } else {
            throw std::invalid_argument("unknown profile parameter '" + key + "'");
        }
    }
    if (exponent_text == "q" || exponent_text == "m") {
        if (spec.d <= 2) throw std::invalid_argument("exponent=" + exponent_text + " needs d >= 3");
        const double q = (spec.d + 2.0) / (spec.d - 2.0);
        spec.exponent = exponent_text == "q" ? q : 1.0 / q;
    } else if (!exponent_text.empty()) {
        spec.exponent = parse_real("exponent", exponent_text);
    }
    return spec;
}

std::string to_string(const ProfileSpec& s) {
    std::ostringstream out;
    out << to_string(s.kind) << ":d=" << s.d;
    switch (s.kind) {
        case ProfileKind::gn_optimizer: out << ",p=" << format_decimal17(s.p); break;
        case ProfileKind::separated:
            out << ",T=" << format_decimal17(s.T) << ",t=" << format_decimal17(s.t);
            break;
        case ProfileKind::custom_tabulated: out << ",path=" << s.path; break;
        default: break;
    }
    if (s.lambda != 1.0) out << ",lambda=" << format_decimal17(s.lambda);
    if (s.eps != 0.0) {
        out << ",eps=" << format_decimal17(s.eps) << ",r0=" << format_decimal17(s.r0)
            << ",width=" << format_decimal17(s.width);
    }
    if (s.exponent != 1.0) out << ",exponent=" << format_decimal17(s.exponent);
    return out.str();
}

double gn_p_max(int d) {
    return d == 2 ? std::numeric_limits<double>::infinity() : static_cast<double>(d) / (d - 2);
}

void validate(const ProfileSpec& s) {
    if (s.d < 2) throw std::domain_error("dimension must be >= 2");
    if (s.x0 != 0.0) throw std::domain_error("only radial profiles centred at the origin are supported (x0 = 0)");
    if (!(s.lambda > 0.0)) throw std::domain_error("lambda must be positive");
    if (!(s.width > 0.0)) throw std::domain_error("perturbation width must be positive");
    if (!(s.exponent > 0.0)) throw std::domain_error("exponent must be positive");
    switch (s.kind) {
        case ProfileKind::aubin_talenti:
            if (s.d < 3) throw std::domain_error("aubin_talenti requires d >= 3");
            break;
        case ProfileKind::gn_optimizer:
            if (!(s.p > 1.0) || s.p > gn_p_max(s.d)) {
                throw std::domain_error("gn_optimizer requires 1 < p" +
                                        (s.d == 2 ? std::string(" < inf") : " <= d/(d-2)"));
            }
            if (!std::isfinite(s.p)) throw std::domain_error("gn_optimizer requires finite p");
            break;
        case ProfileKind::moon_measure:
            if (s.d != 2) throw std::domain_error("moon_measure is defined for d = 2");
            break;
        case ProfileKind::separated:
            if (s.d < 3) throw std::domain_error("separated requires d >= 3");
            if (!(s.T > 0.0)) throw std::domain_error("separated requires T > 0");
            if (!(s.t >= 0.0 && s.t < s.T)) throw std::domain_error("separated requires 0 <= t < T");
            break;
        case ProfileKind::custom_tabulated:
            if (s.path.empty()) throw std::domain_error("custom_tabulated requires path=<file>");
            break;
    }
}

double aubin_talenti(int d, double r) { return std::pow(1.0 + r * r, -0.5 * (d - 2)); }

double gn_optimizer(double p, double r) { return std::pow(1.0 + r * r, -1.0 / (p - 1.0)); }

double moon_measure(double r) {
    const double a = 1.0 + r * r;
    return 1.0 / (std::numbers::pi * a * a);
}

SeparatedParams separated_params(int d) {
    SeparatedParams sp{};
    sp.m = (d - 2.0) / (d + 2.0);
    sp.alpha = (d + 2.0) / 4.0;
    sp.c = std::pow(4.0 * sp.m * d, 1.0 / (1.0 - sp.m));
    sp.q = (d + 2.0) / (d - 2.0);
    return sp;
}

namespace {

double base_value(const ProfileSpec& s, double r) {
    const double l = s.lambda;
    const double x = r / l;
    switch (s.kind) {
        case ProfileKind::aubin_talenti: return std::pow(l, -0.5 * (s.d - 2)) * aubin_talenti(s.d, x);
        case ProfileKind::gn_optimizer: return gn_optimizer(s.p, x);
        case ProfileKind::moon_measure: return moon_measure(x) / (l * l);
        case ProfileKind::separated: {
            // lambda^{-(d+2)/2} vbar_T(t, x/lambda) keeps the flow invariant.
            const auto sp = separated_params(s.d);
            return std::pow(l, -0.5 * (s.d + 2)) * sp.c * std::pow(s.T - s.t, sp.alpha) *
                   std::pow(1.0 + x * x, -0.5 * (s.d + 2));
        }
        case ProfileKind::custom_tabulated: break;
    }
    throw std::logic_error("no closed form for custom_tabulated");
}

double perturb(const ProfileSpec& s, double r, double f) {
    if (s.eps != 0.0) {
        f += s.eps * bump(r, s.r0, s.width);
    }
    if (s.exponent != 1.0) f = std::pow(std::max(f, 0.0), s.exponent);
    return f;
}

}  // namespace

double bump(double r, double r0, double width) {
    const double a = (r - r0) / width, b = (r + r0) / width, c = 2.0 * r0 / width;
    return (std::exp(-a * a) + std::exp(-b * b)) / (1.0 + std::exp(-c * c));
}

double profile_value(const ProfileSpec& spec, double r) {
    validate(spec);
    return perturb(spec, r, base_value(spec, r));
}

RadialField profile(const ProfileSpec& spec, GridPtr grid) {
    validate(spec);
    if (grid->dimension() != spec.d) {
        throw std::domain_error("profile d=" + std::to_string(spec.d) + " but grid d=" +
                                std::to_string(grid->dimension()));
    }
    if (spec.kind == ProfileKind::custom_tabulated) {
        const RadialField base = resample(read_field(spec.path), grid);
        if (!base.all_finite()) throw NumericalError("tabulated profile is not finite");
        return base.map_r([&](double r, double v) { return perturb(spec, r, v); });
    }
    return RadialField::sample(std::move(grid), [&](double r) { return perturb(spec, r, base_value(spec, r)); });
}

double theta(double p, int d) {
    if (d < 2) throw std::domain_error("theta: d must be >= 2");
    if (!(p > 1.0) || p > gn_p_max(d)) throw std::domain_error("theta: p outside the GN window");
    if (d >= 3 && p == gn_p_max(d)) return 1.0;
    return (p - 1.0) / p * d / (d + 2.0 - p * (d - 2.0));
}

namespace {

// int_R^inf r^e (1 + r^2)^{-a} dr = B(1/(1+R^2); a - (e+1)/2, (e+1)/2) / 2.
double power_tail(double R, double e, double a) {
    const double b = 0.5 * (e + 1.0);
    const double a1 = a - b;
    if (!(a1 > 0.0)) return std::numeric_limits<double>::infinity();
    const double y0 = 1.0 / (1.0 + R * R);
    return 0.5 * boost::math::beta(a1, b, y0);
}

// Delta w = A w^p - B w^{2p-1} for w = F_p.
double optimizer_residual(double p, const GridPtr& grid) {
    const int d = grid->dimension();
    const double k = 1.0 / (p - 1.0);
    const double A = 4.0 * k * (k + 1.0) - 2.0 * k * d;
    const double B = 4.0 * k * (k + 1.0);
    const RadialField w = RadialField::sample(grid, [&](double r) { return gn_optimizer(p, r); });
    const RadialField lap = radial_laplacian(w);
    const RadialField rhs = w.map([&](double v) { return A * std::pow(v, p) - B * std::pow(v, 2 * p - 1); });
    const RadialField scale = w.map([&](double v) { return B * std::pow(v, 2 * p - 1); });
    return lp_norm(lap - rhs, 2.0) / lp_norm(scale, 2.0);
}

void require_resolved(double p, const GridPtr& grid, const char* what) {
    const double res = optimizer_residual(p, grid);
    if (!(res <= kResolutionThreshold)) {
        std::ostringstream msg;
        msg << what << ": optimizer PDE residual " << res << " exceeds " << kResolutionThreshold
            << " on grid (d=" << grid->dimension() << ", n=" << grid->size() << ", R_max=" << grid->r_max()
            << "); refine the grid";
        throw NumericalError(msg.str());
    }
}

}  // namespace

OptimizerIntegrals optimizer_integrals(double p, const GridPtr& grid) {
    const int d = grid->dimension();
    if (!(p > 1.0) || p > gn_p_max(d)) throw std::domain_error("optimizer_integrals: p outside the GN window");
    const double R = grid->r_max();
    const double S = sphere_area(d);
    const double k = 1.0 / (p - 1.0);
    const RadialField w = RadialField::sample(grid, [&](double r) { return gn_optimizer(p, r); });

    OptimizerIntegrals out{};
    out.grad_sq = dirichlet_energy(w) + S * 4.0 * k * k * power_tail(R, d + 1.0, 2.0 * k + 2.0);
    out.pow_p1 = integrate(w.map([&](double v) { return std::pow(v, p + 1.0); })) +
                 S * power_tail(R, d - 1.0, k * (p + 1.0));
    out.pow_2p = integrate(w.map([&](double v) { return std::pow(v, 2.0 * p); })) +
                 S * power_tail(R, d - 1.0, k * 2.0 * p);
    if (!std::isfinite(out.grad_sq) || !std::isfinite(out.pow_p1) || !std::isfinite(out.pow_2p)) {
        throw std::domain_error("optimizer integrals diverge for this (p, d)");
    }
    return out;
}

double aubin_talenti_residual(const GridPtr& grid) {
    const int d = grid->dimension();
    if (d < 3) throw std::domain_error("aubin_talenti_residual requires d >= 3");
    return optimizer_residual(gn_p_max(d), grid);
}

double sobolev_constant(int d, const GridPtr& grid) {
    if (d < 3) throw std::domain_error("sobolev_constant requires d >= 3");
    if (grid->dimension() != d) throw std::domain_error("sobolev_constant: grid dimension mismatch");
    const double p = gn_p_max(d);
    require_resolved(p, grid, "sobolev_constant");
    const auto I = optimizer_integrals(p, grid);
    // ||F||_{2*}^2 = (int F^{2p})^{1/p}
    return std::pow(I.pow_2p, 1.0 / p) / I.grad_sq;
}

double gn_constant(double p, int d, const GridPtr& grid) {
    const double th = theta(p, d);
    if (grid->dimension() != d) throw std::domain_error("gn_constant: grid dimension mismatch");
    require_resolved(p, grid, "gn_constant");
    const auto I = optimizer_integrals(p, grid);
    return std::pow(I.pow_2p, 1.0 / (2.0 * p)) /
           (std::pow(I.grad_sq, 0.5 * th) * std::pow(I.pow_p1, (1.0 - th) / (p + 1.0)));
}

double default_r_max_for_dimension(int d) {
    if (d < 2) throw std::domain_error("dimension must be >= 2");
    // Slowest tail among the functionals: int |grad F|^2 ~ R^{-(d-2)}; mass of F^q ~ R^{-2}.
    return d == 3 ? 1e8 : 1e4;
}

double default_r_max(const ProfileSpec& spec) {
    switch (spec.kind) {
        case ProfileKind::gn_optimizer: {
            const double k = 1.0 / (spec.p - 1.0);
            const double decay = std::min(4.0 * k + 2.0 - spec.d, 2.0 * k * (spec.p + 1.0) - spec.d);
            if (!(decay > 0.0)) return 1e16;
            return std::clamp(std::pow(10.0, 8.0 / decay), 1e4, 1e16);
        }
        case ProfileKind::moon_measure: return 1e4;
        default: return default_r_max_for_dimension(spec.d);
    }
}

ConstantsTable::ConstantsTable(const Request& request) {
    for (int d : request.dims) {
        s_[d] = sobolev_constant(d, make_grid(d, default_r_max_for_dimension(d), request.n));
    }
    for (const auto& [p, d] : request.gn) {
        ProfileSpec spec;
        spec.kind = ProfileKind::gn_optimizer;
        spec.d = d;
        spec.p = p;
        c_[{p, d}] = gn_constant(p, d, make_grid(d, default_r_max(spec), request.n));
    }
}

double ConstantsTable::S(int d) const {
    const auto it = s_.find(d);
    if (it == s_.end()) throw std::out_of_range("ConstantsTable: S_d not tabulated for d=" + std::to_string(d));
    return it->second;
}

double ConstantsTable::C(double p, int d) const {
    const auto it = c_.find({p, d});
    if (it == c_.end()) {
        throw std::out_of_range("ConstantsTable: C_{p,d} not tabulated for p=" + format_decimal17(p) +
                                ", d=" + std::to_string(d));
    }
    return it->second;
}

const ConstantsTable& ConstantsTable::shared() {
    static const ConstantsTable table([] {
        Request r;
        for (int d = 3; d <= 8; ++d) r.dims.push_back(d);
        r.gn = {{3.0, 2}, {2.0, 3}, {3.0, 3}};
        return r;
    }());
    return table;
}

}  // namespace sobflow
