#include "sobflow/fd_flow.hpp"

#include "implicit.hpp"
#include "sobflow/field_io.hpp"
#include "sobflow/profiles.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sobflow {

FlowParams FlowParams::sobolev(int d) {
    if (d < 3) throw std::invalid_argument("the extinction flow needs d >= 3");
    FlowParams p;
    p.d = d;
    p.m = (d - 2.0) / (d + 2.0);
    return p;
}

FlowParams FlowParams::ccl(int d, double t_final) {
    if (d < 2) throw std::invalid_argument("dimension must be >= 2");
    FlowParams p;
    p.d = d;
    p.m = static_cast<double>(d) / (d + 2.0);
    p.clock_scaled_dt = false;
    p.t_final = t_final;
    return p;
}

bool FlowParams::sobolev_exponent() const { return d >= 3 && std::abs(m - (d - 2.0) / (d + 2.0)) < 1e-14; }

bool FlowParams::in_scope() const {
    return sobolev_exponent() || std::abs(m - static_cast<double>(d) / (d + 2.0)) < 1e-14;
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::extinct: return "extinct";
        case Termination::horizon: return "horizon";
        case Termination::max_steps: return "max_steps";
        case Termination::error: return "error";
    }
    return "?";
}

namespace {

constexpr double kMaskLevel = 1e-30;

bool is_sobolev_exponent(int d, double m) { return d >= 3 && std::abs(m - (d - 2.0) / (d + 2.0)) < 1e-14; }

}  // namespace

FunctionalSample functionals(const RadialField& v, double m) {
    const int d = v.dimension();
    const double S = d >= 3 ? ConstantsTable::shared().S(d) : std::numeric_limits<double>::quiet_NaN();
    return functionals(v, m, S);
}

FunctionalSample functionals(const RadialField& v, double m, double S) {
    const int d = v.dimension();
    const RadialField vp = v.map([](double x) { return std::max(x, 0.0); });
    const RadialField w = vp.map([m](double x) { return std::pow(x, m); });

    FunctionalSample s;
    s.J = integrate(vp * w);
    if (!(s.J > 0.0)) throw NumericalError("functionals: J = 0 (extinction reached)");
    s.grad_sq = dirichlet_energy(w);
    s.Q = s.grad_sq * std::pow(s.J, -(d - 2.0) / d);
    s.Lambda = s.grad_sq / s.J;
    s.mass = integrate(vp);
    s.sup_star = sup_weighted_norm(vp);

    const RadialField lap = radial_laplacian(w);
    const auto vv = vp.values();
    const auto lv = lap.values();
    const auto wt = v.grid().weights();
    double kept = 0.0, masked = 0.0;
    for (std::size_t i = 0; i < vv.size(); ++i) {
        if (vv[i] <= 0.0) continue;
        const double e = lv[i] + s.Lambda * vv[i];
        const double term = wt[i] * std::pow(vv[i], m - 1.0) * e * e;
        (vv[i] < kMaskLevel ? masked : kept) += term;
    }
    s.K = kept;
    s.K_masked_fraction = kept > 0.0 ? masked / kept : (masked > 0.0 ? 1.0 : 0.0);

    if (d >= 3) {
        PotentialOptions quiet;
        quiet.tail_warn_fraction = 0.0;
        const RadialField u = newton_potential(vp, quiet);
        const double r = 2.0 * d / (d + 2.0);
        const double norm_r = lp_norm(vp, r);
        s.H = integrate(vp * u) - S * norm_r * norm_r;
        if (is_sobolev_exponent(d, m)) {
            s.Hprime = 2.0 * s.J * (S * s.Q - 1.0);
        } else {
            const RadialField vr = vp.map([r](double x) { return std::pow(x, r - 1.0); });
            s.Hprime = -2.0 * s.J + 2.0 * S * std::pow(norm_r, 2.0 - r) * dirichlet_form(vr, w);
        }
    } else {
        s.H = s.Hprime = std::numeric_limits<double>::quiet_NaN();
    }
    return s;
}

double extinction_upper_bound(const RadialField& v0) {
    const int d = v0.dimension();
    const double m = (d - 2.0) / (d + 2.0);
    const double J0 = integrate(v0.map([m](double x) { return std::pow(std::max(x, 0.0), m + 1.0); }));
    return 0.25 * (d + 2.0) * ConstantsTable::shared().S(d) * std::pow(J0, 2.0 / d);
}

double kappa(const RadialField& v0, int d) {
    if (v0.dimension() != d) throw std::invalid_argument("kappa: dimension mismatch");
    const double m = (d - 2.0) / (d + 2.0);
    const double J0 = integrate(v0.map([m](double x) { return std::pow(std::max(x, 0.0), m + 1.0); }));
    if (!(J0 > 0.0)) throw std::invalid_argument("kappa: J(0) must be positive");
    return 2.0 * d / (d + 2.0) / ConstantsTable::shared().S(d) * std::pow(J0, -2.0 / d);
}

FlowTrace run_flow(const RadialField& v0, const FlowParams& params, const FlowObserver& observer) {
    const int d = v0.dimension();
    if (params.d != d) throw std::invalid_argument("run_flow: params.d does not match the field dimension");
    if (!(params.m > 0.0 && params.m < 1.0)) throw std::invalid_argument("run_flow: m must lie in (0,1)");
    if (!v0.all_finite()) throw std::invalid_argument("run_flow: initial datum is not finite");
    const double vmax = v0.max_value();
    if (!(vmax > 0.0)) throw std::invalid_argument("run_flow: initial datum must be nonnegative and not identically 0");
    if (v0.min_value() < -1e-14 * vmax) throw std::invalid_argument("run_flow: initial datum has negative values");
    if (!params.in_scope()) {
        warn("run_flow: m = " + format_decimal17(params.m) + " is outside the exponents covered by the theory");
    }

    const double m = params.m;
    const double q = 1.0 / m;
    const bool extinction_flow = params.sobolev_exponent();
    const double S = d >= 3 ? ConstantsTable::shared().S(d) : std::numeric_limits<double>::quiet_NaN();
    const GridPtr grid = v0.grid_ptr();
    const double R = grid->r_max();

    Boundary bc = params.boundary;
    if (bc == Boundary::automatic) bc = extinction_flow ? Boundary::harmonic_robin : Boundary::no_flux;
    const double robin = bc == Boundary::harmonic_robin ? (d - 2.0) * R / (1.0 + R * R) : 0.0;
    const detail::ImplicitDiffusion solver(*grid, robin);

    // Fast diffusion is instantly positive; a tiny floor keeps w = v^m invertible.
    const double floor = 1e-300;
    std::vector<double> v(v0.values().begin(), v0.values().end());
    for (auto& x : v) x = std::max(x, floor);
    std::vector<double> z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) z[i] = std::pow(v[i], m);
    double zmax = *std::max_element(z.begin(), z.end());

    detail::Constitutive law;
    law.positive_unknown = true;
    law.value = [q](int, double x) { return std::pow(x, q); };
    law.slope = [q](int, double x) { return q * std::pow(x, q - 1.0); };
    law.inverse = [m](int, double x) { return x > 0.0 ? std::pow(x, m) : -1.0; };

    FlowTrace trace;
    trace.params = params;
    trace.grid_n = grid->size();
    trace.r_max = R;

    RadialField state(grid, v);
    FunctionalSample s0 = functionals(state, m, S);
    s0.t = 0.0;
    trace.samples.push_back(s0);
    trace.snapshots.push_back({0.0, state});
    if (observer) observer(0.0, state);
    const double J0 = s0.J;

    double dt0 = params.dt0;
    if (!(dt0 > 0.0)) {
        if (extinction_flow) {
            dt0 = 0.25 * (d + 2.0) * S * std::pow(J0, 2.0 / d) / 400.0;
        } else {
            dt0 = std::isfinite(params.t_final) ? params.t_final / 1000.0 : 1e-3;
        }
    }
    trace.dt0 = dt0;

    double t = 0.0;
    double J = J0;
    trace.termination = Termination::max_steps;
    for (int step = 0; step < params.max_steps; ++step) {
        if (std::isfinite(params.t_final) && t >= params.t_final * (1.0 - 1e-14)) {
            trace.termination = Termination::horizon;
            break;
        }
        double dt = dt0;
        if (params.clock_scaled_dt && extinction_flow) dt *= std::max(std::pow(J / J0, 2.0 / d), 1e-12);
        if (std::isfinite(params.t_final)) dt = std::min(dt, params.t_final - t);

        detail::StepResult next;
        for (int attempt = 0; attempt <= params.max_halvings; ++attempt) {
            // Convergence is judged relative to each node's value, with a
            // floor far below anything that enters the functionals.
            law.scale_floor = 1e-30 * zmax;
            next = solver.advance(v, z, dt, law, params.newton_tol, params.newton_max_iter, params.time_order);
            if (next.ok) break;
            ++trace.rejections;
            dt *= 0.5;
        }
        if (!next.ok) {
            std::ostringstream msg;
            msg << "run_flow: step at t=" << t << " failed after " << params.max_halvings
                << " halvings (dt=" << dt << ", J/J0=" << J / J0 << ")";
            trace.termination = Termination::error;
            trace.message = msg.str();
            throw NumericalError(msg.str());
        }
        v = std::move(next.v);
        z = std::move(next.z);
        t += dt;
        ++trace.steps;
        zmax = *std::max_element(z.begin(), z.end());

        state = RadialField(grid, v);
        FunctionalSample s = functionals(state, m, S);
        s.t = t;
        trace.samples.push_back(s);
        J = s.J;
        if (observer) observer(t, state);
        if (params.snapshot_every > 0 && trace.steps % params.snapshot_every == 0) trace.snapshots.push_back({t, state});

        if (extinction_flow && J < params.eps_ext * J0) {
            trace.termination = Termination::extinct;
            break;
        }
    }
    if (trace.snapshots.back().t != t) trace.snapshots.push_back({t, state});

    if (trace.termination == Termination::extinct) {
        // J^{2/d} is asymptotically linear in t; extrapolate its zero.
        const int k = std::min<int>(params.extinction_fit_points, static_cast<int>(trace.samples.size()));
        double st = 0, sy = 0, stt = 0, sty = 0;
        for (int i = static_cast<int>(trace.samples.size()) - k; i < static_cast<int>(trace.samples.size()); ++i) {
            const auto& s = trace.samples[static_cast<std::size_t>(i)];
            const double y = std::pow(s.J, 2.0 / d);
            st += s.t;
            sy += y;
            stt += s.t * s.t;
            sty += s.t * y;
        }
        const double slope = (k * sty - st * sy) / (k * stt - st * st);
        const double icpt = (sy - slope * st) / k;
        trace.T_hat = slope < 0.0 ? -icpt / slope : std::numeric_limits<double>::quiet_NaN();
    }
    return trace;
}

std::vector<double> centered_derivative(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h1 = t[i] - t[i - 1], h2 = t[i + 1] - t[i];
        out[i] = -h2 / (h1 * (h1 + h2)) * y[i - 1] + (h2 - h1) / (h1 * h2) * y[i] + h1 / (h2 * (h1 + h2)) * y[i + 1];
    }
    return out;
}

namespace {

template <class F>
std::vector<double> column(const FlowTrace& trace, F&& f) {
    std::vector<double> out;
    out.reserve(trace.samples.size());
    for (const auto& s : trace.samples) out.push_back(f(s));
    return out;
}

// max |a - b| / max(max |b|, floor) over interior indices.
double interior_residual(const std::vector<double>& a, const std::vector<double>& b, double floor,
                         double* max_b = nullptr) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i + 1 < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    if (max_b) *max_b = den;
    return num / std::max(den, floor);
}

void fill_meta(CheckReport& r, const FlowTrace& trace) {
    r.grid_n = trace.grid_n;
    r.r_max = trace.r_max;
    r.dt = trace.dt0;
}

double sobolev_S(const FlowTrace& trace) { return ConstantsTable::shared().S(trace.params.d); }

}  // namespace

CheckReport hd_derivative_check(const FlowTrace& trace, double tol) {
    if (!trace.params.sobolev_exponent()) throw std::invalid_argument("hd_derivative_check needs the m=(d-2)/(d+2) flow");
    if (trace.samples.size() < 5) throw std::invalid_argument("hd_derivative_check: too few samples");
    const double S = sobolev_S(trace);
    const auto t = column(trace, [](const auto& s) { return s.t; });
    const auto H = column(trace, [](const auto& s) { return s.H; });
    const auto rhs = column(trace, [](const auto& s) { return s.Hprime; });
    double scale = 0.0;
    for (const auto& s : trace.samples) scale = std::max(scale, 2.0 * S * s.J * s.Q);
    const auto fd = centered_derivative(t, H);

    CheckReport r;
    r.name = "hd_derivative";
    r.anchor = "d/dt H_d = 2 J^{2/d} [S_d ||grad v^m||^2 - ||v^m||_{2*}^2] >= 0 along v_t = Lap v^m, m=(d-2)/(d+2)";
    double max_rhs = 0.0;
    r.residual = interior_residual(fd, rhs, 1e-6 * scale, &max_rhs);
    double min_rhs = 0.0;
    for (double x : rhs) min_rhs = std::min(min_rhs, x);
    r.quantities["max_abs_rhs"] = max_rhs;
    r.quantities["min_rhs_normalized"] = min_rhs / scale;
    r.quantities["samples"] = static_cast<double>(trace.samples.size());
    r.tolerance = tol;
    fill_meta(r, trace);
    r.decide();
    if (min_rhs < -1e-8 * scale) {
        r.verdict = Verdict::fail;
        r.note = "analytic right side negative beyond tolerance";
    }
    return r;
}

CheckReport second_derivative_check(const FlowTrace& trace, double tol) {
    CheckReport r;
    r.name = "second_derivative";
    r.anchor = "H'' = -(m+1) Lambda H' - 4 m S_d J^{2/d} K and Q' = -2 m J^{2/d-1} K";
    r.tolerance = tol;
    fill_meta(r, trace);
    const int d = trace.params.d;
    if (d < 5) {
        r.verdict = Verdict::skipped;
        r.note = "skipped (d<5): the second-derivative computation needs d >= 5 for integrability";
        return r;
    }
    if (!trace.params.sobolev_exponent()) throw std::invalid_argument("second_derivative_check needs the m=(d-2)/(d+2) flow");
    if (trace.samples.size() < 5) throw std::invalid_argument("second_derivative_check: too few samples");
    const double m = trace.params.m;
    const double S = sobolev_S(trace);
    const auto t = column(trace, [](const auto& s) { return s.t; });
    const auto Hp = column(trace, [](const auto& s) { return s.Hprime; });
    const auto Q = column(trace, [](const auto& s) { return s.Q; });
    const auto Jp = column(trace, [m](const auto& s) { return -(m + 1.0) * s.grad_sq; });
    const auto rhs_h = column(trace, [&](const auto& s) {
        return -(m + 1.0) * s.Lambda * s.Hprime - 4.0 * m * S * std::pow(s.J, 2.0 / d) * s.K;
    });
    const auto rhs_q = column(trace, [&](const auto& s) { return -2.0 * m * std::pow(s.J, 2.0 / d - 1.0) * s.K; });

    double scale_h = 0.0, scale_q = 0.0;
    for (const auto& s : trace.samples) {
        scale_h = std::max(scale_h, (m + 1.0) * s.Lambda * 2.0 * S * s.J * s.Q);
        scale_q = std::max(scale_q, (m + 1.0) * s.Lambda * s.Q);
    }
    const double res_h = interior_residual(centered_derivative(t, Hp), rhs_h, 1e-6 * scale_h);
    const double res_q = interior_residual(centered_derivative(t, Q), rhs_q, 1e-6 * scale_q);

    int q_violations = 0;
    double worst_q = 0.0;
    for (std::size_t i = 1; i < Q.size(); ++i) {
        const double rise = (Q[i] - Q[i - 1]) / Q.front();
        worst_q = std::max(worst_q, rise);
        if (rise > 1e-10) ++q_violations;
    }
    const auto Jpp = centered_derivative(t, Jp);
    double min_jpp = 0.0, jpp_scale = 0.0;
    for (std::size_t i = 1; i + 1 < Jpp.size(); ++i) {
        min_jpp = std::min(min_jpp, Jpp[i]);
        jpp_scale = std::max(jpp_scale, std::abs(Jpp[i]));
    }

    r.quantities["Hpp_residual"] = res_h;
    r.quantities["Qp_residual"] = res_q;
    r.quantities["Q_max_relative_rise"] = worst_q;
    r.quantities["Q_monotonicity_violations"] = q_violations;
    r.quantities["min_Jpp_normalized"] = jpp_scale > 0.0 ? min_jpp / jpp_scale : 0.0;
    r.residual = std::max(res_h, res_q);
    r.decide();
    if (q_violations > 0) {
        r.verdict = Verdict::fail;
        r.note = "Q increased between samples";
    }
    return r;
}

CheckReport decay_bounds_check(const FlowTrace& trace, double tol) {
    CheckReport r;
    r.name = "decay_bounds";
    r.anchor = "(4(T-t)/((d+2)S_d))^{d/2} <= J(t) <= J(0); kappa T <= d/2; T >= (d+2)/(2d) J(0)/||grad v0^m||^2; "
               "J(t) >= J(0) - 2d/(d+2) t ||grad v0^m||^2; ||grad v^m(t)||^2 <= ||grad v0^m||^2";
    r.tolerance = tol;
    fill_meta(r, trace);
    if (!trace.params.sobolev_exponent()) throw std::invalid_argument("decay_bounds_check needs the m=(d-2)/(d+2) flow");
    const int d = trace.params.d;
    const double m = trace.params.m;
    const double S = sobolev_S(trace);
    const auto& s0 = trace.initial();
    const double T = trace.T_hat;
    const double J0 = s0.J, g0 = s0.grad_sq;
    const double T_up = 0.25 * (d + 2.0) * S * std::pow(J0, 2.0 / d);
    const double T_low = (d + 2.0) / (2.0 * d) * J0 / g0;

    double v1 = 0.0, v2 = 0.0, v4 = 0.0, v5 = 0.0;
    for (const auto& s : trace.samples) {
        const double lower = 4.0 * (T - s.t) / ((d + 2.0) * S);
        v1 = std::max(v1, (lower - std::pow(s.J, 2.0 / d)) / std::pow(J0, 2.0 / d));
        v2 = std::max(v2, (s.J - J0) / J0);
        v4 = std::max(v4, (J0 - (m + 1.0) * s.t * g0 - s.J) / J0);
        v5 = std::max(v5, (s.grad_sq - g0) / g0);
    }
    const double v3 = (T_low - T) / T;
    const double v_up = (T - T_up) / T_up;
    r.quantities["T_hat"] = T;
    r.quantities["T_upper"] = T_up;
    r.quantities["T_lower"] = T_low;
    r.quantities["kappa_T_hat"] = 2.0 * d / (d + 2.0) / S * std::pow(J0, -2.0 / d) * T;
    r.quantities["violation_J_lower"] = v1;
    r.quantities["violation_J_decreasing"] = v2;
    r.quantities["violation_T_upper"] = v_up;
    double worst = std::max({v1, v2, v_up});
    if (d >= 5) {
        r.quantities["violation_T_lower"] = v3;
        r.quantities["violation_J_linear"] = v4;
        r.quantities["violation_grad_decreasing"] = v5;
        worst = std::max({worst, v3, v4, v5});
    } else {
        r.note = "d < 5: the last three estimates are not evaluated";
    }
    r.residual = std::max(worst, 0.0);
    if (trace.termination != Termination::extinct || !std::isfinite(T)) {
        r.make_diagnostic();
        r.note = "incomplete: trace did not reach extinction";
        return r;
    }
    r.decide();
    return r;
}

CheckReport monotonicity_check(const FlowTrace& trace, double rel_tol) {
    if (!trace.params.sobolev_exponent()) throw std::invalid_argument("monotonicity_check needs the m=(d-2)/(d+2) flow");
    const double S = sobolev_S(trace);
    const auto& s0 = trace.initial();
    const double scale0 = S * std::pow(s0.J, 2.0 / trace.params.d) * std::pow(s0.J, (trace.params.d - 2.0) / trace.params.d);
    const double ref = std::max(std::abs(s0.H), 1e-5 * scale0);
    double worst_drop = 0.0, worst_h = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        worst_h = std::max(worst_h, trace.samples[i].H);
        if (i > 0) worst_drop = std::max(worst_drop, (trace.samples[i - 1].H - trace.samples[i].H) / ref);
    }
    CheckReport r;
    r.name = "hd_monotonicity";
    r.anchor = "H_d nondecreasing along v_t = Lap v^m, m=(d-2)/(d+2); H_d <= 0 by the HLS inequality";
    r.quantities["H0"] = s0.H;
    r.quantities["max_drop_normalized"] = worst_drop;
    r.quantities["max_H_normalized"] = worst_h / scale0;
    r.residual = worst_drop;
    r.tolerance = rel_tol;
    fill_meta(r, trace);
    r.decide();
    if (worst_h > 1e-10 * scale0) {
        r.verdict = Verdict::fail;
        r.note = "H > 0 at some sample";
    }
    return r;
}

std::vector<VanishingPoint> vanishing_profile_diagnostic(const FlowTrace& trace, double decades) {
    if (!trace.params.sobolev_exponent()) throw std::invalid_argument("vanishing_profile_diagnostic needs the extinction flow");
    if (trace.termination != Termination::extinct || !std::isfinite(trace.T_hat)) {
        throw std::invalid_argument("vanishing_profile_diagnostic needs an extinct trace");
    }
    const int d = trace.params.d;
    const double T = trace.T_hat;
    const auto sp = separated_params(d);
    const double last_gap = T - trace.snapshots.back().t;
    std::vector<VanishingPoint> out;
    for (const auto& snap : trace.snapshots) {
        const double gap = T - snap.t;
        if (!(gap > 0.0) || gap > last_gap * std::pow(10.0, decades)) continue;
        const auto r = snap.v.grid().nodes();
        const auto v = snap.v.values();
        const double amp = sp.c * std::pow(gap, sp.alpha);
        auto deviation = [&](double lambda, double exponent) {
            double worst = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) {
                const double x = r[i] / lambda;
                const double vbar = std::pow(lambda, -0.5 * (d + 2)) * amp * std::pow(1.0 + x * x, -0.5 * (d + 2));
                const double weight = exponent == 0.0 ? 1.0 : std::pow(1.0 + r[i] * r[i], exponent);
                worst = std::max(worst, weight * std::abs(v[i] / vbar - 1.0));
            }
            return worst;
        };
        const auto best = boost::math::tools::brent_find_minima(
            [&](double loglam) { return deviation(std::exp(loglam), 0.0); }, std::log(0.25), std::log(4.0), 40);
        const double lambda = std::exp(best.first);
        if (std::abs(best.first - std::log(0.25)) < 1e-6 || std::abs(best.first - std::log(4.0)) < 1e-6) {
            warn("vanishing_profile_diagnostic: lambda fit hit the bracket at t=" + format_decimal17(snap.t));
            continue;
        }
        VanishingPoint p;
        p.t = snap.t;
        p.lambda = lambda;
        p.deviation = best.second;
        p.weighted = deviation(lambda, d + 2.0);
        p.normalized = std::pow(gap, -0.25 * (d + 2)) * p.deviation;
        out.push_back(p);
    }
    return out;
}

std::string trace_csv(const FlowTrace& trace) {
    std::ostringstream out;
    out << "t,J,Q,Lambda,K,H,Hprime,mass\n";
    for (const auto& s : trace.samples) {
        out << format_decimal17(s.t) << ',' << format_decimal17(s.J) << ',' << format_decimal17(s.Q) << ','
            << format_decimal17(s.Lambda) << ',' << format_decimal17(s.K) << ',' << format_decimal17(s.H) << ','
            << format_decimal17(s.Hprime) << ',' << format_decimal17(s.mass) << '\n';
    }
    return out.str();
}

}  // namespace sobflow
