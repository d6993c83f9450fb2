#include "doctest.h"

#include "sobflow/log_flow.hpp"
#include "sobflow/profiles.hpp"

#include <cmath>
#include <numbers>

using namespace sobflow;

namespace {

constexpr double pi = std::numbers::pi;

GridPtr grid2() {
    static const GridPtr g = make_grid(2, 1e4, 1024);
    return g;
}

RadialField gauss(double a) {
    return RadialField::sample(grid2(), [a](double r) { return a * std::exp(-r * r); });
}

RadialField perturbed_mu(double eps, double r0) {
    return RadialField::sample(grid2(), [=](double r) { return moon_measure(r) * (1.0 + eps * bump(r, r0, 0.8)); });
}

}  // namespace

TEST_CASE("mu-expectations") {
    CHECK(mu_expectation(RadialField::sample(grid2(), [](double) { return 1.0; })) == doctest::Approx(1.0).epsilon(1e-14));
    // int dmu/(1+|x|^2) = 1/2
    CHECK(mu_expectation(RadialField::sample(grid2(), [](double r) { return 1.0 / (1.0 + r * r); })) ==
          doctest::Approx(0.5).epsilon(1e-9));
    CHECK(log_exp_moment(RadialField(grid2())) == doctest::Approx(0.0));
}

TEST_CASE("Onofri deficit of a Gaussian bump") {
    // mpmath: grad = pi, mean = 0.40365263767680593, log-moment = 0.46163155774013378
    const OnofriInput g = OnofriInput::make(gauss(1.0));
    CHECK(std::abs(g.grad_sq - pi) < 1e-9);
    CHECK(std::abs(g.mean - 0.40365263767680593) < 1e-9);
    CHECK(std::abs(g.log_exp_mean - 0.46163155774013378) < 1e-9);
    CHECK(std::abs(onofri_deficit(g) - 0.0045210799366721471) < 1e-9);
    CHECK(onofri_deficit(OnofriInput::make(RadialField(grid2()))) == doctest::Approx(0.0));
    CHECK_THROWS_AS(OnofriInput::make(RadialField(make_grid(3, 10.0, 64))), std::invalid_argument);
}

TEST_CASE("log-HLS deficit and Legendre gap") {
    const RadialField mu = RadialField::sample(grid2(), moon_measure);
    CHECK(std::abs(loghls_deficit(mu, 1.0)) < 1e-5);
    for (auto [eps, r0] : {std::pair{0.5, 0.0}, {1.0, 1.0}, {-0.3, 0.5}}) {
        const MassOneDensity v = MassOneDensity::make(perturbed_mu(eps, r0));
        const double def = loghls_deficit(v.v, 1.0);
        CAPTURE(eps);
        CHECK(def > 0.0);
        CHECK(std::abs(legendre_gap(v) - def) < 1e-6);
        CHECK(compute_H2(v) <= 0.0);
        CHECK(compute_H2(v) == doctest::Approx(-legendre_gap(v) / (4.0 * pi)).epsilon(1e-12));
    }
    const MassOneDensity twice = MassOneDensity::make(2.0 * mu);
    CHECK(twice.input_mass == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(integrate(twice.v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exponential-moment curve: values and cumulants") {
    const ExpMomentCurve c = exp_moment_curve(gauss(1.0), 101);
    // Oracle: mpmath quadrature and numerical differentiation of h.
    CHECK(std::abs(c.shift + 0.43254960266840175) < 1e-9);
    CHECK(std::abs(c.h[0]) < 1e-10);
    CHECK(std::abs(c.h[50]) < 1e-10);
    CHECK(std::abs(c.h[30] + 0.0034845839960936697) < 1e-9);
    CHECK(std::abs(c.h1[30] - 0.0057656695670086628) < 1e-9);
    CHECK(std::abs(c.h2[30] - 0.11639054275106637) < 1e-8);
    CHECK(std::abs(c.h3[30] - 0.0037158301402160526) < 1e-8);
    // h(1) < h'(1/2) already for this bump: 0.029081955071732024 < 0.029091771457186131
    CHECK(std::abs(c.h[100] - 0.029081955071732024) < 1e-9);
    CHECK(std::abs(c.h1[50] - 0.029091771457186131) < 1e-9);
    CHECK(c.h[100] < c.h1[50]);

    // Cumulants agree with finite differences of the sampled curve.
    const double dt = c.t[1] - c.t[0];
    for (int k = 10; k <= 90; k += 20) {
        const auto i = static_cast<std::size_t>(k);
        CHECK(std::abs((c.h[i + 1] - c.h[i - 1]) / (2 * dt) - c.h1[i]) < 1e-5);
        CHECK(std::abs((c.h1[i + 1] - c.h1[i - 1]) / (2 * dt) - c.h2[i]) < 1e-5);
        CHECK(std::abs((c.h2[i + 1] - c.h2[i - 1]) / (2 * dt) - c.h3[i]) < 1e-4);
    }
}

TEST_CASE("the Lemma inequality holds with the quadrature margin") {
    const CheckReport r = lemma_loghlsder_check(gauss(1.0));
    CHECK(r.verdict == Verdict::pass);
    CHECK(std::abs(r.quantities.at("margin") - 0.0045112635512180408) < 1e-8);
    for (double a : {0.5, 1.0, 2.0}) {
        const CheckReport ra = lemma_loghlsder_check(RadialField::sample(grid2(), [a](double r) { return a * bump(r, 1.0, 0.7); }));
        CAPTURE(a);
        CHECK(ra.quantities.at("margin") >= 0.0);
    }
}

TEST_CASE("Onofri limit of the GN quotients") {
    const OnofriInput g = OnofriInput::make(RadialField::sample(grid2(), [](double r) { return bump(r, 0.0, 1.0); }));
    const double limit = onofri_limit_value(g);
    CHECK(std::abs(limit - 1.004531315437929) < 1e-9);
    double prev = 1.0;
    for (double p : {16.0, 64.0, 256.0}) {
        const double q2p = onofri_limit_quotient(g, p);
        CHECK(q2p >= 1.0 - 1e-6);
        CHECK(onofri_gn_quotient(g, p) >= 1.0 - 1e-6);
        CHECK(std::abs(q2p - limit) < std::abs(prev - limit));
        prev = q2p;
    }
    CHECK_THROWS_AS(onofri_gn_quotient(OnofriInput::make(gauss(-40.0)), 2.0), std::domain_error);
}

TEST_CASE("log flow: mass, monotone H2, H2' identity") {
    LogFlowParams p;
    p.t_final = 0.05;
    const LogFlowTrace tr = run_log_flow(MassOneDensity::make(perturbed_mu(0.5, 1.0)), p);
    const CheckReport r = h2_derivative_check(tr);
    CHECK(r.verdict == Verdict::pass);
    CHECK(r.quantities.at("mass_drift") < 1e-8);
    for (std::size_t i = 1; i < tr.samples.size(); ++i) CHECK(tr.samples[i].H2 >= tr.samples[i - 1].H2 - 1e-8 * std::abs(tr.samples[0].H2));
    for (const auto& s : tr.samples) CHECK(s.rhs_H2prime >= -1e-12);
    CHECK(log_trace_csv(tr).rfind("t,H2,mass,rhs_H2prime\n", 0) == 0);
}

TEST_CASE("mu is stationary") {
    LogFlowParams p;
    p.t_final = 10 * p.dt0;
    const LogFlowTrace tr = run_log_flow(MassOneDensity::make(RadialField::sample(grid2(), moon_measure)), p);
    CHECK(tr.max_step_change < 1e-10);
    CHECK(h2_derivative_check(tr).verdict == Verdict::pass);
}

TEST_CASE("Cauchy-Schwarz probe") {
    for (double a : {-1.5, 0.5, 2.0}) {
        const CheckReport r = failed_scheme_probe(RadialField::sample(grid2(), [a](double r) { return a * bump(r, 0.5, 0.9); }));
        CAPTURE(a);
        CHECK(r.verdict == Verdict::pass);
        CHECK(r.quantities.at("cauchy_schwarz_ratio") <= 1.0 + 1e-6);
    }
}
