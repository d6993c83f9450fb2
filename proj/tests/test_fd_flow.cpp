#include "doctest.h"

#include "sobflow/fd_flow.hpp"
#include "sobflow/profiles.hpp"

#include <cmath>

using namespace sobflow;

namespace {

const FlowTrace& perturbed_trace() {
    static const FlowTrace tr = [] {
        const GridPtr g = make_grid(5, 1e4, 512);
        return run_flow(profile(parse_profile("aubin_talenti:eps=0.1,exponent=q", 5), g), FlowParams::sobolev(5));
    }();
    return tr;
}

}  // namespace

TEST_CASE("flow parameters") {
    CHECK(FlowParams::sobolev(5).m == doctest::Approx(3.0 / 7.0));
    CHECK(FlowParams::sobolev(5).sobolev_exponent());
    CHECK(FlowParams::ccl(2, 1.0).m == 0.5);
    CHECK(FlowParams::ccl(4, 1.0).m == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(FlowParams::sobolev(2), std::invalid_argument);
    FlowParams odd = FlowParams::sobolev(5);
    odd.m = 0.7;
    CHECK_FALSE(odd.in_scope());
}

TEST_CASE("centered derivative is exact on quadratics") {
    const std::vector<double> t = {0.0, 0.1, 0.25, 0.3, 0.7, 1.0};
    std::vector<double> y;
    for (double x : t) y.push_back(3.0 * x * x - x + 2.0);
    const auto dy = centered_derivative(t, y);
    for (std::size_t i = 1; i + 1 < t.size(); ++i) CHECK(dy[i] == doctest::Approx(6.0 * t[i] - 1.0).epsilon(1e-12));
}

TEST_CASE("separated solution extinguishes at T") {
    const GridPtr g = make_grid(5, 1e4, 512);
    const FlowTrace tr = run_flow(profile(parse_profile("separated:T=1", 5), g), FlowParams::sobolev(5));
    CHECK(tr.termination == Termination::extinct);
    CHECK(std::abs(tr.T_hat - 1.0) < 1e-2);
    CHECK(std::abs(tr.T_hat - 1.0) < 1e-5);
    const CheckReport b = decay_bounds_check(tr);
    CHECK(b.verdict == Verdict::pass);
    CHECK(b.quantities.at("kappa_T_hat") <= 2.5 + 1e-2);
}

TEST_CASE("small data extinguish early and obey the upper bound") {
    const int d = 5;
    const GridPtr g = make_grid(d, 1e4, 512);
    const RadialField v = profile(parse_profile("aubin_talenti:eps=0.1,exponent=q", d), g);
    const double eps = 0.01;
    const RadialField small = eps * v;
    const double m = (d - 2.0) / (d + 2.0);
    // T_upper scales like eps^{2(m+1)/d}
    CHECK(extinction_upper_bound(small) / extinction_upper_bound(v) == doctest::Approx(std::pow(eps, 2.0 * (m + 1.0) / d)).epsilon(1e-10));
    const FlowTrace tr = run_flow(small, FlowParams::sobolev(d));
    CHECK(tr.termination == Termination::extinct);
    CHECK(tr.T_hat <= extinction_upper_bound(small) * (1.0 + 1e-6));
}

TEST_CASE("perturbed optimizer: signs, monotonicity, identities") {
    const FlowTrace& tr = perturbed_trace();
    REQUIRE(tr.termination == Termination::extinct);
    const FunctionalSample& s0 = tr.initial();
    CHECK(s0.H < 0.0);
    CHECK(s0.Hprime > 0.0);
    CHECK(s0.K > 0.0);
    CHECK(monotonicity_check(tr).verdict == Verdict::pass);
    CHECK(hd_derivative_check(tr).verdict == Verdict::pass);
    CHECK(decay_bounds_check(tr).verdict == Verdict::pass);
    const CheckReport sd = second_derivative_check(tr);
    CHECK(sd.verdict == Verdict::pass);
    CHECK(sd.quantities.at("Q_monotonicity_violations") == 0.0);
    for (const auto& s : tr.samples) CHECK(s.H <= 0.0);
}

TEST_CASE("second-derivative check refuses d < 5") {
    const GridPtr g = make_grid(4, 1e4, 256);
    const FlowTrace tr = run_flow(profile(parse_profile("aubin_talenti:eps=0.1,exponent=q", 4), g), FlowParams::sobolev(4));
    CHECK(second_derivative_check(tr).verdict == Verdict::skipped);
}

TEST_CASE("trace CSV layout") {
    const std::string csv = trace_csv(perturbed_trace());
    CHECK(csv.rfind("t,J,Q,Lambda,K,H,Hprime,mass\n", 0) == 0);
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(static_cast<std::size_t>(lines) == perturbed_trace().samples.size() + 1);
}

TEST_CASE("invalid initial data") {
    const GridPtr g = make_grid(5, 1e4, 128);
    const RadialField neg = RadialField::sample(g, [](double r) { return r < 1.0 ? -1.0 : 1.0; });
    CHECK_THROWS_AS(run_flow(neg, FlowParams::sobolev(5)), std::invalid_argument);
    FlowParams p = FlowParams::sobolev(5);
    p.d = 4;
    CHECK_THROWS_AS(run_flow(RadialField::sample(g, [](double r) { return aubin_talenti(5, r); }), p), std::invalid_argument);
}
