// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
// Usage: acceptance <path-to-sobflow-cli> <scratch-dir>

#include "sobflow/fd_flow.hpp"
#include "sobflow/inequality.hpp"
#include "sobflow/log_flow.hpp"
#include "sobflow/profiles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace sobflow;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Detail {
public:
    template <class T>
    Detail& add(const std::string& key, const T& value) {
        if (!text_.empty()) text_ += ", ";
        std::ostringstream os;
        os.precision(4);
        os << key << "=" << value;
        text_ += os.str();
        return *this;
    }
    std::string str() const { return text_; }

private:
    std::string text_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const char* kPerturbed[] = {"aubin_talenti:eps=0.1,exponent=q", "aubin_talenti:eps=0.2,r0=1,exponent=q",
                            "aubin_talenti:eps=-0.05,r0=0.5,width=0.7,exponent=q"};

GridPtr grid5() {
    static const GridPtr g = make_grid(5, 1e4, 512);
    return g;
}

// Extinction runs shared by criteria 4, 5 and 8.
struct Run {
    std::string label;
    FlowTrace trace;
    double seconds;
};

const std::vector<Run>& perturbed_runs() {
    static const std::vector<Run> runs = [] {
        std::vector<Run> out;
        for (const char* text : kPerturbed) {
            const auto t0 = std::chrono::steady_clock::now();
            FlowTrace tr = run_flow(profile(parse_profile(text, 5), grid5()), FlowParams::sobolev(5));
            out.push_back({text, std::move(tr), seconds_since(t0)});
        }
        return out;
    }();
    return runs;
}

GridPtr grid2() {
    static const GridPtr g = make_grid(2, 1e4, 512);
    return g;
}

// ---------------------------------------------------------------- criteria

Outcome c1() {
    Detail det;
    bool ok = true;
    for (int d : {3, 5}) {
        const double R = default_r_max_for_dimension(d);
        const double r512 = aubin_talenti_residual(make_grid(d, R, 512));
        const double r1024 = aubin_talenti_residual(make_grid(d, R, 1024));
        const double r2048 = aubin_talenti_residual(make_grid(d, R, 2048));
        const double order = std::log2(r512 / r1024);
        // Sixth-order stencils: each halving of h should divide the residual by ~2^6.
        ok = ok && r2048 <= 1e-4 && order >= 5.0 && r1024 > r2048;
        det.add("d" + std::to_string(d) + "_res2048", r2048).add("d" + std::to_string(d) + "_order", order);
    }
    return {ok, det.str()};
}

Outcome c2() {
    const auto t0 = std::chrono::steady_clock::now();
    Detail det;
    bool ok = true;
    for (int d : {2, 3, 4, 5}) {
        const CheckReport r = ccl_identity_check(d, 2048, 1e-5);
        ok = ok && r.residual <= 1e-5;
        det.add("d" + std::to_string(d), r.residual);
    }
    const double secs = seconds_since(t0);
    det.add("seconds", secs);
    return {ok && secs < 10.0, det.str()};
}

Outcome c3() {
    Detail det;
    double worst = 0.0;
    for (double p : {2.0, 3.0, 9.0}) {
        ProfileSpec s;
        s.kind = ProfileKind::gn_optimizer;
        s.d = 2;
        s.p = p;
        const auto I = optimizer_integrals(p, make_grid(2, default_r_max(s), 2048));
        worst = std::max({worst, std::abs(I.grad_sq / (2.0 * pi / (p + 1.0)) - 1.0),
                          std::abs(I.pow_p1 / ((p - 1.0) * pi / 2.0) - 1.0)});
    }
    det.add("max_rel_err", worst);
    return {worst <= 1e-5, det.str()};
}

Outcome c4() {
    Detail det;
    bool ok = true;
    for (const Run& run : perturbed_runs()) {
        const FlowTrace& tr = run.trace;
        const double h0 = std::abs(tr.initial().H);
        double worst_drop = 0.0, max_h = -inf;
        for (std::size_t i = 1; i < tr.samples.size(); ++i) worst_drop = std::max(worst_drop, tr.samples[i - 1].H - tr.samples[i].H);
        for (const auto& s : tr.samples) max_h = std::max(max_h, s.H);
        ok = ok && tr.termination == Termination::extinct && worst_drop <= 1e-8 * h0 && max_h <= 0.0 && run.seconds < 60.0;
        det.add("drop/|H0|", worst_drop / h0).add("maxH", max_h).add("s", run.seconds);
    }
    return {ok, det.str()};
}

Outcome c5() {
    Detail det;
    bool ok = true;
    for (const Run& run : perturbed_runs()) {
        const CheckReport b = decay_bounds_check(run.trace);
        const double T = run.trace.T_hat, low = b.quantities.at("T_lower"), up = b.quantities.at("T_upper");
        ok = ok && low <= T && T <= up;
        det.add("slack_up", (up - T) / up);
    }
    const FlowTrace sep = run_flow(profile(parse_profile("separated:T=1", 5), grid5()), FlowParams::sobolev(5));
    const double S = ConstantsTable::shared().S(5);
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double k = static_cast<double>(sep.samples.size());
    for (const auto& s : sep.samples) {
        const double y = std::pow(s.J, 2.0 / 5.0);
        st += s.t;
        sy += y;
        stt += s.t * s.t;
        sty += s.t * y;
    }
    const double slope = (k * sty - st * sy) / (k * stt - st * st);
    const double slope_err = std::abs(slope / (-4.0 / (7.0 * S)) - 1.0);
    const double t_err = std::abs(sep.T_hat - 1.0);
    det.add("sep_slope_err", slope_err).add("sep_T_err", t_err);
    return {ok && slope_err <= 1e-2 && t_err <= 1e-2, det.str()};
}

Outcome c6() {
    const RadialField v0 = profile(parse_profile(kPerturbed[0], 5), grid5());
    FlowParams p = FlowParams::sobolev(5);
    const FlowTrace base = run_flow(v0, p);
    p.dt0 = base.dt0 / 2.0;
    const FlowTrace half = run_flow(v0, p);
    const CheckReport a = second_derivative_check(base), b = second_derivative_check(half);
    const double ratio = a.residual / b.residual;
    const bool q_ok = a.quantities.at("Q_monotonicity_violations") == 0.0 && b.quantities.at("Q_monotonicity_violations") == 0.0;
    Detail det;
    det.add("res", a.residual).add("res_half_dt", b.residual).add("ratio", ratio).add("Q_monotone", q_ok);
    return {a.residual <= 3e-2 && ratio >= 1.5 && q_ok, det.str()};
}

Outcome c7() {
    Detail det;
    bool ok = true;
    for (int i = 0; i < 2; ++i) {
        const CheckReport r = theorem_gap_check(perturbed_runs()[static_cast<std::size_t>(i)].trace);
        ok = ok && r.residual <= 3e-2;
        det.add("rel_" + std::to_string(i), r.residual);
    }
    const CheckReport f = theorem_gap_check(profile(parse_profile("aubin_talenti", 5), grid5()));
    const double scale = f.quantities.at("scale");
    const double lhs = std::abs(f.quantities.at("lhs")) / scale, rhs = std::abs(f.quantities.at("rhs")) / scale;
    det.add("F_lhs/scale", lhs).add("F_rhs/scale", rhs);
    return {ok && lhs < 1e-8 && rhs < 1e-8, det.str()};
}

Outcome c8() {
    Detail det;
    bool ok = true;
    for (int d : {5, 6}) {
        SuiteConfig cfg;
        cfg.d = d;
        const CheckReport r = explicit_gap_family_check(cfg);
        ok = ok && r.residual == 0.0 && r.verdict == Verdict::pass;
        det.add("d" + std::to_string(d) + "_violations", r.residual)
            .add("d" + std::to_string(d) + "_max_ratio/C", r.quantities.at("max_empirical_ratio_over_C"));
    }
    // kappa T_hat <= d/2 on every extinction run, including the separated solution where it is an equality.
    double worst = -inf;
    std::vector<const FlowTrace*> traces;
    for (const Run& run : perturbed_runs()) traces.push_back(&run.trace);
    const FlowTrace sep = run_flow(profile(parse_profile("separated:T=1", 5), grid5()), FlowParams::sobolev(5));
    traces.push_back(&sep);
    for (const FlowTrace* tr : traces) {
        const double kt = decay_bounds_check(*tr).quantities.at("kappa_T_hat");
        worst = std::max(worst, kt / 2.5 - 1.0);
    }
    det.add("max_kappaT/(d/2)-1", worst);
    // The separated solution attains equality; T_hat carries a ~1e-6 time-discretization error.
    return {ok && worst <= 1e-4, det.str()};
}

Outcome c9() {
    const OnofriInput g = OnofriInput::make(RadialField::sample(grid2(), [](double r) { return bump(r, 0.0, 1.0); }));
    const double limit = onofri_limit_value(g);
    double prev = inf, min_q = inf;
    bool decreasing = true;
    Detail det;
    for (double p : {16.0, 64.0, 256.0}) {
        const double q2p = onofri_limit_quotient(g, p), qp = onofri_gn_quotient(g, p);
        const double err = std::abs(q2p - limit);
        decreasing = decreasing && err < prev;
        prev = err;
        min_q = std::min({min_q, q2p, qp});
        det.add("err_p" + std::to_string(static_cast<int>(p)), err);
    }
    det.add("min_quotient", min_q);
    return {decreasing && min_q >= 1.0 - 1e-6, det.str()};
}

Outcome c10() {
    const RadialField mu = RadialField::sample(grid2(), moon_measure);
    const double at_mu = loghls_deficit(mu, 1.0);
    const double eps[] = {0.5, 1.0, -0.3, 2.0, 0.2};
    const double r0s[] = {0.0, 1.0, 0.5, 1.5, 2.0};
    double min_def = inf, worst_gap = 0.0;
    for (int i = 0; i < 5; ++i) {
        const RadialField v = mu.map_r([&](double r, double x) { return x * (1.0 + eps[i] * bump(r, r0s[i], 0.8)); });
        const MassOneDensity f = MassOneDensity::make(v);
        const double def = loghls_deficit(f.v, 1.0);
        min_def = std::min(min_def, def);
        worst_gap = std::max(worst_gap, std::abs(legendre_gap(f) - def));
    }
    Detail det;
    det.add("deficit_mu", at_mu).add("min_deficit", min_def).add("max_legendre_mismatch", worst_gap);
    return {at_mu <= 1e-5 && min_def > 0.0 && worst_gap <= 1e-6, det.str()};
}

Outcome c11() {
    SplitMix64 rng(1);
    double worst_h = 0.0, min_h2 = inf, min_h3 = inf, min_claim2 = inf, min_margin = inf;
    for (int i = 0; i < 5; ++i) {
        const double a = rng.uniform(-2.0, 2.0), r0 = rng.uniform(0.0, 2.0), w = rng.uniform(0.3, 1.5);
        const RadialField u = RadialField::sample(grid2(), [=](double r) { return a * bump(r, r0, w); });
        const ExpMomentCurve c = exp_moment_curve(u, 101);
        worst_h = std::max({worst_h, std::abs(c.h.front()), std::abs(c.h[50])});
        for (std::size_t k = 0; k < c.t.size(); ++k) {
            min_h2 = std::min(min_h2, c.h2[k]);
            min_h3 = std::min(min_h3, c.h3[k]);
        }
        min_claim2 = std::min(min_claim2, c.h.back() - c.h1[50]);
        min_margin = std::min(min_margin, lemma_loghlsder_check(u).quantities.at("margin"));
    }
    const bool part_h = worst_h <= 1e-10, part_h2 = min_h2 >= -1e-6, part_h3 = min_h3 >= -1e-6;
    const bool part_claim2 = min_claim2 >= -1e-8, part_lemma = min_margin >= 0.0;
    Detail det;
    det.add("max|h(0)|,|h(1/2)|", worst_h)
        .add("min_h''", min_h2)
        .add("min_h'''", min_h3)
        .add("min[h(1)-h'(1/2)]", min_claim2)
        .add("min_lemma_margin", min_margin);
    std::string failed;
    if (!part_h) failed += " h(0)/h(1/2)";
    if (!part_h2) failed += " h''>=0";
    if (!part_h3) failed += " h'''>=0";
    if (!part_claim2) failed += " h(1)>=h'(1/2)";
    if (!part_lemma) failed += " lemma";
    if (!failed.empty()) det.add("failed_parts", "[" + failed.substr(1) + "]");
    return {part_h && part_h2 && part_h3 && part_claim2 && part_lemma, det.str()};
}

Outcome c12() {
    const RadialField v0 = RadialField::sample(grid2(), [](double r) { return moon_measure(r) * (1.0 + 0.5 * bump(r, 1.0, 1.0)); });
    const MassOneDensity f = MassOneDensity::make(v0);
    LogFlowParams p;
    const LogFlowTrace base = run_log_flow(f, p);
    p.dt0 /= 2.0;
    const LogFlowTrace half = run_log_flow(f, p);
    const CheckReport a = h2_derivative_check(base), b = h2_derivative_check(half);
    const double h0 = std::abs(base.samples.front().H2);
    double worst_drop = 0.0;
    for (std::size_t i = 1; i < base.samples.size(); ++i) worst_drop = std::max(worst_drop, base.samples[i - 1].H2 - base.samples[i].H2);

    LogFlowParams ps;
    ps.t_final = 10.0 * ps.dt0;
    const LogFlowTrace st = run_log_flow(MassOneDensity::make(RadialField::sample(grid2(), moon_measure)), ps);

    const double drift = a.quantities.at("mass_drift");
    Detail det;
    det.add("mass_drift", drift)
        .add("max_drop/|H2(0)|", worst_drop / h0)
        .add("res", a.residual)
        .add("res_half_dt", b.residual)
        .add("stationary_step_change", st.max_step_change);
    return {drift <= 1e-8 && worst_drop <= 1e-8 * h0 && a.residual <= 3e-2 && b.residual < a.residual &&
                st.max_step_change <= 1e-10,
            det.str()};
}

Outcome c13() {
    SplitMix64 rng(1);
    double worst_cs = 0.0, max_needed = -inf;
    int probes = 0;
    for (int i = 0; i < 6; ++i) {
        const double a = rng.uniform(-2.0, 2.0), r0 = rng.uniform(0.0, 2.0), w = rng.uniform(0.3, 1.5);
        const CheckReport r = failed_scheme_probe(RadialField::sample(grid2(), [=](double x) { return a * bump(x, r0, w); }));
        worst_cs = std::max(worst_cs, r.quantities.at("cauchy_schwarz_ratio"));
        const double needed = r.quantities.at("needed_ratio");
        if (std::isfinite(needed)) max_needed = std::max(max_needed, needed);
        ++probes;
    }
    Detail det;
    det.add("probes", probes).add("max_CS_ratio", worst_cs).add("diagnostic_max_4J'^2/(JJ'')", max_needed);
    return {worst_cs <= 1.0 + 1e-6, det.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Outcome c14(const std::string& cli, const fs::path& scratch) {
    const fs::path out = scratch / "determinism";
    std::vector<std::string> reports;
    for (int k = 0; k < 2; ++k) {
        fs::remove_all(out);
        const std::string cmd = "\"" + cli + "\" verify --d 5 --seed 7 --out \"" + out.string() + "\" > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        if (rc != 0) return {false, "verify exited with status " + std::to_string(rc)};
        reports.push_back(slurp(out / "report.json"));
    }
    Detail det;
    det.add("bytes", reports[0].size()).add("identical", reports[0] == reports[1]);
    return {!reports[0].empty() && reports[0] == reports[1], det.str()};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <sobflow-cli> <scratch-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path scratch = argv[2];
    fs::create_directories(scratch);
    set_warning_sink([](const std::string&) {});

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"optimizer residual and refinement order", c1},
        {"constant identities", c2},
        {"d=2 closed forms", c3},
        {"H_d monotone and nonpositive along the flow", c4},
        {"extinction-time sandwich and separated solution", c5},
        {"second-derivative identity and Q monotone", c6},
        {"gap identity", c7},
        {"explicit gap family and kappa bound", c8},
        {"Onofri limit of the GN quotients", c9},
        {"log-HLS duality gap", c10},
        {"exponential-moment curve and Lemma", c11},
        {"log flow: mass, H_2, identity, stationarity", c12},
        {"Cauchy-Schwarz probe", c13},
        {"verify determinism", [&] { return c14(cli, scratch); }},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("criterion %2zu: %s  %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
