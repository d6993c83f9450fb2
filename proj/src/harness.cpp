#include "sobflow/harness.hpp"

#include "sobflow/fd_flow.hpp"
#include "sobflow/field_io.hpp"
#include "sobflow/inequality.hpp"
#include "sobflow/log_flow.hpp"
#include "sobflow/profiles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace sobflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_row(const std::vector<double>& xs) {
    std::string line;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) line += ',';
        line += format_decimal17(xs[i]);
    }
    return line + "\n";
}

std::string resolved_flow(const RunConfig& c) {
    if (!c.flow.empty()) return c.flow;
    return c.d == 2 ? "log" : "fd";
}

RunConfig resolved(const RunConfig& c) {
    RunConfig r = c;
    r.flow = resolved_flow(c);
    return r;
}

template <class T>
T get(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
    }
}

struct Loaded {
    ProfileSpec spec;
    std::string text;
    GridPtr grid;
    RadialField v;
};

ProfileSpec parse_checked(const RunConfig& c, const std::string& text) {
    ProfileSpec spec;
    try {
        spec = parse_profile(text, c.d);
        validate(spec);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("profile: ") + e.what());
    } catch (const std::domain_error& e) {
        throw UsageError(std::string("profile: ") + e.what());
    }
    if (spec.d != c.d) {
        throw UsageError("profile '" + text + "' has d=" + std::to_string(spec.d) + " but --d is " + std::to_string(c.d));
    }
    return spec;
}

GridPtr grid_for(const RunConfig& c, const ProfileSpec& spec) {
    const double R = c.r_max > 0.0 ? c.r_max : default_r_max(spec);
    return make_grid(c.d, R, c.n, spacing_from_string(c.spacing));
}

// ParseError for unreadable or mismatched tabulated files, UsageError for bad text.
Loaded load_profile(const RunConfig& c) {
    const std::string text = c.profile.empty() ? default_profile(c) : c.profile;
    const ProfileSpec spec = parse_checked(c, text);
    GridPtr grid = grid_for(c, spec);
    try {
        RadialField v = profile(spec, grid);
        return Loaded{spec, text, std::move(grid), std::move(v)};
    } catch (const std::invalid_argument& e) {
        throw ParseError("profile file '" + spec.path + "': " + e.what());
    }
}

SuiteConfig suite_config(const RunConfig& c) {
    SuiteConfig s;
    s.d = c.d;
    s.n = c.n;
    s.r_max = c.r_max;
    s.dt0 = c.dt0;
    s.eps_ext = c.eps_ext;
    s.seed = c.seed;
    s.tolerances = c.tolerances;
    return s;
}

double t_final_for(const RunConfig& c) {
    if (c.t_final > 0.0) return c.t_final;
    return resolved_flow(c) == "log" ? 0.2 : 0.5;
}

FlowParams extinction_params(const RunConfig& c) {
    FlowParams p = FlowParams::sobolev(c.d);
    p.dt0 = c.dt0;
    p.eps_ext = c.eps_ext;
    p.max_steps = c.max_steps;
    p.snapshot_every = c.snapshot_every;
    return p;
}

FlowParams ccl_params(const RunConfig& c) {
    FlowParams p = FlowParams::ccl(c.d, t_final_for(c));
    p.dt0 = c.dt0 > 0.0 ? c.dt0 : p.t_final / 1000.0;
    p.max_steps = c.max_steps;
    p.snapshot_every = c.snapshot_every;
    return p;
}

LogFlowParams log_params(const RunConfig& c) {
    LogFlowParams p;
    if (c.dt0 > 0.0) p.dt0 = c.dt0;
    p.t_final = t_final_for(c);
    p.max_steps = c.max_steps;
    p.snapshot_every = c.snapshot_every;
    return p;
}

double tol(const RunConfig& c, const std::string& name, double fallback) {
    const auto it = c.tolerances.find(name);
    return it == c.tolerances.end() ? fallback : it->second;
}

void write_snapshots(const fs::path& dir, const std::vector<std::pair<double, const RadialField*>>& snaps) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string index = "index,t,file\n";
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%04zu.txt", k);
        std::ostringstream os;
        write_field(os, *snaps[k].second);
        write_atomic((dir / name).string(), os.str());
        index += std::to_string(k) + "," + format_decimal17(snaps[k].first) + "," + name + "\n";
    }
    write_atomic((dir / "index.csv").string(), index);
}

void write_json(const fs::path& path, const json& j) { write_atomic(path.string(), j.dump(2) + "\n"); }

json grid_json(const GridPtr& g) {
    return {{"n", g->size()}, {"r_max", g->r_max()}, {"spacing", to_string(g->spacing())}};
}

// ---------------------------------------------------------------- run-flow

int run_extinction(const RunConfig& c, const Loaded& l, const fs::path& out, json& summary) {
    const FlowTrace tr = run_flow(l.v, extinction_params(c));
    write_atomic((out / "trace.csv").string(), trace_csv(tr));
    std::vector<std::pair<double, const RadialField*>> snaps;
    for (const auto& s : tr.snapshots) snaps.emplace_back(s.t, &s.v);
    write_snapshots(out / "snapshots", snaps);

    summary["termination"] = to_string(tr.termination);
    summary["steps"] = tr.steps;
    summary["rejections"] = tr.rejections;
    summary["dt0"] = num(tr.dt0);
    summary["T_hat"] = num(tr.T_hat);
    if (tr.termination != Termination::extinct) {
        summary["message"] = tr.message;
        return 1;
    }
    const CheckReport bounds = decay_bounds_check(tr, tol(c, "decay_bounds", 1e-2));
    const CheckReport mono = monotonicity_check(tr, tol(c, "hd_monotonicity", 1e-8));
    const double T = tr.T_hat, up = bounds.quantities.at("T_upper"), low = bounds.quantities.at("T_lower");
    const double kT = bounds.quantities.at("kappa_T_hat");
    summary["T_upper"] = num(up);
    summary["T_lower"] = num(low);
    summary["kappa"] = num(kappa(l.v, c.d));
    summary["kappa_T_hat"] = num(kT);
    summary["margins"] = {{"T_upper_minus_T_hat", num(up - T)},
                          {"T_hat_minus_T_lower", num(T - low)},
                          {"half_d_minus_kappa_T_hat", num(0.5 * c.d - kT)}};
    summary["H0"] = num(tr.initial().H);
    summary["checks"] = to_json(std::vector<CheckReport>{bounds, mono});
    return (bounds.failed() || mono.failed()) ? 1 : 0;
}

int run_ccl(const RunConfig& c, const Loaded& l, const fs::path& out, json& summary) {
    const FlowParams p = ccl_params(c);
    const FlowTrace tr = run_flow(l.v, p);
    write_atomic((out / "trace.csv").string(), trace_csv(tr));
    std::vector<std::pair<double, const RadialField*>> snaps;
    for (const auto& s : tr.snapshots) snaps.emplace_back(s.t, &s.v);
    write_snapshots(out / "snapshots", snaps);
    const CheckReport ccl = ccl_flow_derivative_check(l.v, p.t_final, p.dt0, tol(c, "ccl_flow_derivative", 3e-2));
    summary["termination"] = to_string(tr.termination);
    summary["steps"] = tr.steps;
    summary["t_final"] = p.t_final;
    summary["mass_initial"] = num(tr.samples.front().mass);
    summary["mass_final"] = num(tr.samples.back().mass);
    summary["checks"] = to_json(std::vector<CheckReport>{ccl});
    return ccl.failed() ? 1 : 0;
}

int run_log(const RunConfig& c, const Loaded& l, const fs::path& out, json& summary) {
    const MassOneDensity v0 = MassOneDensity::make(l.v);
    const LogFlowTrace tr = run_log_flow(v0, log_params(c));
    write_atomic((out / "trace.csv").string(), log_trace_csv(tr));
    std::vector<std::pair<double, const RadialField*>> snaps;
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) snaps.emplace_back(tr.snapshot_times[k], &tr.snapshots[k]);
    write_snapshots(out / "snapshots", snaps);
    const CheckReport h2 = h2_derivative_check(tr, tol(c, "h2_derivative", 3e-2));
    summary["steps"] = tr.steps;
    summary["rejections"] = tr.rejections;
    summary["input_mass"] = num(v0.input_mass);
    summary["H2_initial"] = num(tr.samples.front().H2);
    summary["H2_final"] = num(tr.samples.back().H2);
    summary["mass_drift"] = num(std::abs(tr.samples.back().mass - tr.samples.front().mass));
    summary["max_step_change"] = num(tr.max_step_change);
    summary["margins"] = {{"minus_H2_final", num(-tr.samples.back().H2)}};
    summary["checks"] = to_json(std::vector<CheckReport>{h2});
    return h2.failed() ? 1 : 0;
}

// ---------------------------------------------------------------- sweep

std::vector<double> sweep_defaults(const RunConfig& c, const Loaded* l) {
    if (c.sweep_axis == "p") {
        if (c.d == 2) return {16.0, 64.0, 256.0};
        const double w = gn_p_max(c.d) - 1.0;
        return {1.0 + 0.25 * w, 1.0 + 0.5 * w, 1.0 + 0.75 * w};
    }
    if (c.sweep_axis == "epsilon") return {0.05, 0.1, 0.2, 0.4};
    if (c.sweep_axis == "n") return {256.0, 512.0, 1024.0, 2048.0};
    const std::string flow = resolved_flow(c);
    if (flow == "fd") {
        const double up = extinction_upper_bound(l->v);
        return {up / 200.0, up / 400.0, up / 800.0};
    }
    if (flow == "log") return {4e-4, 2e-4, 1e-4};
    return {2e-3, 1e-3, 5e-4};
}

std::string sweep_p(const RunConfig& c, const std::vector<double>& values) {
    std::string csv;
    if (c.d == 2) {
        const GridPtr grid = make_grid(2, c.r_max > 0.0 ? c.r_max : 1e4, c.n, spacing_from_string(c.spacing));
        const OnofriInput g = OnofriInput::make(RadialField::sample(grid, [](double r) { return bump(r, 0.0, 1.0); }));
        const double limit = onofri_limit_value(g);
        csv = "p,Q2p,Qp,limit,abs_error\n";
        for (double p : values) {
            const double q2p = onofri_limit_quotient(g, p);
            csv += csv_row({p, q2p, onofri_gn_quotient(g, p), limit, std::abs(q2p - limit)});
        }
        return csv;
    }
    csv = "p,theta,C_pd\n";
    for (double p : values) {
        ProfileSpec s;
        s.kind = ProfileKind::gn_optimizer;
        s.d = c.d;
        s.p = p;
        validate(s);
        csv += csv_row({p, theta(p, c.d), gn_constant(p, c.d, grid_for(c, s))});
    }
    return csv;
}

std::string sweep_epsilon(const RunConfig& c, const std::vector<double>& values) {
    const std::string base_text = !c.profile.empty() ? c.profile : (c.d == 2 ? "moon_measure:r0=1" : "aubin_talenti");
    const ProfileSpec base = parse_checked(c, base_text);
    const GridPtr grid = grid_for(c, base);
    std::string csv;
    if (c.d >= 5) {
        csv = "epsilon,lhs,rhs,C,ratio_over_C,margin_normalized\n";
    } else if (c.d >= 3) {
        csv = "epsilon,sobolev_deficit_normalized,hls_deficit_normalized\n";
    } else {
        csv = "epsilon,loghls_deficit,legendre_gap\n";
    }
    const double S = c.d >= 3 ? ConstantsTable::shared().S(c.d) : kNaN;
    for (double eps : values) {
        ProfileSpec s = base;
        s.eps = eps;
        const RadialField w = profile(s, grid);
        if (c.d >= 5) {
            const CheckReport r = explicit_gap_check(w, tol(c, "explicit_gap", 1e-9));
            const auto& q = r.quantities;
            csv += csv_row({eps, q.at("lhs"), q.at("rhs"), q.at("C"), q.at("empirical_ratio_over_C"), q.at("margin_normalized")});
        } else if (c.d >= 3) {
            const double qx = (c.d + 2.0) / (c.d - 2.0);
            const RadialField v = w.map([qx](double x) { return std::pow(std::max(x, 0.0), qx); });
            const double nv = lp_norm(v, 2.0 * c.d / (c.d + 2.0));
            csv += csv_row({eps, sobolev_deficit(w) / (S * dirichlet_energy(w)), hls_deficit(v) / (S * nv * nv)});
        } else {
            const MassOneDensity f = MassOneDensity::make(w);
            csv += csv_row({eps, loghls_deficit(f.v, 1.0), legendre_gap(f)});
        }
    }
    return csv;
}

std::string sweep_n(const RunConfig& c, const std::vector<double>& values) {
    std::string csv = c.d >= 3 ? "n,ccl_identity_residual,optimizer_residual\n" : "n,ccl_identity_residual\n";
    for (double nv : values) {
        const int n = static_cast<int>(nv);
        if (n != nv || n < 16) throw UsageError("sweep n: values must be integers >= 16");
        const CheckReport r = ccl_identity_check(c.d, n, tol(c, "ccl_identity", 1e-5));
        if (c.d >= 3) {
            const double R = c.r_max > 0.0 ? c.r_max : default_r_max_for_dimension(c.d);
            csv += csv_row({nv, r.residual, aubin_talenti_residual(make_grid(c.d, R, n, spacing_from_string(c.spacing)))});
        } else {
            csv += csv_row({nv, r.residual});
        }
    }
    return csv;
}

std::string sweep_dt(const RunConfig& c, const Loaded& l, const std::vector<double>& values) {
    const std::string flow = resolved_flow(c);
    std::string csv;
    if (flow == "fd") {
        csv = "dt0,T_hat,hd_derivative_residual,second_derivative_residual,decay_bounds_residual\n";
    } else if (flow == "log") {
        csv = "dt0,h2_derivative_residual,mass_drift\n";
    } else {
        csv = "dt0,ccl_flow_derivative_residual\n";
    }
    for (double dt : values) {
        if (!(dt > 0.0)) throw UsageError("sweep dt: values must be positive");
        RunConfig cd = c;
        cd.dt0 = dt;
        if (flow == "fd") {
            const FlowTrace tr = run_flow(l.v, extinction_params(cd));
            if (tr.termination != Termination::extinct) throw NumericalError("sweep dt: flow did not reach extinction: " + tr.message);
            const CheckReport sd = second_derivative_check(tr);
            csv += csv_row({dt, tr.T_hat, hd_derivative_check(tr).residual,
                            sd.verdict == Verdict::skipped ? kNaN : sd.residual, decay_bounds_check(tr).residual});
        } else if (flow == "log") {
            const CheckReport r = h2_derivative_check(run_log_flow(MassOneDensity::make(l.v), log_params(cd)));
            csv += csv_row({dt, r.residual, r.quantities.at("mass_drift")});
        } else {
            csv += csv_row({dt, ccl_flow_derivative_check(l.v, t_final_for(cd), dt).residual});
        }
    }
    return csv;
}

void write_diagnostics(const RunConfig& c, const std::string& what) {
    try {
        fs::create_directories(c.out);
        write_atomic((fs::path(c.out) / "diagnostics.txt").string(),
                     "error: " + what + "\nconfig: " + to_json(resolved(c)).dump() + "\n");
    } catch (const std::exception&) {
    }
}

}  // namespace

// ---------------------------------------------------------------- config

json to_json(const RunConfig& c) {
    json tols = json::object();
    for (const auto& [k, v] : c.tolerances) tols[k] = v;
    return {{"command", c.command},       {"d", c.d},
            {"flow", c.flow},             {"profile", c.profile},
            {"n", c.n},                   {"r_max", c.r_max},
            {"spacing", c.spacing},       {"dt0", c.dt0},
            {"eps_ext", c.eps_ext},       {"max_steps", c.max_steps},
            {"t_final", c.t_final},       {"snapshot_every", c.snapshot_every},
            {"tolerances", tols},         {"out", c.out},
            {"seed", c.seed},             {"sweep_axis", c.sweep_axis},
            {"sweep_values", c.sweep_values}, {"input", c.input}};
}

RunConfig apply_json(RunConfig c, const json& j) {
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "command") c.command = get<std::string>(v, key);
        else if (key == "d") c.d = get<int>(v, key);
        else if (key == "flow") c.flow = get<std::string>(v, key);
        else if (key == "profile") c.profile = get<std::string>(v, key);
        else if (key == "n") c.n = get<int>(v, key);
        else if (key == "r_max") c.r_max = get<double>(v, key);
        else if (key == "spacing") c.spacing = get<std::string>(v, key);
        else if (key == "dt0") c.dt0 = get<double>(v, key);
        else if (key == "eps_ext") c.eps_ext = get<double>(v, key);
        else if (key == "max_steps") c.max_steps = get<int>(v, key);
        else if (key == "t_final") c.t_final = get<double>(v, key);
        else if (key == "snapshot_every") c.snapshot_every = get<int>(v, key);
        else if (key == "tolerances") {
            for (const auto& [name, t] : get<std::map<std::string, double>>(v, key)) c.tolerances[name] = t;
        } else if (key == "out") c.out = get<std::string>(v, key);
        else if (key == "seed") c.seed = get<std::uint64_t>(v, key);
        else if (key == "sweep_axis") c.sweep_axis = get<std::string>(v, key);
        else if (key == "sweep_values") c.sweep_values = get<std::vector<double>>(v, key);
        else if (key == "input") c.input = get<std::string>(v, key);
        else throw UsageError("unknown config key '" + key + "'");
    }
    return c;
}

RunConfig load_config_file(RunConfig base, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("config file '" + path + "': " + e.what());
    }
    return apply_json(std::move(base), j);
}

void validate(const RunConfig& c) {
    if (c.command != "run-flow" && c.command != "verify" && c.command != "sweep" && c.command != "report") {
        throw UsageError("command must be one of run-flow, verify, sweep, report");
    }
    if (c.d < 2) throw UsageError("d must be >= 2");
    const std::string flow = resolved_flow(c);
    if (flow != "fd" && flow != "fd-ccl" && flow != "log") throw UsageError("flow must be fd, fd-ccl or log");
    if (flow == "log" && c.d != 2) throw UsageError("flow log requires d = 2");
    if (flow == "fd" && c.d < 3) throw UsageError("flow fd requires d >= 3");
    if (c.n < 16) throw UsageError("n must be >= 16");
    if (c.r_max < 0.0 || c.dt0 < 0.0 || c.t_final < 0.0) throw UsageError("r_max, dt0 and t_final must be >= 0");
    if (!(c.eps_ext > 0.0 && c.eps_ext < 1.0)) throw UsageError("eps_ext must lie in (0, 1)");
    if (c.max_steps < 1 || c.snapshot_every < 0) throw UsageError("max_steps must be >= 1 and snapshot_every >= 0");
    try {
        spacing_from_string(c.spacing);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    for (const auto& [name, t] : c.tolerances) {
        if (!(t >= 0.0)) throw UsageError("tolerance '" + name + "' must be >= 0");
    }
    if (c.command == "sweep" && c.sweep_axis != "p" && c.sweep_axis != "epsilon" && c.sweep_axis != "n" &&
        c.sweep_axis != "dt") {
        throw UsageError("sweep needs an axis: p, epsilon, n or dt");
    }
    if (c.out.empty()) throw UsageError("out must not be empty");
}

std::string default_profile(const RunConfig& c) {
    const std::string flow = resolved_flow(c);
    if (flow == "fd") return "aubin_talenti:eps=0.1,exponent=q";
    if (flow == "log") return "moon_measure:eps=0.1,r0=1";
    if (c.d == 2) return "moon_measure";
    return "gn_optimizer:p=" + format_decimal17((c.d + 1.0) / (c.d - 1.0)) +
           ",exponent=" + format_decimal17((c.d + 2.0) / (c.d - 1.0));
}

void write_atomic(const std::string& path, const std::string& text) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << text;
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

// ---------------------------------------------------------------- commands

int cmd_run_flow(const RunConfig& c) {
    const RunConfig eff = resolved(c);
    const Loaded l = load_profile(eff);
    const fs::path out(eff.out);
    fs::create_directories(out);
    fs::remove(out / "diagnostics.txt");
    json summary;
    summary["config"] = to_json(eff);
    summary["profile"] = to_string(l.spec);
    summary["grid"] = grid_json(l.grid);
    int status = 0;
    if (eff.flow == "fd") {
        status = run_extinction(eff, l, out, summary);
    } else if (eff.flow == "fd-ccl") {
        status = run_ccl(eff, l, out, summary);
    } else {
        status = run_log(eff, l, out, summary);
    }
    summary["status"] = status;
    write_json(out / "summary.json", summary);
    write_json(out / "config.json", to_json(eff));
    if (status != 0) {
        write_diagnostics(eff, summary.contains("message") ? summary["message"].get<std::string>()
                                                           : std::string("a check on the run failed; see summary.json"));
    }
    return status;
}

int cmd_verify(const RunConfig& c) {
    const RunConfig eff = resolved(c);
    const SuiteConfig sc = suite_config(eff);
    std::vector<CheckReport> reports = run_suite(sc);
    if (!eff.profile.empty()) {
        try {
            const Loaded l = load_profile(eff);
            for (auto& r : profile_checks(sc, l.v, eff.profile, eff.flow)) reports.push_back(std::move(r));
        } catch (const ParseError& e) {
            CheckReport r;
            r.name = "profile_load@" + eff.profile;
            r.anchor = "initial datum read from a two-column field file";
            r.residual = kNaN;
            r.note = std::string("parse error: ") + e.what();
            r.verdict = Verdict::fail;
            reports.push_back(r);
        }
    }
    json counts = {{"pass", 0}, {"fail", 0}, {"diagnostic", 0}, {"skipped", 0}};
    for (const auto& r : reports) counts[to_string(r.verdict)] = counts[to_string(r.verdict)].get<int>() + 1;
    const bool passed = suite_passed(reports);
    json doc;
    doc["config"] = to_json(eff);
    doc["passed"] = passed;
    doc["counts"] = counts;
    doc["reports"] = to_json(reports);
    const fs::path out(eff.out);
    write_json(out / "report.json", doc);
    write_json(out / "config.json", to_json(eff));
    for (const auto& r : reports) {
        if (r.failed()) std::cerr << "FAIL " << r.name << (r.note.empty() ? "" : ": " + r.note) << "\n";
    }
    return passed ? 0 : 1;
}

int cmd_sweep(const RunConfig& c) {
    const RunConfig eff = resolved(c);
    std::optional<Loaded> l;
    if (eff.sweep_axis == "dt") l = load_profile(eff);
    const std::vector<double> values = eff.sweep_values.empty() ? sweep_defaults(eff, l ? &*l : nullptr) : eff.sweep_values;
    std::string csv;
    if (eff.sweep_axis == "p") csv = sweep_p(eff, values);
    else if (eff.sweep_axis == "epsilon") csv = sweep_epsilon(eff, values);
    else if (eff.sweep_axis == "n") csv = sweep_n(eff, values);
    else csv = sweep_dt(eff, *l, values);
    const fs::path out(eff.out);
    write_atomic((out / ("sweep_" + eff.sweep_axis + ".csv")).string(), csv);
    RunConfig echo = eff;
    echo.sweep_values = values;
    write_json(out / "config.json", to_json(echo));
    return 0;
}

int cmd_report(const RunConfig& c) {
    const std::string path = c.input.empty() ? (fs::path(c.out) / "report.json").string() : c.input;
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open report '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("report '" + path + "': " + e.what());
    }
    if (!doc.is_object() || !doc.contains("reports") || !doc["reports"].is_array()) {
        throw ParseError("report '" + path + "': expected an object with a 'reports' array");
    }
    std::string csv = "name,verdict,residual,tolerance\n";
    bool passed = true;
    for (const auto& r : doc["reports"]) {
        if (!r.is_object() || !r.contains("name") || !r.contains("verdict") || !r["name"].is_string() ||
            !r["verdict"].is_string()) {
            throw ParseError("report '" + path + "': malformed entry");
        }
        const std::string name = r["name"], verdict = r["verdict"];
        auto field = [&](const char* key) {
            return r.contains(key) && r[key].is_number() ? format_decimal17(r[key].get<double>()) : std::string("nan");
        };
        csv += csv_field(name) + "," + verdict + "," + field("residual") + "," + field("tolerance") + "\n";
        std::cout << verdict << std::string(verdict.size() < 10 ? 11 - verdict.size() : 1, ' ') << name << "\n";
        passed = passed && verdict != "fail";
    }
    write_atomic((fs::path(c.out) / "report.csv").string(), csv);
    std::cout << (passed ? "PASSED" : "FAILED") << "\n";
    return passed ? 0 : 1;
}

int run_command(const RunConfig& config) {
    try {
        validate(config);
        if (config.command == "run-flow") return cmd_run_flow(config);
        if (config.command == "verify") return cmd_verify(config);
        if (config.command == "sweep") return cmd_sweep(config);
        return cmd_report(config);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        write_diagnostics(config, std::string("parse error: ") + e.what());
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        write_diagnostics(config, e.what());
        return 1;
    }
}

}  // namespace sobflow
