// sobflow: run flows, verify the inequality suite, sweep parameters, summarize reports.

#include "sobflow/harness.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

// --tol.<name>=<value> and --tol.<name> <value> are pulled out before CLI11 sees the rest.
int extract_tolerances(std::vector<std::string>& args, std::map<std::string, double>& tols) {
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--tol.", 0) != 0) {
            rest.push_back(a);
            continue;
        }
        std::string name = a.substr(6), value;
        const auto eq = name.find('=');
        if (eq != std::string::npos) {
            value = name.substr(eq + 1);
            name = name.substr(0, eq);
        } else if (i + 1 < args.size()) {
            value = args[++i];
        }
        std::size_t used = 0;
        double t = 0.0;
        try {
            t = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (name.empty() || value.empty() || used != value.size()) {
            std::cerr << "usage error: bad tolerance flag '" << a << "'\n";
            return 2;
        }
        tols[name] = t;
    }
    args = std::move(rest);
    return 0;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string tok = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::map<std::string, double> tol_flags;
    if (const int rc = extract_tolerances(args, tol_flags)) return rc;

    CLI::App app{"Radial fast-diffusion flows and the Sobolev/HLS and Onofri/log-HLS inequalities", "sobflow"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::optional<int> d, n, max_steps, snapshot_every;
    std::optional<std::string> flow, profile, spacing, out, axis, values, input;
    std::optional<double> rmax, dt0, eps_ext, t_final;
    std::optional<std::uint64_t> seed;
    std::string config_path;

    app.add_option("--config", config_path, "JSON file with RunConfig fields")->check(CLI::ExistingFile);
    app.add_option("--d", d, "dimension");
    app.add_option("--flow", flow, "fd | fd-ccl | log");
    app.add_option("--profile", profile, "kind[:key=value,...], e.g. separated:T=1");
    app.add_option("--n", n, "grid nodes");
    app.add_option("--rmax", rmax, "truncation radius (0: per profile)");
    app.add_option("--spacing", spacing, "log_stretched | uniform");
    app.add_option("--dt0", dt0, "initial time step (0: flow default)");
    app.add_option("--eps-ext", eps_ext, "extinction threshold on J/J(0)");
    app.add_option("--max-steps", max_steps, "step limit");
    app.add_option("--t-final", t_final, "horizon for fd-ccl and log flows");
    app.add_option("--snapshot-every", snapshot_every, "keep the field every k steps");
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "seed for the random test families");
    app.add_option("--axis", axis, "sweep axis: p | epsilon | n | dt");
    app.add_option("--values", values, "comma-separated sweep points");
    app.add_option("--input", input, "report JSON to summarize");
    app.footer("Tolerances: --tol.<check_name> <value> overrides the default of that check.");

    std::string command;
    for (const char* name : {"run-flow", "verify", "sweep", "report"}) {
        app.add_subcommand(name, "")->callback([&command, name] { command = name; });
    }
    app.get_subcommand("run-flow")->description("integrate one flow and write trace, snapshots and summary");
    app.get_subcommand("verify")->description("run every check for --d and write report.json");
    app.get_subcommand("sweep")->description("tabulate a target quantity along --axis");
    app.get_subcommand("report")->description("summarize a report.json");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    sobflow::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = sobflow::load_config_file(cfg, config_path);
        if (!command.empty()) cfg.command = command;
        if (d) cfg.d = *d;
        if (flow) cfg.flow = *flow;
        if (profile) cfg.profile = *profile;
        if (n) cfg.n = *n;
        if (rmax) cfg.r_max = *rmax;
        if (spacing) cfg.spacing = *spacing;
        if (dt0) cfg.dt0 = *dt0;
        if (eps_ext) cfg.eps_ext = *eps_ext;
        if (max_steps) cfg.max_steps = *max_steps;
        if (t_final) cfg.t_final = *t_final;
        if (snapshot_every) cfg.snapshot_every = *snapshot_every;
        if (out) cfg.out = *out;
        if (seed) cfg.seed = *seed;
        if (axis) cfg.sweep_axis = *axis;
        if (values) cfg.sweep_values = parse_values(*values);
        if (input) cfg.input = *input;
        for (const auto& [k, v] : tol_flags) cfg.tolerances[k] = v;
    } catch (const sobflow::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: bad --values entry '" << e.what() << "'\n";
        return 2;
    }
    return sobflow::run_command(cfg);
}
