#include "sobflow/check_report.hpp"

#include <algorithm>
#include <cmath>

namespace sobflow {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::diagnostic: return "diagnostic";
        case Verdict::skipped: return "skipped";
    }
    return "?";
}

void CheckReport::decide() { verdict = residual <= tolerance ? Verdict::pass : Verdict::fail; }

void CheckReport::make_diagnostic() { verdict = Verdict::diagnostic; }

nlohmann::json to_json(const CheckReport& r) {
    nlohmann::json q = nlohmann::json::object();
    for (const auto& [k, v] : r.quantities) q[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    nlohmann::json j;
    j["name"] = r.name;
    j["anchor"] = r.anchor;
    j["quantities"] = std::move(q);
    j["residual"] = std::isfinite(r.residual) ? nlohmann::json(r.residual) : nlohmann::json(nullptr);
    j["tolerance"] = r.tolerance;
    j["verdict"] = to_string(r.verdict);
    if (!r.note.empty()) j["note"] = r.note;
    j["grid_n"] = r.grid_n;
    j["r_max"] = r.r_max;
    j["dt"] = r.dt;
    return j;
}

nlohmann::json to_json(std::vector<CheckReport> reports) {
    std::stable_sort(reports.begin(), reports.end(),
                     [](const CheckReport& a, const CheckReport& b) { return a.name < b.name; });
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr;
}

}  // namespace sobflow
