/// @file check_report.hpp
/// @brief Structured pass/fail record for one verified inequality or identity.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace sobflow {

enum class Verdict { pass, fail, diagnostic, skipped };

std::string to_string(Verdict v);

struct CheckReport {
    std::string name;
    std::string anchor;  // the mathematical statement being tested
    std::map<std::string, double> quantities;
    double residual = 0.0;
    double tolerance = 0.0;
    Verdict verdict = Verdict::fail;
    std::string note;

    // Run metadata.
    int grid_n = 0;
    double r_max = 0.0;
    double dt = 0.0;

    /// Sets verdict = pass/fail from residual <= tolerance (NaN fails).
    void decide();
    /// Marks the report as informational; it never fails a suite.
    void make_diagnostic();
    bool failed() const { return verdict == Verdict::fail; }
};

nlohmann::json to_json(const CheckReport& report);

/// Reports sorted by name (stable for equal names), as one JSON array.
nlohmann::json to_json(std::vector<CheckReport> reports);

}  // namespace sobflow
