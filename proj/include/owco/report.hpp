#pragma once

#include "owco/extension.hpp"
#include "owco/scenario.hpp"

#include <string>

namespace owco {

inline constexpr const char* version = "0.1.0";

/// Exit status of a run: 0 verdict reached, 1 input error, 2 numerically indeterminate.
enum class ExitCode : int { ok = 0, input_error = 1, indeterminate = 2 };

struct RunResult {
    ordered_json report;
    ExitCode code = ExitCode::ok;
};

/// Runs the scenario's task and assembles the report document.
RunResult run_scenario(const Scenario& sc);

/// JSON text with 2-space indentation and every double printed with 17 significant digits.
/// Infinities and NaN are written as the strings "inf", "-inf", "nan".
std::string render_json(const ordered_json& doc);

ordered_json to_json(const SubnormalityCertificate& cert, const OwcoSpec& spec);
ordered_json to_json(const NecessityReport& rep, const OwcoSpec& spec);
ordered_json to_json(const StieltjesVerdict& v);
ordered_json to_json(const GridMeasure& m);

} // namespace owco
