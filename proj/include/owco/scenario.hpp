#pragma once

#include "owco/errors.hpp"
#include "owco/extension.hpp"
#include "owco/spaces.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace owco {

using ordered_json = nlohmann::ordered_json;

inline constexpr double default_tol = 1e-9;

/// Input error tied to a place in a scenario document: "line:col" for
/// syntax errors, a JSON pointer for everything else.
class ScenarioError : public InputError {
public:
    ScenarioError(const std::string& where, const std::string& what)
        : InputError(where + ": " + what), where_(where)
    {
    }
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

struct Scenario {
    std::string name;
    std::string task = "check"; // check | extend | moments | necessity | wco
    double tol = default_tol;
    std::size_t depth = 4;
    OwcoSpec spec;
    std::optional<ThetaFamily> theta;
    std::optional<Eigen::VectorXcd> vector; // layout x * atoms + w
    std::vector<std::string> notes;         // construction remarks carried into reports
};

const std::vector<std::string>& task_names();

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Explicit form: every table spelled out, no gallery reference.
ordered_json scenario_to_json(const Scenario& s);

} // namespace owco
