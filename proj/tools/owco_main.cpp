// owco command line: runs scenario files and gallery presets, writes JSON reports.

#include "owco/errors.hpp"
#include "owco/gallery.hpp"
#include "owco/report.hpp"
#include "owco/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

void emit(const std::string& text, const std::string& out_path)
{
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw owco::InputError("cannot write '" + out_path + "'");
    }
    out << text;
}

std::optional<double> tol_override()
{
    const char* env = std::getenv("OWCO_TOL");
    if (env == nullptr || *env == '\0') {
        return std::nullopt;
    }
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0)) {
        throw owco::InputError(std::string("OWCO_TOL must be a positive number, got '") + env + "'");
    }
    return v;
}

int run(owco::Scenario sc, const std::string& out_path)
{
    if (auto t = tol_override()) {
        sc.tol = *t;
    }
    const owco::RunResult r = owco::run_scenario(sc);
    emit(owco::render_json(r.report), out_path);
    return static_cast<int>(r.code);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"owco: subnormality certificates for weighted composition operators"};
    app.set_version_flag("--version", owco::version);
    app.require_subcommand(1);

    std::string file;
    std::string out_path;
    std::optional<std::size_t> depth;

    struct Task {
        const char* name;
        const char* help;
    };
    const Task tasks[] = {
        {"check", "certify subnormality from a theta family"},
        {"extend", "build the quasinormal extension and report its identities"},
        {"moments", "moment tables and Stieltjes verdicts"},
        {"necessity", "extract theta from moments and test the necessary conditions"},
        {"wco", "reduce a scalar weighted composition operator and certify it"},
        {"run", "run the task named in the scenario"},
    };
    for (const Task& t : tasks) {
        CLI::App* sub = app.add_subcommand(t.name, t.help);
        sub->add_option("file", file, "scenario JSON")->required();
        sub->add_option("--out", out_path, "write the report here instead of stdout");
        if (std::string(t.name) == "moments" || std::string(t.name) == "necessity") {
            sub->add_option("--depth", depth, "moment depth N");
        }
    }

    std::string gallery_name;
    std::vector<std::string> params;
    std::string scenario_out;
    CLI::App* gal = app.add_subcommand("gallery", "run a named construction");
    gal->add_option("name", gallery_name, "construction name")->required();
    gal->add_option("--param", params, "k=v parameter, repeatable");
    gal->add_option("--out", out_path, "write the report here instead of stdout");
    gal->add_option("--scenario-out", scenario_out, "also write the expanded scenario file");
    app.add_subcommand("list", "list gallery constructions");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        const std::string cmd = sub->get_name();
        if (cmd == "list") {
            for (const auto& n : owco::gallery_names()) {
                std::cout << n << "\n";
            }
            return 0;
        }
        if (cmd == "gallery") {
            owco::Scenario sc = owco::make_gallery(gallery_name, owco::parse_params(params));
            if (!scenario_out.empty()) {
                emit(owco::render_json(owco::scenario_to_json(sc)), scenario_out);
            }
            return run(std::move(sc), out_path);
        }
        owco::Scenario sc = owco::load_scenario(file);
        if (cmd != "run") {
            sc.task = cmd;
        }
        if (depth) {
            sc.depth = *depth;
        }
        return run(std::move(sc), out_path);
    } catch (const owco::NumericalError& e) {
        std::cerr << "owco: numerically indeterminate: " << e.what() << "\n";
        return static_cast<int>(owco::ExitCode::indeterminate);
    } catch (const std::exception& e) {
        std::cerr << "owco: error: " << e.what() << "\n";
        return static_cast<int>(owco::ExitCode::input_error);
    }
}
