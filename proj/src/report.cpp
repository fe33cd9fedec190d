#include "owco/report.hpp"

#include "owco/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace owco {

namespace {

template <class T>
ordered_json opt(const std::optional<T>& v)
{
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json atom_ref(const AtomRef& a, const OwcoSpec& spec, const std::vector<double>& grid)
{
    return {{"vertex", spec.label(a.x)}, {"atom", spec.base.atom(a.w).label}, {"t", grid.at(a.s)}};
}

void write_number(std::string& out, double v)
{
    if (std::isnan(v)) {
        out += "\"nan\"";
    } else if (std::isinf(v)) {
        out += v > 0 ? "\"inf\"" : "\"-inf\"";
    } else {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
    }
}

bool is_scalar(const ordered_json& v)
{
    return !v.is_object() && !v.is_array();
}

bool has_object(const ordered_json& v)
{
    if (v.is_object()) {
        return true;
    }
    if (v.is_array()) {
        for (const auto& child : v) {
            if (has_object(child)) {
                return true;
            }
        }
    }
    return false;
}

void write(std::string& out, const ordered_json& v, int indent);

void write_inline(std::string& out, const ordered_json& v)
{
    if (!v.is_array()) {
        write(out, v, 0);
        return;
    }
    out += "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += i ? ", " : "";
        write_inline(out, v[i]);
    }
    out += "]";
}

void write(std::string& out, const ordered_json& v, int indent)
{
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (v.type()) {
    case nlohmann::json::value_t::number_float:
        write_number(out, v.get<double>());
        return;
    case nlohmann::json::value_t::object: {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [key, child] : v.items()) {
            out += first ? "" : ",\n";
            first = false;
            out += pad + ordered_json(key).dump() + ": ";
            write(out, child, indent + 2);
        }
        out += "\n" + close + "}";
        return;
    }
    case nlohmann::json::value_t::array: {
        if (v.empty()) {
            out += "[]";
            return;
        }
        // Scalar lists stay on one line; short object-free nests such as [re, im] pairs too.
        if (!has_object(v)) {
            std::string line;
            write_inline(line, v);
            bool flat = true;
            for (const auto& child : v) {
                flat = flat && is_scalar(child);
            }
            if (flat || line.size() <= 100) {
                out += line;
                return;
            }
        }
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            out += i ? ",\n" : "";
            out += pad;
            write(out, v[i], indent + 2);
        }
        out += "\n" + close + "]";
        return;
    }
    default:
        out += v.dump();
        return;
    }
}

ordered_json cascade_json(const ToleranceCascade& c)
{
    return {{"tol", c.tol},
            {"consistency", c.consistency},
            {"quasinormality_defect", c.defect},
            {"cstar_c", c.cstar_c},
            {"embedding", c.embedding},
            {"commutator", c.commutator}};
}

// Range of G over interior, non-null atoms, per atom of W.
ordered_json g_summary(const OwcoSpec& spec, const ThetaFamily& theta)
{
    const GTable g = compute_G(spec, theta);
    ordered_json out = ordered_json::array();
    for (std::size_t w = 0; w < g.atoms; ++w) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (Vertex x = 0; x < g.vertices; ++x) {
            if (spec.graph.is_truncated(x) || spec.graph.fiber(x).empty()) {
                continue;
            }
            for (std::size_t s = 0; s < g.grid; ++s) {
                if (!g.is_null(x, w, s)) {
                    lo = std::min(lo, g.at(x, w, s));
                    hi = std::max(hi, g.at(x, w, s));
                }
            }
        }
        ordered_json e;
        e["atom"] = spec.base.atom(w).label;
        e["abs_w_squared"] = std::norm(spec.base.atom(w).value);
        e["min"] = std::isfinite(lo) ? ordered_json(lo) : ordered_json(nullptr);
        e["max"] = std::isfinite(hi) ? ordered_json(hi) : ordered_json(nullptr);
        out.push_back(e);
    }
    return out;
}

ordered_json moments_json(const MomentSequence& a)
{
    return {{"origin", a.origin}, {"depth", a.depth()}, {"values", a.values}};
}

ordered_json header(const Scenario& sc)
{
    ordered_json out;
    out["tool"] = "owco";
    out["version"] = version;
    out["scenario"] = sc.name;
    out["task"] = sc.task;
    out["tol"] = sc.tol;
    out["depth"] = sc.depth;
    return out;
}

RunResult run_check(const Scenario& sc)
{
    if (!sc.theta) {
        throw InputError("task check needs a theta family");
    }
    const SubnormalityCertificate cert = certify_subnormality(sc.spec, *sc.theta, sc.tol);
    RunResult r;
    r.report = header(sc);
    r.report["tolerance_cascade"] = cascade_json(cert.cascade);
    r.report["verdict"] = cert.verdict;
    r.report["certificate"] = to_json(cert, sc.spec);
    if (cert.conditions.condition_b) {
        r.report["g_by_atom"] = g_summary(counting_reduction(sc.spec), *sc.theta);
    }
    if (cert.verdict == "numerical-indeterminate") {
        r.code = ExitCode::indeterminate;
    }
    return r;
}

RunResult run_extend(const Scenario& sc)
{
    if (!sc.theta) {
        throw InputError("task extend needs a theta family");
    }
    const OwcoSpec spec = counting_reduction(sc.spec);
    RunResult r;
    r.report = header(sc);
    const ConditionsReport cond = check_conditions(spec, *sc.theta);
    if (!cond.condition_b) {
        r.report["verdict"] = "refuted-hypotheses";
        ordered_json wit = ordered_json::array();
        for (const auto& a : cond.violations) {
            wit.push_back(atom_ref(a, spec, sc.theta->grid()));
        }
        r.report["condition_b_violations"] = wit;
        return r;
    }
    const Extension ext = build_extension(spec, *sc.theta);
    const GTable g = compute_G(spec, *sc.theta);
    const IndexMask rows = interior_rows(ext.hat_system);
    ordered_json body;
    body["counting_reduced"] = !sc.spec.is_counting();
    body["base_dimension"] = ext.base_space->dim();
    body["extension_dimension"] = ext.hat_space->dim();
    body["extension_null_atoms"] = ext.hat_space->null_count();
    body["norm_c"] = operator_norm(ext.c);
    body["norm_c_hat"] = operator_norm(ext.c_hat);
    body["embedding_residual"] = operator_norm(ext.c_hat * ext.q - ext.q * ext.c);
    body["isometry_residual"] = operator_norm(adjoint(ext.q) * ext.q - identity(ext.base_space));
    body["cstar_c_residual"] = verify_CstarC(ext, g);
    body["quasinormality_defect"] = quasinormality_defect(ext.c_hat, &rows);
    body["g_by_atom"] = g_summary(spec, *sc.theta);
    r.report["verdict"] = "extension-built";
    r.report["extension"] = body;
    return r;
}

RunResult run_moments(const Scenario& sc)
{
    RunResult r;
    r.report = header(sc);
    bool all = true;
    if (sc.vector) {
        const LinearMap c = owco_build(sc.spec);
        const MomentSequence a = lambert_moments(c, BlockVector(c.domain(), *sc.vector), sc.depth);
        const StieltjesVerdict v = stieltjes_test(a, sc.tol);
        all = v.is_stieltjes;
        r.report["orbit"] = {{"moments", moments_json(a)}, {"stieltjes", to_json(v)}};
    } else {
        const OwcoSpec spec = counting_reduction(sc.spec);
        ordered_json table = ordered_json::array();
        for (Vertex x = 0; x < spec.graph.size(); ++x) {
            for (std::size_t w = 0; w < spec.base.size(); ++w) {
                const std::size_t d = std::min(sc.depth, spec.graph.validity_depth(x));
                ordered_json e;
                e["vertex"] = spec.label(x);
                e["atom"] = spec.base.atom(w).label;
                const MomentSequence a = owco_moments(spec, x, w, d);
                e["moments"] = moments_json(a);
                if (d >= 1) {
                    const StieltjesVerdict v = stieltjes_test(a, sc.tol);
                    all = all && v.is_stieltjes;
                    e["stieltjes"] = to_json(v);
                } else {
                    e["stieltjes"] = nullptr;
                }
                table.push_back(e);
            }
        }
        r.report["counting_reduced"] = !sc.spec.is_counting();
        r.report["moments"] = table;
    }
    r.report["verdict"] = all ? "stieltjes-to-depth" : "not-stieltjes";
    return r;
}

RunResult run_necessity(const Scenario& sc)
{
    const NecessityReport rep = necessity_extract(sc.spec, sc.depth, sc.tol);
    RunResult r;
    r.report = header(sc);
    r.report["verdict"] = rep.verdict;
    r.report["necessity"] = to_json(rep, sc.spec);
    if (rep.verdict == "numerical-indeterminate") {
        r.code = ExitCode::indeterminate;
    }
    return r;
}

RunResult run_wco(const Scenario& sc)
{
    if (sc.spec.base.size() != 1) {
        throw InputError("task wco needs a single-atom W (scalar weights)");
    }
    if (!sc.theta) {
        throw InputError("task wco needs the measures Q_x as a theta family");
    }
    const std::size_t n = sc.spec.graph.size();
    std::vector<double> mu(n);
    std::vector<GridMeasure> q;
    for (Vertex x = 0; x < n; ++x) {
        mu[x] = sc.spec.vertex_mass_of(x);
        q.push_back(sc.theta->measure(x, 0));
    }
    const WcoReport rep = wco_reduce(sc.spec.graph, mu, sc.spec.lambda.col(0), q, sc.tol);
    RunResult r;
    r.report = header(sc);
    r.report["verdict"] = rep.verdict;
    ordered_json cc = ordered_json::object();
    for (Vertex x = 0; x < n; ++x) {
        cc[sc.spec.label(x)] = opt(rep.cc_residual[x]);
    }
    ordered_json body;
    body["cc_residual"] = cc;
    body["max_cc_residual"] = rep.max_cc_residual;
    body["worst_vertex"] = rep.worst_vertex ? ordered_json(sc.spec.label(*rep.worst_vertex)) : ordered_json(nullptr);
    body["integrable"] = rep.integrable;
    body["q_probability"] = rep.q_probability;
    body["g_equals_t_residual"] = opt(rep.g_equals_t_residual);
    body["certificate"] = rep.certificate ? to_json(*rep.certificate, sc.spec) : ordered_json(nullptr);
    r.report["wco"] = body;
    if (rep.verdict == "numerical-indeterminate") {
        r.code = ExitCode::indeterminate;
    }
    return r;
}

} // namespace

std::string render_json(const ordered_json& doc)
{
    std::string out;
    write(out, doc, 0);
    out += "\n";
    return out;
}

ordered_json to_json(const StieltjesVerdict& v)
{
    ordered_json out;
    out["is_stieltjes"] = v.is_stieltjes;
    out["depth"] = v.depth;
    out["min_eig_h0"] = v.min_eig_h0;
    out["min_eig_h1"] = v.min_eig_h1;
    out["prescale"] = v.prescale;
    out["support_bound"] = opt(v.support_bound);
    out["tolerance"] = v.tolerance_used;
    if (v.witness) {
        out["witness"] = {{"matrix", v.witness->matrix},
                          {"order", v.witness->order},
                          {"determinant", v.witness->determinant},
                          {"min_eigenvalue", v.witness->min_eigenvalue}};
    } else {
        out["witness"] = nullptr;
    }
    return out;
}

ordered_json to_json(const GridMeasure& m)
{
    return {{"grid", m.grid()}, {"weights", m.weights()}};
}

ordered_json to_json(const SubnormalityCertificate& cert, const OwcoSpec& spec)
{
    ordered_json out;
    out["verdict"] = cert.verdict;
    out["counting_reduced"] = cert.counting_reduced;
    out["condition_a"] = cert.conditions.condition_a;
    out["condition_b"] = cert.conditions.condition_b;
    out["condition_b_violations"] = cert.conditions.violation_count;
    out["g_finite"] = opt(cert.g_finite);
    if (cert.consistency) {
        ordered_json c;
        c["residual"] = cert.consistency->residual;
        c["passes"] = cert.consistency->passes;
        c["skipped_frontier_vertices"] = cert.consistency->skipped_vertices;
        if (cert.consistency->worst) {
            c["worst"] = {{"vertex", spec.label(cert.consistency->worst->x)},
                          {"atom", spec.base.atom(cert.consistency->worst->w).label},
                          {"grid_index", cert.consistency->worst->s}};
        } else {
            c["worst"] = nullptr;
        }
        out["consistency"] = c;
    } else {
        out["consistency"] = nullptr;
    }
    out["norm_c_hat"] = opt(cert.norm_c_hat);
    out["quasinormality_defect"] = opt(cert.extension_defect);
    out["defect_constant"] = opt(cert.defect_constant);
    out["polar_defect"] = opt(cert.polar_defect);
    out["polar_quasinormal"] = opt(cert.polar_quasinormal);
    out["cstar_c_residual"] = opt(cert.cstar_c_residual);
    out["embedding_residual"] = opt(cert.embedding_residual);
    out["isometry_residual"] = opt(cert.isometry_residual);
    out["commutator_residual"] = opt(cert.commutator_residual);
    out["resolvent_norm"] = opt(cert.resolvent_norm);
    out["second_route_quasinormal"] = opt(cert.second_route_quasinormal);
    out["internal_inconsistency"] = cert.internal_inconsistency;
    out["frontier_vertices"] = cert.frontier_vertices;
    out["tolerance_cascade"] = cascade_json(cert.cascade);
    out["notes"] = cert.notes;
    return out;
}

ordered_json to_json(const NecessityReport& rep, const OwcoSpec& spec)
{
    ordered_json out;
    out["verdict"] = rep.verdict;
    out["counting_reduced"] = rep.counting_reduced;
    out["depth"] = rep.depth;
    out["norm_c_squared"] = rep.norm_c_sq;
    out["merge_radius"] = rep.merge_radius;
    out["recurrence_tolerance"] = rep.recurrence_tolerance;
    out["recurrence_residual"] = rep.recurrence_residual;
    out["recurrence_checked_vertices"] = rep.recurrence_checked;
    out["g_step_residual"] = rep.g_step_residual;
    out["g_equals_t_residual"] = rep.g_equals_t_residual;
    out["complete_vertices"] = rep.complete_vertices;
    const auto entry_json = [&](const AtomRecovery& e) {
        ordered_json j;
        j["vertex"] = spec.label(e.x);
        j["atom"] = spec.base.atom(e.w).label;
        j["status"] = e.status;
        j["depth"] = e.depth;
        j["moments"] = e.moments.values;
        j["support_bound"] = opt(e.support_bound);
        j["support_bound_growing"] = e.support_growing;
        j["within_norm_bound"] = e.within_norm_bound;
        j["stieltjes"] = e.verdict ? to_json(*e.verdict) : ordered_json(nullptr);
        j["measure"] = {{"atoms", e.atoms}, {"weights", e.weights}};
        if (!e.message.empty()) {
            j["message"] = e.message;
        }
        return j;
    };
    out["witness"] = rep.witness ? entry_json(*rep.witness) : ordered_json(nullptr);
    ordered_json entries = ordered_json::array();
    for (const auto& e : rep.entries) {
        entries.push_back(entry_json(e));
    }
    out["entries"] = entries;
    if (rep.theta) {
        out["theta_grid"] = rep.theta->grid();
    } else {
        out["theta_grid"] = nullptr;
    }
    out["notes"] = rep.notes;
    return out;
}

RunResult run_scenario(const Scenario& sc)
{
    RunResult r;
    if (sc.task == "check") {
        r = run_check(sc);
    } else if (sc.task == "extend") {
        r = run_extend(sc);
    } else if (sc.task == "moments") {
        r = run_moments(sc);
    } else if (sc.task == "necessity") {
        r = run_necessity(sc);
    } else if (sc.task == "wco") {
        r = run_wco(sc);
    } else {
        throw InputError("unknown task '" + sc.task + "'");
    }
    r.report["scenario_notes"] = sc.notes;
    return r;
}

} // namespace owco
