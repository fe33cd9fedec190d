#include "owco/scenario.hpp"

#include "owco/gallery.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace owco {

namespace {

std::string escape_token(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out += c;
        }
    }
    return out;
}

std::string at(const std::string& base, const std::string& token)
{
    return base + "/" + escape_token(token);
}

std::string at(const std::string& base, std::size_t i)
{
    return base + "/" + std::to_string(i);
}

const ordered_json& member(const ordered_json& obj, const std::string& key, const std::string& where)
{
    if (!obj.is_object()) {
        throw ScenarioError(where, "expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ScenarioError(where, "missing field '" + key + "'");
    }
    return *it;
}

double number(const ordered_json& v, const std::string& where)
{
    if (!v.is_number()) {
        throw ScenarioError(where, "expected a number");
    }
    return v.get<double>();
}

std::string text(const ordered_json& v, const std::string& where)
{
    if (!v.is_string()) {
        throw ScenarioError(where, "expected a string");
    }
    return v.get<std::string>();
}

Complex complex_value(const ordered_json& v, const std::string& where)
{
    if (v.is_number()) {
        return {v.get<double>(), 0.0};
    }
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    throw ScenarioError(where, "expected a complex number as [re, im] or a real number");
}

ordered_json complex_json(Complex c)
{
    return ordered_json::array({c.real(), c.imag()});
}

std::size_t count_value(const ordered_json& v, const std::string& where)
{
    if (!v.is_number_integer() || v.get<long long>() < 1) {
        throw ScenarioError(where, "expected a positive integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
}

std::pair<std::size_t, std::size_t> line_col(const std::string& textv, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < textv.size(); ++i) {
        if (textv[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

std::string param_text(const ordered_json& v, const std::string& where)
{
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number_integer()) {
        return std::to_string(v.get<long long>());
    }
    if (v.is_number()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    if (v.is_array()) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            out += (i ? "," : "") + param_text(v[i], at(where, i));
        }
        return out;
    }
    throw ScenarioError(where, "gallery parameters must be numbers, strings or lists of numbers");
}

using LabelIndex = std::unordered_map<std::string, std::size_t>;

OwcoSpec parse_spec(const ordered_json& js, LabelIndex& vidx, LabelIndex& aidx)
{
    const std::string base = "/spec";
    const auto& atoms_js = member(js, "atoms", base);
    if (!atoms_js.is_array() || atoms_js.empty()) {
        throw ScenarioError(at(base, "atoms"), "expected a non-empty array");
    }
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < atoms_js.size(); ++i) {
        const std::string where = at(at(base, "atoms"), i);
        const auto& a = atoms_js[i];
        Atom atom;
        atom.label = text(member(a, "label", where), at(where, "label"));
        atom.value = a.contains("value") ? complex_value(a["value"], at(where, "value")) : Complex{1.0, 0.0};
        atom.mass = a.contains("mass") ? number(a["mass"], at(where, "mass")) : 1.0;
        if (!(atom.mass > 0.0) || !std::isfinite(atom.mass)) {
            throw ScenarioError(at(where, "mass"), "atom mass must be strictly positive and finite");
        }
        if (!aidx.emplace(atom.label, i).second) {
            throw ScenarioError(at(where, "label"), "duplicate atom label '" + atom.label + "'");
        }
        atoms.push_back(atom);
    }

    const auto& verts = member(js, "vertices", base);
    if (!verts.is_array() || verts.empty()) {
        throw ScenarioError(at(base, "vertices"), "expected a non-empty array");
    }
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const std::string where = at(at(base, "vertices"), i);
        const std::string label = text(member(verts[i], "label", where), at(where, "label"));
        if (!vidx.emplace(label, i).second) {
            throw ScenarioError(at(where, "label"), "duplicate vertex label '" + label + "'");
        }
        labels.push_back(label);
    }
    std::vector<Vertex> phi(verts.size());
    std::vector<bool> cut(verts.size(), false);
    std::vector<double> masses(verts.size(), 1.0);
    bool any_mass = false;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const std::string where = at(at(base, "vertices"), i);
        const auto& v = verts[i];
        const std::string target = text(member(v, "phi", where), at(where, "phi"));
        const auto it = vidx.find(target);
        if (it == vidx.end()) {
            throw ScenarioError(at(where, "phi"), "phi points to unknown vertex '" + target + "'");
        }
        phi[i] = it->second;
        if (v.contains("truncated")) {
            if (!v["truncated"].is_boolean()) {
                throw ScenarioError(at(where, "truncated"), "expected true or false");
            }
            cut[i] = v["truncated"].get<bool>();
        }
        if (v.contains("mass")) {
            any_mass = true;
            masses[i] = number(v["mass"], at(where, "mass"));
            if (!(masses[i] > 0.0) || !std::isfinite(masses[i])) {
                throw ScenarioError(at(where, "mass"), "vertex mass must be strictly positive and finite");
            }
        }
    }

    Eigen::MatrixXcd lambda(static_cast<Eigen::Index>(verts.size()), static_cast<Eigen::Index>(atoms.size()));
    const auto& lam = member(js, "lambda", base);
    const std::string lw = at(base, "lambda");
    if (lam.is_string()) {
        if (lam.get<std::string>() != "atom_value") {
            throw ScenarioError(lw, "unknown lambda formula '" + lam.get<std::string>() + "' (known: atom_value)");
        }
        for (std::size_t w = 0; w < atoms.size(); ++w) {
            lambda.col(static_cast<Eigen::Index>(w)).setConstant(atoms[w].value);
        }
    } else {
        if (!lam.is_object()) {
            throw ScenarioError(lw, "expected an object keyed by vertex label, or a formula name");
        }
        for (const auto& [key, row] : lam.items()) {
            if (!vidx.count(key)) {
                throw ScenarioError(at(lw, key), "unknown vertex label '" + key + "'");
            }
        }
        std::vector<std::string> missing;
        for (std::size_t x = 0; x < verts.size(); ++x) {
            const auto it = lam.find(labels[x]);
            if (it == lam.end()) {
                for (const auto& a : atoms) {
                    missing.push_back("(" + labels[x] + ", " + a.label + ")");
                }
                continue;
            }
            const std::string where = at(lw, labels[x]);
            if (!it->is_array() || it->size() != atoms.size()) {
                throw ScenarioError(where, "expected " + std::to_string(atoms.size()) + " entries, one per atom");
            }
            for (std::size_t w = 0; w < atoms.size(); ++w) {
                lambda(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(w)) =
                    complex_value((*it)[w], at(where, w));
            }
        }
        if (!missing.empty()) {
            std::string list;
            for (std::size_t i = 0; i < missing.size() && i < 12; ++i) {
                list += (i ? ", " : "") + missing[i];
            }
            if (missing.size() > 12) {
                list += ", ... (" + std::to_string(missing.size()) + " in total)";
            }
            throw ScenarioError(lw, "lambda table is missing (vertex, atom) pairs: " + list);
        }
    }

    OwcoSpec spec{FunctionalGraph(phi, cut), DiscreteMeasureSpace(atoms), lambda,
                  any_mass ? std::optional<std::vector<double>>(masses) : std::nullopt, labels};
    spec.validate();
    return spec;
}

ThetaFamily parse_theta(const ordered_json& js, const OwcoSpec& spec, const LabelIndex& aidx)
{
    const std::string base = "/theta";
    const auto& grid_js = member(js, "grid", base);
    if (!grid_js.is_array() || grid_js.empty()) {
        throw ScenarioError(at(base, "grid"), "expected a non-empty array");
    }
    std::vector<double> grid;
    for (std::size_t i = 0; i < grid_js.size(); ++i) {
        grid.push_back(number(grid_js[i], at(at(base, "grid"), i)));
    }
    try {
        (void)GridMeasure(grid, std::vector<double>(grid.size(), 0.0), GridMeasure::Kind::finite);
    } catch (const InputError& e) {
        throw ScenarioError(at(base, "grid"), e.what());
    }

    const std::size_t n = spec.graph.size();
    const std::size_t m = spec.base.size();
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(n * m), static_cast<Eigen::Index>(grid.size()));
    const auto read_row = [&](const ordered_json& row, const std::string& where, Eigen::Index r) {
        if (!row.is_array() || row.size() != grid.size()) {
            throw ScenarioError(where, "expected " + std::to_string(grid.size()) + " weights, one per grid point");
        }
        std::vector<double> vals;
        for (std::size_t s = 0; s < grid.size(); ++s) {
            vals.push_back(number(row[s], at(where, s)));
            weights(r, static_cast<Eigen::Index>(s)) = vals.back();
        }
        try {
            (void)GridMeasure(grid, vals);
        } catch (const InputError& e) {
            throw ScenarioError(where, e.what());
        }
    };

    if (js.contains("constant")) {
        read_row(js["constant"], at(base, "constant"), 0);
        for (Eigen::Index r = 1; r < weights.rows(); ++r) {
            weights.row(r) = weights.row(0);
        }
        return ThetaFamily(n, m, grid, weights);
    }
    const auto& table = member(js, "weights", base);
    const std::string tw = at(base, "weights");
    if (!table.is_object()) {
        throw ScenarioError(tw, "expected an object keyed by vertex label");
    }
    std::vector<std::string> missing;
    for (Vertex x = 0; x < n; ++x) {
        const auto it = table.find(spec.label(x));
        if (it == table.end() || !it->is_object()) {
            missing.push_back(spec.label(x));
            continue;
        }
        for (const auto& [key, row] : it->items()) {
            if (!aidx.count(key)) {
                throw ScenarioError(at(at(tw, spec.label(x)), key), "unknown atom label '" + key + "'");
            }
        }
        for (std::size_t w = 0; w < m; ++w) {
            const std::string where = at(at(tw, spec.label(x)), spec.base.atom(w).label);
            const auto rit = it->find(spec.base.atom(w).label);
            if (rit == it->end()) {
                throw ScenarioError(where, "missing theta row");
            }
            read_row(*rit, where, static_cast<Eigen::Index>(x * m + w));
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 12; ++i) {
            list += (i ? ", " : "") + missing[i];
        }
        throw ScenarioError(tw, "no theta rows for vertices: " + list);
    }
    return ThetaFamily(n, m, grid, weights);
}

Eigen::VectorXcd parse_vector(const ordered_json& js, const OwcoSpec& spec, const LabelIndex& vidx,
                              const LabelIndex& aidx)
{
    const std::string base = "/vector";
    if (!js.is_object()) {
        throw ScenarioError(base, "expected an object keyed by vertex label");
    }
    const std::size_t m = spec.base.size();
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.graph.size() * m));
    for (const auto& [vkey, row] : js.items()) {
        const auto vit = vidx.find(vkey);
        if (vit == vidx.end()) {
            throw ScenarioError(at(base, vkey), "unknown vertex label '" + vkey + "'");
        }
        if (!row.is_object()) {
            throw ScenarioError(at(base, vkey), "expected an object keyed by atom label");
        }
        for (const auto& [akey, value] : row.items()) {
            const auto ait = aidx.find(akey);
            if (ait == aidx.end()) {
                throw ScenarioError(at(at(base, vkey), akey), "unknown atom label '" + akey + "'");
            }
            f[static_cast<Eigen::Index>(vit->second * m + ait->second)] = complex_value(value, at(at(base, vkey), akey));
        }
    }
    return f;
}

} // namespace

const std::vector<std::string>& task_names()
{
    static const std::vector<std::string> names = {"check", "extend", "moments", "necessity", "wco"};
    return names;
}

Scenario parse_scenario(const std::string& textv)
{
    ordered_json doc;
    try {
        doc = ordered_json::parse(textv);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = line_col(textv, e.byte);
        throw ScenarioError(std::to_string(line) + ":" + std::to_string(col), "JSON syntax error");
    }
    if (!doc.is_object()) {
        throw ScenarioError("/", "scenario must be a JSON object");
    }

    Scenario sc;
    LabelIndex vidx;
    LabelIndex aidx;
    if (doc.contains("gallery")) {
        if (doc.contains("spec") || doc.contains("theta")) {
            throw ScenarioError("/gallery", "a gallery reference cannot be combined with explicit spec or theta");
        }
        const std::string name = text(doc["gallery"], "/gallery");
        GalleryParams params;
        if (doc.contains("params")) {
            if (!doc["params"].is_object()) {
                throw ScenarioError("/params", "expected an object");
            }
            for (const auto& [key, value] : doc["params"].items()) {
                params[key] = param_text(value, at("/params", key));
            }
        }
        try {
            sc = make_gallery(name, params);
        } catch (const ScenarioError&) {
            throw;
        } catch (const InputError& e) {
            throw ScenarioError("/gallery", e.what());
        }
        for (std::size_t x = 0; x < sc.spec.graph.size(); ++x) {
            vidx.emplace(sc.spec.label(x), x);
        }
        for (std::size_t w = 0; w < sc.spec.base.size(); ++w) {
            aidx.emplace(sc.spec.base.atom(w).label, w);
        }
    } else {
        try {
            sc.spec = parse_spec(member(doc, "spec", ""), vidx, aidx);
        } catch (const ScenarioError&) {
            throw;
        } catch (const InputError& e) {
            throw ScenarioError("/spec", e.what());
        }
        if (doc.contains("theta")) {
            sc.theta = parse_theta(doc["theta"], sc.spec, aidx);
        }
    }

    if (doc.contains("name")) {
        sc.name = text(doc["name"], "/name");
    }
    if (doc.contains("task")) {
        sc.task = text(doc["task"], "/task");
    }
    bool known = false;
    for (const auto& t : task_names()) {
        known = known || t == sc.task;
    }
    if (!known) {
        throw ScenarioError("/task", "unknown task '" + sc.task + "'");
    }
    if (doc.contains("tol")) {
        sc.tol = number(doc["tol"], "/tol");
        if (!(sc.tol > 0.0) || !std::isfinite(sc.tol)) {
            throw ScenarioError("/tol", "tolerance must be positive");
        }
    }
    if (doc.contains("depth")) {
        sc.depth = count_value(doc["depth"], "/depth");
    }
    if (doc.contains("vector")) {
        sc.vector = parse_vector(doc["vector"], sc.spec, vidx, aidx);
    }
    if (doc.contains("notes")) {
        const auto& notes = doc["notes"];
        if (!notes.is_array()) {
            throw ScenarioError("/notes", "expected an array of strings");
        }
        for (std::size_t i = 0; i < notes.size(); ++i) {
            sc.notes.push_back(text(notes[i], at("/notes", i)));
        }
    }
    if (sc.name.empty()) {
        sc.name = "scenario";
    }
    return sc;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open scenario file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ScenarioError& e) {
        throw ScenarioError(path + ":" + e.where(), std::string(e.what()).substr(e.where().size() + 2));
    }
}

ordered_json scenario_to_json(const Scenario& s)
{
    const auto& spec = s.spec;
    ordered_json out;
    out["name"] = s.name;
    out["task"] = s.task;
    out["tol"] = s.tol;
    out["depth"] = s.depth;
    if (!s.notes.empty()) {
        out["notes"] = s.notes;
    }

    ordered_json atoms = ordered_json::array();
    for (const auto& a : spec.base.atoms()) {
        atoms.push_back({{"label", a.label}, {"value", complex_json(a.value)}, {"mass", a.mass}});
    }
    ordered_json verts = ordered_json::array();
    for (Vertex x = 0; x < spec.graph.size(); ++x) {
        ordered_json v;
        v["label"] = spec.label(x);
        v["phi"] = spec.label(spec.graph.phi(x));
        if (spec.graph.is_truncated(x)) {
            v["truncated"] = true;
        }
        if (spec.vertex_mass) {
            v["mass"] = spec.vertex_mass_of(x);
        }
        verts.push_back(v);
    }
    ordered_json lambda = ordered_json::object();
    for (Vertex x = 0; x < spec.graph.size(); ++x) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index w = 0; w < spec.lambda.cols(); ++w) {
            row.push_back(complex_json(spec.lambda(static_cast<Eigen::Index>(x), w)));
        }
        lambda[spec.label(x)] = row;
    }
    out["spec"] = {{"atoms", atoms}, {"vertices", verts}, {"lambda", lambda}};

    if (s.theta) {
        const auto& th = *s.theta;
        ordered_json weights = ordered_json::object();
        for (Vertex x = 0; x < th.vertices(); ++x) {
            ordered_json per = ordered_json::object();
            for (std::size_t w = 0; w < th.atoms(); ++w) {
                ordered_json row = ordered_json::array();
                for (std::size_t k = 0; k < th.grid_size(); ++k) {
                    row.push_back(th.weight(x, w, k));
                }
                per[spec.base.atom(w).label] = row;
            }
            weights[spec.label(x)] = per;
        }
        out["theta"] = {{"grid", th.grid()}, {"weights", weights}};
    }
    if (s.vector) {
        ordered_json vec = ordered_json::object();
        const std::size_t m = spec.base.size();
        for (Vertex x = 0; x < spec.graph.size(); ++x) {
            ordered_json per = ordered_json::object();
            for (std::size_t w = 0; w < m; ++w) {
                const Complex c = (*s.vector)[static_cast<Eigen::Index>(x * m + w)];
                if (c != Complex{0.0, 0.0}) {
                    per[spec.base.atom(w).label] = complex_json(c);
                }
            }
            if (!per.empty()) {
                vec[spec.label(x)] = per;
            }
        }
        out["vector"] = vec;
    }
    return out;
}

} // namespace owco
