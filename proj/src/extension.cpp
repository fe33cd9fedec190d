#include "owco/extension.hpp"

#include "owco/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace owco {

namespace {

using Triplet = Eigen::Triplet<Complex>;

constexpr std::size_t max_witnesses = 16;

void require_counting(const OwcoSpec& spec, const char* what)
{
    if (!spec.is_counting()) {
        throw PreconditionError(std::string(what) +
                                " expects counting measure on X; apply counting_reduction first");
    }
}

void require_shape(const OwcoSpec& spec, const ThetaFamily& theta)
{
    if (theta.vertices() != spec.graph.size() || theta.atoms() != spec.base.size()) {
        throw InputError("theta family is " + std::to_string(theta.vertices()) + "x" +
                         std::to_string(theta.atoms()) + ", spec has " + std::to_string(spec.graph.size()) +
                         " vertices and " + std::to_string(spec.base.size()) + " atoms");
    }
}

double lambda_abs2(const OwcoSpec& spec, Vertex x, std::size_t w)
{
    return std::norm(spec.lambda(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(w)));
}

// Fiber sum at one atom; caller guarantees theta_x^w{s} > 0.
double g_value(const OwcoSpec& spec, const ThetaFamily& theta, Vertex x, std::size_t w, std::size_t s)
{
    double sum = 0.0;
    for (Vertex y : spec.graph.fiber(x)) {
        sum += lambda_abs2(spec, y, w) * theta.weight(y, w, s);
    }
    return sum / theta.weight(x, w, s);
}

bool is_frontier(const FunctionalGraph& g, Vertex x)
{
    return g.is_truncated(x) || g.is_truncated(g.phi(x));
}

} // namespace

ThetaFamily::ThetaFamily(std::size_t vertices, std::size_t atoms, std::vector<double> grid, Eigen::MatrixXd weights)
    : vertices_(vertices), atoms_(atoms), grid_(std::move(grid)), weights_(std::move(weights))
{
    if (static_cast<std::size_t>(weights_.rows()) != vertices_ * atoms_ ||
        static_cast<std::size_t>(weights_.cols()) != grid_.size()) {
        throw InputError("theta weight table has the wrong shape");
    }
    for (Vertex x = 0; x < vertices_; ++x) {
        for (std::size_t w = 0; w < atoms_; ++w) {
            try {
                (void)measure(x, w);
            } catch (const InputError& e) {
                throw InputError("theta row (vertex " + std::to_string(x) + ", atom " + std::to_string(w) +
                                 "): " + e.what());
            }
        }
    }
}

ThetaFamily ThetaFamily::constant(std::size_t vertices, std::size_t atoms, const GridMeasure& m)
{
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(vertices * atoms), static_cast<Eigen::Index>(m.size()));
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
        for (std::size_t s = 0; s < m.size(); ++s) {
            weights(r, static_cast<Eigen::Index>(s)) = m.weight(s);
        }
    }
    return ThetaFamily(vertices, atoms, m.grid(), std::move(weights));
}

GridMeasure ThetaFamily::measure(Vertex x, std::size_t w) const
{
    if (x >= vertices_ || w >= atoms_) {
        throw InputError("theta index out of range");
    }
    const Eigen::VectorXd r = weights_.row(static_cast<Eigen::Index>(x * atoms_ + w));
    return GridMeasure(grid_, std::vector<double>(r.data(), r.data() + r.size()));
}

std::vector<GridMeasure> ThetaFamily::row(Vertex x) const
{
    std::vector<GridMeasure> out;
    for (std::size_t w = 0; w < atoms_; ++w) {
        out.push_back(measure(x, w));
    }
    return out;
}

ConditionsReport check_conditions(const OwcoSpec& spec, const ThetaFamily& theta)
{
    spec.validate();
    require_shape(spec, theta);
    ConditionsReport out;
    for (Vertex x = 0; x < spec.graph.size(); ++x) {
        const Vertex px = spec.graph.phi(x);
        for (std::size_t w = 0; w < theta.atoms(); ++w) {
            if (lambda_abs2(spec, x, w) == 0.0) {
                continue;
            }
            for (std::size_t s = 0; s < theta.grid_size(); ++s) {
                if (theta.weight(x, w, s) > 0.0 && !(theta.weight(px, w, s) > 0.0)) {
                    out.condition_b = false;
                    ++out.violation_count;
                    if (out.violations.size() < max_witnesses) {
                        out.violations.push_back({x, w, s});
                    }
                }
            }
        }
    }
    return out;
}

Eigen::VectorXcd GTable::as_vector() const
{
    Eigen::VectorXcd v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = null[i] ? 0.0 : values[i];
    }
    return v;
}

GTable compute_G(const OwcoSpec& spec, const ThetaFamily& theta)
{
    require_counting(spec, "compute_G");
    if (!check_conditions(spec, theta).condition_b) {
        throw PreconditionError("compute_G needs a theta family satisfying the absolute continuity condition");
    }
    GTable g;
    g.vertices = spec.graph.size();
    g.atoms = spec.base.size();
    g.grid = theta.grid_size();
    g.values.assign(g.vertices * g.atoms * g.grid, 0.0);
    g.null.assign(g.values.size(), false);
    for (Vertex x = 0; x < g.vertices; ++x) {
        for (std::size_t w = 0; w < g.atoms; ++w) {
            for (std::size_t s = 0; s < g.grid; ++s) {
                const std::size_t i = (x * g.atoms + w) * g.grid + s;
                if (!(theta.weight(x, w, s) > 0.0)) {
                    g.null[i] = true;
                    continue;
                }
                g.values[i] = g_value(spec, theta, x, w, s);
                if (!std::isfinite(g.values[i])) {
                    g.finite = false;
                }
            }
        }
    }
    return g;
}

double fiber_integral_residual(const OwcoSpec& spec, const ThetaFamily& theta, const GTable& g, Vertex x,
                               const Eigen::MatrixXcd& f)
{
    require_shape(spec, theta);
    if (static_cast<std::size_t>(f.rows()) != theta.atoms() ||
        static_cast<std::size_t>(f.cols()) != theta.grid_size()) {
        throw InputError("test function must be atoms x grid");
    }
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::size_t w = 0; w < theta.atoms(); ++w) {
        const double rho = spec.base.mass(w);
        for (std::size_t s = 0; s < theta.grid_size(); ++s) {
            const double f2 = std::norm(f(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(s)));
            for (Vertex y : spec.graph.fiber(x)) {
                lhs += lambda_abs2(spec, y, w) * f2 * rho * theta.weight(y, w, s);
            }
            if (!g.is_null(x, w, s)) {
                rhs += g.at(x, w, s) * f2 * rho * theta.weight(x, w, s);
            }
        }
    }
    return std::abs(lhs - rhs);
}

ConsistencyReport consistency_check(const OwcoSpec& spec, const ThetaFamily& theta, const GTable& g, double tol)
{
    require_shape(spec, theta);
    ConsistencyReport out;
    out.finite = g.finite;
    for (Vertex x = 0; x < spec.graph.size(); ++x) {
        if (is_frontier(spec.graph, x)) {
            ++out.skipped_vertices;
            continue;
        }
        const Vertex px = spec.graph.phi(x);
        for (std::size_t w = 0; w < g.atoms; ++w) {
            const double lam = std::sqrt(lambda_abs2(spec, x, w));
            for (std::size_t s = 0; s < g.grid; ++s) {
                if (g.is_null(x, w, s)) {
                    continue;
                }
                const double r = lam * std::abs(g.at(px, w, s) - g.at(x, w, s));
                if (!std::isfinite(r)) {
                    out.finite = false;
                    continue;
                }
                if (r > out.residual) {
                    out.residual = r;
                    out.worst = AtomRef{x, w, s};
                }
            }
        }
    }
    out.passes = out.finite && out.residual <= tol;
    return out;
}

Extension build_extension(const OwcoSpec& spec, const ThetaFamily& theta)
{
    require_counting(spec, "build_extension");
    if (!check_conditions(spec, theta).condition_b) {
        throw PreconditionError("build_extension needs a theta family satisfying the absolute continuity condition");
    }
    const std::size_t n = spec.graph.size();
    const std::size_t m = spec.base.size();
    const std::size_t k = theta.grid_size();
    const std::size_t per = m * k;

    std::vector<Vertex> vertices(n);
    for (Vertex x = 0; x < n; ++x) {
        vertices[x] = x;
    }
    std::vector<double> masses(n * per);
    Eigen::VectorXcd weights(static_cast<Eigen::Index>(n * per));
    for (Vertex x = 0; x < n; ++x) {
        for (std::size_t w = 0; w < m; ++w) {
            for (std::size_t s = 0; s < k; ++s) {
                const std::size_t i = x * per + w * k + s;
                masses[i] = spec.base.mass(w) * theta.weight(x, w, s);
                weights[static_cast<Eigen::Index>(i)] =
                    spec.lambda(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(w));
            }
        }
    }
    auto hat = std::make_shared<const BlockSpace>(vertices, per, std::move(masses));
    WcoSystem hat_system{spec.graph, hat, weights};
    auto base = make_space(spec);

    std::vector<Triplet> t;
    for (Vertex x = 0; x < n; ++x) {
        for (std::size_t w = 0; w < m; ++w) {
            for (std::size_t s = 0; s < k; ++s) {
                t.emplace_back(static_cast<int>(x * per + w * k + s), static_cast<int>(x * m + w), Complex{1.0, 0.0});
            }
        }
    }
    SparseMatrix qm(static_cast<Eigen::Index>(n * per), static_cast<Eigen::Index>(n * m));
    qm.setFromTriplets(t.begin(), t.end());

    return Extension{base, hat, hat_system, owco_build(spec), wco_build(hat_system), LinearMap(base, hat, qm)};
}

double verify_CstarC(const Extension& ext, const GTable& g)
{
    const LinearMap mg = mult_build(g.as_vector(), ext.hat_space);
    return operator_norm(adjoint(ext.c_hat) * ext.c_hat - mg);
}

SubnormalityCertificate certify_subnormality(const OwcoSpec& input, const ThetaFamily& theta, double tol)
{
    SubnormalityCertificate cert;
    cert.counting_reduced = !input.is_counting();
    const OwcoSpec spec = counting_reduction(input);
    if (cert.counting_reduced) {
        cert.notes.push_back("vertex masses folded into the weights (unitarily equivalent counting-measure form)");
    }
    cert.cascade.tol = tol;
    cert.conditions = check_conditions(spec, theta);
    for (Vertex x = 0; x < spec.graph.size(); ++x) {
        cert.frontier_vertices += spec.graph.is_truncated(x) ? 1 : 0;
    }
    if (cert.frontier_vertices > 0) {
        cert.notes.push_back("rows at truncated vertices and their preimages are excluded from defect norms");
    }
    if (!cert.conditions.condition_b) {
        cert.verdict = "refuted-hypotheses";
        cert.notes.push_back("absolute continuity condition fails");
        return cert;
    }

    const GTable g = compute_G(spec, theta);
    cert.g_finite = g.finite;
    const Extension ext = build_extension(spec, theta);
    const double norm = operator_norm(ext.c_hat);
    cert.norm_c_hat = norm;
    const double s1 = std::max(1.0, norm);
    cert.cascade.consistency = tol * s1 * s1 * s1;
    cert.cascade.defect = tol * s1 * s1 * s1;
    cert.cascade.cstar_c = tol * s1 * s1;
    cert.cascade.embedding = tol * s1;
    cert.cascade.commutator = tol * s1 * s1;

    cert.consistency = consistency_check(spec, theta, g, cert.cascade.consistency);
    const IndexMask rows = interior_rows(ext.hat_system);
    cert.extension_defect = quasinormality_defect(ext.c_hat, &rows);

    const PolarCheck polar = polar_quasinormal_check(ext.c_hat, tol * s1, &rows);
    cert.polar_defect = polar.defect;
    cert.polar_quasinormal = polar.quasinormal;

    cert.cstar_c_residual = verify_CstarC(ext, g);
    cert.embedding_residual = operator_norm(ext.c_hat * ext.q - ext.q * ext.c);
    cert.isometry_residual = operator_norm(adjoint(ext.q) * ext.q - identity(ext.base_space));

    // Commutation route: C_hat commutes with M_sqrtG, and z0 - M_sqrtG is invertible off [0, inf).
    Eigen::VectorXcd sqrt_g = g.as_vector().real().cwiseMax(0.0).cwiseSqrt().cast<Complex>();
    const LinearMap m_sqrt = mult_build(sqrt_g, ext.hat_space);
    const IntertwiningReport comm = intertwining_check(m_sqrt, ext.c_hat, ext.hat_system, sqrt_g, &rows);
    cert.commutator_residual = comm.commutator_norm;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ext.hat_space->dim(); ++i) {
        if (!ext.hat_space->is_null(i)) {
            dist = std::min(dist, std::abs(Complex{-1.0, 0.0} - sqrt_g[static_cast<Eigen::Index>(i)]));
        }
    }
    cert.resolvent_norm = std::isfinite(dist) ? 1.0 / dist : 0.0;
    cert.second_route_quasinormal = comm.commutator_norm <= cert.cascade.commutator;

    // defect <= constant * consistency residual
    double ratio = 0.0;
    for (Vertex z = 0; z < spec.graph.size(); ++z) {
        for (std::size_t w = 0; w < g.atoms; ++w) {
            for (std::size_t s = 0; s < g.grid; ++s) {
                if (!(theta.weight(z, w, s) > 0.0)) {
                    continue;
                }
                double sum = 0.0;
                for (Vertex x : spec.graph.fiber(z)) {
                    if (!is_frontier(spec.graph, x) && lambda_abs2(spec, x, w) > 0.0) {
                        sum += theta.weight(x, w, s) / theta.weight(z, w, s);
                    }
                }
                ratio = std::max(ratio, sum);
            }
        }
    }
    cert.defect_constant = std::sqrt(ratio);

    const bool consistent = *cert.g_finite && cert.consistency->passes;
    const bool quasinormal = *cert.extension_defect <= cert.cascade.defect;
    const bool identities = *cert.cstar_c_residual <= cert.cascade.cstar_c &&
                            *cert.embedding_residual <= cert.cascade.embedding && *cert.isometry_residual <= tol;
    cert.internal_inconsistency = quasinormal && !consistent;
    if (*cert.polar_quasinormal != quasinormal) {
        cert.notes.push_back("polar and QQQ quasinormality verdicts disagree");
    }
    if (*cert.second_route_quasinormal != quasinormal) {
        cert.notes.push_back("commutation route and QQQ quasinormality verdicts disagree");
    }

    if (cert.internal_inconsistency) {
        cert.verdict = "numerical-indeterminate";
        cert.notes.push_back("extension is quasinormal although the consistency condition fails");
    } else if (!consistent) {
        cert.verdict = "refuted-hypotheses";
    } else if (quasinormal && identities) {
        cert.verdict = "certified-subnormal";
    } else {
        cert.verdict = "numerical-indeterminate";
        cert.notes.push_back("consistency holds but an extension identity misses its tolerance");
    }
    return cert;
}

NecessityReport necessity_extract(const OwcoSpec& input, std::size_t depth, double tol)
{
    NecessityReport rep;
    rep.depth = depth;
    rep.counting_reduced = !input.is_counting();
    const OwcoSpec spec = counting_reduction(input);
    const std::size_t n = spec.graph.size();
    const std::size_t m = spec.base.size();

    const double norm = operator_norm(owco_build(spec));
    rep.norm_c_sq = norm * norm;
    const double scale = std::max(1.0, rep.norm_c_sq);
    rep.merge_radius = 1e-8 * scale;
    rep.recurrence_tolerance = 10.0 * tol * scale;

    bool any_fallback = false;
    for (Vertex x = 0; x < n; ++x) {
        for (std::size_t w = 0; w < m; ++w) {
            AtomRecovery e;
            e.x = x;
            e.w = w;
            e.depth = std::min(depth, spec.graph.validity_depth(x));
            e.moments = owco_moments(spec, x, w, e.depth);
            if (e.depth < 2) {
                e.status = "truncated";
                e.message = "fewer than two moments inside the truncation; delta_0 placeholder";
                any_fallback = true;
                rep.entries.push_back(std::move(e));
                continue;
            }
            const auto& a = e.moments.values;
            if (std::all_of(a.begin() + 1, a.end(), [](double v) { return v == 0.0; })) {
                e.status = "zero-tail";
                e.message = "moments vanish past a_0; delta_0";
                e.support_bound = 0.0;
                e.atoms = {0.0};
                e.weights = {a[0]};
                any_fallback = true;
                rep.entries.push_back(std::move(e));
                continue;
            }
            e.verdict = stieltjes_test(e.moments, tol);
            const SupportBound sb = support_bound_detail(e.moments);
            e.support_bound = sb.r;
            e.support_growing = sb.growing;
            if (!e.verdict->is_stieltjes) {
                e.status = "not-stieltjes";
                rep.entries.push_back(std::move(e));
                continue;
            }
            e.within_norm_bound = sb.r && *sb.r <= rep.norm_c_sq + tol * scale;
            try {
                const GridMeasure mu = recover_atomic_measure(e.moments, tol);
                e.atoms = mu.grid();
                e.weights = mu.weights();
                e.status = "recovered";
            } catch (const NotStieltjesError& err) {
                e.status = "not-stieltjes";
                e.message = err.what();
            } catch (const NumericalError& err) {
                e.status = "indeterminate";
                e.message = err.what();
            }
            rep.entries.push_back(std::move(e));
        }
    }

    const auto entry = [&](Vertex x, std::size_t w) -> const AtomRecovery& { return rep.entries[x * m + w]; };
    for (const auto& e : rep.entries) {
        if (e.status == "not-stieltjes") {
            rep.verdict = "not-subnormal";
            rep.witness = e;
            return rep;
        }
    }
    for (const auto& e : rep.entries) {
        if (e.status == "indeterminate") {
            rep.verdict = "numerical-indeterminate";
            rep.witness = e;
            return rep;
        }
    }

    // Shared grid: merge every recovered atom, then snap each measure onto it.
    std::vector<double> points;
    if (any_fallback) {
        points.push_back(0.0);
    }
    for (const auto& e : rep.entries) {
        points.insert(points.end(), e.atoms.begin(), e.atoms.end());
    }
    std::sort(points.begin(), points.end());
    std::vector<double> grid;
    for (double t : points) {
        if (grid.empty() || t - grid.back() > rep.merge_radius) {
            grid.push_back(t);
        }
    }
    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * m), static_cast<Eigen::Index>(grid.size()));
    for (Vertex x = 0; x < n; ++x) {
        for (std::size_t w = 0; w < m; ++w) {
            const auto& e = entry(x, w);
            const auto r = static_cast<Eigen::Index>(x * m + w);
            if (e.status == "truncated") {
                weights(r, 0) = 1.0;
                continue;
            }
            for (std::size_t j = 0; j < e.atoms.size(); ++j) {
                const auto it = std::lower_bound(grid.begin(), grid.end(), e.atoms[j]);
                std::size_t s = static_cast<std::size_t>(it - grid.begin());
                if (s == grid.size() || (s > 0 && e.atoms[j] - grid[s - 1] < grid[s] - e.atoms[j])) {
                    s -= 1;
                }
                weights(r, static_cast<Eigen::Index>(s)) += e.weights[j];
            }
            const double total = weights.row(r).sum();
            if (total > 0.0) {
                weights.row(r) /= total;
            }
        }
    }
    rep.theta.emplace(n, m, grid, weights);
    const ThetaFamily& theta = *rep.theta;

    const auto ok = [&](Vertex v) {
        for (std::size_t w = 0; w < m; ++w) {
            const auto& st = entry(v, w).status;
            if (st != "recovered" && st != "zero-tail") {
                return false;
            }
        }
        return true;
    };
    std::vector<bool> complete(n, false);
    for (Vertex x = 0; x < n; ++x) {
        if (spec.graph.is_truncated(x) || !ok(x)) {
            continue;
        }
        complete[x] = std::all_of(spec.graph.fiber(x).begin(), spec.graph.fiber(x).end(), ok);
        rep.complete_vertices += complete[x] ? 1 : 0;
    }

    for (Vertex x = 0; x < n; ++x) {
        if (!complete[x]) {
            continue;
        }
        ++rep.recurrence_checked;
        for (std::size_t w = 0; w < m; ++w) {
            for (std::size_t s = 0; s < grid.size(); ++s) {
                double rhs = 0.0;
                for (Vertex y : spec.graph.fiber(x)) {
                    rhs += lambda_abs2(spec, y, w) * theta.weight(y, w, s);
                }
                rep.recurrence_residual =
                    std::max(rep.recurrence_residual, std::abs(grid[s] * theta.weight(x, w, s) - rhs));
                if (theta.weight(x, w, s) > 0.0) {
                    const double gx = g_value(spec, theta, x, w, s);
                    rep.g_equals_t_residual = std::max(rep.g_equals_t_residual, std::abs(gx - grid[s]));
                    const Vertex px = spec.graph.phi(x);
                    if (complete[px]) {
                        const double gp = theta.weight(px, w, s) > 0.0 ? g_value(spec, theta, px, w, s) : 0.0;
                        rep.g_step_residual = std::max(rep.g_step_residual,
                                                       std::sqrt(lambda_abs2(spec, x, w)) * std::abs(gp - gx));
                    }
                }
            }
        }
    }

    bool bound_ok = true;
    for (const auto& e : rep.entries) {
        bound_ok = bound_ok && e.within_norm_bound;
        if (e.support_growing) {
            rep.notes.push_back("support bound still growing at depth " + std::to_string(e.depth) + " for vertex " +
                                spec.label(e.x) + ", atom " + spec.base.atom(e.w).label +
                                "; determinacy not certified");
        }
        if (e.status == "zero-tail") {
            rep.notes.push_back("vertex " + spec.label(e.x) + ", atom " + spec.base.atom(e.w).label +
                                ": moments vanish, delta_0 used");
        }
    }
    if (!bound_ok) {
        rep.verdict = "numerical-indeterminate";
        rep.notes.push_back("a support bound exceeds ||C||^2");
    } else if (rep.recurrence_residual > rep.recurrence_tolerance) {
        rep.verdict = "numerical-indeterminate";
        rep.notes.push_back("recovered measures miss the fiber recurrence");
    } else {
        rep.verdict = "necessary-conditions-hold";
    }
    return rep;
}

WcoReport wco_reduce(const FunctionalGraph& graph, const std::vector<double>& mu, const Eigen::VectorXcd& w,
                     const std::vector<GridMeasure>& q, double tol)
{
    const std::size_t n = graph.size();
    if (mu.size() != n || static_cast<std::size_t>(w.size()) != n || q.size() != n) {
        throw InputError("wco_reduce: masses, weights and measures must cover every vertex");
    }
    for (std::size_t x = 0; x < n; ++x) {
        if (!(mu[x] > 0.0) || !std::isfinite(mu[x])) {
            throw InputError("wco_reduce: vertex masses must be strictly positive");
        }
        if (q[x].grid() != q[0].grid()) {
            throw InputError("wco_reduce: measure of vertex " + std::to_string(x) + " uses a different grid");
        }
    }
    const auto& grid = q[0].grid();
    WcoReport rep;
    rep.cc_residual.assign(n, std::nullopt);
    double lhs_scale = 1.0;
    for (Vertex x = 0; x < n; ++x) {
        rep.q_probability = rep.q_probability && q[x].is_probability();
        lhs_scale = std::max(lhs_scale, mu[x] * grid.back());
        if (graph.is_truncated(x)) {
            continue;
        }
        double r = 0.0;
        for (std::size_t s = 0; s < grid.size(); ++s) {
            double rhs = 0.0;
            for (Vertex y : graph.fiber(x)) {
                rhs += q[y].weight(s) * std::norm(w[static_cast<Eigen::Index>(y)]) * mu[y];
            }
            r = std::max(r, std::abs(mu[x] * grid[s] * q[x].weight(s) - rhs));
        }
        rep.cc_residual[x] = r;
        if (!rep.worst_vertex || r > rep.max_cc_residual) {
            rep.max_cc_residual = r;
            rep.worst_vertex = x;
        }
    }
    const bool cc_ok = rep.max_cc_residual <= tol * lhs_scale;

    if (rep.q_probability) {
        OwcoSpec spec{graph, DiscreteMeasureSpace({Atom{"1", Complex{1.0, 0.0}, 1.0}}), Eigen::MatrixXcd(w), mu, {}};
        Eigen::MatrixXd weights(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.size()));
        for (Vertex x = 0; x < n; ++x) {
            for (std::size_t s = 0; s < grid.size(); ++s) {
                weights(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(s)) = q[x].weight(s);
            }
        }
        const ThetaFamily theta(n, 1, grid, weights);
        rep.certificate = certify_subnormality(spec, theta, tol);
        const OwcoSpec reduced = counting_reduction(spec);
        if (rep.certificate->conditions.condition_b) {
            double r = 0.0;
            for (Vertex x = 0; x < n; ++x) {
                if (graph.is_truncated(x)) {
                    continue;
                }
                for (std::size_t s = 0; s < grid.size(); ++s) {
                    if (theta.weight(x, 0, s) > 0.0) {
                        r = std::max(r, std::abs(g_value(reduced, theta, x, 0, s) - grid[s]));
                    }
                }
            }
            rep.g_equals_t_residual = r;
        }
    }

    if (!cc_ok) {
        rep.verdict = "cc-violated";
    } else if (rep.certificate) {
        rep.verdict = rep.certificate->verdict;
    } else {
        rep.verdict = "cc-holds";
    }
    return rep;
}

} // namespace owco
