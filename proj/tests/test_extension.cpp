#include "owco/errors.hpp"
#include "owco/extension.hpp"
#include "owco/gallery.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>

using namespace owco;

namespace {

std::size_t grid_index(const ThetaFamily& theta, double t)
{
    for (std::size_t s = 0; s < theta.grid_size(); ++s) {
        if (std::abs(theta.grid()[s] - t) <= 1e-12 * std::max(1.0, t)) {
            return s;
        }
    }
    FAIL("grid point not found");
    return 0;
}

// Root theta at atom w becomes (1 - eps) at its dirac and eps at grid point `to`.
ThetaFamily perturb_root(const ThetaFamily& theta, std::size_t w, std::size_t from, std::size_t to, double eps)
{
    Eigen::MatrixXd weights = theta.weights();
    const auto row = static_cast<Eigen::Index>(0 * theta.atoms() + w);
    weights(row, static_cast<Eigen::Index>(from)) = 1.0 - eps;
    weights(row, static_cast<Eigen::Index>(to)) = eps;
    return ThetaFamily(theta.vertices(), theta.atoms(), theta.grid(), weights);
}

} // namespace

TEST_CASE("absolute continuity condition")
{
    SUBCASE("vanishing weights satisfy it vacuously")
    {
        const OwcoSpec spec{FunctionalGraph({0, 0}), DiscreteMeasureSpace({Atom{"a", {1.0, 0.0}, 1.0}}),
                            Eigen::MatrixXcd::Zero(2, 1), std::nullopt, {}};
        Eigen::MatrixXd w(2, 2);
        w << 1.0, 0.0, 0.0, 1.0;
        CHECK(check_conditions(spec, ThetaFamily(2, 1, {1.0, 2.0}, w)).condition_b);
    }
    SUBCASE("an atom missing at the image is reported")
    {
        const OwcoSpec spec{FunctionalGraph({0, 0}), DiscreteMeasureSpace({Atom{"a", {1.0, 0.0}, 1.0}}),
                            Eigen::MatrixXcd::Ones(2, 1), std::nullopt, {}};
        Eigen::MatrixXd w(2, 2);
        w << 1.0, 0.0, 0.5, 0.5;
        const ConditionsReport r = check_conditions(spec, ThetaFamily(2, 1, {1.0, 2.0}, w));
        CHECK_FALSE(r.condition_b);
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].x == 1);
        CHECK(r.violations[0].s == 1);
        CHECK_THROWS_AS(compute_G(spec, ThetaFamily(2, 1, {1.0, 2.0}, w)), PreconditionError);
    }
}

TEST_CASE("theta rows must be probability vectors")
{
    Eigen::MatrixXd w(1, 2);
    w << 0.6, 0.3;
    CHECK_THROWS_AS(ThetaFamily(1, 1, {1.0, 2.0}, w), InputError);
}

TEST_CASE("G table")
{
    SUBCASE("matches the definition on random instances")
    {
        oracle::Rng rng(31);
        for (int trial = 0; trial < 6; ++trial) {
            const auto inst = oracle::random_general(rng, 8, 2, 3);
            const GTable g = compute_G(inst.spec, inst.theta);
            for (Vertex x = 0; x < 8; ++x) {
                for (std::size_t w = 0; w < 2; ++w) {
                    for (std::size_t s = 0; s < 3; ++s) {
                        CHECK(g.is_null(x, w, s) == (inst.theta.weight(x, w, s) == 0.0));
                        if (!g.is_null(x, w, s)) {
                            CHECK(g.at(x, w, s) ==
                                  doctest::Approx(oracle::g_value(inst.spec, inst.theta, x, w, s)).epsilon(1e-13));
                        }
                    }
                }
            }
        }
    }
    SUBCASE("a leaf has G = 0")
    {
        const OwcoSpec spec{FunctionalGraph({0, 0}), DiscreteMeasureSpace({Atom{"a", {1.0, 0.0}, 1.0}}),
                            Eigen::MatrixXcd::Ones(2, 1), std::nullopt, {}};
        const GTable g = compute_G(spec, ThetaFamily::constant(2, 1, GridMeasure({1.0, 2.0}, {0.5, 0.5})));
        CHECK(g.at(1, 0, 0) == 0.0);
        CHECK(g.at(1, 0, 1) == 0.0);
        CHECK(g.at(0, 0, 0) == doctest::Approx(2.0));
    }
    SUBCASE("k-ary tree: G = k|w|^2 on interior atoms")
    {
        const Scenario sc = kary_scenario(3, 4, kary_default_atoms());
        const GTable g = compute_G(sc.spec, *sc.theta);
        for (Vertex x = 0; x < sc.spec.graph.size(); ++x) {
            if (sc.spec.graph.is_truncated(x)) {
                continue;
            }
            for (std::size_t w = 0; w < 3; ++w) {
                const double want = 3.0 * std::norm(sc.spec.base.atom(w).value);
                for (std::size_t s = 0; s < g.grid; ++s) {
                    if (!g.is_null(x, w, s)) {
                        CHECK(g.at(x, w, s) == doctest::Approx(want).epsilon(1e-14));
                    }
                }
            }
        }
    }
}

TEST_CASE("consistency check")
{
    SUBCASE("k-ary tree")
    {
        const Scenario sc = kary_scenario(3, 4, kary_default_atoms());
        const ConsistencyReport r = consistency_check(sc.spec, *sc.theta, compute_G(sc.spec, *sc.theta), 1e-12);
        CHECK(r.passes);
        CHECK(r.residual == 0.0);
        CHECK(r.skipped_vertices > 0);
    }
    SUBCASE("shift with the recursion family has G = t")
    {
        const Scenario sc = make_gallery("shift");
        const GTable g = compute_G(sc.spec, *sc.theta);
        const ConsistencyReport r = consistency_check(sc.spec, *sc.theta, g, 1e-9);
        CHECK(r.residual <= 1e-10);
        for (Vertex x = 0; x < sc.spec.graph.size(); ++x) {
            if (sc.spec.graph.is_truncated(x) || sc.spec.graph.fiber(x).empty()) {
                continue;
            }
            for (std::size_t s = 0; s < g.grid; ++s) {
                if (!g.is_null(x, 0, s)) {
                    CHECK(std::abs(g.at(x, 0, s) - sc.theta->grid()[s]) <= 1e-9);
                }
            }
        }
    }
    SUBCASE("perturbed root measure on the k-ary tree")
    {
        // Atom w2 has |w| = 1, so G = 3 at the dirac t = 3. Moving eps of the
        // root's mass to t = 1.5 changes only G_root(3) = (3 - eps) / (1 - eps);
        // the children still see G = 3, so the residual is 2 eps / (1 - eps).
        const Scenario sc = kary_scenario(3, 4, kary_default_atoms());
        const double eps = 1e-3;
        const ThetaFamily theta =
            perturb_root(*sc.theta, 1, grid_index(*sc.theta, 3.0), grid_index(*sc.theta, 1.5), eps);
        const ConsistencyReport r = consistency_check(sc.spec, theta, compute_G(sc.spec, theta), 1e-12);
        CHECK_FALSE(r.passes);
        CHECK(r.residual == doctest::Approx(2.0 * eps / (1.0 - eps)).epsilon(1e-12));
        REQUIRE(r.worst);
        CHECK(sc.spec.graph.phi(r.worst->x) == 0);
    }
}

TEST_CASE("extension with a single grid point is the operator itself")
{
    oracle::Rng rng(32);
    const OwcoSpec spec = oracle::random_spec(rng, 5, 2, false);
    const Extension ext = build_extension(spec, ThetaFamily::constant(5, 2, GridMeasure::dirac(1.0)));
    CHECK((ext.c_hat.dense() - ext.c.dense()).norm() == 0.0);
    CHECK((ext.q.dense() - Eigen::MatrixXcd::Identity(10, 10)).norm() == 0.0);
}

TEST_CASE("C_hat* C_hat = M_G")
{
    SUBCASE("vanishing weights")
    {
        const OwcoSpec spec{FunctionalGraph({1, 0}), DiscreteMeasureSpace({Atom{"a", {1.0, 0.0}, 1.0}}),
                            Eigen::MatrixXcd::Zero(2, 1), std::nullopt, {}};
        const ThetaFamily theta = ThetaFamily::constant(2, 1, GridMeasure({1.0, 2.0}, {0.5, 0.5}));
        const Extension ext = build_extension(spec, theta);
        CHECK(verify_CstarC(ext, compute_G(spec, theta)) == 0.0);
    }
    SUBCASE("k-ary tree")
    {
        const Scenario sc = kary_scenario(3, 4, kary_default_atoms());
        const Extension ext = build_extension(sc.spec, *sc.theta);
        CHECK(verify_CstarC(ext, compute_G(sc.spec, *sc.theta)) <= 1e-12);
    }
    SUBCASE("random instances against dense matrices")
    {
        oracle::Rng rng(33);
        for (int trial = 0; trial < 6; ++trial) {
            const auto inst = oracle::random_general(rng, 7, 2, 3);
            const Extension ext = build_extension(inst.spec, inst.theta);
            const GTable g = compute_G(inst.spec, inst.theta);
            CHECK(verify_CstarC(ext, g) <= 1e-12);

            // Isometric coordinates on the non-null atoms of the extension space.
            std::vector<Eigen::Index> keep;
            for (std::size_t i = 0; i < ext.hat_space->dim(); ++i) {
                if (!ext.hat_space->is_null(i)) {
                    keep.push_back(static_cast<Eigen::Index>(i));
                }
            }
            const auto k = static_cast<Eigen::Index>(keep.size());
            const Eigen::MatrixXcd full = ext.c_hat.dense();
            Eigen::MatrixXcd a(k, k);
            Eigen::MatrixXcd mg = Eigen::MatrixXcd::Zero(k, k);
            for (Eigen::Index r = 0; r < k; ++r) {
                for (Eigen::Index c = 0; c < k; ++c) {
                    a(r, c) = full(keep[r], keep[c]) *
                              std::sqrt(ext.hat_space->mass(static_cast<std::size_t>(keep[r])) /
                                        ext.hat_space->mass(static_cast<std::size_t>(keep[c])));
                }
                const auto i = static_cast<std::size_t>(keep[r]);
                const std::size_t x = i / (2 * 3);
                const std::size_t w = (i % 6) / 3;
                const std::size_t s = i % 3;
                mg(r, r) = oracle::g_value(inst.spec, inst.theta, x, w, s);
            }
            const Eigen::MatrixXcd diff = a.adjoint() * a - mg;
            CHECK(Eigen::JacobiSVD<Eigen::MatrixXcd>(diff).singularValues()[0] <= 1e-12);
        }
    }
}

TEST_CASE("certify subnormality")
{
    SUBCASE("k-ary trees")
    {
        for (std::size_t k = 1; k <= 4; ++k) {
            const Scenario sc = kary_scenario(k, 3, kary_default_atoms());
            const SubnormalityCertificate c = certify_subnormality(sc.spec, *sc.theta, 1e-9);
            CHECK(c.verdict == "certified-subnormal");
            CHECK(*c.extension_defect <= 1e-10);
            CHECK(*c.cstar_c_residual <= 1e-10);
            CHECK(*c.embedding_residual <= 1e-10);
            CHECK(*c.isometry_residual <= 1e-10);
            CHECK(*c.commutator_residual <= 1e-10);
            CHECK(*c.polar_quasinormal);
            CHECK(*c.second_route_quasinormal);
        }
    }
    SUBCASE("branching loop")
    {
        const Scenario sc = make_gallery("branching_loop");
        CHECK(certify_subnormality(sc.spec, *sc.theta, 1e-9).verdict == "certified-subnormal");
    }
    SUBCASE("perturbed k-ary tree is refuted")
    {
        const Scenario sc = kary_scenario(3, 4, kary_default_atoms());
        const ThetaFamily theta =
            perturb_root(*sc.theta, 1, grid_index(*sc.theta, 3.0), grid_index(*sc.theta, 1.5), 1e-3);
        const SubnormalityCertificate c = certify_subnormality(sc.spec, theta, 1e-9);
        CHECK(c.verdict == "refuted-hypotheses");
        CHECK(c.consistency->residual > 0.0);
        CHECK(*c.extension_defect > c.cascade.defect);
    }
    SUBCASE("vertex masses are folded in")
    {
        oracle::Rng rng(34);
        auto inst = oracle::random_consistent(rng, 6, 1, 2);
        // Masses constant along cycles keep the reduced weights consistent.
        std::vector<double> mu(6, 1.0);
        for (Vertex x = 0; x < 6; ++x) {
            mu[x] = oracle::on_cycle(inst.spec.graph.map(), x) ? 2.0 : 0.5;
        }
        inst.spec.vertex_mass = mu;
        const SubnormalityCertificate c = certify_subnormality(inst.spec, inst.theta, 1e-9);
        CHECK(c.counting_reduced);
        CHECK(c.verdict == "certified-subnormal");
    }
    SUBCASE("absolute continuity failure")
    {
        const OwcoSpec spec{FunctionalGraph({0, 0}), DiscreteMeasureSpace({Atom{"a", {1.0, 0.0}, 1.0}}),
                            Eigen::MatrixXcd::Ones(2, 1), std::nullopt, {}};
        Eigen::MatrixXd w(2, 2);
        w << 1.0, 0.0, 0.5, 0.5;
        const auto c = certify_subnormality(spec, ThetaFamily(2, 1, {1.0, 2.0}, w), 1e-9);
        CHECK(c.verdict == "refuted-hypotheses");
        CHECK_FALSE(c.conditions.condition_b);
    }
}

TEST_CASE("necessity extraction")
{
    SUBCASE("identity operator")
    {
        const OwcoSpec spec{FunctionalGraph({0, 1, 2}), DiscreteMeasureSpace({Atom{"a", {1.0, 0.0}, 1.0}}),
                            Eigen::MatrixXcd::Ones(3, 1), std::nullopt, {}};
        const NecessityReport r = necessity_extract(spec, 6, 1e-9);
        CHECK(r.verdict == "necessary-conditions-hold");
        for (const auto& e : r.entries) {
            CHECK(e.status == "recovered");
            REQUIRE(e.atoms.size() == 1);
            CHECK(e.atoms[0] == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(r.recurrence_residual <= 1e-10);
    }
    SUBCASE("k-ary tree, k = 2, |w|^2 = 3")
    {
        const Scenario sc = kary_scenario(2, 5, {Atom{"w", {std::sqrt(3.0), 0.0}, 1.0}});
        const NecessityReport r = necessity_extract(sc.spec, 4, 1e-9);
        CHECK(r.verdict == "necessary-conditions-hold");
        std::size_t recovered = 0;
        for (const auto& e : r.entries) {
            if (e.status == "recovered") {
                ++recovered;
                REQUIRE(e.atoms.size() == 1);
                CHECK(std::abs(e.atoms[0] - 6.0) <= 1e-9);
                CHECK(std::abs(e.weights[0] - 1.0) <= 1e-10);
            }
        }
        CHECK(recovered > 0);
        CHECK(r.recurrence_residual <= 1e-10);
        CHECK(r.g_step_residual <= 1e-8);
    }
    SUBCASE("periodic shift is not subnormal")
    {
        const Scenario sc = make_gallery("shift", {{"weights", "periodic"}});
        const NecessityReport r = necessity_extract(sc.spec, sc.depth, 1e-9);
        CHECK(r.verdict == "not-subnormal");
        REQUIRE(r.witness);
        CHECK(r.witness->x == 0);
        REQUIRE(r.witness->verdict);
        REQUIRE(r.witness->verdict->witness);
        CHECK(r.witness->verdict->witness->order == 2);
    }
}

TEST_CASE("scalar weighted composition reduction")
{
    const auto as_q = [](const Scenario& sc) {
        std::vector<GridMeasure> q;
        for (Vertex x = 0; x < sc.spec.graph.size(); ++x) {
            q.push_back(sc.theta->measure(x, 0));
        }
        return q;
    };
    const auto masses = [](const Scenario& sc) {
        std::vector<double> mu;
        for (Vertex x = 0; x < sc.spec.graph.size(); ++x) {
            mu.push_back(sc.spec.vertex_mass_of(x));
        }
        return mu;
    };
    SUBCASE("identity with Q = delta_1")
    {
        const Scenario sc = make_gallery("wco_identity");
        const WcoReport r = wco_reduce(sc.spec.graph, masses(sc), sc.spec.lambda.col(0), as_q(sc), 1e-9);
        CHECK(r.max_cc_residual == 0.0);
        CHECK(r.verdict == "certified-subnormal");
    }
    SUBCASE("sqrt n shift")
    {
        const Scenario sc = make_gallery("wco_shift");
        const WcoReport r = wco_reduce(sc.spec.graph, masses(sc), sc.spec.lambda.col(0), as_q(sc), 1e-9);
        CHECK(r.max_cc_residual <= 1e-9);
        CHECK(r.verdict == "certified-subnormal");
        REQUIRE(r.g_equals_t_residual);
        CHECK(*r.g_equals_t_residual <= 1e-9);
    }
    SUBCASE("scaled Q at the frontier shows up at its image")
    {
        const Scenario sc = make_gallery("wco_shift");
        auto q = as_q(sc);
        const Vertex y = sc.spec.graph.size() - 1;
        REQUIRE(sc.spec.graph.is_truncated(y));
        std::vector<double> scaled = q[y].weights();
        for (double& v : scaled) {
            v *= 1.3;
        }
        q[y] = GridMeasure(q[y].grid(), scaled, GridMeasure::Kind::finite);
        const WcoReport r = wco_reduce(sc.spec.graph, masses(sc), sc.spec.lambda.col(0), q, 1e-9);
        CHECK(r.verdict == "cc-violated");
        REQUIRE(r.worst_vertex);
        CHECK(*r.worst_vertex == sc.spec.graph.phi(y));
        CHECK_FALSE(r.certificate);
        for (Vertex x = 0; x < sc.spec.graph.size(); ++x) {
            if (x != sc.spec.graph.phi(y) && r.cc_residual[x]) {
                CHECK(*r.cc_residual[x] <= 1e-9);
            }
        }
    }
}
