#include "owco/errors.hpp"
#include "owco/gallery.hpp"
#include "owco/moments.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace owco;

namespace {

MomentSequence seq(std::vector<double> v)
{
    return MomentSequence{std::move(v), "test"};
}

MomentSequence geometric(double c, std::size_t depth)
{
    std::vector<double> v;
    for (std::size_t n = 0; n <= depth; ++n) {
        v.push_back(std::pow(c, static_cast<double>(n)));
    }
    return seq(v);
}

} // namespace

TEST_CASE("owco moments on the k-ary tree")
{
    // k = 3, atom with |w|^2 = 2: a_n = 6^n.
    const Scenario sc = kary_scenario(3, 4, kary_default_atoms());
    const std::size_t valid = sc.spec.graph.validity_depth(0);
    REQUIRE(valid >= 3);
    const MomentSequence a = owco_moments(sc.spec, 0, 2, 3);
    for (std::size_t n = 0; n <= 3; ++n) {
        CHECK(a.values[n] == doctest::Approx(std::pow(6.0, static_cast<double>(n))).epsilon(1e-12));
    }
    CHECK_THROWS_AS(owco_moments(sc.spec, 0, 2, valid + 1), BoundaryError);
}

TEST_CASE("owco moments match a brute-force fiber sum")
{
    oracle::Rng rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const OwcoSpec spec = oracle::random_spec(rng, 9, 2, false);
        for (Vertex x = 0; x < 9; ++x) {
            const MomentSequence a = owco_moments(spec, x, 1, 4);
            for (std::size_t n = 0; n <= 4; ++n) {
                CHECK(a.values[n] == doctest::Approx(oracle::moment(spec, x, 1, n)).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("owco moments need counting measure")
{
    oracle::Rng rng(22);
    const OwcoSpec spec = oracle::random_spec(rng, 4, 1, true);
    CHECK_THROWS_AS(owco_moments(spec, 0, 0, 2), PreconditionError);
}

TEST_CASE("identity operator moments")
{
    const OwcoSpec spec{FunctionalGraph({0, 1}), DiscreteMeasureSpace({Atom{"a", {1.0, 0.0}, 0.5}}),
                        Eigen::MatrixXcd::Ones(2, 1), std::nullopt, {}};
    const MomentSequence a = owco_moments(spec, 1, 0, 5);
    for (double v : a.values) {
        CHECK(v == 1.0);
    }
    const LinearMap c = owco_build(spec);
    BlockVector f(c.domain(), Eigen::VectorXcd::Constant(2, Complex{1.0, 1.0}));
    const MomentSequence b = lambert_moments(c, f, 4);
    for (double v : b.values) {
        CHECK(v == doctest::Approx(2.0)); // 2 vertices * rho 0.5 * |1+i|^2
    }
    const MomentSequence z = lambert_moments(c, BlockVector(c.domain()), 3);
    for (double v : z.values) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("lambert moments match repeated application")
{
    oracle::Rng rng(23);
    const OwcoSpec spec = oracle::random_spec(rng, 8, 3, true);
    const LinearMap c = owco_build(spec);
    Eigen::MatrixXcd f = oracle::random_vector(rng, 8, 3);
    const MomentSequence a = lambert_moments(c, BlockVector(c.domain(), oracle::flatten(f)), 5);
    for (std::size_t n = 0; n <= 5; ++n) {
        CHECK(a.values[n] == doctest::Approx(oracle::norm2(spec, f)).epsilon(1e-12));
        f = oracle::apply(spec, f);
    }
}

TEST_CASE("stieltjes test")
{
    SUBCASE("dirac at 1")
    {
        const StieltjesVerdict v = stieltjes_test(seq(std::vector<double>(7, 1.0)), 1e-9);
        CHECK(v.is_stieltjes);
        CHECK(v.min_eig_h0 >= -1e-12);
        CHECK(v.min_eig_h1 >= -1e-12);
        CHECK_FALSE(v.witness);
    }
    SUBCASE("dirac at 6")
    {
        const StieltjesVerdict v = stieltjes_test(geometric(6.0, 8), 1e-9);
        CHECK(v.is_stieltjes);
        REQUIRE(v.support_bound);
        CHECK(*v.support_bound == doctest::Approx(6.0).epsilon(1e-12));
    }
    SUBCASE("periodic weights 2, 1, 2, 1: a = (1, 2, 2, 8, 8)")
    {
        const StieltjesVerdict v = stieltjes_test(seq({1.0, 2.0, 2.0, 8.0, 8.0}), 1e-9);
        CHECK_FALSE(v.is_stieltjes);
        REQUIRE(v.witness);
        CHECK(v.witness->matrix == "H0");
        CHECK(v.witness->order == 2);
        CHECK(v.witness->determinant == doctest::Approx(1.0 * 2.0 - 2.0 * 2.0));
    }
    SUBCASE("factorials are Stieltjes")
    {
        std::vector<double> f{1.0};
        for (int n = 1; n <= 7; ++n) {
            f.push_back(f.back() * n);
        }
        CHECK(stieltjes_test(seq(f), 1e-9).is_stieltjes);
    }
    SUBCASE("negative a_0 and empty input")
    {
        CHECK_THROWS_AS(stieltjes_test(seq({}), 1e-9), InputError);
        CHECK_THROWS_AS(stieltjes_test(seq({-1.0, 0.0}), 1e-9), InputError);
    }
}

TEST_CASE("support bound")
{
    SUBCASE("geometric")
    {
        CHECK(*support_bound(geometric(3.0, 6)) == doctest::Approx(3.0).epsilon(1e-14));
        CHECK_FALSE(support_bound_detail(geometric(3.0, 6)).growing);
    }
    SUBCASE("factorials up to N = 6")
    {
        std::vector<double> f{1.0};
        for (int n = 1; n <= 6; ++n) {
            f.push_back(f.back() * n);
        }
        const SupportBound b = support_bound_detail(seq(f));
        REQUIRE(b.r);
        CHECK(*b.r == doctest::Approx(std::sqrt(30.0)).epsilon(1e-14));
        CHECK(b.growing);
    }
    SUBCASE("zero tail")
    {
        CHECK(*support_bound(seq({1.0, 0.0, 0.0, 0.0})) == 0.0);
    }
}

TEST_CASE("atomic measure recovery")
{
    SUBCASE("single atom")
    {
        const GridMeasure m = recover_atomic_measure(geometric(2.5, 6), 1e-9);
        REQUIRE(m.size() == 1);
        CHECK(m.point(0) == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(m.weight(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.is_probability());
    }
    SUBCASE("k|w|^2 with k = 2, |w|^2 = 3")
    {
        const GridMeasure m = recover_atomic_measure(geometric(6.0, 6), 1e-9);
        REQUIRE(m.size() == 1);
        CHECK(std::abs(m.point(0) - 6.0) <= 1e-9);
    }
    SUBCASE("half delta_1 plus half delta_4")
    {
        const auto a = oracle::measure_moments({1.0, 4.0}, {0.5, 0.5}, 6);
        CHECK(a[1] == 2.5);
        CHECK(a[2] == 8.5);
        CHECK(a[3] == 32.5);
        CHECK(a[4] == 128.5);
        const GridMeasure m = recover_atomic_measure(seq(a), 1e-9);
        REQUIRE(m.size() == 2);
        CHECK(std::abs(m.point(0) - 1.0) <= 1e-9);
        CHECK(std::abs(m.point(1) - 4.0) <= 1e-9);
        CHECK(std::abs(m.weight(0) - 0.5) <= 1e-9);
        CHECK(std::abs(m.weight(1) - 0.5) <= 1e-9);
    }
    SUBCASE("finite mass keeps its total")
    {
        const auto a = oracle::measure_moments({2.0}, {3.0}, 4);
        const GridMeasure m = recover_atomic_measure(seq(a), 1e-9);
        CHECK_FALSE(m.is_probability());
        CHECK(m.total_mass() == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("non-Stieltjes input is refused")
    {
        CHECK_THROWS_AS(recover_atomic_measure(seq({1.0, 2.0, 2.0, 4.0, 4.0}), 1e-9), NotStieltjesError);
    }
}
