#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "imcmc/kernels.hpp"
#include "imcmc/measures.hpp"
#include "imcmc/rng.hpp"

using namespace imcmc;

namespace {

FiniteKernel random_stochastic(const SpacePtr& space, Rng& rng) {
    std::size_t n = space->size();
    std::vector<double> rows(n * n);
    for (std::size_t x = 0; x < n; ++x) {
        double s = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            rows[x * n + y] = 0.01 + rng.next_double();
            s += rows[x * n + y];
        }
        for (std::size_t y = 0; y < n; ++y) rows[x * n + y] /= s;
    }
    return FiniteKernel(space, space, std::move(rows));
}

DiscreteMeasure random_probability(const SpacePtr& space, Rng& rng) {
    std::vector<double> w(space->size());
    double s = 0.0;
    for (double& x : w) {
        x = rng.next_double();
        s += x;
    }
    for (double& x : w) x /= s;
    return DiscreteMeasure(space, std::move(w));
}

}  // namespace

TEST_CASE("total variation on basic pairs") {
    auto s = StateSpace::make(0, {"x", "y", "z"});
    auto dx = DiscreteMeasure::dirac(s, 0);
    CHECK(total_variation(dx, dx) == doctest::Approx(0.0));
    CHECK(total_variation(dx, DiscreteMeasure::dirac(s, 1)) == doctest::Approx(2.0));
    DiscreteMeasure mu(s, {0.5, 0.5, 0.0});
    DiscreteMeasure nu(s, {0.25, 0.25, 0.5});
    CHECK(total_variation(mu, nu) == doctest::Approx(1.0));
}

TEST_CASE("total variation rejects mismatched spaces") {
    auto a = StateSpace::make(0, 3);
    auto b = StateSpace::make(1, 3);
    CHECK_THROWS_AS(total_variation(DiscreteMeasure::uniform(a), DiscreteMeasure::uniform(b)),
                    SpaceMismatchError);
}

TEST_CASE("integrate") {
    auto s = StateSpace::make(0, 2);
    DiscreteMeasure mu(s, {0.25, 0.75});
    std::vector<double> f = {4.0, 0.0};
    CHECK(integrate(mu, f) == doctest::Approx(1.0));
    std::vector<double> ones = {1.0, 1.0};
    CHECK(integrate(mu, ones) == doctest::Approx(1.0));
    CHECK(integrate(DiscreteMeasure::dirac(s, 1), f) == doctest::Approx(0.0));
}

TEST_CASE("dobrushin coefficient basics") {
    auto s = StateSpace::make(0, 3);
    CHECK(dobrushin(FiniteKernel::identity(s)) == doctest::Approx(1.0));
    auto rank1 = FiniteKernel::rank_one(s, DiscreteMeasure(s, {0.2, 0.5, 0.3}));
    CHECK(dobrushin(rank1) == doctest::Approx(0.0));
    auto s2 = StateSpace::make(0, 2);
    FiniteKernel k(s2, s2, {0.9, 0.1, 0.2, 0.8});
    CHECK(dobrushin(k) == doctest::Approx(0.7));
}

TEST_CASE("dobrushin validates stochasticity") {
    auto s2 = StateSpace::make(0, 2);
    FiniteKernel bad(s2, s2, {0.9, 0.6, 0.2, 0.8});
    CHECK_THROWS_AS(dobrushin(bad), InvalidKernelError);
}

TEST_CASE("boltzmann-gibbs") {
    auto s = StateSpace::make(0, 2);
    DiscreteMeasure mu(s, {0.5, 0.5});
    SUBCASE("constant potential is a no-op") {
        auto out = boltzmann_gibbs(mu, std::vector<double>{3.0, 3.0});
        CHECK(out.weights[0] == doctest::Approx(0.5));
        CHECK(out.weights[1] == doctest::Approx(0.5));
    }
    SUBCASE("reweights proportionally") {
        auto out = boltzmann_gibbs(mu, std::vector<double>{1.0, 3.0});
        CHECK(out.weights[0] == doctest::Approx(0.25));
        CHECK(out.weights[1] == doctest::Approx(0.75));
    }
    SUBCASE("zero mass under the potential") {
        DiscreteMeasure point(s, {1.0, 0.0});
        CHECK_THROWS_AS(boltzmann_gibbs(point, std::vector<double>{0.0, 5.0}),
                        DegeneratePotentialError);
    }
    SUBCASE("invariant under scaling of the potential") {
        auto a = boltzmann_gibbs(mu, std::vector<double>{0.3, 1.1});
        auto b = boltzmann_gibbs(mu, std::vector<double>{0.3 * 7.5, 1.1 * 7.5});
        for (std::size_t i = 0; i < 2; ++i) CHECK(a.weights[i] == doctest::Approx(b.weights[i]));
    }
}

TEST_CASE("occupation push counts and variation bound") {
    auto s = StateSpace::make(0, {"a", "b"});
    OccupationMeasure eta(s);
    eta.push(0);
    CHECK(eta.measure().weights[0] == doctest::Approx(1.0));

    eta.push(0);
    eta.push(1);  // states a, a, b
    CHECK(eta.measure().weights[0] == doctest::Approx(2.0 / 3));
    CHECK(eta.measure().weights[1] == doctest::Approx(1.0 / 3));

    // TV between the occupation after [a,a] and after [a,a,b] attains the
    // 2/(n+2) bound with n = 1 (two states seen).
    OccupationMeasure two(s);
    two.push(0);
    two.push(0);
    auto three = occupation_push(two, 1);
    CHECK(total_variation(two.measure(), three.measure()) == doctest::Approx(2.0 / 3));
    CHECK(total_variation(two.measure(), three.measure()) <= 2.0 / (1 + 2) + 1e-15);

    CHECK_THROWS_AS(eta.push(7), SpaceMismatchError);
}

TEST_CASE("occupation variation bound along a random run") {
    auto s = StateSpace::make(0, 4);
    Rng rng(123);
    OccupationMeasure eta(s);
    eta.push(rng.next_index(4));
    for (int n = 0; n < 300; ++n) {
        auto prev = eta.measure();
        eta.push(rng.next_index(4));
        auto cur = eta.measure();
        CHECK(cur.mass() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(total_variation(prev, cur) <= 2.0 / (n + 2) + 1e-12);
    }
}

TEST_CASE("product occupation") {
    auto s = StateSpace::make(0, {"a", "b"});
    SUBCASE("single level is the occupation itself") {
        OccupationMeasure eta(s);
        eta.push(0);
        eta.push(1);
        std::vector<OccupationMeasure> levels = {eta};
        auto joint = product_occupation(levels);
        CHECK(joint.total == 2);
        CHECK(joint.measure().weights[0] == doctest::Approx(0.5));
        CHECK(joint.measure().weights[1] == doctest::Approx(0.5));
    }
    SUBCASE("one sample is a Dirac at the tuple") {
        OccupationMeasure a(s), b(s);
        a.push(1);
        b.push(0);
        std::vector<OccupationMeasure> levels = {a, b};
        auto joint = product_occupation(levels);
        CHECK(joint.total == 1);
        CHECK(joint.measure().weights[1 * 2 + 0] == doctest::Approx(1.0));
    }
    SUBCASE("desync is rejected") {
        OccupationMeasure a(s), b(s);
        a.push(0);
        a.push(0);
        b.push(0);
        std::vector<OccupationMeasure> levels = {a, b};
        CHECK_THROWS_AS(product_occupation(levels), DesyncError);
    }
}

TEST_CASE("product occupation marginals match the per-level occupations") {
    auto s0 = StateSpace::make(0, 2);
    auto s1 = StateSpace::make(1, 3);
    auto s2 = StateSpace::make(2, 2);
    Rng rng(7);
    OccupationMeasure a(s0), b(s1), c(s2);
    for (int i = 0; i < 100; ++i) {
        a.push(rng.next_index(2));
        b.push(rng.next_index(3));
        c.push(rng.next_index(2));
    }
    std::vector<OccupationMeasure> levels = {a, b, c};
    auto joint = product_occupation(levels);
    REQUIRE(joint.total == 100);

    // Marginalize the joint two ways: summing product weights vs the
    // per-level occupation directly.
    std::vector<std::size_t> dims = {2, 3, 2};
    auto jm = joint.measure();
    for (int level = 0; level < 3; ++level) {
        std::vector<double> marginal(dims[level], 0.0);
        for (std::size_t i = 0; i < jm.weights.size(); ++i)
            marginal[product_coords(dims, i)[level]] += jm.weights[i];
        auto direct = levels[level].measure();
        for (std::size_t x = 0; x < dims[level]; ++x)
            CHECK(marginal[x] == doctest::Approx(direct.weights[x]).epsilon(1e-12));
    }
}

TEST_CASE("dobrushin submultiplicativity and contraction over random kernels") {
    auto s = StateSpace::make(0, 5);
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        FiniteKernel k1 = random_stochastic(s, rng);
        FiniteKernel k2 = random_stochastic(s, rng);
        double lhs = dobrushin(FiniteKernel::compose(k1, k2));
        CHECK(lhs <= dobrushin(k1) * dobrushin(k2) + 1e-12);

        DiscreteMeasure mu = random_probability(s, rng);
        DiscreteMeasure nu = random_probability(s, rng);
        double contracted = total_variation(k1.transport(mu), k1.transport(nu));
        CHECK(contracted <= dobrushin(k1) * total_variation(mu, nu) + 1e-12);
    }
}

TEST_CASE("total variation stays within [0,2] on random probability pairs") {
    auto s = StateSpace::make(0, 6);
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        auto mu = random_probability(s, rng);
        auto nu = random_probability(s, rng);
        double tv = total_variation(mu, nu);
        CHECK(tv >= 0.0);
        CHECK(tv <= 2.0);
        CHECK(total_variation(mu, nu) == doctest::Approx(total_variation(nu, mu)));
    }
}
