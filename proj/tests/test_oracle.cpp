#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "steinkit/errors.hpp"
#include "steinkit/oracle.hpp"

#include "test_helpers.hpp"

#include <cmath>

using namespace steinkit;
using namespace steinkit::testing;

TEST_CASE("total variation: exact lattice and quadrature values") {
    CHECK(tv_distance(make_bernoulli(0.5), make_bernoulli(0.6)).value ==
          doctest::Approx(0.1).epsilon(1e-14));
    CHECK(tv_distance(make_gaussian(0.0, 1.0), make_gaussian(0.0, 1.0)).value ==
          doctest::Approx(0.0).scale(1.0));

    // closed form from the density crossing points x* = +-c:
    // p1 = N(0,1), p2 = N(0,s^2) cross where x^2 = 2 s^2 log(s)/(s^2-1)
    const double s = 2.0;
    const double c =
        std::sqrt(2.0 * s * s * std::log(s) / (s * s - 1.0));
    auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    const double closed =
        (Phi(c) - Phi(c / s)) - (Phi(-c) - Phi(-c / s));
    DistanceResult r = tv_distance(make_gaussian(0.0, 1.0),
                                   make_gaussian(0.0, 4.0));
    CHECK(r.value == doctest::Approx(closed).epsilon(1e-8));
    CHECK(r.value < 1.5); // dominated by the kernel comparison bound
    CHECK(r.method == "quadrature");
}

TEST_CASE("total variation of mutually singular laws is 1 with a warning") {
    DistanceResult r =
        tv_distance(make_poisson(2.0), make_gaussian(2.0, 2.0));
    CHECK(r.value == 1.0);
    CHECK_FALSE(r.note.empty());
}

TEST_CASE("kolmogorov distance: grid + refinement, exact for lattices") {
    CHECK(kolmogorov_distance(make_gumbel(), make_gumbel()).value ==
          doctest::Approx(0.0).scale(1.0));
    // two point masses: sup gap is 1 on the in-between interval
    DistanceResult pm = kolmogorov_distance(make_table(0.0, 1.0, {1.0}),
                                            make_table(3.0, 1.0, {1.0}));
    CHECK(pm.value == doctest::Approx(1.0));
    // shifted Gaussians: sup at the midpoint, 2 Phi(d/2) - 1
    const double d = 1.0;
    DistanceResult g = kolmogorov_distance(make_gaussian(0.0, 1.0),
                                           make_gaussian(d, 1.0));
    CHECK(g.value == doctest::Approx(std::erf(d / (2.0 * std::sqrt(2.0))))
                         .epsilon(1e-9));
}

TEST_CASE("wasserstein distance: translation, steps, mixed support") {
    CHECK(wasserstein_distance(make_table(0.0, 1.0, {1.0}),
                               make_table(-2.5, 1.0, {1.0}))
              .value == doctest::Approx(2.5));
    // translation invariance for continuous laws
    DistanceResult g = wasserstein_distance(make_gaussian(0.0, 1.0),
                                            make_gaussian(0.75, 1.0));
    CHECK(g.value == doctest::Approx(0.75).epsilon(1e-8));
    // mixed lattice/continuous: Rademacher vs N(0,1) has a closed value
    // int |F1-F2| = 2 int_0^1 (Phi(x) - 1/2) dx + 2 int_1^inf (1 - Phi(x)) dx
    auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    QuadResult a = integrate([&](double x) { return Phi(x) - 0.5; }, 0.0, 1.0);
    QuadResult b = integrate([&](double x) { return 1.0 - Phi(x); }, 1.0, kInf);
    DistanceResult m =
        wasserstein_distance(make_rademacher(), make_gaussian(0.0, 1.0));
    CHECK(m.value ==
          doctest::Approx(2.0 * (a.value + b.value)).epsilon(1e-9));
}

TEST_CASE("metric axioms on built-in triples") {
    using Fn = DistanceResult (*)(const DensityModel&, const DensityModel&);
    const Fn metrics[] = {tv_distance, kolmogorov_distance,
                          wasserstein_distance};
    std::vector<DensityModel> tri = {make_gaussian(0.0, 1.0),
                                     make_gaussian(0.5, 2.0),
                                     make_gaussian(-1.0, 1.0)};
    for (Fn m : metrics) {
        DistanceResult ab = m(tri[0], tri[1]);
        DistanceResult ba = m(tri[1], tri[0]);
        DistanceResult bc = m(tri[1], tri[2]);
        DistanceResult ac = m(tri[0], tri[2]);
        CHECK(ab.value == doctest::Approx(ba.value).epsilon(1e-8));
        CHECK(ac.value <= ab.value + bc.value +
                              2.0 * (ab.error_estimate + bc.error_estimate +
                                     ac.error_estimate) +
                              1e-9);
    }
}

TEST_CASE("characterization check is zero exactly at the target") {
    SteinPair b = make_stein_pair(make_binomial(2, 0.5));
    CHECK(characterization_check(b, make_binomial(2, 0.5)) < 1e-12);
    CHECK(characterization_check(b, make_binomial(2, 0.6)) > 1e-3);

    // truncated Poisson(1) on {0..5}, perturbed at two support points
    std::vector<double> pmf(6);
    double z = 0.0;
    for (int k = 0; k <= 5; ++k) {
        pmf[k] = std::exp(-1.0) / std::tgamma(k + 1.0);
        z += pmf[k];
    }
    for (double& p : pmf) p /= z;
    DensityModel target = make_table(0.0, 1.0, pmf);
    SteinPair sp = make_stein_pair(target);
    CHECK(characterization_check(sp, target) < 1e-12);
    std::vector<double> bad = pmf;
    bad[0] += 0.01;
    bad[1] -= 0.01;
    CHECK(characterization_check(sp, make_table(0.0, 1.0, bad)) > 1e-4);
}

TEST_CASE("characterization check input validation") {
    SteinPair b = make_stein_pair(make_binomial(3, 0.5));
    CHECK_THROWS_AS(characterization_check(b, make_binomial(4, 0.5)),
                    IncompatibilityError);
    CHECK_THROWS_AS(characterization_check(b, make_gaussian(0.0, 1.0)),
                    IncompatibilityError);
    SteinPair p = make_stein_pair(make_poisson(1.0));
    CHECK_THROWS_AS(characterization_check(p, make_poisson(1.0)),
                    IncompatibilityError); // infinite support
}

TEST_CASE("characterization is positive-definite under random perturbations") {
    Lcg rng(20240817);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 3 + int(rng.next() % 7); // support size 3..9
        std::vector<double> pmf(m);
        double z = 0.0;
        for (double& p : pmf) { p = 0.05 + rng.uniform(); z += p; }
        for (double& p : pmf) p /= z;
        DensityModel target = make_table(0.0, 1.0, pmf);
        SteinPair sp = make_stein_pair(target);

        const bool perturb = trial % 2 == 1;
        std::vector<double> q = pmf;
        if (perturb) {
            const int i = int(rng.next() % m);
            int j = int(rng.next() % m);
            if (j == i) j = (i + 1) % m;
            const double eps = 0.02 * (0.5 + rng.uniform());
            q[i] += eps;
            q[j] -= eps;
            if (q[j] <= 0.0) { q[j] += eps; q[i] -= eps; continue; }
        }
        const double r = characterization_check(sp, make_table(0.0, 1.0, q));
        if (perturb)
            CHECK(r > 1e-10);
        else
            CHECK(r < 1e-10);
    }
}
