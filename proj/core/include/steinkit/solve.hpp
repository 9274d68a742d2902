#pragma once

#include "steinkit/operators.hpp"

#include <optional>
#include <vector>

namespace steinkit {

// Test-function classes generating the usual integral probability metrics:
// TV (all Borel h with values in [0,1]), Kolmogorov (half-line indicators),
// Lipschitz(1) (Wasserstein).
enum class TestKind { TV, Kolmogorov, Lipschitz };

struct TestClass {
    TestKind kind = TestKind::TV;
    std::optional<double> z; // Kolmogorov threshold when solving for one h
};

// (f, g) with f(x) g(x + l) = T^{-1}(h - E h).
struct SolutionPair {
    RealFn f;
    RealFn g;
    RealFn product;
    RealFn h;
    std::vector<double> kinks; // locations where h jumps (kept exact)
};

struct SolveSplit {
    RealFn fixed_f; // exactly one of the two must be set
    RealFn fixed_g;
};

SolutionPair solve(const SteinPair& sp, const RealFn& h, const SolveSplit& split);

// Kink-exact solution for h = indicator(z1 < x <= z2); uses the CDF closed
// form so sup-norm searches never smear the jump. z1 may be -inf.
SolutionPair solve_interval_indicator(const SteinPair& sp, double z1, double z2,
                                      const SolveSplit& split);

// T^{-1}(h - Eh)(x) for the interval indicator, via CDF values only.
double inverse_interval_indicator(const SteinPair& sp, double z1, double z2,
                                  double x);

enum class FactorMethod { Analytic, Grid };

// Sup-norm bounds on the Stein-equation solution g and its derivatives
// over the test class. Grid estimates are lower bounds of the true sup and
// are flagged as such via `method`.
struct SteinFactors {
    std::optional<double> sup_g;
    std::optional<double> sup_dg;
    std::optional<double> sup_d2g;
    FactorMethod method = FactorMethod::Grid;
};

SteinFactors stein_factors(const SteinPair& sp, const TestClass& cls,
                           const RealFn& fixed_f, bool force_grid = false);

// Bounded solution of the extreme-value equation
// x^(a+1) f'(x) + a f(x) = indicator(x <= z) - exp(-z^-a):
// f_z(x) = (1/a) (Phi_a(min(x,z)) / Phi_a(x) - Phi_a(z)),
// Phi_a(x) = exp(-x^-a). Satisfies 0 <= a f_z <= 1 and f_z -> 0 at infinity.
RealFn frechet_solution(double alpha, double z);

} // namespace steinkit
