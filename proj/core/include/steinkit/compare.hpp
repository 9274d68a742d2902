#pragma once

#include "steinkit/solve.hpp"

#include <map>
#include <string>
#include <vector>

namespace steinkit {

// A computed upper bound on an integral probability metric between two
// distributions, with its ingredients and (when available) a brute-force
// reference distance for slack reporting.
struct BoundReport {
    double bound = 0.0;
    std::string metric;                       // "tv" | "kolmogorov" | "wasserstein"
    std::string method;                       // how the bound was assembled
    std::map<std::string, double> components; // named ingredients
    std::optional<double> oracle;             // reference distance, if computed
    std::optional<double> slack;              // bound - oracle
};

// d(P1, P2) <= sup_g ||g|| * E_2 |u1 - u2| where u_i are the score functions
// and the factor is taken over the test class with constant fixed f.
BoundReport score_bound(const SteinPair& sp1, const SteinPair& sp2,
                        const TestClass& cls);

// d(P1, P2) <= sup ||g'|| * E_2 |T1^{-1}w - T2^{-1}w| with the factor computed
// for fixed f = T1^{-1}w. w must be centered under both laws (else the pair is
// rejected); by default w = x - mean1.
BoundReport kernel_bound(const SteinPair& sp1, const SteinPair& sp2,
                         const TestClass& cls, const RealFn& omega = nullptr);

// sqrt(E[(1 - tau)^2]) for a unit-target comparison of the kernel to 1.
double stein_discrepancy(const SteinPair& sp);

// Conditional kernel of W = sum_i a_i X_i on its exact support, built by
// dynamic programming over partial sums: tau_W(w) = E[sum a_i^2 tau_i(X_i) | W=w].
struct WeightedSumKernel {
    std::vector<double> points; // support of W, ascending
    std::vector<double> probs;
    std::vector<double> tau;    // tau_W at each point

    double mean() const;
    double variance() const;
    double tau_mean() const;
    double tau_variance() const;
};
WeightedSumKernel sum_kernel(const std::vector<SteinPair>& parts,
                             const std::vector<double>& weights,
                             std::size_t max_states = 10'000'000);

// Wasserstein bound against N(0, var(W)) for a lattice-supported sum:
// sqrt(Var tau_W) + (1 + Var W) * delta, delta the lattice spacing of W.
BoundReport lattice_gauss_bound(const WeightedSumKernel& w, double delta);

// Evaluates E_2[(f1 - f2) g' + g (T1 f1 - T2 f2)] for the solution g of the
// first pair's equation with fixed f1 and datum h, and checks it reproduces
// E_2 h - E_1 h (the two sides agree identically; disagreement beyond 1e-6
// relative is reported as a soundness failure).
struct IdentityEval {
    double value = 0.0;       // the operator-side expectation
    double direct = 0.0;      // E_2 h - E_1 h
    double residual = 0.0;    // |value - direct|
};
IdentityEval general_identity_eval(const SteinPair& sp1, const SteinPair& sp2,
                                   const RealFn& h, const RealFn& f1,
                                   const RealFn& f2);

// E_d |fn| with kink-aware quadrature: sign changes of fn are located on a
// quantile probe grid and passed to the integrator as breakpoints. Loosen
// rel_tol when fn itself carries quadrature noise (nested integration).
double expect_abs(const DensityModel& d, const RealFn& fn,
                  double rel_tol = 1e-10);

} // namespace steinkit
