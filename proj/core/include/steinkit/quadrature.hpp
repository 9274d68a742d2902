#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace steinkit {

using RealFn = std::function<double(double)>;

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0; // estimated
    bool converged = false;
    int panels = 0;
};

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;   // floor for integrals that are genuinely ~0
    int max_panels = 10000;
    // Interior points the integrand is known to be non-smooth at
    // (kinks from absolute values / indicators); panels never straddle them.
    std::vector<double> breakpoints;
};

// Adaptive Gauss(7)/Kronrod(15) integration on [a, b]; either endpoint may be
// +/-infinity (mapped to a finite interval, nodes stay interior so endpoint
// singularities are never evaluated).
QuadResult integrate(const RealFn& f, double a, double b,
                     const QuadOptions& opts = {});

// Convenience: value or throw BudgetError on non-convergence.
double integrate_or_throw(const RealFn& f, double a, double b,
                          const QuadOptions& opts = {});

inline constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace steinkit
