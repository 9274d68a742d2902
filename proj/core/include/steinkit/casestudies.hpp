#pragma once

#include "steinkit/compare.hpp"
#include "steinkit/oracle.hpp"

#include <map>
#include <string>
#include <vector>

namespace steinkit {

// One worked end-to-end comparison: a parameter sweep of bound reports, each
// carrying the brute-force reference distance, plus any closed-form reference
// numbers the study reproduces.
struct StudyPoint {
    std::map<std::string, double> params;
    BoundReport report;
};

struct StudyResult {
    std::string study;
    std::vector<StudyPoint> points;
    std::map<std::string, double> reference_values;
};

// Scaled maxima of Pareto samples against the Frechet limit (Kolmogorov).
StudyResult frechet_study(std::int64_t n, double alpha);

// Rescaled maximum of n uniforms against the exponential law; pointwise CDF
// bound at t minimized over the exponent parameter eps in [0, 1].
StudyResult exp_max_uniform_study(std::int64_t n, double t, double eps);

// Shifted exponential maxima against the Gumbel law (Kolmogorov).
StudyResult gumbel_study(std::int64_t n);

// Two centered Gaussians: kernel-based and score-based TV bounds plus the
// exact TV distance; flags which bound is sharper.
StudyResult gauss_gauss_study(double sigma1, double sigma2);

// Student-t against the standard Gaussian in TV (nu > 2).
StudyResult student_gauss_study(double nu);

// Sum of independent Bernoullis against Binomial(n, mean p) in TV, with both
// enumerated-factor bounds. Needs n <= 12.
StudyResult poisson_binomial_study(const std::vector<double>& ps);

// Standardized Rademacher sum against N(0,1) in Wasserstein (n <= 64).
StudyResult rademacher_clt_study(std::int64_t n);

} // namespace steinkit
