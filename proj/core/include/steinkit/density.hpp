#pragma once

#include "steinkit/expression.hpp"
#include "steinkit/quadrature.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace steinkit {

struct SupportInterval {
    double lower = -kInf;
    double upper = kInf;
    bool lower_closed = false;
    bool upper_closed = false;

    bool contains(double x) const {
        if (x < lower || x > upper) return false;
        if (x == lower && !lower_closed) return false;
        if (x == upper && !upper_closed) return false;
        return true;
    }
    double width() const { return upper - lower; }
};

inline constexpr std::int64_t kInfIndex = INT64_MAX;

struct LatticeSpec {
    double origin = 0.0;
    double spacing = 1.0;
    std::int64_t k_lo = 0;
    std::int64_t k_hi = 0; // kInfIndex for an unbounded upper tail

    double point(std::int64_t k) const { return origin + spacing * double(k); }
    bool infinite() const { return k_hi == kInfIndex; }
    // Index of the largest lattice point strictly below x (may be < k_lo).
    std::int64_t index_below(double x) const;
};

enum class DensityKind { Continuous, Lattice };

class DensityModel {
  public:
    DensityKind kind() const;
    const SupportInterval& support() const;
    const LatticeSpec& lattice() const; // throws unless lattice kind
    const std::string& family() const;
    const std::map<std::string, double>& params() const;

    // Continuous: density. Lattice: pmf at a support point (0 elsewhere).
    double pdf(double x) const;
    double pmf_by_index(std::int64_t k) const; // lattice only

    // Exact when the family ships a closed form, otherwise cumulative
    // quadrature / summation from the lower endpoint.
    double cdf(double x) const;
    bool has_closed_cdf() const;

    // d/dx log p(x), when the family ships it (continuous built-ins).
    std::optional<double> log_pdf_derivative(double x) const;

    double mean() const;     // lazy, cached
    double variance() const; // lazy, cached

    // Smallest x with cdf(x) >= q (bisection against cdf for continuous,
    // index walk for lattice).
    double quantile(double q) const;

    bool valid() const { return impl_ != nullptr; }

    struct Impl;
    explicit DensityModel(std::shared_ptr<const Impl> impl)
        : impl_(std::move(impl)) {}
    DensityModel() = default;
    const Impl& impl() const { return *impl_; }

  private:
    std::shared_ptr<const Impl> impl_;
};

// --- built-in families -----------------------------------------------------

DensityModel make_gaussian(double mu, double sigma2);
DensityModel make_exponential(double lambda);
DensityModel make_gamma(double alpha, double beta_scale);
DensityModel make_beta(double alpha, double beta);
DensityModel make_student(double nu);
DensityModel make_frechet(double alpha);
DensityModel make_gumbel();
DensityModel make_pareto(double alpha);
DensityModel make_uniform01();

DensityModel make_bernoulli(double p);
DensityModel make_binomial(std::int64_t n, double p);
DensityModel make_poisson(double lambda);
DensityModel make_poisson_binomial(const std::vector<double>& ps);
DensityModel make_rademacher();
DensityModel make_table(double origin, double spacing,
                        const std::vector<double>& pmf);

// Custom continuous density from closed-form callables; pdf must already be
// normalized. cdf/log-derivative/moments are optional (nullptr / NaN = absent).
struct CustomContinuous {
    std::string name = "custom";
    SupportInterval support;
    RealFn pdf;
    RealFn cdf;            // optional
    RealFn log_pdf_deriv;  // optional
    std::optional<double> mean;
    std::optional<double> variance;
};
DensityModel make_custom_continuous(CustomContinuous spec);

// User expression density; the normalizing constant is computed by quadrature
// (rejects non-normalizable formulas).
ExpressionAst parse_density_expression(const std::string& text,
                                       const SupportInterval& support);
DensityModel make_expression_density(const std::string& formula,
                                     const SupportInterval& support);

// JSON density schema:
//   {"family": "<name>", "params": {...}}
//   {"family": "table", "lattice": {"origin":o, "spacing":s}, "pmf": [...]}
//   {"family": "expr", "formula": "...", "support": [a, b]}
DensityModel density_from_json(const std::string& json_text);

// --- expectation engine ----------------------------------------------------

// E_d[h(X)]; continuous via adaptive quadrature at rel_tol, lattice via exact
// summation truncated when the remaining tail mass falls below 1e-12.
// Throws BudgetError on non-convergence (integrability failure).
double expect(const DensityModel& d, const RealFn& h, double rel_tol = 1e-10,
              const std::vector<double>& breakpoints = {});

double cdf_of(const DensityModel& d, double x);

} // namespace steinkit
