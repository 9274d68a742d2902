#pragma once

#include "steinkit/density.hpp"

#include <functional>
#include <optional>

namespace steinkit {

// The linear operator D and its adjoint pairing, per kind:
//   Derivative:         Df = f',            D*g = g',              shift l = 0
//   ForwardDifference:  Df(x)=f(x+d)-f(x),  D*g(x)=g(x)-g(x-d),    l = -d
//   BackwardDifference: Df(x)=f(x)-f(x-d),  D*g(x)=g(x+d)-g(x),    l = +d
//   SpanDifference:     Df(x)=f(x+s)-f(x-s) with s = d/2, paired with
//                       D*g(x)=g(x)-g(x-d) and the f factor taken at x-s.
// Difference kinds divide by the spacing when scale_by_spacing is set;
// the span kind is always unscaled.
enum class OpKind { Derivative, ForwardDifference, BackwardDifference, SpanDifference };

struct OperatorSpec {
    OpKind kind = OpKind::Derivative;
    double spacing = 1.0;
    bool scale_by_spacing = false;

    double scale() const {
        return (scale_by_spacing && kind != OpKind::Derivative &&
                kind != OpKind::SpanDifference)
                   ? 1.0 / spacing
                   : 1.0;
    }
    double shift_l() const {
        switch (kind) {
        case OpKind::Derivative: return 0.0;
        case OpKind::ForwardDifference: return -spacing;
        case OpKind::BackwardDifference: return spacing;
        case OpKind::SpanDifference: return -0.5 * spacing;
        }
        return 0.0;
    }
};

struct SteinPair {
    DensityModel density;
    OperatorSpec op;
};

// Default pairing: derivative for continuous densities, unit-scale forward
// difference on the density's lattice otherwise.
SteinPair make_stein_pair(DensityModel d);
SteinPair make_stein_pair(DensityModel d, OperatorSpec op);

// T f(x) = D(f p)(x) / p(x); 0 outside the support.
double canonical_apply(const SteinPair& sp, const RealFn& f, double x);
RealFn canonical_operator(const SteinPair& sp, const RealFn& f);

// Inverse operator at x for centered h (|E h| < 1e-9 unless auto_center).
double inverse_apply(const SteinPair& sp, const RealFn& h, double x,
                     bool auto_center = false);
RealFn inverse_operator(const SteinPair& sp, const RealFn& h,
                        bool auto_center = false);

struct ScoreResult {
    RealFn u;           // Dp / p
    bool const_in_class; // whether f = 1 passes class membership
};
ScoreResult score(const SteinPair& sp);

// tau = T^{-1}(mean - Id). Continuous: (1/p)  int_x^b (y - mean) p(y) dy.
// Lattice: (1/p(x)) * sum over lattice points strictly below x of
// (mean - y) p(y), times the spacing when the operator is spacing-scaled.
RealFn stein_kernel(const SteinPair& sp);

// The adjoint pairing used in the defining identity
// E[(X - mean) g(X)] = E[tau(X) * pair_diff(g, X)].
// Derivative: g' (central difference); forward: scaled g(x)-g(x-d);
// backward: scaled g(x+d)-g(x); span: g(x)-g(x-d).
double pair_diff(const SteinPair& sp, const RealFn& g, double x);

struct ClassMembership {
    bool in_class = false;
    double lower_residual = 0.0; // limiting |f p| toward the lower endpoint
    double upper_residual = 0.0;
    bool integrable = false; // E|T f| converged
};
ClassMembership check_in_class(const SteinPair& sp, const RealFn& f);

// Residual of D(f(x) g(x+l)) = g(x) Df(x) + f(.) D*g(.) at x. df/dg are the
// exact derivatives, used only by the derivative kind.
double product_rule_residual(const OperatorSpec& op, const RealFn& f,
                             const RealFn& df, const RealFn& g,
                             const RealFn& dg, double x);

// Standardized one-function operator A g(x) = f(x) D*g(x-l) + g(x-l) T f(x)
// for a fixed f in the Stein class (or the mirrored version with g fixed).
// E[A g(X)] = 0 for admissible g.
std::function<RealFn(const RealFn&)> standardize_fixed_f(const SteinPair& sp,
                                                         const RealFn& f);
std::function<RealFn(const RealFn&)> standardize_fixed_g(const SteinPair& sp,
                                                         const RealFn& g);

// Least-squares fit of the kernel against (1, x, x^2) on a quantile probe
// grid; coefficients iff the max residual is below 1e-6.
std::optional<std::array<double, 3>> pearson_kernel_check(const DensityModel& d);

// Birth-death measure mu(x) ~ exp(V(x)) w^x / x! on {0..N} and its operator
// A f(x) = w exp(V(x+1)-V(x)) f(x+1) - x f(x). The returned kernel uses the
// inclusive lower-tail sum (so it is w for V = 0), unlike the canonical
// strictly-below convention of stein_kernel.
struct GibbsOperator {
    SteinPair pair; // forward-difference pair over mu
    std::function<RealFn(const RealFn&)> apply; // f -> A f
    RealFn kernel;
    RealFn birth_rate; // b(x) = w exp(V(x+1)-V(x)); death rate is x
};
GibbsOperator gibbs_operator(const RealFn& V, double omega, std::int64_t N);

// g -> (1/2) beta g' + gamma g with beta = 2 T^{-1} gamma. gamma must be
// centered with exactly one sign change and bounded gamma * p.
std::function<RealFn(const RealFn&)> diffusion_operator(const DensityModel& d,
                                                        const RealFn& gamma);

// X -> X* with E[X f(X)] = Var(X) E[f'(X*)]; input must be centered with
// finite nonzero variance. Lattice inputs yield a continuous output.
DensityModel zero_bias_density(const DensityModel& d);

} // namespace steinkit
