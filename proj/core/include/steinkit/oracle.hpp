#pragma once

#include "steinkit/operators.hpp"

#include <string>

namespace steinkit {

// Ground-truth distance between two laws, computed by quadrature or exact
// enumeration (never via the bounds it is used to validate).
struct DistanceResult {
    double value = 0.0;
    std::string metric;          // "tv" | "kolmogorov" | "wasserstein"
    std::string method;          // "closed-form" | "quadrature" | "enumeration"
    double error_estimate = 0.0;
    std::string note;            // e.g. mutually-singular warning
};

DistanceResult tv_distance(const DensityModel& d1, const DensityModel& d2);
DistanceResult kolmogorov_distance(const DensityModel& d1,
                                   const DensityModel& d2);
DistanceResult wasserstein_distance(const DensityModel& d1,
                                    const DensityModel& d2);

// Max over a spanning basis of class functions f (single-point indicators
// vanishing at the lower endpoint) of |E_q[T_p f]|. Both models must be
// lattice with identical finite support (size <= 64). Zero iff q equals the
// target of sp.
double characterization_check(const SteinPair& sp, const DensityModel& q);

} // namespace steinkit
