#pragma once

#include <vector>

#include "pathint/path.hpp"

namespace pathint {

/// Sampling times produced by the level-crossing scheme at mesh 2^-n:
/// consecutive sampled values of the integrand differ by at least 2^-n.
struct CrossingSchedule {
    int n = 0;
    std::vector<double> times;  // starts at 0
};

/// tau_0 = 0; tau_{k+1} is the first event time t > tau_k with
/// |g(t) - g(tau_k)| >= 2^-n.
CrossingSchedule level_crossing_times(const CadlagPath& g, int n);

/// Riemann sum over the crossing schedule of g:
/// sum_k g(tau_k) * (x(tau_{k+1} ^ t) - x(tau_k ^ t)), with the last leg
/// extended to the horizon 1.
double karandikar_integral(const CadlagPath& g, const CadlagPath& x, int n, double t);

/// Same sum materialized at every event time of x.
CadlagPath karandikar_integral_path(const CadlagPath& g, const CadlagPath& x, int n);

/// Pathwise quadratic variation x^2 - x(0)^2 - 2 int x dx, with the integral
/// computed by the level-crossing scheme; meaningful for skeletons of
/// continuous paths.
CadlagPath pathwise_qv(const CadlagPath& x, int n);

} // namespace pathint
