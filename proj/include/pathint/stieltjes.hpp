#pragma once

#include <span>

#include "pathint/path.hpp"

namespace pathint {

/// Window average of an integrand against a clock: the finite-variation
/// approximation H^n with window width 1/n. H^n_0 is 0 by convention.
struct AveragedIntegrand {
    int n = 1;
    CadlagPath values;
};

/// Lebesgue-Stieltjes integral of phi against the step path g over (0, t]:
/// the finite sum of phi(s) * (jump of g at s) over event times s <= t.
double ls_integral(const SampledIntegrand& phi, const CadlagPath& g, double t);

/// H^n_t = (1 / (A_t - A_{t-1/n})) * sum over s in (t-1/n, t] of h(s) dA(s),
/// evaluated at each eval time and packaged as a step path; H^n_0 = 0.
/// Queries below time 0 are clamped to 0 (both h and A vanish there, so the
/// window simply loses mass). Requires a regularized clock so that every
/// window carries positive dA mass at the eval times; a zero denominator
/// reports an internal error. The result is clamped to the range of the h
/// samples inside the window, which a window average cannot leave.
AveragedIntegrand averaging_operator(const SampledIntegrand& h, const ClockProcess& a,
                                     int n, std::span<const double> eval_times);

/// Integration-by-parts integral Y^n_t = H^n_t X_t - int X_- dH^n.
/// Requires x(0) = 0. For step paths this is exactly the Stieltjes sum
/// of H^n against the increments of x on the common refinement.
double ibp_integral(const AveragedIntegrand& hn, const CadlagPath& x, double t);

/// Same integral materialized as a step path on the given eval times.
CadlagPath ibp_integral_path(const AveragedIntegrand& hn, const CadlagPath& x,
                             std::span<const double> eval_times);

struct JumpDecomposition {
    CadlagPath check;      // running sum of the jumps with |jump| > threshold
    CadlagPath remainder;  // x - check pointwise; all its jumps are <= threshold
};

/// Splits off the large jumps of x so the remainder has jumps bounded by
/// the threshold. check + remainder reproduces x at every event time.
JumpDecomposition jump_truncation(const CadlagPath& x, double threshold = 1.0);

/// Pointwise clip to 0 outside [-level, level]: returns h(t) when
/// |h(t)| <= level and 0 otherwise, with the level recorded as the bound.
SampledIntegrand integrand_truncation(const SampledIntegrand& h, double level);

} // namespace pathint
