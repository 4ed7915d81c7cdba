#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pathint/path.hpp"
#include "pathint/scenarios.hpp"
#include "pathint/stieltjes.hpp"

namespace pathint {

/// Max over the given times of |y(t) - z(t)|.
double ucp_distance(const CadlagPath& y, const CadlagPath& z,
                    std::span<const double> times);

/// Integrand specification, parsed from a string:
///   const:<v>            constant v
///   xleft                left limits of the sampled path
///   xleft_scaled         X_(t-) * (1 + 1/(0.1 + t))
///   indicator:<a>:<b>    1 on (a, b]
///   square_wave:<k>      1 on even cells of the dyadic mesh 2^-k
///   poly:<c0>:<c1>       c0 + c1 * t
///   clip(<spec>,<c>)     spec clipped to 0 where |value| > c
/// Path-dependent kinds are built per sampled path; deterministic kinds
/// ignore the path.
class IntegrandSpec {
public:
    static IntegrandSpec parse(const std::string& spec);

    /// Integrand as declared (clip applied when present).
    SampledIntegrand build(const CadlagPath& x) const;

    bool bounded() const;
    const std::string& str() const { return spec_; }

private:
    enum class Kind { Const, XLeft, XLeftScaled, Indicator, SquareWave, Poly };
    Kind kind_ = Kind::Const;
    double p0_ = 0.0, p1_ = 0.0;
    bool clipped_ = false;
    double clip_level_ = 0.0;
    std::string spec_;
};

/// Monte Carlo statistics of the ucp distance between the pathwise integral
/// and the per-law oracle, per approximation index (n, or truncation level).
struct ConvergenceStats {
    double median_sup_error = 0.0;
    double p90_sup_error = 0.0;
    double mean_min1_error = 0.0;
};

struct ConvergenceReport {
    std::string scenario_id;
    std::vector<int> n_values;  // ascending; truncation levels for that experiment
    std::map<int, ConvergenceStats> per_n;
    int num_paths = 0;
    int grid_exponent = 0;
    std::uint64_t seed = 0;

    /// True when median_sup_error is non-increasing along n_values up to the
    /// multiplicative slack (1.1 = the standard 10% slack).
    bool monotone_decreasing(double slack = 1.1) const;

    double final_median() const;

    /// CSV rows scenario_id,n,median_sup_error,p90_sup_error,
    /// mean_min1_error,num_paths,grid_exponent,seed with 9-significant-digit
    /// floats.
    void write_csv(std::ostream& os) const;
    static void write_csv_header(std::ostream& os);
};

/// The pathwise computation shared by every experiment: regularize the
/// clock on x's grid, split off jumps above 1, average the integrand at
/// window 1/n, integrate by parts against the small-jump part and add the
/// plain sum against the large-jump part. Depends only on the path data
/// and the integrand spec, never on the scenario that produced them.
CadlagPath compute_pathwise_integral(const CadlagPath& x, const ClockProcess& clock,
                                     const IntegrandSpec& h_spec, int n);

/// Runs the pathwise pipeline for each n against the left-sum oracle of the
/// same integrand. h must be bounded (wrap it in clip(...)). Requires the
/// grid at least 4 dyadic levels finer than the smallest window.
ConvergenceReport approximation_experiment(const Scenario& s, const IntegrandSpec& h_spec,
                                           std::span<const int> n_values, int num_paths,
                                           int threads = 1);

/// Compares clip(h, level) pipelines at a fixed n against the oracle of the
/// declared (un-level-clipped) h, per level.
ConvergenceReport truncation_experiment(const Scenario& s, const IntegrandSpec& h_spec,
                                        std::span<const int> levels, int fixed_n,
                                        int num_paths, int threads = 1);

/// Identical pipeline with the clock forced to t (the scenario clock is
/// ignored); valid for integrands that are left-continuous along paths.
ConvergenceReport left_continuous_mode(const Scenario& s, const IntegrandSpec& h_spec,
                                       std::span<const int> n_values, int num_paths,
                                       int threads = 1);

/// Runs the identical pathwise computation on every scenario of the family;
/// scenario-specific information enters only through the sampled path data.
/// All scenarios must share the grid exponent and have distinct ids.
std::map<std::string, ConvergenceReport> aggregation_experiment(
    std::span<const Scenario> family, const IntegrandSpec& h_spec,
    std::span<const int> n_values, int num_paths, int threads = 1);

/// Level-crossing quadratic variation versus the scenario clock, per
/// crossing exponent; meaningful for the continuous scenarios.
ConvergenceReport qv_experiment(const Scenario& s, std::span<const int> n_values,
                                int num_paths, int threads = 1);

} // namespace pathint
