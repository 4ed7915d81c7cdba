#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pathint/path.hpp"

namespace pathint {

/// Increasing continuous time change f with f(0) = 0, given as a spec
/// string: "linear:k" (f(t) = k*t), "power:a" (f(t) = t^a, a >= 1) or
/// "piecewise:[(t,v),...]" (linear interpolation through the knots, with
/// an implicit knot at (0,0)).
class TimeChange {
public:
    static TimeChange parse(const std::string& spec);
    static TimeChange linear(double slope);

    /// Defaults to the identity f(t) = t.
    TimeChange() : spec_("linear:1.0") {}

    double operator()(double t) const;
    const std::string& spec() const { return spec_; }

private:
    enum class Kind { Linear, Power, Piecewise };
    Kind kind_ = Kind::Linear;
    double param_ = 1.0;
    std::vector<PathEvent> knots_;  // piecewise: sorted, starting after (0,0)
    std::string spec_;
};

struct TimeChangedBmParams {
    TimeChange f;
};

struct JumpDiffusionParams {
    double drift = 0.0;
    double vol = 0.0;
    double jump_rate = 0.0;
    double jump_bound = 0.0;  // jump sizes are uniform on [-jump_bound, jump_bound]
};

/// The sampled path of one law together with the clock valid for it.
struct PathSample {
    CadlagPath x;
    ClockProcess clock;
};

/// One law P: a sampler for X-skeletons on the dyadic grid of mesh
/// 2^-grid_exponent, plus the clock dominating its characteristics.
/// Sampling is a pure function of (kind, seed, index).
class Scenario {
public:
    static Scenario time_changed_bm(TimeChange f, int grid_exponent,
                                    std::uint64_t seed, std::string id = "");
    static Scenario jump_diffusion(JumpDiffusionParams params, int grid_exponent,
                                   std::uint64_t seed, std::string id = "");

    /// JSON form, e.g.
    ///   {"kind":"time_changed_bm","f":"linear:2.0","grid_exponent":14,"seed":42}
    ///   {"kind":"jump_diffusion","drift":0.1,"vol":0.4,"jump_rate":2.0,
    ///    "jump_bound":2.0,"grid_exponent":14,"seed":7}
    /// An optional "id" names the report; it defaults to a readable
    /// description of the kind.
    static Scenario from_json(const nlohmann::json& j, std::uint64_t default_seed = 0);
    nlohmann::json to_json() const;

    PathSample sample_path(int index) const;
    ClockProcess scenario_clock() const;

    /// Grid times 0, 2^-e, ..., 1.
    std::vector<double> grid_times() const;

    const std::string& id() const { return id_; }
    int grid_exponent() const { return grid_exponent_; }
    std::uint64_t seed() const { return seed_; }
    bool is_jump_diffusion() const;

private:
    Scenario() = default;

    std::variant<TimeChangedBmParams, JumpDiffusionParams> kind_;
    int grid_exponent_ = 10;
    std::uint64_t seed_ = 0;
    std::string id_;
};

/// Left-point Riemann-Stieltjes sum of h against the sampled path over its
/// simulation grid up to t; the per-law stand-in for the Ito integral.
double reference_ito_integral(const SampledIntegrand& h, const PathSample& p, double t);

/// Same sum as a cumulative path on the simulation grid.
CadlagPath reference_ito_integral_path(const SampledIntegrand& h, const PathSample& p);

} // namespace pathint
