#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pathint {

struct PathEvent {
    double time;
    double value;
};

/// Right-continuous step path on [0,1], stored as an initial value plus an
/// ordered list of (time, value) events with strictly increasing times in
/// (0,1]. The value at t is the value of the last event at or before t;
/// the left limit at t is the value just before t. Immutable after
/// construction, so instances can be shared freely across threads.
class CadlagPath {
public:
    CadlagPath() = default;
    explicit CadlagPath(double initial_value) : initial_value_(initial_value) {}
    CadlagPath(double initial_value, std::vector<PathEvent> events);

    /// Builds a path from parallel time/value arrays. If times starts at 0
    /// that entry becomes the initial value; otherwise initial_value is 0.
    static CadlagPath from_grid(std::span<const double> times,
                                std::span<const double> values);

    double initial_value() const { return initial_value_; }
    const std::vector<PathEvent>& events() const { return events_; }

    /// Right-continuous evaluation. Throws std::domain_error outside [0,1].
    double value_at(double t) const;

    /// Limit from the left; defined for t in (0,1] only.
    double left_limit_at(double t) const;

    double final_value() const;

    /// Nonzero jumps (time, value - left limit), in time order.
    std::vector<PathEvent> jumps() const;

    /// Sum of |increments| of the step path on (0, t].
    double total_variation(double t) const;

    /// CSV with header "time,value"; the initial value is the row at time 0.
    /// Floats are written with shortest round-trip precision so parsing
    /// reproduces the exact doubles.
    void write_csv(std::ostream& os) const;
    static CadlagPath read_csv(std::istream& is);

private:
    double initial_value_ = 0.0;
    std::vector<PathEvent> events_;
};

/// Nondecreasing CadlagPath with nonnegative initial value; the time
/// measure integrands are averaged against.
class ClockProcess {
public:
    ClockProcess() = default;
    explicit ClockProcess(CadlagPath base);

    const CadlagPath& base() const { return base_; }
    double value_at(double t) const { return base_.value_at(t); }

private:
    CadlagPath base_;
};

/// Returns the clock whose value at each grid time t equals a(t) + t, so
/// that increments dominate elapsed time on the grid.
ClockProcess regularize_clock(const ClockProcess& a, std::span<const double> grid);

enum class SampleMode { AtPoint, LeftLimit };

/// An integrand that can be queried at arbitrary times in [0,1]. The mode
/// records which convention the sampler implements when it wraps a path:
/// AtPoint returns the path value, LeftLimit the left limit (with the value
/// at 0 standing in for the undefined left limit there).
class SampledIntegrand {
public:
    SampledIntegrand(std::function<double(double)> sampler,
                     std::optional<double> bound, SampleMode mode);

    static SampledIntegrand from_function(std::function<double(double)> fn,
                                          std::optional<double> bound = std::nullopt);
    static SampledIntegrand from_path(const CadlagPath& p,
                                      std::optional<double> bound = std::nullopt);
    static SampledIntegrand from_path_left_limits(const CadlagPath& p,
                                                  std::optional<double> bound = std::nullopt);

    double operator()(double t) const { return sampler_(t); }
    const std::optional<double>& bound() const { return bound_; }
    SampleMode mode() const { return mode_; }

private:
    std::function<double(double)> sampler_;
    std::optional<double> bound_;
    SampleMode mode_;
};

} // namespace pathint
