#include "pathint/bichteler.hpp"

#include <cmath>
#include <stdexcept>

#include "pathint/compensated.hpp"

namespace pathint {

using detail::Acc;

CrossingSchedule level_crossing_times(const CadlagPath& g, int n) {
    const double level = std::ldexp(1.0, -n);
    CrossingSchedule sched{n, {0.0}};
    double ref = g.initial_value();
    for (const PathEvent& e : g.events()) {
        if (std::abs(e.value - ref) >= level) {
            sched.times.push_back(e.time);
            ref = e.value;
        }
    }
    return sched;
}

namespace {

// Shared sweep: emits the running Riemann sum at each requested time.
// Sampled values are g at the crossing times (right-continuous values),
// and the final leg runs to the horizon 1.
class CrossingSum {
public:
    CrossingSum(const CadlagPath& g, const CadlagPath& x, int n)
        : x_(x), sched_(level_crossing_times(g, n)) {
        sampled_.reserve(sched_.times.size());
        for (double tau : sched_.times) {
            sampled_.push_back(g.value_at(tau));
        }
    }

    // Must be called with nondecreasing t.
    double at(double t) {
        while (k_ + 1 < sched_.times.size() && sched_.times[k_ + 1] <= t) {
            const double t0 = sched_.times[k_];
            const double t1 = sched_.times[k_ + 1];
            acc_.add_scaled_diff(sampled_[k_], x_.value_at(t1), x_.value_at(t0));
            ++k_;
        }
        Acc val = acc_;
        val.add_scaled_diff(sampled_[k_], x_.value_at(t), x_.value_at(sched_.times[k_]));
        return val.value();
    }

private:
    const CadlagPath& x_;
    CrossingSchedule sched_;
    std::vector<double> sampled_;
    std::size_t k_ = 0;
    Acc acc_;
};

} // namespace

double karandikar_integral(const CadlagPath& g, const CadlagPath& x, int n, double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::domain_error("karandikar_integral: t outside [0,1]");
    }
    CrossingSum sum(g, x, n);
    return sum.at(t);
}

CadlagPath karandikar_integral_path(const CadlagPath& g, const CadlagPath& x, int n) {
    CrossingSum sum(g, x, n);
    std::vector<PathEvent> out;
    out.reserve(x.events().size());
    for (const PathEvent& e : x.events()) {
        out.push_back({e.time, sum.at(e.time)});
    }
    return CadlagPath(0.0, std::move(out));
}

CadlagPath pathwise_qv(const CadlagPath& x, int n) {
    CrossingSum sum(x, x, n);
    const double x0 = x.initial_value();
    std::vector<PathEvent> out;
    out.reserve(x.events().size());
    for (const PathEvent& e : x.events()) {
        out.push_back({e.time, e.value * e.value - x0 * x0 - 2.0 * sum.at(e.time)});
    }
    return CadlagPath(0.0, std::move(out));
}

} // namespace pathint
