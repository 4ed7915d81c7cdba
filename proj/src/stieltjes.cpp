#include "pathint/stieltjes.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

#include "pathint/compensated.hpp"

namespace pathint {

using detail::Acc;
using detail::Split;

double ls_integral(const SampledIntegrand& phi, const CadlagPath& g, double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::domain_error("ls_integral: t outside [0,1]");
    }
    Acc acc;
    double prev = g.initial_value();
    for (const PathEvent& e : g.events()) {
        if (e.time > t) break;
        acc.add_scaled_diff(phi(e.time), e.value, prev);
        prev = e.value;
    }
    return acc.value();
}

AveragedIntegrand averaging_operator(const SampledIntegrand& h, const ClockProcess& a,
                                     int n, std::span<const double> eval_times) {
    if (n < 1) {
        throw std::invalid_argument("averaging_operator: n must be >= 1");
    }
    const auto& clock_events = a.base().events();
    const std::size_t m = clock_events.size() + 1;

    // Event grid of the clock, with time 0 carrying the initial mass
    // (the value of A at 0, since A vanishes below 0).
    std::vector<double> times(m), dmass(m), hval(m);
    times[0] = 0.0;
    dmass[0] = a.base().initial_value();
    hval[0] = h(0.0);
    for (std::size_t i = 1; i < m; ++i) {
        const PathEvent& e = clock_events[i - 1];
        times[i] = e.time;
        dmass[i] = e.value - (i == 1 ? a.base().initial_value() : clock_events[i - 2].value);
        hval[i] = h(e.time);
    }

    // Prefix sums of dA and h*dA; window values come out as differences.
    std::vector<Split> pa(m), pha(m);
    {
        Acc sa, sha;
        for (std::size_t i = 0; i < m; ++i) {
            sa.add(dmass[i]);
            sha.add_product(hval[i], dmass[i]);
            pa[i] = detail::parts_of(sa);
            pha[i] = detail::parts_of(sha);
        }
    }
    auto prefix = [](const std::vector<Split>& p, std::ptrdiff_t i) {
        return i < 0 ? Split{} : p[static_cast<std::size_t>(i)];
    };

    const double window = 1.0 / n;
    std::vector<PathEvent> out;
    out.reserve(eval_times.size());
    std::ptrdiff_t hi = -1, lo = -1;
    std::deque<std::size_t> wmin, wmax;  // monotone index deques over (lo, hi]
    double prev_eval = -1.0;
    for (double t : eval_times) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw std::domain_error("averaging_operator: eval time outside [0,1]");
        }
        if (!(t > prev_eval)) {
            throw std::invalid_argument("averaging_operator: eval times must be strictly increasing");
        }
        prev_eval = t;
        if (t == 0.0) continue;  // H^n_0 := 0 is the initial value below

        while (hi + 1 < static_cast<std::ptrdiff_t>(m) &&
               times[static_cast<std::size_t>(hi + 1)] <= t) {
            ++hi;
            auto idx = static_cast<std::size_t>(hi);
            while (!wmin.empty() && hval[wmin.back()] >= hval[idx]) wmin.pop_back();
            wmin.push_back(idx);
            while (!wmax.empty() && hval[wmax.back()] <= hval[idx]) wmax.pop_back();
            wmax.push_back(idx);
        }
        const double window_start = t - window;
        while (lo + 1 < static_cast<std::ptrdiff_t>(m) &&
               times[static_cast<std::size_t>(lo + 1)] <= window_start) {
            ++lo;
        }
        while (!wmin.empty() && static_cast<std::ptrdiff_t>(wmin.front()) <= lo) {
            wmin.pop_front();
        }
        while (!wmax.empty() && static_cast<std::ptrdiff_t>(wmax.front()) <= lo) {
            wmax.pop_front();
        }

        const double den = prefix(pa, hi).minus(prefix(pa, lo));
        if (!(den > 0.0)) {
            throw std::logic_error("averaging_operator: window carries no clock mass; "
                                   "clock not regularized on the eval grid");
        }
        double val = prefix(pha, hi).minus(prefix(pha, lo)) / den;
        // A weighted average with nonnegative weights cannot leave the range
        // of the sampled values; clamping removes the rounding overshoot.
        if (!wmin.empty()) {
            val = std::min(std::max(val, hval[wmin.front()]), hval[wmax.front()]);
        }
        out.push_back({t, val});
    }
    return AveragedIntegrand{n, CadlagPath(0.0, std::move(out))};
}

double ibp_integral(const AveragedIntegrand& hn, const CadlagPath& x, double t) {
    if (x.initial_value() != 0.0) {
        throw std::invalid_argument("ibp_integral: integrator must start at 0");
    }
    Acc acc;
    acc.add_product(hn.values.value_at(t), x.value_at(t));
    double prev = hn.values.initial_value();
    for (const PathEvent& e : hn.values.events()) {
        if (e.time > t) break;
        acc.add_scaled_diff(-x.left_limit_at(e.time), e.value, prev);
        prev = e.value;
    }
    return acc.value();
}

CadlagPath ibp_integral_path(const AveragedIntegrand& hn, const CadlagPath& x,
                             std::span<const double> eval_times) {
    if (x.initial_value() != 0.0) {
        throw std::invalid_argument("ibp_integral_path: integrator must start at 0");
    }
    const auto& he = hn.values.events();
    const auto& xe = x.events();
    Acc stieltjes;  // running sum of x_- dH^n
    std::size_t ih = 0;
    std::ptrdiff_t ix = -1;   // last x event with time <= current eval time
    std::ptrdiff_t ixl = -1;  // last x event with time < current hn event time
    double hprev = hn.values.initial_value();

    std::vector<PathEvent> out;
    out.reserve(eval_times.size());
    for (double t : eval_times) {
        if (t == 0.0) continue;
        while (ih < he.size() && he[ih].time <= t) {
            const double s = he[ih].time;
            while (ixl + 1 < static_cast<std::ptrdiff_t>(xe.size()) &&
                   xe[static_cast<std::size_t>(ixl + 1)].time < s) {
                ++ixl;
            }
            const double xminus =
                ixl < 0 ? x.initial_value() : xe[static_cast<std::size_t>(ixl)].value;
            stieltjes.add_scaled_diff(xminus, he[ih].value, hprev);
            hprev = he[ih].value;
            ++ih;
        }
        while (ix + 1 < static_cast<std::ptrdiff_t>(xe.size()) &&
               xe[static_cast<std::size_t>(ix + 1)].time <= t) {
            ++ix;
        }
        const double xt = ix < 0 ? x.initial_value() : xe[static_cast<std::size_t>(ix)].value;
        Acc val;
        val.add_product(hprev, xt);
        val.add_scaled(stieltjes, -1.0);
        out.push_back({t, val.value()});
    }
    return CadlagPath(0.0, std::move(out));
}

JumpDecomposition jump_truncation(const CadlagPath& x, double threshold) {
    if (!(threshold >= 0.0)) {
        throw std::invalid_argument("jump_truncation: threshold must be >= 0");
    }
    std::vector<PathEvent> check_events;
    std::vector<PathEvent> rem_events;
    rem_events.reserve(x.events().size());
    Acc acc;
    double check_val = 0.0;
    double prev = x.initial_value();
    for (const PathEvent& e : x.events()) {
        const double d = e.value - prev;
        if (std::abs(d) > threshold) {
            acc.add(d);
            check_val = acc.value();
            check_events.push_back({e.time, check_val});
        }
        rem_events.push_back({e.time, e.value - check_val});
        prev = e.value;
    }
    return {CadlagPath(0.0, std::move(check_events)),
            CadlagPath(x.initial_value(), std::move(rem_events))};
}

SampledIntegrand integrand_truncation(const SampledIntegrand& h, double level) {
    if (!(level > 0.0)) {
        throw std::invalid_argument("integrand_truncation: level must be positive");
    }
    SampledIntegrand inner = h;
    return SampledIntegrand(
        [inner, level](double t) {
            const double v = inner(t);
            return std::abs(v) <= level ? v : 0.0;
        },
        level, h.mode());
}

} // namespace pathint
