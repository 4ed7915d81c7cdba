#include "pathint/path.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pathint {

namespace {

bool finite(double x) { return std::isfinite(x); }

void check_time_domain(double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::domain_error("time outside [0,1]");
    }
}

// Index of the last event with time <= t, or -1.
std::ptrdiff_t last_at_or_before(const std::vector<PathEvent>& ev, double t) {
    auto it = std::upper_bound(ev.begin(), ev.end(), t,
                               [](double v, const PathEvent& e) { return v < e.time; });
    return static_cast<std::ptrdiff_t>(it - ev.begin()) - 1;
}

// Index of the last event with time < t, or -1.
std::ptrdiff_t last_before(const std::vector<PathEvent>& ev, double t) {
    auto it = std::lower_bound(ev.begin(), ev.end(), t,
                               [](const PathEvent& e, double v) { return e.time < v; });
    return static_cast<std::ptrdiff_t>(it - ev.begin()) - 1;
}

void write_double(std::ostream& os, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    os.write(buf, res.ptr - buf);
}

double parse_double(const std::string& s, const char* what) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{}) {
        throw std::invalid_argument(std::string("bad number in path CSV field ") + what);
    }
    return v;
}

} // namespace

CadlagPath::CadlagPath(double initial_value, std::vector<PathEvent> events)
    : initial_value_(initial_value), events_(std::move(events)) {
    if (!finite(initial_value_)) {
        throw std::invalid_argument("path initial value must be finite");
    }
    double prev = 0.0;
    for (const PathEvent& e : events_) {
        if (!finite(e.time) || !finite(e.value)) {
            throw std::invalid_argument("path event must be finite");
        }
        if (!(e.time > 0.0 && e.time <= 1.0)) {
            throw std::invalid_argument("event times must lie in (0,1]");
        }
        if (!(e.time > prev)) {
            throw std::invalid_argument("event times must be strictly increasing (duplicates rejected)");
        }
        prev = e.time;
    }
}

CadlagPath CadlagPath::from_grid(std::span<const double> times,
                                 std::span<const double> values) {
    if (times.size() != values.size()) {
        throw std::invalid_argument("from_grid: times/values size mismatch");
    }
    double initial = 0.0;
    std::size_t first = 0;
    if (!times.empty() && times[0] == 0.0) {
        initial = values[0];
        first = 1;
    }
    std::vector<PathEvent> ev;
    ev.reserve(times.size() - first);
    for (std::size_t i = first; i < times.size(); ++i) {
        ev.push_back({times[i], values[i]});
    }
    return CadlagPath(initial, std::move(ev));
}

double CadlagPath::value_at(double t) const {
    check_time_domain(t);
    std::ptrdiff_t i = last_at_or_before(events_, t);
    return i < 0 ? initial_value_ : events_[static_cast<std::size_t>(i)].value;
}

double CadlagPath::left_limit_at(double t) const {
    if (!(t > 0.0 && t <= 1.0)) {
        throw std::domain_error("left limit defined on (0,1] only");
    }
    std::ptrdiff_t i = last_before(events_, t);
    return i < 0 ? initial_value_ : events_[static_cast<std::size_t>(i)].value;
}

double CadlagPath::final_value() const {
    return events_.empty() ? initial_value_ : events_.back().value;
}

std::vector<PathEvent> CadlagPath::jumps() const {
    std::vector<PathEvent> out;
    double prev = initial_value_;
    for (const PathEvent& e : events_) {
        double d = e.value - prev;
        if (d != 0.0) {
            out.push_back({e.time, d});
        }
        prev = e.value;
    }
    return out;
}

double CadlagPath::total_variation(double t) const {
    check_time_domain(t);
    double tv = 0.0;
    double prev = initial_value_;
    for (const PathEvent& e : events_) {
        if (e.time > t) break;
        tv += std::abs(e.value - prev);
        prev = e.value;
    }
    return tv;
}

void CadlagPath::write_csv(std::ostream& os) const {
    os << "time,value\n0,";
    write_double(os, initial_value_);
    os << '\n';
    for (const PathEvent& e : events_) {
        write_double(os, e.time);
        os << ',';
        write_double(os, e.value);
        os << '\n';
    }
}

CadlagPath CadlagPath::read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("time,value", 0) != 0) {
        throw std::invalid_argument("path CSV must start with header 'time,value'");
    }
    bool have_initial = false;
    double initial = 0.0;
    std::vector<PathEvent> ev;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("path CSV row missing comma");
        }
        double t = parse_double(line.substr(0, comma), "time");
        double v = parse_double(line.substr(comma + 1), "value");
        if (!have_initial) {
            if (t != 0.0) {
                throw std::invalid_argument("first path CSV row must have time 0");
            }
            initial = v;
            have_initial = true;
        } else {
            ev.push_back({t, v});
        }
    }
    if (!have_initial) {
        throw std::invalid_argument("path CSV has no rows");
    }
    return CadlagPath(initial, std::move(ev));
}

ClockProcess::ClockProcess(CadlagPath base) : base_(std::move(base)) {
    if (!(base_.initial_value() >= 0.0)) {
        throw std::invalid_argument("clock initial value must be >= 0");
    }
    double prev = base_.initial_value();
    for (const PathEvent& e : base_.events()) {
        if (!(e.value >= prev)) {
            throw std::invalid_argument("clock must be nondecreasing");
        }
        prev = e.value;
    }
}

ClockProcess regularize_clock(const ClockProcess& a, std::span<const double> grid) {
    std::vector<double> times(grid.begin(), grid.end());
    std::vector<double> values;
    values.reserve(times.size());
    for (double t : times) {
        values.push_back(a.value_at(t) + t);
    }
    return ClockProcess(CadlagPath::from_grid(times, values));
}

SampledIntegrand::SampledIntegrand(std::function<double(double)> sampler,
                                   std::optional<double> bound, SampleMode mode)
    : sampler_(std::move(sampler)), bound_(bound), mode_(mode) {
    if (!sampler_) {
        throw std::invalid_argument("integrand sampler must be callable");
    }
    if (bound_ && !(*bound_ >= 0.0)) {
        throw std::invalid_argument("integrand bound must be >= 0");
    }
}

SampledIntegrand SampledIntegrand::from_function(std::function<double(double)> fn,
                                                 std::optional<double> bound) {
    return SampledIntegrand(std::move(fn), bound, SampleMode::AtPoint);
}

SampledIntegrand SampledIntegrand::from_path(const CadlagPath& p,
                                             std::optional<double> bound) {
    auto shared = std::make_shared<CadlagPath>(p);
    return SampledIntegrand([shared](double t) { return shared->value_at(t); },
                            bound, SampleMode::AtPoint);
}

SampledIntegrand SampledIntegrand::from_path_left_limits(const CadlagPath& p,
                                                         std::optional<double> bound) {
    auto shared = std::make_shared<CadlagPath>(p);
    return SampledIntegrand(
        [shared](double t) {
            return t == 0.0 ? shared->initial_value() : shared->left_limit_at(t);
        },
        bound, SampleMode::LeftLimit);
}

} // namespace pathint
