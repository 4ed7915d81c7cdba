#include "pathint/convergence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "pathint/bichteler.hpp"
#include "pathint/compensated.hpp"

namespace pathint {

using detail::Acc;

double ucp_distance(const CadlagPath& y, const CadlagPath& z,
                    std::span<const double> times) {
    if (times.empty()) {
        throw std::domain_error("ucp_distance: empty time set");
    }
    const auto& ye = y.events();
    const auto& ze = z.events();
    std::ptrdiff_t iy = -1, iz = -1;
    double prev_t = -1.0;
    double dist = 0.0;
    for (double t : times) {
        if (!(t >= 0.0 && t <= 1.0) || !(t > prev_t)) {
            throw std::domain_error("ucp_distance: times must be increasing within [0,1]");
        }
        prev_t = t;
        while (iy + 1 < static_cast<std::ptrdiff_t>(ye.size()) &&
               ye[static_cast<std::size_t>(iy + 1)].time <= t) {
            ++iy;
        }
        while (iz + 1 < static_cast<std::ptrdiff_t>(ze.size()) &&
               ze[static_cast<std::size_t>(iz + 1)].time <= t) {
            ++iz;
        }
        const double yv = iy < 0 ? y.initial_value() : ye[static_cast<std::size_t>(iy)].value;
        const double zv = iz < 0 ? z.initial_value() : ze[static_cast<std::size_t>(iz)].value;
        dist = std::max(dist, std::abs(yv - zv));
    }
    return dist;
}

namespace {

double parse_num(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("integrand spec: bad number in ") + what);
    }
}

} // namespace

IntegrandSpec IntegrandSpec::parse(const std::string& spec) {
    IntegrandSpec out;
    out.spec_ = spec;
    std::string body = spec;
    if (body.rfind("clip(", 0) == 0) {
        if (body.back() != ')') {
            throw std::invalid_argument("integrand spec: clip(...) not closed: " + spec);
        }
        std::string inner = body.substr(5, body.size() - 6);
        std::size_t comma = inner.rfind(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("integrand spec: clip needs clip(<spec>,<c>): " + spec);
        }
        out.clipped_ = true;
        out.clip_level_ = parse_num(inner.substr(comma + 1), "clip level");
        if (!(out.clip_level_ > 0.0)) {
            throw std::invalid_argument("integrand spec: clip level must be positive: " + spec);
        }
        body = inner.substr(0, comma);
        if (body.rfind("clip(", 0) == 0) {
            throw std::invalid_argument("integrand spec: nested clip not supported: " + spec);
        }
    }
    if (body.rfind("const:", 0) == 0) {
        out.kind_ = Kind::Const;
        out.p0_ = parse_num(body.substr(6), "const");
    } else if (body == "xleft") {
        out.kind_ = Kind::XLeft;
    } else if (body == "xleft_scaled") {
        out.kind_ = Kind::XLeftScaled;
    } else if (body.rfind("indicator:", 0) == 0) {
        std::string rest = body.substr(10);
        std::size_t colon = rest.find(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("integrand spec: indicator needs indicator:<a>:<b>");
        }
        out.kind_ = Kind::Indicator;
        out.p0_ = parse_num(rest.substr(0, colon), "indicator");
        out.p1_ = parse_num(rest.substr(colon + 1), "indicator");
        if (!(out.p0_ < out.p1_)) {
            throw std::invalid_argument("integrand spec: indicator needs a < b");
        }
    } else if (body.rfind("square_wave:", 0) == 0) {
        out.kind_ = Kind::SquareWave;
        out.p0_ = parse_num(body.substr(12), "square_wave");
        if (!(out.p0_ >= 1.0 && out.p0_ <= 24.0)) {
            throw std::invalid_argument("integrand spec: square_wave exponent must lie in [1,24]");
        }
    } else if (body.rfind("poly:", 0) == 0) {
        std::string rest = body.substr(5);
        std::size_t colon = rest.find(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("integrand spec: poly needs poly:<c0>:<c1>");
        }
        out.kind_ = Kind::Poly;
        out.p0_ = parse_num(rest.substr(0, colon), "poly");
        out.p1_ = parse_num(rest.substr(colon + 1), "poly");
    } else {
        throw std::invalid_argument("unknown integrand spec '" + spec + "'");
    }
    return out;
}

SampledIntegrand IntegrandSpec::build(const CadlagPath& x) const {
    SampledIntegrand base = [&]() -> SampledIntegrand {
        switch (kind_) {
            case Kind::Const: {
                const double v = p0_;
                return SampledIntegrand::from_function([v](double) { return v; },
                                                       std::abs(v));
            }
            case Kind::XLeft:
                return SampledIntegrand::from_path_left_limits(x);
            case Kind::XLeftScaled: {
                auto sp = std::make_shared<CadlagPath>(x);
                return SampledIntegrand(
                    [sp](double t) {
                        const double xl =
                            t == 0.0 ? sp->initial_value() : sp->left_limit_at(t);
                        return xl * (1.0 + 1.0 / (0.1 + t));
                    },
                    std::nullopt, SampleMode::LeftLimit);
            }
            case Kind::Indicator: {
                const double a = p0_, b = p1_;
                return SampledIntegrand::from_function(
                    [a, b](double t) { return t > a && t <= b ? 1.0 : 0.0; }, 1.0);
            }
            case Kind::SquareWave: {
                const double scale = std::ldexp(1.0, static_cast<int>(p0_));
                return SampledIntegrand::from_function(
                    [scale](double t) {
                        return static_cast<long long>(std::floor(t * scale)) % 2 == 0
                                   ? 1.0
                                   : 0.0;
                    },
                    1.0);
            }
            case Kind::Poly: {
                const double c0 = p0_, c1 = p1_;
                return SampledIntegrand::from_function(
                    [c0, c1](double t) { return c0 + c1 * t; },
                    std::abs(c0) + std::abs(c1));
            }
        }
        throw std::logic_error("unreachable integrand kind");
    }();
    return clipped_ ? integrand_truncation(base, clip_level_) : base;
}

bool IntegrandSpec::bounded() const {
    if (clipped_) return true;
    return kind_ != Kind::XLeft && kind_ != Kind::XLeftScaled;
}

bool ConvergenceReport::monotone_decreasing(double slack) const {
    for (std::size_t k = 1; k < n_values.size(); ++k) {
        const double prev = per_n.at(n_values[k - 1]).median_sup_error;
        const double cur = per_n.at(n_values[k]).median_sup_error;
        if (!(cur <= slack * prev)) return false;
    }
    return true;
}

double ConvergenceReport::final_median() const {
    return per_n.at(n_values.back()).median_sup_error;
}

namespace {

void fmt9(std::ostream& os, double v) {
    char buf[48];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    os.write(buf, res.ptr - buf);
}

} // namespace

void ConvergenceReport::write_csv_header(std::ostream& os) {
    os << "scenario_id,n,median_sup_error,p90_sup_error,mean_min1_error,"
          "num_paths,grid_exponent,seed\n";
}

void ConvergenceReport::write_csv(std::ostream& os) const {
    for (int n : n_values) {
        const ConvergenceStats& st = per_n.at(n);
        os << scenario_id << ',' << n << ',';
        fmt9(os, st.median_sup_error);
        os << ',';
        fmt9(os, st.p90_sup_error);
        os << ',';
        fmt9(os, st.mean_min1_error);
        os << ',' << num_paths << ',' << grid_exponent << ',' << seed << '\n';
    }
}

namespace {

CadlagPath pipeline_integral(const CadlagPath& x, const ClockProcess& clock,
                             const SampledIntegrand& h, int n) {
    std::vector<double> eval;
    eval.reserve(x.events().size() + 1);
    eval.push_back(0.0);
    for (const PathEvent& e : x.events()) eval.push_back(e.time);

    const ClockProcess reg = regularize_clock(clock, eval);
    const JumpDecomposition decomp = jump_truncation(x, 1.0);
    const AveragedIntegrand hn = averaging_operator(h, reg, n, eval);
    CadlagPath y = ibp_integral_path(hn, decomp.remainder, eval);
    if (decomp.check.events().empty()) {
        return y;
    }

    // The integral against the large-jump part is a plain sum.
    const auto& ce = decomp.check.events();
    std::vector<PathEvent> out;
    out.reserve(y.events().size());
    Acc big;
    std::size_t ic = 0;
    double check_prev = 0.0;
    for (const PathEvent& e : y.events()) {
        while (ic < ce.size() && ce[ic].time <= e.time) {
            big.add_scaled_diff(h(ce[ic].time), ce[ic].value, check_prev);
            check_prev = ce[ic].value;
            ++ic;
        }
        out.push_back({e.time, e.value + big.value()});
    }
    return CadlagPath(0.0, std::move(out));
}

template <typename Fn>
void for_each_path(int num_paths, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, num_paths));
    if (threads == 1) {
        for (int i = 0; i < num_paths; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < num_paths; i += threads) fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

ConvergenceStats make_stats(std::vector<double> sups) {
    ConvergenceStats st;
    const std::size_t n = sups.size();
    double mean = 0.0;
    for (double v : sups) mean += std::min(1.0, v);
    st.mean_min1_error = mean / static_cast<double>(n);
    std::sort(sups.begin(), sups.end());
    st.median_sup_error =
        n % 2 == 1 ? sups[n / 2] : 0.5 * (sups[n / 2 - 1] + sups[n / 2]);
    auto rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(n)));
    st.p90_sup_error = sups[std::min(n - 1, rank == 0 ? 0 : rank - 1)];
    return st;
}

void validate_keys(std::span<const int> keys, const char* what) {
    if (keys.empty()) {
        throw std::invalid_argument(std::string(what) + " must be nonempty");
    }
    int prev = 0;
    for (int k : keys) {
        if (k < 1 || k <= prev) {
            throw std::invalid_argument(std::string(what) +
                                        " must be positive and strictly increasing");
        }
        prev = k;
    }
}

void validate_mesh(const Scenario& s, int max_n) {
    // The oracle grid must be at least 4 dyadic levels finer than the
    // smallest averaging window so its own discretization error is
    // negligible against what it checks.
    if ((std::int64_t{1} << s.grid_exponent()) < 16 * std::int64_t{max_n}) {
        throw std::invalid_argument(
            "oracle mesh not finer than the smallest averaging window: need "
            "2^grid_exponent >= 16 * max(n)");
    }
}

// Shared Monte Carlo driver: one report from per-path sup errors computed
// for every key (n value or truncation level).
template <typename PerPathSups>
ConvergenceReport run_report(const Scenario& s, std::span<const int> keys,
                             int num_paths, int threads, PerPathSups&& per_path) {
    if (num_paths < 1) {
        throw std::invalid_argument("num_paths must be >= 1");
    }
    std::vector<std::vector<double>> sups(keys.size(),
                                          std::vector<double>(static_cast<std::size_t>(num_paths)));
    for_each_path(num_paths, threads, [&](int i) {
        std::vector<double> row = per_path(i);
        for (std::size_t k = 0; k < keys.size(); ++k) {
            sups[k][static_cast<std::size_t>(i)] = row[k];
        }
    });
    ConvergenceReport rep;
    rep.scenario_id = s.id();
    rep.n_values.assign(keys.begin(), keys.end());
    rep.num_paths = num_paths;
    rep.grid_exponent = s.grid_exponent();
    rep.seed = s.seed();
    for (std::size_t k = 0; k < keys.size(); ++k) {
        rep.per_n[keys[k]] = make_stats(std::move(sups[k]));
    }
    return rep;
}

} // namespace

CadlagPath compute_pathwise_integral(const CadlagPath& x, const ClockProcess& clock,
                                     const IntegrandSpec& h_spec, int n) {
    if (!h_spec.bounded()) {
        throw std::invalid_argument(
            "pipeline integrand must be bounded; wrap it in clip(<spec>,<c>)");
    }
    return pipeline_integral(x, clock, h_spec.build(x), n);
}

ConvergenceReport approximation_experiment(const Scenario& s, const IntegrandSpec& h_spec,
                                           std::span<const int> n_values, int num_paths,
                                           int threads) {
    validate_keys(n_values, "n_values");
    validate_mesh(s, n_values.back());
    if (!h_spec.bounded()) {
        throw std::invalid_argument(
            "approximation_experiment needs a bounded integrand; wrap it in clip(...)");
    }
    const std::vector<double> grid = s.grid_times();
    return run_report(s, n_values, num_paths, threads, [&](int i) {
        const PathSample ps = s.sample_path(i);
        const CadlagPath oracle = reference_ito_integral_path(h_spec.build(ps.x), ps);
        std::vector<double> row(n_values.size());
        for (std::size_t k = 0; k < n_values.size(); ++k) {
            const CadlagPath yn = compute_pathwise_integral(ps.x, ps.clock, h_spec, n_values[k]);
            row[k] = ucp_distance(yn, oracle, grid);
        }
        return row;
    });
}

ConvergenceReport truncation_experiment(const Scenario& s, const IntegrandSpec& h_spec,
                                        std::span<const int> levels, int fixed_n,
                                        int num_paths, int threads) {
    validate_keys(levels, "levels");
    if (fixed_n < 1) {
        throw std::invalid_argument("fixed_n must be >= 1");
    }
    validate_mesh(s, fixed_n);
    const std::vector<double> grid = s.grid_times();
    return run_report(s, levels, num_paths, threads, [&](int i) {
        const PathSample ps = s.sample_path(i);
        const SampledIntegrand h = h_spec.build(ps.x);
        const CadlagPath oracle = reference_ito_integral_path(h, ps);
        std::vector<double> row(levels.size());
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const SampledIntegrand clipped = integrand_truncation(h, levels[k]);
            const CadlagPath yn = pipeline_integral(ps.x, ps.clock, clipped, fixed_n);
            row[k] = ucp_distance(yn, oracle, grid);
        }
        return row;
    });
}

ConvergenceReport left_continuous_mode(const Scenario& s, const IntegrandSpec& h_spec,
                                       std::span<const int> n_values, int num_paths,
                                       int threads) {
    validate_keys(n_values, "n_values");
    validate_mesh(s, n_values.back());
    if (!h_spec.bounded()) {
        throw std::invalid_argument(
            "left_continuous_mode needs a bounded integrand; wrap it in clip(...)");
    }
    const std::vector<double> grid = s.grid_times();
    const ClockProcess identity(CadlagPath::from_grid(grid, grid));
    return run_report(s, n_values, num_paths, threads, [&](int i) {
        const PathSample ps = s.sample_path(i);
        const CadlagPath oracle = reference_ito_integral_path(h_spec.build(ps.x), ps);
        std::vector<double> row(n_values.size());
        for (std::size_t k = 0; k < n_values.size(); ++k) {
            const CadlagPath yn =
                compute_pathwise_integral(ps.x, identity, h_spec, n_values[k]);
            row[k] = ucp_distance(yn, oracle, grid);
        }
        return row;
    });
}

std::map<std::string, ConvergenceReport> aggregation_experiment(
    std::span<const Scenario> family, const IntegrandSpec& h_spec,
    std::span<const int> n_values, int num_paths, int threads) {
    if (family.empty()) {
        throw std::invalid_argument("aggregation_experiment needs at least one scenario");
    }
    for (const Scenario& s : family) {
        if (s.grid_exponent() != family[0].grid_exponent()) {
            throw std::invalid_argument(
                "aggregation_experiment: scenarios must share grid_exponent");
        }
    }
    std::map<std::string, ConvergenceReport> out;
    for (const Scenario& s : family) {
        if (!out.emplace(s.id(), approximation_experiment(s, h_spec, n_values,
                                                          num_paths, threads))
                 .second) {
            throw std::invalid_argument("aggregation_experiment: duplicate scenario id '" +
                                        s.id() + "'");
        }
    }
    return out;
}

ConvergenceReport qv_experiment(const Scenario& s, std::span<const int> n_values,
                                int num_paths, int threads) {
    validate_keys(n_values, "n_values");
    const std::vector<double> grid = s.grid_times();
    return run_report(s, n_values, num_paths, threads, [&](int i) {
        const PathSample ps = s.sample_path(i);
        std::vector<double> row(n_values.size());
        for (std::size_t k = 0; k < n_values.size(); ++k) {
            const CadlagPath qv = pathwise_qv(ps.x, n_values[k]);
            row[k] = ucp_distance(qv, ps.clock.base(), grid);
        }
        return row;
    });
}

} // namespace pathint
