#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pathint/stieltjes.hpp"

using namespace pathint;

namespace {

// Uniform dyadic grid skeleton of a function on [0,1].
CadlagPath skeleton(int exponent, const std::function<double(double)>& f) {
    const std::size_t steps = std::size_t{1} << exponent;
    std::vector<double> times(steps + 1), values(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        times[i] = std::ldexp(static_cast<double>(i), -exponent);
        values[i] = f(times[i]);
    }
    return CadlagPath::from_grid(times, values);
}

ClockProcess identity_clock(int exponent) {
    return ClockProcess(skeleton(exponent, [](double t) { return t; }));
}

std::vector<double> grid_times(int exponent) {
    const std::size_t steps = std::size_t{1} << exponent;
    std::vector<double> t(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        t[i] = std::ldexp(static_cast<double>(i), -exponent);
    }
    return t;
}

CadlagPath random_step_path(std::mt19937_64& rng, double initial, int max_events = 50) {
    std::uniform_real_distribution<double> utime(0.0, 1.0);
    std::uniform_real_distribution<double> uval(-5.0, 5.0);
    std::uniform_int_distribution<int> ucount(0, max_events);
    std::vector<double> times;
    for (int i = ucount(rng); i > 0; --i) {
        double t = utime(rng);
        if (t > 0.0) times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    std::vector<PathEvent> ev;
    for (double t : times) ev.push_back({t, uval(rng)});
    return CadlagPath(initial, std::move(ev));
}

} // namespace

TEST_CASE("ls_integral telescopes for phi = 1") {
    std::mt19937_64 rng(3);
    auto one = SampledIntegrand::from_function([](double) { return 1.0; }, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        CadlagPath g = random_step_path(rng, 2.0);
        CHECK(ls_integral(one, g, 1.0) ==
              doctest::Approx(g.value_at(1.0) - g.initial_value()).epsilon(1e-14));
    }
}

TEST_CASE("ls_integral picks up jumps at the point value") {
    auto two = SampledIntegrand::from_function([](double) { return 2.0; }, 2.0);
    CadlagPath g(0.0, {{0.5, 1.0}});
    CHECK(ls_integral(two, g, 1.0) == 2.0);
    CHECK(ls_integral(two, g, 0.4) == 0.0);
    CHECK_THROWS_AS(ls_integral(two, g, 1.5), std::domain_error);
}

TEST_CASE("ls_integral of s ds against the fine skeleton of t") {
    // Exact value of the step sum: sum over k of (k m) * m with m = 2^-12.
    const int e = 12;
    const double m = std::ldexp(1.0, -e);
    const double steps = std::ldexp(1.0, e);
    const double exact_step_sum = m * m * steps * (steps + 1.0) / 2.0;
    CadlagPath g = skeleton(e, [](double t) { return t; });
    auto phi = SampledIntegrand::from_function([](double s) { return s; }, 1.0);
    const double got = ls_integral(phi, g, 1.0);
    CHECK(got == doctest::Approx(exact_step_sum).epsilon(1e-12));
    CHECK(std::abs(got - 0.5) <= std::ldexp(1.0, -11));
}

TEST_CASE("ls_integral is linear in phi and additive in t") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 30; ++rep) {
        CadlagPath g = random_step_path(rng, 0.0);
        auto f1 = SampledIntegrand::from_function([](double s) { return std::sin(7 * s); }, 1.0);
        auto f2 = SampledIntegrand::from_function([](double s) { return 1.0 - s; }, 1.0);
        auto mix = SampledIntegrand::from_function(
            [](double s) { return 2.0 * std::sin(7 * s) - 3.0 * (1.0 - s); }, 5.0);
        const double lhs = ls_integral(mix, g, 1.0);
        const double rhs = 2.0 * ls_integral(f1, g, 1.0) - 3.0 * ls_integral(f2, g, 1.0);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

        const double whole = ls_integral(f1, g, 1.0);
        const double split = ls_integral(f1, g, 0.37);
        double tail = 0.0;
        {
            double prev = g.value_at(0.37);
            for (const auto& ev : g.events()) {
                if (ev.time <= 0.37) continue;
                tail += std::sin(7 * ev.time) * (ev.value - prev);
                prev = ev.value;
            }
        }
        CHECK(whole == doctest::Approx(split + tail).epsilon(1e-12));
    }
}

TEST_CASE("averaging operator reproduces constants exactly") {
    const auto grid = grid_times(10);
    ClockProcess reg = regularize_clock(ClockProcess(CadlagPath(0.0)), grid);
    for (double c : {2.5, 0.7320508075688772, -3.14159}) {
        auto h = SampledIntegrand::from_function([c](double) { return c; }, std::abs(c));
        AveragedIntegrand hn = averaging_operator(h, reg, 7, grid);
        CHECK(hn.values.initial_value() == 0.0);
        CHECK(hn.values.value_at(0.0) == 0.0);
        for (double t : {1.0 / 1024, 0.25, 0.5, 0.9990234375, 1.0}) {
            CHECK(hn.values.value_at(t) == c);
        }
    }

    // Same with a rough non-dyadic clock.
    std::mt19937_64 rng(9);
    CadlagPath base = random_step_path(rng, 0.3, 40);
    std::vector<PathEvent> mono;
    double acc = 0.3;
    for (const auto& ev : base.events()) {
        acc += std::abs(ev.value) * 0.1;
        mono.push_back({ev.time, acc});
    }
    ClockProcess rough = regularize_clock(ClockProcess(CadlagPath(0.3, mono)), grid);
    auto h = SampledIntegrand::from_function([](double) { return 1.234567890123; }, 2.0);
    AveragedIntegrand hn = averaging_operator(h, rough, 5, grid);
    for (const auto& ev : hn.values.events()) {
        CHECK(ev.value == 1.234567890123);
    }
}

TEST_CASE("averaging operator ramps linearly over an indicator edge") {
    // h = 1 on (1/4, 1], A(t) = t: H^n climbs linearly from 0 at 1/4 to 1 at
    // 1/4 + 1/n. Window sums on the dyadic grid make this exact.
    const int e = 12;
    const auto grid = grid_times(e);
    ClockProcess reg = regularize_clock(ClockProcess(CadlagPath(0.0)), grid);
    auto h = SampledIntegrand::from_function(
        [](double t) { return t > 0.25 && t <= 1.0 ? 1.0 : 0.0; }, 1.0);
    const int n = 4;
    AveragedIntegrand hn = averaging_operator(h, reg, n, grid);
    CHECK(std::abs(hn.values.value_at(0.375) - 0.5) <= 1e-12);
    for (double t : grid) {
        if (t == 0.0) continue;
        double expected;
        if (t <= 0.25) {
            expected = 0.0;
        } else if (t < 0.5) {
            expected = (t - 0.25) * n;
        } else {
            expected = 1.0;
        }
        CHECK(std::abs(hn.values.value_at(t) - expected) <= 1e-12);
    }
}

TEST_CASE("averaging operator weights a clock jump") {
    // A = t plus a unit jump at 1/2, h = 1 on [1/2, 1]. The window ending at
    // 1/2 sees mass 1/n + 1 and numerator m + 1, so on the mesh-m skeleton
    // H^n(1/2) = (1 + m) / (1 + 1/n); the continuum value is n/(n+1).
    const int e = 12;
    const double m = std::ldexp(1.0, -e);
    const auto grid = grid_times(e);
    ClockProcess clock(skeleton(e, [](double t) { return t < 0.5 ? t : t + 1.0; }));
    auto h = SampledIntegrand::from_function(
        [](double t) { return t >= 0.5 ? 1.0 : 0.0; }, 1.0);
    for (int n : {2, 4, 16}) {
        AveragedIntegrand hn = averaging_operator(h, clock, n, grid);
        const double discrete = (1.0 + m) / (1.0 + 1.0 / n);
        CHECK(std::abs(hn.values.value_at(0.5) - discrete) <= 1e-12);
        CHECK(std::abs(hn.values.value_at(0.5) - n / (n + 1.0)) <= 2.0 * m);
    }
}

TEST_CASE("averaging operator shifts a linear integrand by half a window") {
    // For h(t) = c0 + c1 t and A(t) = t, the window average over (t-w, t] on
    // a mesh-m grid is exactly h evaluated at t - (w - m)/2.
    const int e = 10;
    const double m = std::ldexp(1.0, -e);
    const auto grid = grid_times(e);
    const ClockProcess reg = regularize_clock(ClockProcess(CadlagPath(0.0)), grid);
    const double c0 = 0.3, c1 = 0.5;
    auto h = SampledIntegrand::from_function([=](double t) { return c0 + c1 * t; }, 1.0);
    double prev_gap = 1.0;
    for (int n : {4, 8, 16, 32}) {
        const double w = 1.0 / n;
        AveragedIntegrand hn = averaging_operator(h, reg, n, grid);
        double max_gap = 0.0;
        for (double t : grid) {
            if (t < w) continue;  // below w the window is clipped at 0
            const double expected = c0 + c1 * (t - (w - m) / 2.0);
            CHECK(std::abs(hn.values.value_at(t) - expected) <= 1e-12);
            max_gap = std::max(max_gap, std::abs(hn.values.value_at(t) - h(t)));
        }
        CHECK(max_gap <= c1 * w / 2.0 + 1e-12);  // pointwise convergence to h
        CHECK(max_gap <= prev_gap);
        prev_gap = max_gap;
    }
}

TEST_CASE("averaging operator never exceeds the source bound") {
    std::mt19937_64 rng(31);
    const auto grid = grid_times(8);
    for (int rep = 0; rep < 20; ++rep) {
        CadlagPath base = random_step_path(rng, 0.0, 30);
        std::vector<PathEvent> mono;
        double acc = 0.1;
        for (const auto& ev : base.events()) {
            acc += std::abs(ev.value) * 0.05;
            mono.push_back({ev.time, acc});
        }
        ClockProcess reg = regularize_clock(ClockProcess(CadlagPath(0.1, mono)), grid);
        const double c = 2.0;
        auto h = SampledIntegrand::from_function(
            [](double t) { return 2.0 * std::sin(37.0 * t); }, c);
        for (int n : {1, 3, 8, 64}) {
            AveragedIntegrand hn = averaging_operator(h, reg, n, grid);
            CHECK(hn.values.total_variation(1.0) < 1e9);
            for (const auto& ev : hn.values.events()) {
                CHECK(std::abs(ev.value) <= c);
            }
        }
    }
}

TEST_CASE("averaging operator L1 error for the indicator is at most 2/n") {
    const int e = 12;
    const auto grid = grid_times(e);
    ClockProcess reg = regularize_clock(ClockProcess(CadlagPath(0.0)), grid);
    auto h = SampledIntegrand::from_function(
        [](double t) { return t > 0.25 && t <= 1.0 ? 1.0 : 0.0; }, 1.0);
    double prev_err = 2.0;
    for (int n : {4, 8, 16, 32}) {
        AveragedIntegrand hn = averaging_operator(h, reg, n, grid);
        double err = 0.0;
        double prev_a = reg.value_at(0.0);
        for (double t : grid) {
            if (t == 0.0) continue;
            const double da = reg.value_at(t) - prev_a;
            err += std::abs(hn.values.value_at(t) - h(t)) * da;
            prev_a = reg.value_at(t);
        }
        CHECK(err <= 2.0 / n);
        CHECK(err <= prev_err + 1e-15);
        prev_err = err;
    }
}

TEST_CASE("averaging operator input validation") {
    const auto grid = grid_times(4);
    ClockProcess reg = regularize_clock(ClockProcess(CadlagPath(0.0)), grid);
    auto h = SampledIntegrand::from_function([](double) { return 1.0; }, 1.0);
    CHECK_THROWS_AS(averaging_operator(h, reg, 0, grid), std::invalid_argument);
    std::vector<double> unsorted{0.0, 0.5, 0.25};
    CHECK_THROWS_AS(averaging_operator(h, reg, 2, unsorted), std::invalid_argument);
    // A clock with no mass on the eval grid is an internal error.
    ClockProcess empty(CadlagPath(0.0));
    CHECK_THROWS_AS(averaging_operator(h, empty, 2, grid), std::logic_error);
}

TEST_CASE("ibp integral reduces to the integrator for constant 1") {
    std::mt19937_64 rng(41);
    CadlagPath x = random_step_path(rng, 0.0, 60);
    while (x.events().empty()) x = random_step_path(rng, 0.0, 60);
    // H^n identically 1 from the first event time on, jumping there from 0.
    const double t1 = x.events().front().time;
    AveragedIntegrand hn{1, CadlagPath(0.0, {{t1, 1.0}})};
    for (double t : {t1, 0.5, 0.75, 1.0}) {
        if (t < t1) continue;
        CHECK(ibp_integral(hn, x, t) == x.value_at(t));
    }
}

TEST_CASE("ibp integral equals the Stieltjes sum for step pairs") {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 200; ++rep) {
        CadlagPath x = random_step_path(rng, 0.0, 40);
        CadlagPath hpath = random_step_path(rng, 0.0, 40);
        AveragedIntegrand hn{1, hpath};
        // Independent oracle: direct long-double sum of hn dX over x's events.
        for (double t : {0.33, 0.8, 1.0}) {
            long double sum = 0.0;
            long double prev = x.initial_value();
            for (const auto& ev : x.events()) {
                if (ev.time > t) break;
                sum += static_cast<long double>(hpath.value_at(ev.time)) *
                       (static_cast<long double>(ev.value) - prev);
                prev = ev.value;
            }
            CHECK(std::abs(ibp_integral(hn, x, t) - static_cast<double>(sum)) <= 1e-12);
        }
    }
}

TEST_CASE("ibp path agrees with the scalar form") {
    std::mt19937_64 rng(47);
    CadlagPath x = random_step_path(rng, 0.0, 50);
    CadlagPath hpath = random_step_path(rng, 0.0, 50);
    AveragedIntegrand hn{1, hpath};
    std::vector<double> eval = grid_times(6);
    CadlagPath y = ibp_integral_path(hn, x, eval);
    for (double t : eval) {
        CHECK(y.value_at(t) == doctest::Approx(ibp_integral(hn, x, t)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(ibp_integral(hn, CadlagPath(1.0), 1.0), std::invalid_argument);
}

TEST_CASE("jump truncation splits off the large jumps") {
    CadlagPath single(0.0, {{0.25, 0.1}, {0.5, 3.1}, {0.75, 3.2}});
    JumpDecomposition d = jump_truncation(single);
    REQUIRE(d.check.events().size() == 1);
    CHECK(d.check.events()[0].time == 0.5);
    CHECK(d.check.value_at(1.0) == 3.0);
    CHECK(d.remainder.value_at(0.4) == 0.1);
    CHECK(d.remainder.value_at(0.6) == doctest::Approx(0.1).epsilon(1e-14));

    CadlagPath small(0.0, {{0.3, 0.9}, {0.7, 0.2}});
    JumpDecomposition ds = jump_truncation(small);
    CHECK(ds.check.events().empty());
    CHECK(ds.remainder.value_at(1.0) == small.value_at(1.0));

    CadlagPath mixed(0.0, {{0.2, 0.5}, {0.6, -1.5}});
    JumpDecomposition dm = jump_truncation(mixed);
    REQUIRE(dm.check.jumps().size() == 1);
    CHECK(dm.check.jumps()[0].value == -2.0);
}

TEST_CASE("jump truncation reconstruction and remainder bound") {
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 100; ++rep) {
        CadlagPath x = random_step_path(rng, 0.0, 60);
        for (double threshold : {1.0, 0.5}) {
            JumpDecomposition d = jump_truncation(x, threshold);
            for (const auto& ev : x.events()) {
                CHECK(std::abs(d.check.value_at(ev.time) + d.remainder.value_at(ev.time) -
                               ev.value) <= 1e-12);
            }
            for (const auto& j : d.remainder.jumps()) {
                CHECK(std::abs(j.value) <= threshold + 1e-12);
            }
            for (const auto& j : d.check.jumps()) {
                CHECK(std::abs(j.value) > threshold);
            }
        }
    }
}

TEST_CASE("integrand truncation clips at the level") {
    auto h10 = SampledIntegrand::from_function([](double) { return 10.0; });
    auto c5 = integrand_truncation(h10, 5.0);
    CHECK(c5(0.3) == 0.0);
    CHECK(c5.bound().value() == 5.0);

    auto small = SampledIntegrand::from_function([](double t) { return std::sin(t); });
    auto cs = integrand_truncation(small, 2.0);
    for (double t : {0.0, 0.4, 1.0}) CHECK(cs(t) == std::sin(t));

    auto grow = SampledIntegrand::from_function([](double t) { return 1.0 / (1.0 - t); });
    auto cg = integrand_truncation(grow, 4.0);
    CHECK(cg(0.5) == 2.0);
    CHECK(cg(0.75) == 4.0);
    CHECK(cg(0.8) == 0.0);
    CHECK(cg(1.0) == 0.0);

    CHECK_THROWS_AS(integrand_truncation(h10, 0.0), std::invalid_argument);
    CHECK(cs.mode() == SampleMode::AtPoint);
}
