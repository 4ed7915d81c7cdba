#include "pathint/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pathint/compensated.hpp"
#include "pathint/rng.hpp"

namespace pathint {

using detail::Acc;

namespace {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid number '" + s + "' in " + what);
    }
}

} // namespace

TimeChange TimeChange::parse(const std::string& spec) {
    TimeChange tc;
    tc.spec_ = spec;
    if (spec.rfind("linear:", 0) == 0) {
        tc.kind_ = Kind::Linear;
        tc.param_ = parse_number(spec.substr(7), "time change spec");
        if (!(tc.param_ >= 0.0)) {
            throw ConfigError("time change 'linear:k' needs k >= 0: " + spec);
        }
    } else if (spec.rfind("power:", 0) == 0) {
        tc.kind_ = Kind::Power;
        tc.param_ = parse_number(spec.substr(6), "time change spec");
        if (!(tc.param_ >= 1.0)) {
            throw ConfigError("time change 'power:a' needs a >= 1: " + spec);
        }
    } else if (spec.rfind("piecewise:", 0) == 0) {
        tc.kind_ = Kind::Piecewise;
        // Format: piecewise:[(t,v),(t,v),...]
        std::string body = spec.substr(10);
        if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
            throw ConfigError("piecewise time change needs [(t,v),...]: " + spec);
        }
        body = body.substr(1, body.size() - 2);
        std::size_t pos = 0;
        double prev_t = 0.0, prev_v = 0.0;
        while (pos < body.size()) {
            if (body[pos] == ',') { ++pos; continue; }
            if (body[pos] != '(') throw ConfigError("bad knot in " + spec);
            std::size_t close = body.find(')', pos);
            if (close == std::string::npos) throw ConfigError("bad knot in " + spec);
            std::string pair = body.substr(pos + 1, close - pos - 1);
            std::size_t comma = pair.find(',');
            if (comma == std::string::npos) throw ConfigError("bad knot in " + spec);
            double t = parse_number(pair.substr(0, comma), "piecewise knot");
            double v = parse_number(pair.substr(comma + 1), "piecewise knot");
            if (!(t > prev_t && t <= 1.0)) {
                throw ConfigError("piecewise knot times must increase within (0,1]: " + spec);
            }
            if (!(v >= prev_v)) {
                throw ConfigError("piecewise knot values must be nondecreasing: " + spec);
            }
            tc.knots_.push_back({t, v});
            prev_t = t;
            prev_v = v;
            pos = close + 1;
        }
        if (tc.knots_.empty()) {
            throw ConfigError("piecewise time change needs at least one knot: " + spec);
        }
    } else {
        throw ConfigError("unknown time change spec '" + spec + "'");
    }
    return tc;
}

TimeChange TimeChange::linear(double slope) {
    return parse("linear:" + std::to_string(slope));
}

double TimeChange::operator()(double t) const {
    switch (kind_) {
        case Kind::Linear:
            return param_ * t;
        case Kind::Power:
            return std::pow(t, param_);
        case Kind::Piecewise: {
            double t0 = 0.0, v0 = 0.0;
            for (const PathEvent& k : knots_) {
                if (t <= k.time) {
                    return v0 + (k.value - v0) * (t - t0) / (k.time - t0);
                }
                t0 = k.time;
                v0 = k.value;
            }
            return v0;  // flat beyond the last knot
        }
    }
    return 0.0;
}

Scenario Scenario::time_changed_bm(TimeChange f, int grid_exponent,
                                   std::uint64_t seed, std::string id) {
    if (std::abs(f(0.0)) != 0.0) {
        throw ConfigError("time change must vanish at 0");
    }
    Scenario s;
    s.kind_ = TimeChangedBmParams{std::move(f)};
    s.grid_exponent_ = grid_exponent;
    s.seed_ = seed;
    s.id_ = id.empty()
                ? "time_changed_bm[" + std::get<TimeChangedBmParams>(s.kind_).f.spec() + "]"
                : std::move(id);
    if (grid_exponent < 1 || grid_exponent > 24) {
        throw ConfigError("grid_exponent must lie in [1,24]");
    }
    return s;
}

Scenario Scenario::jump_diffusion(JumpDiffusionParams params, int grid_exponent,
                                  std::uint64_t seed, std::string id) {
    if (!(params.vol >= 0.0) || !(params.jump_rate >= 0.0) || !(params.jump_bound >= 0.0)) {
        throw ConfigError("jump diffusion needs vol, jump_rate, jump_bound >= 0");
    }
    Scenario s;
    s.kind_ = params;
    s.grid_exponent_ = grid_exponent;
    s.seed_ = seed;
    s.id_ = id.empty() ? "jump_diffusion" : std::move(id);
    if (grid_exponent < 1 || grid_exponent > 24) {
        throw ConfigError("grid_exponent must lie in [1,24]");
    }
    return s;
}

Scenario Scenario::from_json(const nlohmann::json& j, std::uint64_t default_seed) {
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
    const std::string kind = j.value("kind", std::string());
    const int e = j.value("grid_exponent", 14);
    const std::uint64_t seed = j.value("seed", default_seed);
    const std::string id = j.value("id", std::string());
    if (kind == "time_changed_bm") {
        if (!j.contains("f")) throw ConfigError("time_changed_bm scenario needs field 'f'");
        return time_changed_bm(TimeChange::parse(j.at("f").get<std::string>()), e, seed, id);
    }
    if (kind == "jump_diffusion") {
        JumpDiffusionParams p;
        p.drift = j.value("drift", 0.0);
        p.vol = j.value("vol", 0.0);
        p.jump_rate = j.value("jump_rate", 0.0);
        p.jump_bound = j.value("jump_bound", 0.0);
        return jump_diffusion(p, e, seed, id);
    }
    throw ConfigError("scenario field 'kind' must be time_changed_bm or jump_diffusion");
}

nlohmann::json Scenario::to_json() const {
    nlohmann::json j;
    j["id"] = id_;
    j["grid_exponent"] = grid_exponent_;
    j["seed"] = seed_;
    if (const auto* bm = std::get_if<TimeChangedBmParams>(&kind_)) {
        j["kind"] = "time_changed_bm";
        j["f"] = bm->f.spec();
    } else {
        const auto& p = std::get<JumpDiffusionParams>(kind_);
        j["kind"] = "jump_diffusion";
        j["drift"] = p.drift;
        j["vol"] = p.vol;
        j["jump_rate"] = p.jump_rate;
        j["jump_bound"] = p.jump_bound;
    }
    return j;
}

std::vector<double> Scenario::grid_times() const {
    const std::size_t steps = std::size_t{1} << grid_exponent_;
    const double mesh = std::ldexp(1.0, -grid_exponent_);
    std::vector<double> t(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        t[i] = static_cast<double>(i) * mesh;
    }
    t.back() = 1.0;
    return t;
}

bool Scenario::is_jump_diffusion() const {
    return std::holds_alternative<JumpDiffusionParams>(kind_);
}

PathSample Scenario::sample_path(int index) const {
    const std::vector<double> grid = grid_times();
    const std::size_t steps = grid.size() - 1;
    PathRng rng(derive_stream_seed(seed_, static_cast<std::uint64_t>(index)));

    std::vector<double> values(grid.size(), 0.0);
    if (const auto* bm = std::get_if<TimeChangedBmParams>(&kind_)) {
        double prev_f = 0.0;
        for (std::size_t i = 1; i <= steps; ++i) {
            const double fi = bm->f(grid[i]);
            const double var = std::max(fi - prev_f, 0.0);
            values[i] = values[i - 1] + std::sqrt(var) * rng.gaussian();
            prev_f = fi;
        }
        return {CadlagPath::from_grid(grid, values), scenario_clock()};
    }

    const auto& p = std::get<JumpDiffusionParams>(kind_);
    const double mesh = std::ldexp(1.0, -grid_exponent_);
    const double sqrt_mesh = std::sqrt(mesh);
    std::vector<double> step_noise(steps + 1, 0.0);
    for (std::size_t i = 1; i <= steps; ++i) {
        step_noise[i] = p.drift * mesh + p.vol * sqrt_mesh * rng.gaussian();
    }
    // Compound Poisson arrivals rounded up to the containing grid cell's
    // right endpoint; a cell holds at most one jump, extra arrivals in the
    // same cell are resampled (the clock keeps advancing).
    if (p.jump_rate > 0.0 && p.jump_bound > 0.0) {
        std::vector<bool> occupied(steps + 1, false);
        double t = 0.0;
        while (true) {
            t += rng.exponential(p.jump_rate);
            if (t >= 1.0) break;
            auto cell = static_cast<std::size_t>(std::ceil(t / mesh));
            cell = std::min(cell, steps);
            if (cell == 0 || occupied[cell]) continue;
            occupied[cell] = true;
            step_noise[cell] += rng.symmetric_uniform(p.jump_bound);
        }
    }
    for (std::size_t i = 1; i <= steps; ++i) {
        values[i] = values[i - 1] + step_noise[i];
    }
    return {CadlagPath::from_grid(grid, values), scenario_clock()};
}

ClockProcess Scenario::scenario_clock() const {
    const std::vector<double> grid = grid_times();
    std::vector<double> values(grid.size());
    if (const auto* bm = std::get_if<TimeChangedBmParams>(&kind_)) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            values[i] = bm->f(grid[i]);
        }
    } else {
        const auto& p = std::get<JumpDiffusionParams>(kind_);
        double small_jump_L2 = 0.0;  // E[min(J^2, 1)] for J uniform on [-b, b]
        if (p.jump_bound > 0.0) {
            const double b = p.jump_bound;
            small_jump_L2 = b <= 1.0 ? b * b / 3.0 : 1.0 - 2.0 / (3.0 * b);
        }
        const double kappa =
            std::ceil(std::abs(p.drift) + p.vol * p.vol + p.jump_rate * small_jump_L2);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            values[i] = kappa * grid[i];
        }
    }
    return ClockProcess(CadlagPath::from_grid(grid, values));
}

double reference_ito_integral(const SampledIntegrand& h, const PathSample& p, double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::domain_error("reference_ito_integral: t outside [0,1]");
    }
    Acc acc;
    double prev_time = 0.0;
    double prev_val = p.x.initial_value();
    for (const PathEvent& e : p.x.events()) {
        if (e.time > t) break;
        acc.add_scaled_diff(h(prev_time), e.value, prev_val);
        prev_time = e.time;
        prev_val = e.value;
    }
    return acc.value();
}

CadlagPath reference_ito_integral_path(const SampledIntegrand& h, const PathSample& p) {
    Acc acc;
    double prev_time = 0.0;
    double prev_val = p.x.initial_value();
    std::vector<PathEvent> out;
    out.reserve(p.x.events().size());
    for (const PathEvent& e : p.x.events()) {
        acc.add_scaled_diff(h(prev_time), e.value, prev_val);
        prev_time = e.time;
        prev_val = e.value;
        out.push_back({e.time, acc.value()});
    }
    return CadlagPath(0.0, std::move(out));
}

} // namespace pathint
