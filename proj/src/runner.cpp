#include "pathint/runner.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pathint/convergence.hpp"

namespace pathint {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResolvedConfig {
    std::string experiment;
    std::vector<Scenario> scenarios;
    std::string integrand;
    std::vector<int> n_values;
    std::vector<int> levels;
    int fixed_n = 0;
    int num_paths = 0;
    std::uint64_t seed = 0;
    std::string output_dir;
    int threads = 1;
    int dump_paths = 0;
    double monotone_slack = 1.1;
    std::optional<double> final_median_max;
};

std::string sanitize_id(const std::string& id) {
    std::string out;
    out.reserve(id.size());
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
        out.push_back(ok ? c : '_');
    }
    return out;
}

std::vector<int> read_int_list(const json& j, const std::string& field) {
    if (!j.contains(field) || !j.at(field).is_array() || j.at(field).empty()) {
        throw ConfigError("config field '" + field + "' must be a nonempty integer array");
    }
    std::vector<int> out;
    int prev = 0;
    for (const auto& v : j.at(field)) {
        if (!v.is_number_integer()) {
            throw ConfigError("config field '" + field + "' must contain integers");
        }
        const int k = v.get<int>();
        if (k < 1 || k <= prev) {
            throw ConfigError("config field '" + field +
                              "' must be positive and strictly increasing");
        }
        out.push_back(k);
        prev = k;
    }
    return out;
}

ResolvedConfig resolve(const json& j, const RunOptions& opts) {
    ResolvedConfig cfg;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    cfg.experiment = j.value("experiment", std::string());
    const bool known = cfg.experiment == "approximation" || cfg.experiment == "truncation" ||
                       cfg.experiment == "aggregation" || cfg.experiment == "left_continuous" ||
                       cfg.experiment == "qv";
    if (!known) {
        throw ConfigError("config field 'experiment' must be one of approximation, "
                          "truncation, aggregation, left_continuous, qv");
    }

    if (!j.contains("num_paths") || !j.at("num_paths").is_number_integer() ||
        j.at("num_paths").get<long long>() < 1) {
        throw ConfigError("config field 'num_paths' must be an integer >= 1");
    }
    cfg.num_paths = j.at("num_paths").get<int>();

    cfg.seed = j.value("seed", std::uint64_t{0});

    if (!j.contains("scenarios") || !j.at("scenarios").is_array() || j.at("scenarios").empty()) {
        throw ConfigError("config field 'scenarios' must be a nonempty array");
    }
    for (const auto& sj : j.at("scenarios")) {
        cfg.scenarios.push_back(Scenario::from_json(sj, cfg.seed));
    }

    if (cfg.experiment == "truncation") {
        cfg.levels = read_int_list(j, "levels");
        if (!j.contains("fixed_n") || !j.at("fixed_n").is_number_integer() ||
            j.at("fixed_n").get<int>() < 1) {
            throw ConfigError("config field 'fixed_n' must be an integer >= 1");
        }
        cfg.fixed_n = j.at("fixed_n").get<int>();
    } else {
        cfg.n_values = read_int_list(j, "n_values");
    }

    if (cfg.experiment != "qv") {
        if (!j.contains("integrand") || !j.at("integrand").is_string()) {
            throw ConfigError("config field 'integrand' must be a string");
        }
        cfg.integrand = j.at("integrand").get<std::string>();
    }

    cfg.dump_paths = j.value("dump_paths", 0);
    if (cfg.dump_paths < 0) {
        throw ConfigError("config field 'dump_paths' must be >= 0");
    }

    if (j.contains("thresholds")) {
        const json& th = j.at("thresholds");
        if (!th.is_object()) throw ConfigError("config field 'thresholds' must be an object");
        cfg.monotone_slack = th.value("monotone_slack", 1.1);
        if (th.contains("final_median_max")) {
            cfg.final_median_max = th.at("final_median_max").get<double>();
        }
    }

    // Resolution order: CLI flag, then environment, then config, then default.
    cfg.output_dir = j.value("output_dir", std::string("out"));
    if (const char* env = std::getenv("PATHINT_OUTPUT_DIR")) cfg.output_dir = env;
    if (opts.output_dir) cfg.output_dir = *opts.output_dir;

    cfg.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("PATHINT_THREADS")) {
        cfg.threads = std::max(1, std::atoi(env));
    }
    if (opts.threads) cfg.threads = std::max(1, *opts.threads);
    return cfg;
}

void write_report_file(const fs::path& file, const ConvergenceReport& rep) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw ConfigError("cannot open output file " + file.string());
    ConvergenceReport::write_csv_header(os);
    rep.write_csv(os);
}

void dump_paths(const fs::path& dir, const Scenario& s, int count,
                std::vector<std::string>& outputs) {
    for (int i = 0; i < count; ++i) {
        const PathSample ps = s.sample_path(i);
        const std::string base = sanitize_id(s.id()) + "_" + std::to_string(i);
        for (const auto& [name, path] :
             {std::pair{"path_" + base + ".csv", &ps.x},
              std::pair{"clock_" + base + ".csv", &ps.clock.base()}}) {
            std::ofstream os(dir / name, std::ios::binary);
            if (!os) throw ConfigError("cannot open output file " + name);
            path->write_csv(os);
            outputs.push_back(name);
        }
    }
}

int check_reports(const std::vector<std::pair<std::string, ConvergenceReport>>& reports,
                  const ResolvedConfig& cfg, std::ostream& err) {
    int violations = 0;
    for (const auto& [file, rep] : reports) {
        if (!rep.monotone_decreasing(cfg.monotone_slack)) {
            err << "check failed: " << rep.scenario_id
                << ": median_sup_error not decreasing (slack " << cfg.monotone_slack
                << ")\n";
            ++violations;
        }
        if (cfg.final_median_max && !(rep.final_median() <= *cfg.final_median_max)) {
            err << "check failed: " << rep.scenario_id << ": final median "
                << rep.final_median() << " > " << *cfg.final_median_max << "\n";
            ++violations;
        }
    }
    return violations;
}

} // namespace

int run_experiment(const RunOptions& opts, std::ostream& out, std::ostream& err) {
    std::string text;
    {
        std::ifstream is(opts.config_path, std::ios::binary);
        if (!is) {
            err << "error: cannot read config file '" << opts.config_path << "'\n";
            return 3;
        }
        std::ostringstream ss;
        ss << is.rdbuf();
        text = ss.str();
    }

    json parsed;
    try {
        parsed = json::parse(text);
    } catch (const json::parse_error& e) {
        // Report the position as line:column for editor-friendly diagnostics.
        std::size_t line = 1, col = 1;
        const std::size_t limit = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        err << "error: " << opts.config_path << ":" << line << ":" << col
            << ": malformed JSON: " << e.what() << "\n";
        return 2;
    }

    try {
        const ResolvedConfig cfg = resolve(parsed, opts);
        fs::create_directories(cfg.output_dir);
        const fs::path dir(cfg.output_dir);

        const std::span<const int> keys =
            cfg.experiment == "truncation" ? std::span<const int>(cfg.levels)
                                           : std::span<const int>(cfg.n_values);
        std::optional<IntegrandSpec> integrand;
        if (!cfg.integrand.empty()) {
            integrand = IntegrandSpec::parse(cfg.integrand);
        }

        std::vector<std::pair<std::string, ConvergenceReport>> reports;
        if (cfg.experiment == "aggregation") {
            auto by_id = aggregation_experiment(cfg.scenarios, *integrand, keys,
                                                cfg.num_paths, cfg.threads);
            for (const Scenario& s : cfg.scenarios) {
                reports.emplace_back("report_" + sanitize_id(s.id()) + ".csv",
                                     std::move(by_id.at(s.id())));
            }
        } else {
            for (const Scenario& s : cfg.scenarios) {
                ConvergenceReport rep;
                if (cfg.experiment == "approximation") {
                    rep = approximation_experiment(s, *integrand, keys, cfg.num_paths,
                                                   cfg.threads);
                } else if (cfg.experiment == "truncation") {
                    rep = truncation_experiment(s, *integrand, keys, cfg.fixed_n,
                                                cfg.num_paths, cfg.threads);
                } else if (cfg.experiment == "left_continuous") {
                    rep = left_continuous_mode(s, *integrand, keys, cfg.num_paths,
                                               cfg.threads);
                } else {
                    rep = qv_experiment(s, keys, cfg.num_paths, cfg.threads);
                }
                reports.emplace_back("report_" + sanitize_id(s.id()) + ".csv",
                                     std::move(rep));
            }
        }

        std::vector<std::string> outputs;
        for (const auto& [file, rep] : reports) {
            write_report_file(dir / file, rep);
            outputs.push_back(file);
        }
        for (const Scenario& s : cfg.scenarios) {
            dump_paths(dir, s, cfg.dump_paths, outputs);
        }

        json manifest;
        manifest["experiment"] = cfg.experiment;
        manifest["integrand"] = cfg.integrand;
        manifest["num_paths"] = cfg.num_paths;
        manifest["seed"] = cfg.seed;
        manifest["output_dir"] = cfg.output_dir;
        manifest["dump_paths"] = cfg.dump_paths;
        if (cfg.experiment == "truncation") {
            manifest["levels"] = cfg.levels;
            manifest["fixed_n"] = cfg.fixed_n;
        } else {
            manifest["n_values"] = cfg.n_values;
        }
        manifest["thresholds"]["monotone_slack"] = cfg.monotone_slack;
        if (cfg.final_median_max) {
            manifest["thresholds"]["final_median_max"] = *cfg.final_median_max;
        }
        manifest["scenarios"] = json::array();
        for (const Scenario& s : cfg.scenarios) {
            manifest["scenarios"].push_back(s.to_json());
        }
        manifest["outputs"] = outputs;
        {
            std::ofstream os(dir / "manifest.json", std::ios::binary);
            if (!os) throw ConfigError("cannot open manifest.json");
            os << manifest.dump(2) << "\n";
        }

        for (const auto& [file, rep] : reports) {
            out << file << ": ";
            for (int n : rep.n_values) {
                out << "n=" << n << " median=" << rep.per_n.at(n).median_sup_error << "  ";
            }
            out << "\n";
        }

        if (opts.check && check_reports(reports, cfg, err) > 0) {
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace pathint
