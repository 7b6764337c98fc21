#ifndef HORIZON_CALC_TOOLS_RUN_CONFIG_HPP
#define HORIZON_CALC_TOOLS_RUN_CONFIG_HPP

// JSON run configuration: sections "market", "simulation", "verify".
// Every problem is collected before anything is thrown.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "horizon_calc/horizon_calc.hpp"

namespace hcalc::cli {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string s = "invalid configuration:";
        for (const auto& x : p) s += "\n  " + x;
        return s;
    }
    std::vector<std::string> problems_;
};

struct ExitLawSpec {
    std::string kind = "none";
    double rate = 0.0;
    double lo = 0.0, hi = 0.0;
    double shape = 0.0, scale = 0.0;
    std::vector<std::pair<double, double>> points;  // kind "table"
};

struct SimulationOptions {
    std::size_t paths = 10000;
    std::size_t steps = 4096;  // per unit time
    std::uint64_t seed = 0;
    double w_lo = 0.0;
    double w_hi = 4.0;
    double w_step = 0.1;
};

struct VerifyOptions {
    std::uint64_t seed = 0;
    std::size_t n_steps = 16;
    std::size_t n_scenarios = 200;
    std::size_t n_sets = 10;
};

struct RunConfig {
    double s0 = 1.0;
    double x0 = 1.0;
    double mu_star = 0.08;
    double b = 1.0;
    std::vector<double> sigma{0.2};
    std::vector<double> a{1.0};
    ExitLawSpec exit_law{"exponential", 0.69314718055994531};
    SimulationOptions simulation;
    VerifyOptions verify;
};

/// Piecewise-linear CDF through (t, F) points, constant beyond the ends.
inline std::function<double(double)> table_cdf(std::vector<std::pair<double, double>> pts) {
    return [pts = std::move(pts)](double t) {
        if (pts.empty() || t < pts.front().first) return 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (t <= pts[i].first) {
                const auto [t0, f0] = pts[i - 1];
                const auto [t1, f1] = pts[i];
                return f0 + (f1 - f0) * (t - t0) / (t1 - t0);
            }
        return pts.back().second;
    };
}

inline market::ExitLaw to_exit_law(const ExitLawSpec& e) {
    if (e.kind == "exponential") return market::ExitLaw::exponential(e.rate);
    if (e.kind == "uniform") return market::ExitLaw::uniform(e.lo, e.hi);
    if (e.kind == "weibull") return market::ExitLaw::weibull(e.shape, e.scale);
    if (e.kind == "table") return market::ExitLaw::custom(table_cdf(e.points));
    return market::ExitLaw::never();
}

inline market::MarketConfig to_market(const RunConfig& rc) {
    market::MarketConfig m;
    m.s0 = rc.s0;
    m.x0 = rc.x0;
    m.mu_star = rc.mu_star;
    m.b = rc.b;
    m.sigma = rc.sigma;
    m.a = rc.a;
    m.exit_law = to_exit_law(rc.exit_law);
    m.paths = rc.simulation.paths;
    m.steps_per_unit = rc.simulation.steps;
    m.seed = rc.simulation.seed;
    return m;
}

inline SuiteSizes to_suite_sizes(const VerifyOptions& v) {
    SuiteSizes s;
    s.n_steps = v.n_steps;
    s.n_scenarios = v.n_scenarios;
    s.n_sets = v.n_sets;
    return s;
}

namespace detail {

class Reader {
public:
    std::vector<std::string> problems;

    void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool ok = false;
            for (const char* k : allowed) ok = ok || it.key() == k;
            if (!ok) problems.push_back(where + ": unknown key '" + it.key() + "'");
        }
    }

    void number(const json& obj, const std::string& where, const char* key, double& out, bool required = false) {
        if (!obj.contains(key)) {
            if (required) problems.push_back(where + "." + key + ": missing");
            return;
        }
        const json& v = obj.at(key);
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
            problems.push_back(where + "." + key + ": expected a finite number");
            return;
        }
        out = v.get<double>();
    }

    template <class Int>
    void count(const json& obj, const std::string& where, const char* key, Int& out) {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            problems.push_back(where + "." + key + ": expected a non-negative integer");
            return;
        }
        out = v.get<Int>();
    }

    void numbers(const json& obj, const std::string& where, const char* key, std::vector<double>& out,
                 bool required = false) {
        if (!obj.contains(key)) {
            if (required) problems.push_back(where + "." + key + ": missing");
            return;
        }
        const json& v = obj.at(key);
        if (!v.is_array()) {
            problems.push_back(where + "." + key + ": expected a list of numbers");
            return;
        }
        std::vector<double> tmp;
        for (const json& x : v) {
            if (!x.is_number()) {
                problems.push_back(where + "." + key + ": expected a list of numbers");
                return;
            }
            tmp.push_back(x.get<double>());
        }
        out = std::move(tmp);
    }

    const json* section(const json& root, const char* name) {
        if (!root.contains(name)) return nullptr;
        if (!root.at(name).is_object()) {
            problems.push_back(std::string(name) + ": expected an object");
            return nullptr;
        }
        return &root.at(name);
    }
};

inline void read_exit_law(Reader& r, const json& e, ExitLawSpec& out) {
    const std::string where = "market.exit_law";
    if (!e.is_object() || !e.contains("kind") || !e.at("kind").is_string()) {
        r.problems.push_back(where + ": expected an object with a string 'kind'");
        return;
    }
    out = ExitLawSpec{};
    out.kind = e.at("kind").get<std::string>();
    if (out.kind == "none") {
        r.check_keys(e, where, {"kind"});
    } else if (out.kind == "exponential") {
        r.check_keys(e, where, {"kind", "rate"});
        r.number(e, where, "rate", out.rate, true);
    } else if (out.kind == "uniform") {
        r.check_keys(e, where, {"kind", "lo", "hi"});
        r.number(e, where, "lo", out.lo, true);
        r.number(e, where, "hi", out.hi, true);
    } else if (out.kind == "weibull") {
        r.check_keys(e, where, {"kind", "shape", "scale"});
        r.number(e, where, "shape", out.shape, true);
        r.number(e, where, "scale", out.scale, true);
    } else if (out.kind == "table") {
        r.check_keys(e, where, {"kind", "points"});
        const bool shaped = e.contains("points") && e.at("points").is_array() && !e.at("points").empty();
        if (shaped) {
            for (const json& p : e.at("points")) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                    r.problems.push_back(where + ".points: expected [[t, F], ...]");
                    return;
                }
                out.points.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
            for (std::size_t i = 0; i < out.points.size(); ++i) {
                const auto [t, f] = out.points[i];
                if (t < 0.0 || f < 0.0 || f > 1.0)
                    r.problems.push_back(where + ".points: need t >= 0 and 0 <= F <= 1");
                if (i > 0 && (t <= out.points[i - 1].first || f < out.points[i - 1].second))
                    r.problems.push_back(where + ".points: t must increase and F must not decrease");
            }
        } else {
            r.problems.push_back(where + ".points: expected a non-empty list");
        }
    } else {
        r.problems.push_back(where + ".kind: unknown kind '" + out.kind +
                             "' (none, exponential, uniform, weibull, table)");
    }
}

}  // namespace detail

/// Parses and validates a configuration document. Absent sections and keys
/// keep their defaults; a market section must name its required keys.
inline RunConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }
    if (!root.is_object()) throw ConfigError({"top level must be an object"});

    RunConfig rc;
    detail::Reader r;
    r.check_keys(root, "config", {"market", "simulation", "verify"});

    if (const json* m = r.section(root, "market")) {
        r.check_keys(*m, "market", {"s0", "x0", "mu_star", "b", "sigma", "a", "exit_law"});
        r.number(*m, "market", "s0", rc.s0, true);
        r.number(*m, "market", "x0", rc.x0, true);
        r.number(*m, "market", "mu_star", rc.mu_star, true);
        r.number(*m, "market", "b", rc.b);
        r.numbers(*m, "market", "sigma", rc.sigma, true);
        r.numbers(*m, "market", "a", rc.a, true);
        if (m->contains("exit_law")) detail::read_exit_law(r, m->at("exit_law"), rc.exit_law);
        else r.problems.push_back("market.exit_law: missing");
    }
    if (const json* s = r.section(root, "simulation")) {
        r.check_keys(*s, "simulation", {"paths", "steps", "seed", "w_grid"});
        r.count(*s, "simulation", "paths", rc.simulation.paths);
        r.count(*s, "simulation", "steps", rc.simulation.steps);
        r.count(*s, "simulation", "seed", rc.simulation.seed);
        if (s->contains("w_grid")) {
            const json& g = s->at("w_grid");
            if (!g.is_object()) {
                r.problems.push_back("simulation.w_grid: expected an object");
            } else {
                r.check_keys(g, "simulation.w_grid", {"lo", "hi", "step"});
                r.number(g, "simulation.w_grid", "lo", rc.simulation.w_lo);
                r.number(g, "simulation.w_grid", "hi", rc.simulation.w_hi);
                r.number(g, "simulation.w_grid", "step", rc.simulation.w_step);
            }
        }
    }
    if (const json* v = r.section(root, "verify")) {
        r.check_keys(*v, "verify", {"seed", "n_steps", "n_scenarios", "n_sets"});
        r.count(*v, "verify", "seed", rc.verify.seed);
        r.count(*v, "verify", "n_steps", rc.verify.n_steps);
        r.count(*v, "verify", "n_scenarios", rc.verify.n_scenarios);
        r.count(*v, "verify", "n_sets", rc.verify.n_sets);
    }

    auto problems = std::move(r.problems);
    // Semantic checks, named by key.
    if (problems.empty()) {
        const market::MarketConfig m = to_market(rc);
        for (std::size_t i = 0; i < m.sigma.size(); ++i)
            if (!(m.sigma[i] > 0.0)) problems.push_back("market.sigma[" + std::to_string(i) + "]: must be positive");
        for (std::size_t i = 0; i < m.a.size(); ++i) {
            if (!(m.a[i] > 0.0)) problems.push_back("market.a[" + std::to_string(i) + "]: must be positive");
            if (i > 0 && !(m.a[i] > m.a[i - 1]))
                problems.push_back("market.a[" + std::to_string(i) + "]: list must be strictly increasing");
        }
        if (m.a.empty()) problems.push_back("market.a: must list at least one period end");
        if (m.sigma.size() != m.a.size()) problems.push_back("market.sigma: length must match market.a");
        if (!(m.s0 > 0.0)) problems.push_back("market.s0: must be positive");
        if (!(m.x0 > 0.0)) problems.push_back("market.x0: must be positive");
        if (!(m.mu_star > 0.0)) problems.push_back("market.mu_star: must be positive");
        if (!(m.b > 0.0)) problems.push_back("market.b: must be positive");
        for (const auto& p : m.exit_law.problems()) problems.push_back("market." + p);
        if (rc.simulation.paths == 0) problems.push_back("simulation.paths: must be positive");
        if (rc.simulation.steps == 0) problems.push_back("simulation.steps: must be positive");
        if (!(rc.simulation.w_step > 0.0) || rc.simulation.w_hi < rc.simulation.w_lo)
            problems.push_back("simulation.w_grid: need step > 0 and hi >= lo");
        if (rc.verify.n_steps == 0) problems.push_back("verify.n_steps: must be positive");
        if (rc.verify.n_scenarios == 0) problems.push_back("verify.n_scenarios: must be positive");
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return rc;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Canonical form with every default filled in; the manifest digest is
/// taken over its compact dump.
inline json to_json(const RunConfig& rc) {
    json law = {{"kind", rc.exit_law.kind}};
    if (rc.exit_law.kind == "exponential") law["rate"] = rc.exit_law.rate;
    if (rc.exit_law.kind == "uniform") {
        law["lo"] = rc.exit_law.lo;
        law["hi"] = rc.exit_law.hi;
    }
    if (rc.exit_law.kind == "weibull") {
        law["shape"] = rc.exit_law.shape;
        law["scale"] = rc.exit_law.scale;
    }
    if (rc.exit_law.kind == "table") {
        json pts = json::array();
        for (const auto& [t, f] : rc.exit_law.points) pts.push_back({t, f});
        law["points"] = pts;
    }
    return {
        {"market",
         {{"s0", rc.s0}, {"x0", rc.x0}, {"mu_star", rc.mu_star}, {"b", rc.b}, {"sigma", rc.sigma}, {"a", rc.a},
          {"exit_law", law}}},
        {"simulation",
         {{"paths", rc.simulation.paths},
          {"steps", rc.simulation.steps},
          {"seed", rc.simulation.seed},
          {"w_grid", {{"lo", rc.simulation.w_lo}, {"hi", rc.simulation.w_hi}, {"step", rc.simulation.w_step}}}}},
        {"verify",
         {{"seed", rc.verify.seed},
          {"n_steps", rc.verify.n_steps},
          {"n_scenarios", rc.verify.n_scenarios},
          {"n_sets", rc.verify.n_sets}}},
    };
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace hcalc::cli

#endif
