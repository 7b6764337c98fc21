#ifndef HORIZON_CALC_TOOLS_COMMANDS_HPP
#define HORIZON_CALC_TOOLS_COMMANDS_HPP

// Subcommands. Each writes its CSVs and a manifest.json into the output
// directory and returns the process exit code.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace hcalc::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

/// 17 significant digits, enough to round-trip a double.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& header) : path_(path), out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        out_ << header << '\n';
    }

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    static std::string cell(double v) { return fmt(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(bool b) { return b ? "1" : "0"; }
    template <class Int>
        requires std::is_integral_v<Int>
    static std::string cell(Int v) { return std::to_string(v); }

    std::filesystem::path path_;
    std::ofstream out_;
};

struct RunContext {
    RunConfig config;
    std::filesystem::path out_dir = ".";
    std::string subcommand;
    std::vector<std::string> outputs;
};

inline void write_manifest(const RunContext& ctx, std::size_t n_steps) {
    const std::string canonical = to_json(ctx.config).dump();
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    const bool market_run = ctx.subcommand == "simulate" || ctx.subcommand == "optimize";
    json m = {
        {"subcommand", ctx.subcommand},
        {"engine_version", kVersion},
        {"config_digest", digest},
        {"config", to_json(ctx.config)},
        {"seed", market_run ? ctx.config.simulation.seed : ctx.config.verify.seed},
        {"grid", {{"n_steps", n_steps}, {"steps_per_unit", ctx.config.simulation.steps}}},
        {"paths", market_run ? ctx.config.simulation.paths : ctx.config.verify.n_scenarios},
        {"timestamp", stamp},
        {"outputs", ctx.outputs},
    };
    std::ofstream(ctx.out_dir / "manifest.json") << m.dump(2) << '\n';
}

inline GalleryReport gallery_with_rows(CsvWriter& csv) {
    const GalleryReport g = counterexample_gallery();
    for (const auto& p : g.probes)
        csv.row("stieltjes_probe", p.t, p.value, p.exact, p.rel_error <= 0.02);
    for (const auto& [n, v] : g.growth)
        csv.row("stieltjes_last_member", static_cast<double>(n), v, std::log(static_cast<double>(n)), true);
    csv.row("stieltjes_closed_divergence", 1.0, g.divergence_node ? static_cast<double>(*g.divergence_node) : -1.0,
            64.0, g.divergence_node == std::size_t{64});
    csv.row("bstar_bracket_sup", 0.0, g.bstar_bracket_sup, 0.0, g.bstar_bracket_sup == 0.0);
    csv.row("bstar_grid_bracket_sup", 0.0, g.bstar_grid_bracket_sup, 0.0, true);
    csv.row("bstar_sup_abs", 0.0, g.bstar_sup_abs, 0.0, g.bstar_sup_abs > 0.0);
    csv.row("bstar_fcs_valid", 0.0, g.bstar_fcs_valid ? 1.0 : 0.0, 1.0, g.bstar_fcs_valid);
    csv.row("bstar_inner", 0.0, g.bstar_inner.is_inner() ? 1.0 : 0.0, 0.0, !g.bstar_inner.is_inner());
    for (const auto& [t, v] : g.step_values) csv.row("step_value", t, v, compensator_step(t), v == compensator_step(t));
    return g;
}

inline int run_gallery(RunContext& ctx, std::ostream& log) {
    CsvWriter csv(ctx.out_dir / "gallery.csv", "item,probe,value,expected,pass");
    const GalleryReport g = gallery_with_rows(csv);
    ctx.outputs.push_back("gallery.csv");
    write_manifest(ctx, g.stieltjes_steps);
    log << "stieltjes " << (g.stieltjes_pass() ? "pass" : "FAIL") << "\n"
        << "bstar     " << (g.bstar_pass() ? "pass" : "FAIL") << "\n"
        << "step      " << (g.step_pass() ? "pass" : "FAIL") << "\n";
    return g.all_pass() ? kExitPass : kExitFail;
}

inline int run_verify(RunContext& ctx, std::ostream& log) {
    const RunConfig& rc = ctx.config;
    const SuiteReport suite = identity_suite(rc.verify.seed, to_suite_sizes(rc.verify));
    CsvWriter csv(ctx.out_dir / "verify.csv", "law,max_residual,tolerance,pass");
    for (const LawResult& l : suite.laws) csv.row(l.law, l.max_residual, l.tolerance, l.pass);
    const GalleryReport g = counterexample_gallery();
    const double probe_err = [&] {
        for (const auto& p : g.probes)
            if (p.t == 1.0 - 0x1.0p-6) return p.rel_error;
        return 1.0;
    }();
    csv.row(std::string("gallery_stieltjes_probe"), probe_err, 0.02, g.stieltjes_pass());
    csv.row(std::string("gallery_bstar_bracket"), g.bstar_bracket_sup, 0.0, g.bstar_pass());
    csv.row(std::string("gallery_step_values"), 0.0, 0.0, g.step_pass());
    ctx.outputs.push_back("verify.csv");
    write_manifest(ctx, rc.verify.n_steps);

    std::size_t failed = 0;
    for (const LawResult& l : suite.laws) failed += l.pass ? 0 : 1;
    failed += g.stieltjes_pass() ? 0 : 1;
    failed += g.bstar_pass() ? 0 : 1;
    failed += g.step_pass() ? 0 : 1;
    if (failed == 0) {
        log << suite.laws.size() << " laws and 3 gallery checks pass\n";
        return kExitPass;
    }
    log << failed << " check(s) failed\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-36s %-24s %-12s\n", "law", "max_residual", "tolerance");
    log << line;
    for (const LawResult& l : suite.laws)
        if (!l.pass) {
            std::snprintf(line, sizeof line, "%-36s %-24s %-12s\n", l.law.c_str(), fmt(l.max_residual).c_str(),
                          fmt(l.tolerance).c_str());
            log << line;
        }
    if (!g.stieltjes_pass()) log << "gallery_stieltjes_probe\n";
    if (!g.bstar_pass()) log << "gallery_bstar_bracket\n";
    if (!g.step_pass()) log << "gallery_step_values\n";
    return kExitFail;
}

/// Market paths in chunks; rows are written in path order.
inline int run_simulate(RunContext& ctx, std::ostream& log) {
    const market::MarketConfig cfg = to_market(ctx.config);
    cfg.validate();
    const ScenarioBatch batch(cfg.paths, cfg.seed);
    const auto cf = market::closed_form_strategy(cfg);
    CsvWriter stock(ctx.out_dir / "stock.csv", "path_id,node,time,price,in_set");
    CsvWriter wealth(ctx.out_dir / "wealth.csv", "path_id,node,time,wealth,fraction");
    CsvWriter strategy(ctx.out_dir / "strategy.csv", "path_id,node,time,shares,fraction");
    std::size_t n_steps = 0;
    std::size_t exited = 0;
    double sf = 0.0;
    constexpr std::size_t chunk = 256;
    for (std::size_t first = 0; first < cfg.paths; first += chunk) {
        const std::size_t count = std::min(chunk, cfg.paths - first);
        const auto mp = market::build_market_processes(cfg, batch, first, count);
        const auto st = market::simulate_stock(cfg, mp);
        const auto frac = market::fraction_process(cf.w, mp);
        const auto wr = market::wealth_from_fractions(frac, st.price, cfg.x0);
        sf = std::max(sf, market::self_financing_residual(wr.wealth, wr.shares, st.price, cfg.x0));
        const TimeGrid& grid = mp.grid;
        n_steps = grid.n_steps();
        const CoupledLevel& top = st.levels[st.levels.size() - 1];
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t id = first + i;
            exited += mp.set.is_full(i) ? 0 : 1;
            for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
                const bool in = mp.set.contains(i, k);
                stock.row(id, k, grid.time(k), in ? st.price.at(i, k) : top.paths[i][k], in);
            }
            for (std::size_t k = 0; k < mp.set.section_size(i); ++k) {
                wealth.row(id, k, grid.time(k), wr.wealth.at(i, k), frac.at(i, k));
                strategy.row(id, k, grid.time(k), wr.shares.at(i, k), frac.at(i, k));
            }
        }
    }
    ctx.outputs = {"stock.csv", "wealth.csv", "strategy.csv"};
    write_manifest(ctx, n_steps);
    log << cfg.paths << " paths, " << n_steps << " steps, " << exited << " exited before the horizon, "
        << "self-financing residual " << fmt(sf) << "\n";
    return kExitPass;
}

inline int run_optimize(RunContext& ctx, std::ostream& log) {
    const market::MarketConfig cfg = to_market(ctx.config);
    cfg.validate();
    const auto cf = market::closed_form_strategy(cfg);
    const auto grid = market::fraction_grid(ctx.config.simulation.w_lo, ctx.config.simulation.w_hi,
                                            ctx.config.simulation.w_step);
    CsvWriter csv(ctx.out_dir / "optimize.csv",
                  "period,closed_form_w,oracle_w,elu_at_closed_form,elu_at_oracle,stderr");
    for (std::size_t n = 1; n <= cfg.n_periods(); ++n) {
        const auto oracle = market::grid_search_oracle(cfg, n, grid);
        const auto at_cf = market::expected_log_utility(cf.w[n - 1], cfg, n);
        const auto& best = oracle.estimates[oracle.argmax];
        csv.row(n, cf.w[n - 1], oracle.best_w, at_cf.mean, best.mean, best.std_error);
        log << "period " << n << ": closed form " << fmt(cf.w[n - 1]) << ", oracle " << fmt(oracle.best_w) << "\n";
    }
    ctx.outputs.push_back("optimize.csv");
    write_manifest(ctx, market::market_grid(cfg).n_steps());
    return kExitPass;
}

}  // namespace hcalc::cli

#endif
