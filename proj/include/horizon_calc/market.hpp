#ifndef HORIZON_CALC_MARKET_HPP
#define HORIZON_CALC_MARKET_HPP

// Sudden-stop market: one stock that exits at a random time tau, observed on
// B = [0, tau[. The investor re-plans at tau_n = a_n ^ tau; on period
// (a_{n-1}, a_n] the stock has return mu_n = (1 + (b-1) F(a_n)) mu* and
// volatility sigma_n, driven by its own Brownian motion N^(n).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "horizon_calc/bprocess.hpp"
#include "horizon_calc/errors.hpp"
#include "horizon_calc/grid_paths.hpp"
#include "horizon_calc/integration.hpp"
#include "horizon_calc/interval_sets.hpp"

namespace hcalc::market {

/// Distribution of the exit time. `never` puts all mass at +infinity.
class ExitLaw {
public:
    enum class Kind { never, exponential, uniform, weibull, custom };

    static ExitLaw never() { return ExitLaw(Kind::never); }
    static ExitLaw exponential(double rate) {
        ExitLaw l(Kind::exponential);
        l.p1_ = rate;
        return l;
    }
    static ExitLaw uniform(double lo, double hi) {
        ExitLaw l(Kind::uniform);
        l.p1_ = lo;
        l.p2_ = hi;
        return l;
    }
    static ExitLaw weibull(double shape, double scale) {
        ExitLaw l(Kind::weibull);
        l.p1_ = shape;
        l.p2_ = scale;
        return l;
    }
    /// Arbitrary CDF; sampled by bisection.
    static ExitLaw custom(std::function<double(double)> cdf) {
        ExitLaw l(Kind::custom);
        l.cdf_ = std::move(cdf);
        return l;
    }

    Kind kind() const noexcept { return kind_; }
    double param1() const noexcept { return p1_; }
    double param2() const noexcept { return p2_; }

    double cdf(double t) const {
        if (t <= 0.0) return kind_ == Kind::custom ? std::clamp(cdf_(t), 0.0, 1.0) : 0.0;
        switch (kind_) {
            case Kind::never: return 0.0;
            case Kind::exponential: return -std::expm1(-p1_ * t);
            case Kind::uniform: return t <= p1_ ? 0.0 : (t >= p2_ ? 1.0 : (t - p1_) / (p2_ - p1_));
            case Kind::weibull: return -std::expm1(-std::pow(t / p2_, p1_));
            case Kind::custom: return std::clamp(cdf_(t), 0.0, 1.0);
        }
        return 0.0;
    }

    /// Closed-form quantile where one exists; nullopt means "use bisection".
    std::optional<double> quantile(double u) const {
        switch (kind_) {
            case Kind::never: return std::numeric_limits<double>::infinity();
            case Kind::exponential: return -std::log1p(-u) / p1_;
            case Kind::uniform: return p1_ + u * (p2_ - p1_);
            case Kind::weibull: return p2_ * std::pow(-std::log1p(-u), 1.0 / p1_);
            case Kind::custom: return std::nullopt;
        }
        return std::nullopt;
    }

    /// Empty when the parameters are usable.
    std::vector<std::string> problems() const {
        std::vector<std::string> out;
        switch (kind_) {
            case Kind::never: break;
            case Kind::exponential:
                if (!(p1_ > 0.0)) out.emplace_back("exit_law.rate must be positive");
                break;
            case Kind::uniform:
                if (!(p1_ >= 0.0) || !(p2_ > p1_)) out.emplace_back("exit_law needs 0 <= lo < hi");
                break;
            case Kind::weibull:
                if (!(p1_ > 0.0)) out.emplace_back("exit_law.shape must be positive");
                if (!(p2_ > 0.0)) out.emplace_back("exit_law.scale must be positive");
                break;
            case Kind::custom:
                if (!cdf_) out.emplace_back("exit_law has no cdf");
                break;
        }
        return out;
    }

private:
    explicit ExitLaw(Kind k) : kind_(k) {}

    Kind kind_;
    double p1_ = 0.0;
    double p2_ = 0.0;
    std::function<double(double)> cdf_;
};

struct MarketConfig {
    double s0 = 1.0;
    double x0 = 1.0;
    double mu_star = 0.08;
    double b = 1.0;
    std::vector<double> sigma;
    std::vector<double> a;
    ExitLaw exit_law = ExitLaw::never();
    std::size_t paths = 10000;
    std::size_t steps_per_unit = 4096;
    std::uint64_t seed = 0;

    std::size_t n_periods() const noexcept { return a.size(); }

    /// Every problem found, in one pass.
    std::vector<std::string> problems() const {
        std::vector<std::string> out;
        if (!(s0 > 0.0)) out.emplace_back("s0 must be positive");
        if (!(x0 > 0.0)) out.emplace_back("x0 must be positive");
        if (!(mu_star > 0.0)) out.emplace_back("mu_star must be positive");
        if (!(b > 0.0)) out.emplace_back("b must be positive");
        if (a.empty()) out.emplace_back("a must list at least one period end");
        if (sigma.size() != a.size()) out.emplace_back("sigma and a must have the same length");
        for (std::size_t i = 0; i < sigma.size(); ++i)
            if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i]))
                out.emplace_back("sigma[" + std::to_string(i) + "] must be positive");
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!(a[i] > 0.0) || !std::isfinite(a[i]))
                out.emplace_back("a[" + std::to_string(i) + "] must be positive");
            if (i > 0 && !(a[i] > a[i - 1])) out.emplace_back("a must be strictly increasing");
        }
        for (auto& p : exit_law.problems()) out.push_back(p);
        if (paths == 0) out.emplace_back("paths must be positive");
        if (steps_per_unit == 0) out.emplace_back("steps must be positive");
        return out;
    }

    void validate() const {
        const auto p = problems();
        if (p.empty()) return;
        std::string msg = "invalid market config:";
        for (const auto& s : p) msg += "\n  " + s;
        throw ValidationError(msg);
    }
};

// ---------------------------------------------------------------------------
// Grid and period bookkeeping

/// Grid over [0, a_K] with steps_per_unit steps per unit time.
inline TimeGrid market_grid(const MarketConfig& cfg) {
    if (cfg.a.empty()) throw ValidationError("market grid needs at least one period");
    const double n = std::round(cfg.a.back() * static_cast<double>(cfg.steps_per_unit));
    return TimeGrid(cfg.a.back(), static_cast<std::size_t>(std::max(1.0, n)));
}

/// Node index of each period end a_n.
inline std::vector<std::size_t> period_end_nodes(const MarketConfig& cfg, const TimeGrid& grid) {
    std::vector<std::size_t> out;
    for (double an : cfg.a) out.push_back(grid.node_at_or_after(an));
    out.back() = grid.n_steps();
    return out;
}

/// 0-based period of each interval (t_{j-1}, t_j]; entry 0 (the atom) is period 0.
inline std::vector<std::size_t> interval_periods(const std::vector<std::size_t>& ends, std::size_t n_steps) {
    std::vector<std::size_t> p(n_steps + 1, 0);
    std::size_t cur = 0;
    for (std::size_t j = 1; j <= n_steps; ++j) {
        while (cur + 1 < ends.size() && j > ends[cur]) ++cur;
        p[j] = cur;
    }
    return p;
}

/// mu_n = [p_n + b (1 - p_n)] mu* with p_n = P(tau > a_n) = 1 - F(a_n).
inline std::vector<double> mu_sequence(const MarketConfig& cfg) {
    std::vector<double> mu;
    for (double an : cfg.a) mu.push_back((1.0 + (cfg.b - 1.0) * cfg.exit_law.cdf(an)) * cfg.mu_star);
    return mu;
}

// ---------------------------------------------------------------------------
// Exit time

inline constexpr std::uint64_t kExitTag = 0xE817;
inline constexpr std::uint64_t driver_tag(std::size_t period) { return 1 + period; }

/// Inverse-transform draw; bisection when the law has no closed quantile.
/// Returns +infinity for mass beyond every finite time.
inline double draw_exit_time(const ExitLaw& law, double u) {
    if (auto q = law.quantile(u)) return *q;
    double hi = 1.0;
    while (law.cdf(hi) < u) {
        hi *= 2.0;
        if (hi > 1e12) return std::numeric_limits<double>::infinity();
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (law.cdf(mid) < u ? lo : hi) = mid;
    }
    if (!std::isfinite(hi)) throw std::runtime_error("exit-time bisection failed");
    return hi;
}

struct ExitTimes {
    std::vector<double> exact;  // may be +infinity
    StoppingTime snapped;       // node at or after the draw, >= 1; infinity beyond the grid
};

/// Exit times for batch paths [first, first + count).
inline ExitTimes sample_exit_time(const MarketConfig& cfg, const TimeGrid& grid, const ScenarioBatch& batch,
                                  std::size_t first = 0, std::size_t count = 0) {
    if (count == 0) count = batch.n_paths() - first;
    ExitTimes out;
    out.exact.resize(count);
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) {
        CounterRng rng = batch.stream(first + i, kExitTag);
        const double tau = draw_exit_time(cfg.exit_law, rng.uniform());
        out.exact[i] = tau;
        idx[i] = tau > grid.horizon() ? StoppingTime::kInfinity
                                      : std::max<std::size_t>(1, grid.node_at_or_after(tau));
    }
    out.snapped = StoppingTime(std::move(idx));
    return out;
}

/// tau_n = a_n ^ tau on the grid.
inline FundamentalSequence terminal_times(const MarketConfig& cfg, const TimeGrid& grid, const ExitTimes& exit) {
    const auto ends = period_end_nodes(cfg, grid);
    std::vector<StoppingTime> ladder;
    for (std::size_t end : ends)
        ladder.push_back(meet(StoppingTime::constant(exit.snapped.n_scenarios(), end), exit.snapped));
    return FundamentalSequence(std::move(ladder));
}

/// B = [0, tau[ on the grid.
inline IntervalTypeSet sudden_stop_set(const TimeGrid& grid, const ExitTimes& exit) {
    return IntervalTypeSet(grid, exit.snapped, std::vector<bool>(exit.snapped.n_scenarios(), true));
}

/// Fraction of scenarios with tau_n < tau, i.e. a_n < tau.
inline std::vector<double> exclusion_frequencies(const MarketConfig& cfg, const ExitTimes& exit) {
    std::vector<double> out;
    for (double an : cfg.a) {
        std::size_t hits = 0;
        for (double t : exit.exact) hits += an < t ? 1 : 0;
        out.push_back(static_cast<double>(hits) / static_cast<double>(exit.exact.size()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Processes

struct MarketProcesses {
    TimeGrid grid;
    std::size_t first_path = 0;
    ExitTimes exit;
    IntervalTypeSet set;
    FundamentalSequence ladder;
    std::vector<std::size_t> period_ends;  // node of a_n
    std::vector<std::size_t> period;       // period of each interval
    std::vector<double> mu;                // per period
    std::vector<double> sigma;             // per period
    BPredictable mu_process;
    BPredictable sigma_process;
    BProcess driver;                       // concatenated M on B
    CoupledSequence driver_levels;         // (tau_n, M~^(n)) on the full grid
    /// increments[w][n][j]: dN^(n+1) over (t_{j-1}, t_j]; entry 0 unused.
    std::vector<std::vector<std::vector<double>>> increments;
};

/// Independent Brownian increments of every period driver for one path.
inline std::vector<std::vector<double>> driver_increments(const TimeGrid& grid, const ScenarioBatch& batch,
                                                          std::size_t path, std::size_t n_periods) {
    const double sd = std::sqrt(grid.dt());
    std::vector<std::vector<double>> inc(n_periods, std::vector<double>(grid.n_nodes(), 0.0));
    for (std::size_t n = 0; n < n_periods; ++n) {
        CounterRng rng = batch.stream(path, driver_tag(n));
        for (std::size_t j = 1; j < grid.n_nodes(); ++j) inc[n][j] = sd * rng.normal();
    }
    return inc;
}

/// Builds mu, sigma, M and the level drivers for batch paths
/// [first, first + count) (count 0 means the rest of the batch).
inline MarketProcesses build_market_processes(const MarketConfig& cfg, const ScenarioBatch& batch,
                                              std::size_t first = 0, std::size_t count = 0) {
    if (cfg.a.empty() || cfg.sigma.size() != cfg.a.size())
        throw ValidationError("market needs matching, non-empty a and sigma lists");
    if (count == 0) count = batch.n_paths() - first;
    const TimeGrid grid = market_grid(cfg);
    ExitTimes exit = sample_exit_time(cfg, grid, batch, first, count);
    IntervalTypeSet set = sudden_stop_set(grid, exit);
    FundamentalSequence ladder = terminal_times(cfg, grid, exit);
    const auto ends = period_end_nodes(cfg, grid);
    const auto per = interval_periods(ends, grid.n_steps());
    const std::size_t K = cfg.n_periods();
    const auto mu = mu_sequence(cfg);

    std::vector<std::vector<std::vector<double>>> inc(count);
    for_each_chunk(count, 64, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) inc[i] = driver_increments(grid, batch, first + i, K);
    });

    // M~^(n): N^(p) on earlier periods, N^(n) from a_{n-1} on.
    CoupledSequence levels;
    for (std::size_t n = 0; n < K; ++n) {
        std::vector<SamplePath> paths;
        for (std::size_t i = 0; i < count; ++i) {
            std::vector<double> v(grid.n_nodes(), 0.0);
            for (std::size_t j = 1; j < v.size(); ++j) v[j] = v[j - 1] + inc[i][std::min(per[j], n)][j];
            paths.emplace_back(grid, std::move(v));
        }
        levels.push_back({ladder[n], std::move(paths)});
    }

    Decomposition dm = Decomposition::zeros(set);
    dm.diffusion = Sections(count);
    for (std::size_t i = 0; i < count; ++i) {
        (*dm.diffusion)[i].assign(set.section_size(i), 1.0);
        (*dm.diffusion)[i][0] = 0.0;
        for (std::size_t j = 1; j < set.section_size(i); ++j) dm.cont[i][j] = inc[i][per[j]][j];
    }
    BProcess m = BProcess::from_decomposition(set, std::move(dm), true);

    auto mu_p = BPredictable::from_fn(set, [&](std::size_t, std::size_t j) { return mu[per[j]]; });
    auto sigma_p = BPredictable::from_fn(set, [&](std::size_t, std::size_t j) { return cfg.sigma[per[j]]; });

    return MarketProcesses{grid, first, std::move(exit), std::move(set), std::move(ladder), ends, per, mu,
                           cfg.sigma, std::move(mu_p), std::move(sigma_p), std::move(m), std::move(levels),
                           std::move(inc)};
}

// ---------------------------------------------------------------------------
// Stock

struct Stock {
    BProcess price;               // on B, decomposed and inner
    CoupledSequence levels;       // (tau_n, S~^(n)) on the full grid
};

namespace detail {

/// One log-Euler step: S_j = S_{j-1} exp((mu - sigma^2/2) dt + sigma dM).
inline double price_step(double prev, double mu, double sigma, double dt, double dm) {
    return prev * std::exp((mu - 0.5 * sigma * sigma) * dt + sigma * dm);
}

}  // namespace detail

/// Exact lognormal node updates. Labels: continuous martingale increment
/// S_{j-1} sigma_j dM_j, the rest of the increment as drift.
inline Stock simulate_stock(const MarketConfig& cfg, const MarketProcesses& mp) {
    const double dt = mp.grid.dt();
    const std::size_t count = mp.set.n_scenarios();
    const std::size_t K = mp.mu.size();

    CoupledSequence levels;
    for (std::size_t n = 0; n < K; ++n) {
        std::vector<SamplePath> paths;
        for (std::size_t i = 0; i < count; ++i) {
            std::vector<double> v(mp.grid.n_nodes());
            v[0] = cfg.s0;
            for (std::size_t j = 1; j < v.size(); ++j) {
                const std::size_t p = std::min(mp.period[j], n);
                v[j] = detail::price_step(v[j - 1], mp.mu[p], mp.sigma[p], dt, mp.increments[i][p][j]);
            }
            paths.emplace_back(mp.grid, std::move(v));
        }
        levels.push_back({mp.ladder[n], std::move(paths)});
    }

    Sections s(count);
    Decomposition d = Decomposition::zeros(mp.set);
    d.diffusion = Sections(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t len = mp.set.section_size(i);
        s[i].resize(len);
        s[i][0] = cfg.s0;
        d.x0[i] = cfg.s0;
        (*d.diffusion)[i].assign(len, 0.0);
        for (std::size_t j = 1; j < len; ++j) {
            const std::size_t p = mp.period[j];
            const double dm = mp.increments[i][p][j];
            s[i][j] = detail::price_step(s[i][j - 1], mp.mu[p], mp.sigma[p], dt, dm);
            d.cont[i][j] = s[i][j - 1] * mp.sigma[p] * dm;
            d.fv[i][j] = (s[i][j] - s[i][j - 1]) - d.cont[i][j];
            (*d.diffusion)[i][j] = s[i][j - 1] * mp.sigma[p];
        }
    }
    return Stock{BProcess(mp.set, std::move(s), std::move(d), true), std::move(levels)};
}

// ---------------------------------------------------------------------------
// Optimal strategy

struct ClosedForm {
    std::vector<double> w;  // optimal fraction per period
};

/// w_n = (1 + (b-1) F(a_n)) mu* / sigma_n^2.
inline ClosedForm closed_form_strategy(const MarketConfig& cfg) {
    ClosedForm out;
    const auto mu = mu_sequence(cfg);
    for (std::size_t n = 0; n < mu.size(); ++n) out.w.push_back(mu[n] / (cfg.sigma[n] * cfg.sigma[n]));
    return out;
}

/// Per-period fractions as a predictable process on B.
inline BPredictable fraction_process(const std::vector<double>& w, const MarketProcesses& mp) {
    return BPredictable::from_fn(mp.set, [&](std::size_t, std::size_t j) { return w[mp.period[j]]; });
}

/// X* = x0 exp((mu^2 / 2 sigma^2).A + (mu/sigma).M) on B.
inline BProcess optimal_wealth(const MarketConfig& cfg, const MarketProcesses& mp) {
    const double dt = mp.grid.dt();
    Sections v(mp.set.n_scenarios());
    for (std::size_t w = 0; w < v.size(); ++w) {
        v[w].resize(mp.set.section_size(w));
        v[w][0] = cfg.x0;
        double expo = 0.0;
        for (std::size_t k = 1; k < v[w].size(); ++k) {
            const std::size_t p = mp.period[k];
            const double ratio = mp.mu[p] / mp.sigma[p];
            expo += 0.5 * ratio * ratio * dt + ratio * mp.driver.increment(w, k);
            v[w][k] = cfg.x0 * std::exp(expo);
        }
    }
    return BProcess(mp.set, std::move(v));
}

struct WealthResult {
    BProcess wealth;
    BPredictable shares;
};

/// X = (x0 - theta_0 S_0) + theta.S for a share-count strategy.
inline BProcess wealth_from_shares(const BPredictable& theta, const BProcess& stock, double x0) {
    const BProcess gains = semimartingale_integral(theta, stock);
    return BProcess::from_fn(stock.set(), [&](std::size_t w, std::size_t k) {
        return (x0 - theta.at(w, 0) * stock.at(w, 0)) + gains.at(w, k);
    });
}

/// Fraction strategy resolved to shares theta_k = w_k X_{k-1} / S_{k-1}
/// against left limits, then valued through the self-financing equation.
inline WealthResult wealth_from_fractions(const BPredictable& fraction, const BProcess& stock, double x0) {
    Sections theta(stock.n_scenarios());
    for (std::size_t w = 0; w < theta.size(); ++w) {
        const std::size_t n = stock.set().section_size(w);
        theta[w].resize(n);
        theta[w][0] = fraction.at(w, 0) * x0 / stock.at(w, 0);
        double x = x0;
        for (std::size_t k = 1; k < n; ++k) {
            theta[w][k] = fraction.at(w, k) * x / stock.at(w, k - 1);
            x += theta[w][k] * stock.increment(w, k);
        }
    }
    BPredictable shares(stock.set(), std::move(theta));
    BProcess wealth = wealth_from_shares(shares, stock, x0);
    return {std::move(wealth), std::move(shares)};
}

/// max |X - (x0 - theta_0 S_0) - theta.S| over B.
inline double self_financing_residual(const BProcess& wealth, const BPredictable& theta, const BProcess& stock,
                                      double x0) {
    const BProcess rebuilt = wealth_from_shares(theta, stock, x0);
    double r = 0.0;
    for (std::size_t w = 0; w < wealth.n_scenarios(); ++w)
        for (std::size_t k = 0; k < wealth.set().section_size(w); ++k)
            r = std::max(r, std::abs(wealth.at(w, k) - rebuilt.at(w, k)));
    return r;
}

/// pi = w X* / S with left limits (predictable share counts).
inline BPredictable optimal_shares(const MarketConfig& cfg, const MarketProcesses& mp, const Stock& stock) {
    const ClosedForm cf = closed_form_strategy(cfg);
    const BProcess xstar = optimal_wealth(cfg, mp);
    return BPredictable::from_fn(mp.set, [&](std::size_t w, std::size_t k) {
        const std::size_t prev = k == 0 ? 0 : k - 1;
        return cf.w[mp.period[k]] * xstar.at(w, prev) / stock.price.at(w, prev);
    });
}

// ---------------------------------------------------------------------------
// Log-utility Monte Carlo

struct UtilityEstimate {
    double w = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t used = 0;
    std::size_t rejected = 0;
};

struct OracleResult {
    std::vector<UtilityEstimate> estimates;  // one per grid value
    std::size_t argmax = 0;
    double best_w = 0.0;
};

/// E[ln X_{tau_n}] in the level-n market for each candidate fraction on
/// period n (earlier periods use the closed form), all candidates driven by
/// the same paths. A scenario whose wealth factor 1 + w dS/S drops to zero
/// or below is rejected for that candidate.
inline OracleResult log_utility_scan(const MarketConfig& cfg, std::size_t period, const std::vector<double>& w_grid) {
    if (period == 0 || period > cfg.n_periods()) throw ValidationError("period index must be in 1..K");
    if (w_grid.empty()) throw ValidationError("empty fraction grid");
    const TimeGrid grid = market_grid(cfg);
    const ScenarioBatch batch(cfg.paths, cfg.seed);
    const auto ends = period_end_nodes(cfg, grid);
    const auto per = interval_periods(ends, grid.n_steps());
    const auto mu = mu_sequence(cfg);
    const ClosedForm cf = closed_form_strategy(cfg);
    const double dt = grid.dt();
    const double sd = std::sqrt(dt);
    const std::size_t n_idx = period - 1;
    const std::size_t nw = w_grid.size();
    const double log_x0 = std::log(cfg.x0);

    constexpr std::size_t chunk = 256;
    const std::size_t n_chunks = (cfg.paths + chunk - 1) / chunk;
    // per chunk, per candidate: sum, sum of squares, used, rejected
    std::vector<std::vector<double>> sums(n_chunks, std::vector<double>(nw, 0.0));
    std::vector<std::vector<double>> sq(n_chunks, std::vector<double>(nw, 0.0));
    std::vector<std::vector<std::size_t>> used(n_chunks, std::vector<std::size_t>(nw, 0));

    for_each_chunk(cfg.paths, chunk, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        std::vector<double> logx(nw);
        std::vector<char> alive(nw);
        std::vector<CounterRng> drivers;
        for (std::size_t i = lo; i < hi; ++i) {
            CounterRng erng = batch.stream(i, kExitTag);
            const double tau = draw_exit_time(cfg.exit_law, erng.uniform());
            const std::size_t kappa = tau > grid.horizon() ? grid.n_steps()
                                                           : std::max<std::size_t>(1, grid.node_at_or_after(tau));
            const std::size_t terminal = std::min(ends[n_idx], kappa);
            drivers.clear();
            for (std::size_t p = 0; p <= n_idx; ++p) drivers.push_back(batch.stream(i, driver_tag(p)));
            std::fill(logx.begin(), logx.end(), 0.0);  // ln(X / x0)
            std::fill(alive.begin(), alive.end(), 1);
            std::vector<double> dn(n_idx + 1);
            for (std::size_t j = 1; j <= terminal; ++j) {
                for (std::size_t p = 0; p <= n_idx; ++p) dn[p] = sd * drivers[p].normal();
                const std::size_t p = std::min(per[j], n_idx);
                const double r = std::expm1((mu[p] - 0.5 * cfg.sigma[p] * cfg.sigma[p]) * dt + cfg.sigma[p] * dn[p]);
                if (p < n_idx) {
                    const double f = 1.0 + cf.w[p] * r;
                    for (std::size_t q = 0; q < nw; ++q) {
                        if (!alive[q]) continue;
                        if (f > 0.0) logx[q] += std::log(f);
                        else alive[q] = 0;
                    }
                } else {
                    for (std::size_t q = 0; q < nw; ++q) {
                        if (!alive[q]) continue;
                        const double f = 1.0 + w_grid[q] * r;
                        if (f > 0.0) logx[q] += std::log(f);
                        else alive[q] = 0;
                    }
                }
            }
            for (std::size_t q = 0; q < nw; ++q) {
                if (!alive[q]) continue;
                sums[c][q] += logx[q];
                sq[c][q] += logx[q] * logx[q];
                ++used[c][q];
            }
        }
    });

    OracleResult out;
    for (std::size_t q = 0; q < nw; ++q) {
        std::vector<double> s(n_chunks), s2(n_chunks);
        std::size_t u = 0;
        for (std::size_t c = 0; c < n_chunks; ++c) {
            s[c] = sums[c][q];
            s2[c] = sq[c][q];
            u += used[c][q];
        }
        UtilityEstimate e;
        e.w = w_grid[q];
        e.used = u;
        e.rejected = cfg.paths - u;
        if (u > 0) {
            const double n = static_cast<double>(u);
            const double m = pairwise_sum(s) / n;
            const double var = u > 1 ? std::max(0.0, (pairwise_sum(s2) - n * m * m) / (n - 1.0)) : 0.0;
            e.mean = log_x0 + m;
            e.std_error = std::sqrt(var / n);
        }
        out.estimates.push_back(e);
    }
    bool found = false;
    for (std::size_t q = 0; q < nw; ++q) {
        if (out.estimates[q].used == 0) continue;
        if (!found || out.estimates[q].mean > out.estimates[out.argmax].mean) {
            out.argmax = q;
            found = true;
        }
    }
    if (!found) throw std::runtime_error("every scenario was rejected for every fraction");
    out.best_w = w_grid[out.argmax];
    return out;
}

/// Single-candidate estimate of E[ln X_{tau_n}].
inline UtilityEstimate expected_log_utility(double w, const MarketConfig& cfg, std::size_t period) {
    UtilityEstimate e = log_utility_scan(cfg, period, {w}).estimates.front();
    if (e.used == 0) throw std::runtime_error("every scenario was rejected");
    return e;
}

/// Uniform grid lo, lo + step, ..., hi (inclusive up to rounding).
inline std::vector<double> fraction_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw ValidationError("bad fraction grid");
    std::vector<double> g;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
    return g;
}

/// Brute-force argmax of the simulated log utility over w_grid.
inline OracleResult grid_search_oracle(const MarketConfig& cfg, std::size_t period, const std::vector<double>& w_grid) {
    return log_utility_scan(cfg, period, w_grid);
}

// ---------------------------------------------------------------------------
// Admissibility and no-arbitrage

struct AdmissibilityReport {
    std::vector<bool> admissible;                          // per scenario
    std::vector<std::optional<std::size_t>> first_violation;
    bool all = true;
};

/// theta.S >= -alpha at every member node.
inline AdmissibilityReport admissibility_check(const BPredictable& theta, const BProcess& stock, double alpha) {
    const BProcess gains = semimartingale_integral(theta, stock);
    AdmissibilityReport rep;
    for (std::size_t w = 0; w < gains.n_scenarios(); ++w) {
        std::optional<std::size_t> first;
        for (std::size_t k = 0; k < gains.set().section_size(w) && !first; ++k)
            if (gains.at(w, k) < -alpha) first = k;
        rep.admissible.push_back(!first);
        rep.first_violation.push_back(first);
        rep.all = rep.all && !first;
    }
    return rep;
}

struct NaCertificate {
    bool granted = false;
    bool vacuous = false;
    std::vector<std::string> reasons;  // why it was refused
};

/// Structural check of the inner ladder: each level is a positive Ito-type
/// price with bounded coefficients and no period of riskless excess drift.
inline NaCertificate na_certificate(const MarketConfig& cfg, const Stock& stock) {
    NaCertificate cert;
    if (cfg.n_periods() == 0) {
        cert.granted = true;
        cert.vacuous = true;
        return cert;
    }
    if (stock.levels.empty()) throw PreconditionError("na_certificate: stock carries no coupled sequence");
    const auto mu = mu_sequence(cfg);
    for (std::size_t p = 0; p < cfg.n_periods(); ++p) {
        const double s = p < cfg.sigma.size() ? cfg.sigma[p] : 0.0;
        if (!std::isfinite(s) || !std::isfinite(mu[p]))
            cert.reasons.push_back("period " + std::to_string(p + 1) + ": unbounded coefficients");
        else if (s == 0.0 && mu[p] != 0.0)
            cert.reasons.push_back("period " + std::to_string(p + 1) + ": riskless drift");
        else if (s < 0.0)
            cert.reasons.push_back("period " + std::to_string(p + 1) + ": negative volatility");
    }
    for (std::size_t n = 0; n < stock.levels.size(); ++n)
        for (const SamplePath& path : stock.levels[n].paths)
            for (double v : path.values())
                if (!(v > 0.0)) {
                    cert.reasons.push_back("level " + std::to_string(n + 1) + ": non-positive price");
                    goto next_level;
                }
        next_level:;
    cert.granted = cert.reasons.empty();
    return cert;
}

}  // namespace hcalc::market

#endif
