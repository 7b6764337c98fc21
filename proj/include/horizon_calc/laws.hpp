#ifndef HORIZON_CALC_LAWS_HPP
#define HORIZON_CALC_LAWS_HPP

// Randomized law suite: every exact grid identity of the calculus evaluated
// on random sets, jump paths, decompositions, integrands and inner stopping
// times. Each law reports its worst relative residual.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "horizon_calc/bprocess.hpp"
#include "horizon_calc/calculus.hpp"
#include "horizon_calc/grid_paths.hpp"
#include "horizon_calc/integration.hpp"
#include "horizon_calc/interval_sets.hpp"

namespace hcalc {

struct LawResult {
    std::string law;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct SuiteReport {
    std::vector<LawResult> laws;

    bool all_pass() const {
        return std::all_of(laws.begin(), laws.end(), [](const LawResult& r) { return r.pass; });
    }
};

struct SuiteSizes {
    std::size_t n_steps = 16;
    std::size_t n_scenarios = 200;
    std::size_t n_sets = 10;
    /// Force every section to be [0, 1[ (single node).
    bool degenerate_sets = false;
};

/// Generators for random grid instances. All draws come from one stream so
/// a seed fixes the whole instance.
class RandomInstances {
public:
    RandomInstances(TimeGrid grid, std::size_t n_scenarios, std::uint64_t seed)
        : grid_(grid), n_(n_scenarios), rng_(ScenarioBatch(1, seed).stream(0, 0x1A75)) {}

    const TimeGrid& grid() const noexcept { return grid_; }
    CounterRng& rng() noexcept { return rng_; }

    std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(rng_.uniform() * static_cast<double>(n)) % n; }
    bool coin(double p) { return rng_.uniform() < p; }

    IntervalTypeSet random_set(bool degenerate = false) {
        std::vector<std::size_t> debut(n_);
        std::vector<bool> open(n_);
        for (std::size_t w = 0; w < n_; ++w) {
            if (degenerate) {
                debut[w] = 1;
                open[w] = true;
                continue;
            }
            debut[w] = coin(0.2) ? StoppingTime::kInfinity : uniform_index(grid_.n_steps() + 1);
            open[w] = debut[w] != 0 && coin(0.5);
        }
        return IntervalTypeSet(grid_, StoppingTime(std::move(debut)), std::move(open));
    }

    /// Arbitrary full-grid jump path.
    SamplePath jump_path() {
        std::vector<double> v(grid_.n_nodes());
        v[0] = rng_.normal();
        for (std::size_t k = 1; k < v.size(); ++k)
            v[k] = v[k - 1] + (coin(0.4) ? rng_.normal() : 0.25 * rng_.normal());
        return SamplePath(grid_, std::move(v));
    }

    std::vector<SamplePath> jump_paths() {
        std::vector<SamplePath> out;
        for (std::size_t w = 0; w < n_; ++w) out.push_back(jump_path());
        return out;
    }

    /// Process with random continuous, jump and drift streams, flagged inner.
    BProcess decomposed(const IntervalTypeSet& set, bool with_drift = true) {
        Decomposition d = Decomposition::zeros(set);
        for (std::size_t w = 0; w < set.n_scenarios(); ++w) {
            d.x0[w] = rng_.normal();
            for (std::size_t k = 1; k < set.section_size(w); ++k) {
                d.cont[w][k] = 0.3 * rng_.normal();
                if (coin(0.3)) d.disc[w][k] = rng_.normal();
                if (with_drift) d.fv[w][k] = 0.05 * rng_.normal();
                if (coin(0.2)) d.fv_jump[w][k] = 0.5 * rng_.normal();
            }
        }
        return BProcess::from_decomposition(set, std::move(d), true);
    }

    /// Pure-jump process: every increment labelled as a martingale jump.
    BProcess pure_jump(const IntervalTypeSet& set) {
        Decomposition d = Decomposition::zeros(set);
        for (std::size_t w = 0; w < set.n_scenarios(); ++w) {
            d.x0[w] = rng_.normal();
            for (std::size_t k = 1; k < set.section_size(w); ++k)
                if (coin(0.5)) d.disc[w][k] = rng_.normal();
        }
        return BProcess::from_decomposition(set, std::move(d), true);
    }

    BPredictable integrand(const IntervalTypeSet& set) {
        return BPredictable::from_fn(set, [&](std::size_t, std::size_t) { return rng_.normal(); });
    }

    /// Uniform member node; infinity sometimes where the section is full.
    StoppingTime inner_time(const IntervalTypeSet& set) {
        std::vector<std::size_t> t(set.n_scenarios());
        for (std::size_t w = 0; w < t.size(); ++w)
            t[w] = set.is_full(w) && coin(0.2) ? StoppingTime::kInfinity
                                                : uniform_index(set.last_member(w) + 1);
        return StoppingTime(std::move(t));
    }

    /// A valid FCS of the process given by full paths on set: levels agree
    /// with the paths on [0, T_n] and carry noise elsewhere.
    CoupledSequence random_fcs(const IntervalTypeSet& set, const std::vector<SamplePath>& base,
                               std::size_t levels) {
        CoupledSequence cs;
        std::vector<std::size_t> prev(set.n_scenarios(), 0);
        for (std::size_t n = 0; n < levels; ++n) {
            std::vector<std::size_t> tn(set.n_scenarios());
            std::vector<SamplePath> paths;
            for (std::size_t w = 0; w < set.n_scenarios(); ++w) {
                const std::size_t cap = set.debut()[w] == StoppingTime::kInfinity
                                            ? grid_.n_steps()
                                            : set.debut()[w];
                if (n + 1 == levels) {
                    tn[w] = set.debut()[w] == StoppingTime::kInfinity && coin(0.5)
                                ? StoppingTime::kInfinity
                                : cap;
                } else {
                    tn[w] = prev[w] + uniform_index(cap - prev[w] + 1);
                }
                prev[w] = std::min(tn[w], cap);
                const std::size_t keep = std::min(tn[w], grid_.n_steps());
                std::vector<double> v(base[w].values().begin(), base[w].values().end());
                for (std::size_t k = keep + 1; k < v.size(); ++k) v[k] = rng_.normal();
                // beyond B the level is free even inside [0, T_n]
                for (std::size_t k = set.last_member(w) + 1; k <= keep && k < v.size(); ++k)
                    v[k] = rng_.normal();
                paths.emplace_back(grid_, std::move(v));
            }
            cs.push_back({StoppingTime(std::move(tn)), std::move(paths)});
        }
        return cs;
    }

private:
    TimeGrid grid_;
    std::size_t n_;
    CounterRng rng_;
};

namespace detail {

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double max_rel_diff(const BProcess& a, const BProcess& b) {
    if (!a.set().same_sections(b.set())) return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (std::size_t w = 0; w < a.n_scenarios(); ++w)
        for (std::size_t k = 0; k < a.set().section_size(w); ++k)
            m = std::max(m, rel_diff(a.at(w, k), b.at(w, k)));
    return m;
}

inline double max_rel_diff(const std::vector<SamplePath>& a, const std::vector<SamplePath>& b) {
    double m = 0.0;
    for (std::size_t w = 0; w < a.size(); ++w)
        for (std::size_t k = 0; k < a[w].size(); ++k) m = std::max(m, rel_diff(a[w][k], b[w][k]));
    return m;
}

/// Multiply a B-process nodewise by an indicator or weight.
template <class Fn>
BProcess weighted(const BProcess& x, Fn&& weight) {
    return BProcess::from_fn(x.set(), [&](std::size_t w, std::size_t k) { return weight(w, k) * x.at(w, k); });
}

}  // namespace detail

/// Runs every law on sizes.n_sets random instances and keeps the worst
/// residual per law.
inline SuiteReport identity_suite(std::uint64_t seed, const SuiteSizes& sizes = {}) {
    constexpr double tol = 1e-12;
    const TimeGrid grid(1.0, sizes.n_steps);
    RandomInstances gen(grid, sizes.n_scenarios, seed);

    std::vector<std::pair<std::string, double>> worst;
    auto record = [&](const std::string& name, double r) {
        for (auto& [n, v] : worst)
            if (n == name) {
                v = std::max(v, r);
                return;
            }
        worst.emplace_back(name, r);
    };

    for (std::size_t rep = 0; rep < sizes.n_sets; ++rep) {
        const IntervalTypeSet b = gen.random_set(sizes.degenerate_sets);
        const BProcess x = gen.decomposed(b);
        const BProcess y = gen.decomposed(b);
        const BProcess raw = restrict(gen.jump_paths(), b);
        const BPredictable h = gen.integrand(b);
        const BPredictable g = gen.integrand(b);
        const StoppingTime tau = gen.inner_time(b);
        const StoppingTime sig = gen.inner_time(b);
        const double a1 = gen.rng().normal(), a2 = gen.rng().normal();
        auto before = [&](const StoppingTime& t, bool closed) {
            return [&t, closed](std::size_t w, std::size_t k) {
                return (closed ? k <= t[w] : k < t[w]) ? 1.0 : 0.0;
            };
        };

        // jumps
        record("jump_linearity", detail::max_rel_diff(bjump(lincomb(a1, x, a2, raw.without_decomposition())),
                                                      lincomb(a1, bjump(x), a2, bjump(raw))));
        {
            const IntervalTypeSet sub = intersect_stop(b, gen.inner_time(b));
            record("jump_restriction", detail::max_rel_diff(bjump(restrict(x, sub)), restrict(bjump(x), sub)));
        }
        record("jump_of_stopped", detail::max_rel_diff(bjump(stop(x, tau)),
                                                       detail::weighted(bjump(x), before(tau, true))));
        {
            // X^{T-} on full paths, compared on B
            std::vector<SamplePath> full, stopped;
            for (std::size_t w = 0; w < b.n_scenarios(); ++w) {
                full.push_back(gen.jump_path());
                stopped.push_back(stop_minus(full.back(), tau[w]));
            }
            record("jump_of_stopped_minus",
                   detail::max_rel_diff(bjump(restrict(stopped, b)),
                                        detail::weighted(bjump(restrict(full, b)), before(tau, false))));
        }
        record("stop_commutation", std::max(detail::max_rel_diff(stop(stop(x, tau), sig), stop(x, meet(tau, sig))),
                                            detail::max_rel_diff(stop(stop(x, sig), tau), stop(x, meet(tau, sig)))));
        record("summation_stop", detail::max_rel_diff(bsummation(indicator_up_to(raw, tau)),
                                                      stop(bsummation(raw), tau)));

        // coupled sequences
        {
            std::vector<SamplePath> base = gen.jump_paths();
            const CoupledSequence c1 = gen.random_fcs(b, base, 1 + gen.uniform_index(4));
            const CoupledSequence c2 = gen.random_fcs(b, base, 1 + gen.uniform_index(4));
            const BProcess g1 = glue(b, c1);
            record("fcs_independence", detail::max_rel_diff(g1, glue(b, c2)));
            const auto [m1, m2] = merge_fcs_times(b, c1, c2);
            record("glue_of_merged", std::max(detail::max_rel_diff(glue(b, m1), g1),
                                              detail::max_rel_diff(glue(b, m2), g1)));
            record("restrict_glue_commute",
                   detail::max_rel_diff(restrict(g1, intersect_stop(b, tau)),
                                        glue(intersect_stop(b, tau), restrict_fcs(c1, tau))));
        }

        // Stieltjes integral
        {
            auto [xm, xa] = split_decomposition(x);
            auto [ym, ya] = split_decomposition(y);
            record("stieltjes_linearity",
                   std::max(detail::max_rel_diff(stieltjes(lincomb(a1, h, a2, g), xa),
                                                 lincomb(a1, stieltjes(h, xa), a2, stieltjes(g, xa))),
                            detail::max_rel_diff(stieltjes(h, lincomb(a1, xa, a2, ya)),
                                                 lincomb(a1, stieltjes(h, xa), a2, stieltjes(h, ya)))));
            record("stieltjes_associativity",
                   detail::max_rel_diff(stieltjes(product(g, h), xa), stieltjes(g, stieltjes(h, xa))));
            record("martingale_integral_linearity",
                   std::max(detail::max_rel_diff(martingale_integral(lincomb(a1, h, a2, g), xm),
                                                 lincomb(a1, martingale_integral(h, xm), a2, martingale_integral(g, xm))),
                            detail::max_rel_diff(martingale_integral(h, lincomb(a1, xm, a2, ym)),
                                                 lincomb(a1, martingale_integral(h, xm), a2, martingale_integral(h, ym)))));
            record("martingale_integral_associativity",
                   detail::max_rel_diff(martingale_integral(product(g, h), xm),
                                        martingale_integral(g, martingale_integral(h, xm))));
        }

        // semimartingale integral
        const BProcess hx = semimartingale_integral(h, x);
        record("integral_linearity_integrand",
               detail::max_rel_diff(semimartingale_integral(lincomb(a1, h, a2, g), x),
                                    lincomb(a1, hx, a2, semimartingale_integral(g, x))));
        record("integral_linearity_integrator",
               detail::max_rel_diff(semimartingale_integral(h, lincomb(a1, x, a2, y)),
                                    lincomb(a1, hx, a2, semimartingale_integral(h, y))));
        record("integral_associativity",
               detail::max_rel_diff(semimartingale_integral(product(g, h), x), semimartingale_integral(g, hx)));
        {
            double r = detail::max_rel_diff(bjump(hx), BProcess::from_fn(b, [&](std::size_t w, std::size_t k) {
                                                return h.at(w, k) * x.increment(w, k);
                                            }));
            for (std::size_t w = 0; w < b.n_scenarios(); ++w)
                r = std::max(r, detail::rel_diff(hx.at(w, 0), h.at(w, 0) * x.at(w, 0)));
            record("integral_jump", r);
        }
        {
            const BracketResult lhs = bracket(hx, y);
            const BracketResult rhs = bracket(x, y);
            record("integral_bracket",
                   std::max(detail::max_rel_diff(lhs.total, stieltjes(h, rhs.total)),
                            detail::max_rel_diff(lhs.canonical, stieltjes(h, rhs.canonical))));
        }
        {
            const BProcess lhs = stop(hx, tau);
            double r = detail::max_rel_diff(lhs, semimartingale_integral(h, stop(x, tau)));
            r = std::max(r, detail::max_rel_diff(lhs, semimartingale_integral(indicator_up_to(h, tau), x)));
            r = std::max(r, detail::max_rel_diff(lhs, semimartingale_integral(stop(h, tau), stop(x, tau))));
            record("integral_stop", r);
        }
        {
            // Same process, mass moved between drift and jump labels.
            Decomposition alt = *x.decomposition();
            for (std::size_t w = 0; w < b.n_scenarios(); ++w)
                for (std::size_t k = 1; k < b.section_size(w); ++k) {
                    alt.disc[w][k] += alt.fv[w][k];
                    alt.fv[w][k] = 0.0;
                }
            const BProcess x2(b, x.sections(), std::move(alt), true);
            record("decomposition_independence",
                   detail::max_rel_diff(semimartingale_integral(h, x2), hx));
        }

        // brackets
        {
            const BracketResult xy = bracket(x, y);
            const BracketResult yx = bracket(y, x);
            record("bracket_symmetry", std::max(detail::max_rel_diff(xy.total, yx.total),
                                                detail::max_rel_diff(xy.canonical, yx.canonical)));
            const BracketResult lin = bracket(lincomb(a1, x, a2, raw.without_decomposition()), y);
            const BracketResult xr = bracket(raw.without_decomposition(), y);
            record("bracket_bilinearity",
                   detail::max_rel_diff(lin.total, lincomb(a1, xy.total, a2, xr.total)));
            const BProcess xs = stop(x, tau);
            const BProcess ys = stop(y, tau);
            const BProcess target = stop(xy.total, tau);
            double r = detail::max_rel_diff(bracket(xs, ys).total, target);
            r = std::max(r, detail::max_rel_diff(bracket(xs, y).total, target));
            r = std::max(r, detail::max_rel_diff(bracket(xs, ys).canonical, stop(xy.canonical, tau)));
            record("bracket_stop", r);
            record("predictable_qv_stop",
                   detail::max_rel_diff(predictable_qv(xs, y), stop(predictable_qv(x, y), tau)));
        }

        // Ito and integration by parts
        record("integration_by_parts", std::max(ibp_residual(x, y).relative_sup, ibp_residual(raw, x).relative_sup));
        {
            const SmoothFunction affine = SmoothFunction::make(
                2, [a1, a2](const std::vector<double>& p) { return 0.5 + a1 * p[0] + a2 * p[1]; },
                [a1, a2](const std::vector<double>&) { return std::vector<double>{a1, a2}; },
                [](const std::vector<double>&) { return std::vector<std::vector<double>>{{0.0, 0.0}, {0.0, 0.0}}; });
            const ItoResult res = ito_residual(affine, {x, y});
            double eta = 0.0;
            for (const auto& s : res.terms.eta)
                for (double e : s) eta = std::max(eta, std::abs(e));
            record("ito_affine", std::max(res.report.relative_sup, eta));
            const SmoothFunction square = SmoothFunction::make(
                1, [](const std::vector<double>& p) { return p[0] * p[0]; },
                [](const std::vector<double>& p) { return std::vector<double>{2.0 * p[0]}; },
                [](const std::vector<double>&) { return std::vector<std::vector<double>>{{2.0}}; });
            record("ito_quadratic_pure_jump", ito_residual(square, {gen.pure_jump(b)}).report.relative_sup);
        }
    }

    SuiteReport out;
    for (auto& [name, r] : worst) out.laws.push_back({name, r, tol, r <= tol});
    return out;
}

}  // namespace hcalc

#endif
