#ifndef HORIZON_CALC_GALLERY_HPP
#define HORIZON_CALC_GALLERY_HPP

// Worked pathologies on non-closed sets:
//  - a Stieltjes integral that is finite on [0, 1[ but has no value at 1,
//  - a continuous finite-variation process on [0, T[ with zero bracket that
//    is nonetheless not zero (so not inner),
//  - a piecewise compensator step function.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "horizon_calc/bprocess.hpp"
#include "horizon_calc/errors.hpp"
#include "horizon_calc/grid_paths.hpp"
#include "horizon_calc/integration.hpp"
#include "horizon_calc/interval_sets.hpp"

namespace hcalc {

struct GalleryOptions {
    std::size_t stieltjes_steps = std::size_t{1} << 16;
    std::size_t bstar_paths = 2000;
    std::size_t bstar_steps = 1024;
    double bstar_horizon = 4.0;
    std::uint64_t seed = 0;
};

struct StieltjesProbe {
    double t = 0.0;
    double value = 0.0;
    double exact = 0.0;      // ln(1 / (1 - t))
    double rel_error = 0.0;
};

struct GalleryReport {
    // Stieltjes example
    std::size_t stieltjes_steps = 0;
    std::vector<StieltjesProbe> probes;
    std::vector<std::pair<std::size_t, double>> growth;  // (N, L at the last member node)
    std::optional<std::size_t> divergence_node;          // on the closed interval [0, 1]

    // B* = [0, T[ with M^ = T ^ t
    std::size_t bstar_paths = 0;
    double bstar_bracket_sup = 0.0;      // sup |[M^]| with the continuous labels
    double bstar_grid_bracket_sup = 0.0; // sup of the raw sum of squared increments
    double bstar_sup_abs = 0.0;          // sup |M^|
    bool bstar_fcs_valid = false;
    InnerReport bstar_inner;

    // step function f
    std::vector<std::pair<double, double>> step_values;

    /// Probe at 1 - 2^-6 within 2% of ln 64.
    bool stieltjes_pass() const {
        for (const auto& p : probes)
            if (p.t == 1.0 - 0x1.0p-6) return p.rel_error <= 0.02;
        return false;
    }
    bool bstar_pass() const {
        return bstar_bracket_sup == 0.0 && bstar_sup_abs > 0.0 && bstar_fcs_valid && !bstar_inner.is_inner();
    }
    bool step_pass() const {
        const double expect[] = {0.0, 0.5, 1.5};
        if (step_values.size() != 3) return false;
        for (std::size_t i = 0; i < 3; ++i)
            if (step_values[i].second != expect[i]) return false;
        return true;
    }
    bool all_pass() const { return stieltjes_pass() && bstar_pass() && step_pass(); }
};

/// f = 0 on [0, 1), 1/2 on [1, 2), 3/2 from 2 on.
inline double compensator_step(double t) {
    if (t < 1.0) return 0.0;
    if (t < 2.0) return 0.5;
    return 1.5;
}

namespace detail {

/// A_t = t on [0, 1[ with a continuous drift label, and H = 1/(1 - t)
/// evaluated at the left end of each interval.
inline BProcess stieltjes_example(std::size_t n_steps) {
    const TimeGrid grid(1.0, n_steps);
    const IntervalTypeSet set(grid, StoppingTime::constant(1, n_steps), {true});
    Decomposition d = Decomposition::zeros(set);
    for (std::size_t k = 1; k < set.section_size(0); ++k) d.fv[0][k] = grid.time(k) - grid.time(k - 1);
    const BProcess a = BProcess::from_decomposition(set, std::move(d), true);
    const auto h = BPredictable::from_fn(set, [&](std::size_t, std::size_t k) {
        return 1.0 / (1.0 - grid.time(k == 0 ? 0 : k - 1));
    });
    return stieltjes(h, a);
}

}  // namespace detail

inline GalleryReport counterexample_gallery(const GalleryOptions& opt = {}) {
    GalleryReport rep;

    rep.stieltjes_steps = opt.stieltjes_steps;
    {
        const BProcess l = detail::stieltjes_example(opt.stieltjes_steps);
        const TimeGrid& grid = l.set().grid();
        for (double t : {0.5, 0.75, 1.0 - 0x1.0p-6, 1.0 - 0x1.0p-10}) {
            const std::size_t k = grid.node_at_or_after(t);
            if (k > l.set().last_member(0)) continue;
            StieltjesProbe p;
            p.t = t;
            p.value = l.at(0, k);
            p.exact = std::log(1.0 / (1.0 - t));
            p.rel_error = std::abs(p.value - p.exact) / p.exact;
            rep.probes.push_back(p);
        }
    }
    for (std::size_t n = std::size_t{1} << 10; n <= opt.stieltjes_steps; n <<= 2) {
        const BProcess l = detail::stieltjes_example(n);
        rep.growth.emplace_back(n, l.at(0, l.set().last_member(0)));
    }
    {
        // Closing the interval puts the integrand's pole inside the set.
        const TimeGrid grid(1.0, 64);
        const IntervalTypeSet closed = IntervalTypeSet::full(grid, 1);
        const BProcess a = BProcess::from_fn(closed, [&](std::size_t, std::size_t k) { return grid.time(k); });
        const auto h = BPredictable::from_fn(closed, [&](std::size_t, std::size_t k) {
            return 1.0 / (1.0 - grid.time(k));
        });
        try {
            (void)stieltjes(h, a);
        } catch (const DivergenceError& e) {
            rep.divergence_node = e.node();
        }
    }

    {
        const std::size_t s = opt.bstar_paths;
        const TimeGrid grid(opt.bstar_horizon, opt.bstar_steps);
        const ScenarioBatch batch(s, opt.seed);
        std::vector<double> t_exact(s);
        std::vector<std::size_t> kappa(s);
        for (std::size_t w = 0; w < s; ++w) {
            CounterRng rng = batch.stream(w, 0xB57A);
            t_exact[w] = -std::log(rng.uniform());
            kappa[w] = t_exact[w] > grid.horizon() ? StoppingTime::kInfinity
                                                   : std::max<std::size_t>(1, grid.node_at_or_after(t_exact[w]));
        }
        const StoppingTime debut(kappa);
        const IntervalTypeSet set(grid, debut, std::vector<bool>(s, true));

        // M^ = A^p = T ^ t, which is t on B*: continuous drift only.
        Decomposition d = Decomposition::zeros(set);
        for (std::size_t w = 0; w < s; ++w)
            for (std::size_t k = 1; k < set.section_size(w); ++k) d.fv[w][k] = grid.time(k) - grid.time(k - 1);
        const BProcess m = BProcess::from_decomposition(set, std::move(d), false);

        // Ladder (T, A^p - A) with A = 1{t >= T}.
        std::vector<SamplePath> paths;
        for (std::size_t w = 0; w < s; ++w) {
            std::vector<double> v(grid.n_nodes());
            for (std::size_t k = 0; k < v.size(); ++k) {
                const double t = grid.time(k);
                v[k] = std::min(t_exact[w], t) - (t >= t_exact[w] ? 1.0 : 0.0);
            }
            paths.emplace_back(grid, std::move(v));
        }
        CoupledSequence fcs;
        fcs.push_back({debut, std::move(paths)});

        rep.bstar_paths = s;
        rep.bstar_fcs_valid = validate_fcs(set, fcs).valid();
        const BracketResult br = bracket(m, m);
        for (std::size_t w = 0; w < s; ++w)
            for (std::size_t k = 0; k < set.section_size(w); ++k) {
                rep.bstar_bracket_sup = std::max(rep.bstar_bracket_sup, std::abs(br.canonical.at(w, k)));
                rep.bstar_grid_bracket_sup = std::max(rep.bstar_grid_bracket_sup, std::abs(br.total.at(w, k)));
                rep.bstar_sup_abs = std::max(rep.bstar_sup_abs, std::abs(m.at(w, k)));
            }
        rep.bstar_inner = check_inner(m, fcs);
    }

    for (double t : {0.5, 1.5, 2.5}) rep.step_values.emplace_back(t, compensator_step(t));
    return rep;
}

}  // namespace hcalc

#endif
