#ifndef HORIZON_CALC_INTEGRATION_HPP
#define HORIZON_CALC_INTEGRATION_HPP

// Pathwise integrals on a set of interval type and the brackets.
//
// Every integral is a left-point sum with the predictable indexing of the
// integrand: (H.X)_t = H_0 X_0 + sum_{k<=t} H_k dX_k, where H_k is the value
// on (t_{k-1}, t_k]. With this convention d(H.X) = H dX and
// [H.X, Y] = H.[X, Y] hold exactly on the grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "horizon_calc/bprocess.hpp"
#include "horizon_calc/errors.hpp"
#include "horizon_calc/grid_paths.hpp"
#include "horizon_calc/interval_sets.hpp"

namespace hcalc {

/// Predictable integrand on B: per scenario an atom (index 0) and the
/// interval values for k = 1..last member.
class BPredictable {
public:
    BPredictable(IntervalTypeSet set, Sections values) : set_(std::move(set)), values_(std::move(values)) {
        if (values_.size() != set_.n_scenarios())
            throw ValidationError("predictable process scenario count does not match its set");
        for (std::size_t w = 0; w < values_.size(); ++w)
            if (values_[w].size() != set_.section_size(w))
                throw ValidationError("predictable section " + std::to_string(w) +
                                      " has wrong length");
    }

    template <class Fn>
    static BPredictable from_fn(IntervalTypeSet set, Fn&& f) {
        Sections v(set.n_scenarios());
        for (std::size_t w = 0; w < v.size(); ++w) {
            v[w].resize(set.section_size(w));
            for (std::size_t k = 0; k < v[w].size(); ++k) v[w][k] = f(w, k);
        }
        return BPredictable(std::move(set), std::move(v));
    }

    static BPredictable constant(IntervalTypeSet set, double c) {
        return from_fn(std::move(set), [c](std::size_t, std::size_t) { return c; });
    }

    /// X_- as an integrand: atom X_0 (X_{0-} = X_0), interval k -> X_{k-1}.
    static BPredictable left_limit_of(const BProcess& x) {
        return from_fn(x.set(), [&](std::size_t w, std::size_t k) {
            return x.at(w, k == 0 ? 0 : k - 1);
        });
    }

    /// Full-grid predictable paths restricted to B.
    static BPredictable restrict(const std::vector<PredictablePath>& paths, const IntervalTypeSet& set) {
        if (paths.size() != set.n_scenarios()) throw ValidationError("scenario count mismatch");
        return from_fn(set, [&](std::size_t w, std::size_t k) { return paths[w].at(k); });
    }

    const IntervalTypeSet& set() const noexcept { return set_; }
    std::size_t n_scenarios() const noexcept { return values_.size(); }
    const Sections& sections() const noexcept { return values_; }

    double at(std::size_t w, std::size_t k) const {
        if (w >= values_.size()) throw std::out_of_range("scenario index out of range");
        if (k >= values_[w].size()) throw DomainError(w, k);
        return values_[w][k];
    }

private:
    IntervalTypeSet set_;
    Sections values_;
};

inline BPredictable product(const BPredictable& a, const BPredictable& b) {
    if (!a.set().same_sections(b.set())) throw ValidationError("product: different sets");
    return BPredictable::from_fn(a.set(), [&](std::size_t w, std::size_t k) { return a.at(w, k) * b.at(w, k); });
}

inline BPredictable lincomb(double a, const BPredictable& h, double b, const BPredictable& g) {
    if (!h.set().same_sections(g.set())) throw ValidationError("lincomb: different sets");
    return BPredictable::from_fn(h.set(), [&](std::size_t w, std::size_t k) {
        return a * h.at(w, k) + b * g.at(w, k);
    });
}

/// H * I_[0,tau].
inline BPredictable indicator_up_to(const BPredictable& h, const StoppingTime& tau) {
    return BPredictable::from_fn(h.set(), [&](std::size_t w, std::size_t k) {
        return k <= tau[w] ? h.at(w, k) : 0.0;
    });
}

/// H^tau: the value in force at tau is kept on later intervals.
inline BPredictable stop(const BPredictable& h, const StoppingTime& tau) {
    return BPredictable::from_fn(h.set(), [&](std::size_t w, std::size_t k) {
        return h.at(w, std::min<std::size_t>(k, tau[w]));
    });
}

// ---------------------------------------------------------------------------

namespace detail {

inline void require_same_set(const BPredictable& h, const BProcess& x, const char* what) {
    if (!h.set().same_sections(x.set()))
        throw ValidationError(std::string(what) + ": integrand and integrator live on different sets");
}

/// H_0 X_0 + sum H_k dX_k with the decomposition carried stream-wise.
inline BProcess integrate(const BPredictable& h, const BProcess& x, bool inner) {
    const std::size_t s = x.n_scenarios();
    Sections v(s);
    for (std::size_t w = 0; w < s; ++w) {
        v[w].resize(x.set().section_size(w));
        v[w][0] = h.at(w, 0) * x.at(w, 0);
        if (!std::isfinite(v[w][0])) throw DivergenceError(w, 0);
        for (std::size_t k = 1; k < v[w].size(); ++k) {
            v[w][k] = v[w][k - 1] + h.at(w, k) * x.increment(w, k);
            if (!std::isfinite(v[w][k])) throw DivergenceError(w, k);
        }
    }
    std::optional<Decomposition> dec;
    if (x.decomposition()) {
        const Decomposition& dx = *x.decomposition();
        Decomposition d = dx;
        for (std::size_t w = 0; w < s; ++w) {
            d.x0[w] = v[w][0];
            for (std::size_t k = 0; k < v[w].size(); ++k) {
                const double hk = h.at(w, k);
                d.cont[w][k] = hk * dx.cont[w][k];
                d.disc[w][k] = hk * dx.disc[w][k];
                d.fv[w][k] = hk * dx.fv[w][k];
                d.fv_jump[w][k] = hk * dx.fv_jump[w][k];
                if (d.diffusion) (*d.diffusion)[w][k] = hk * (*dx.diffusion)[w][k];
            }
        }
        dec = std::move(d);
    }
    return BProcess(x.set(), std::move(v), std::move(dec), inner);
}

}  // namespace detail

/// Pathwise Stieltjes integral against a finite-variation B-process.
/// Throws DivergenceError at the first node where sum |H||dA| or the
/// integral stops being finite.
inline BProcess stieltjes(const BPredictable& h, const BProcess& a) {
    detail::require_same_set(h, a, "stieltjes");
    if (a.decomposition()) {
        const Decomposition& d = *a.decomposition();
        for (std::size_t w = 0; w < a.n_scenarios(); ++w)
            for (std::size_t k = 0; k < d.cont[w].size(); ++k)
                if (d.cont[w][k] != 0.0 || d.disc[w][k] != 0.0)
                    throw PreconditionError("stieltjes: integrator has a martingale part");
    }
    for (std::size_t w = 0; w < a.n_scenarios(); ++w) {
        double variation = std::abs(h.at(w, 0) * a.at(w, 0));
        if (!std::isfinite(variation)) throw DivergenceError(w, 0);
        for (std::size_t k = 1; k < a.set().section_size(w); ++k) {
            variation += std::abs(h.at(w, k)) * std::abs(a.increment(w, k));
            if (!std::isfinite(variation)) throw DivergenceError(w, k);
        }
    }
    if (a.decomposition()) return detail::integrate(h, a, true);
    // Undecomposed increments are read as jumps of the finite-variation part.
    Decomposition d = Decomposition::zeros(a.set());
    for (std::size_t w = 0; w < a.n_scenarios(); ++w) {
        d.x0[w] = a.at(w, 0);
        for (std::size_t k = 1; k < a.set().section_size(w); ++k) d.fv_jump[w][k] = a.increment(w, k);
    }
    return detail::integrate(h, BProcess(a.set(), a.sections(), std::move(d), true), true);
}

/// Integral against an inner local martingale. A non-inner integrator is
/// rejected: on an open set its integral is not determined by values on B.
inline BProcess martingale_integral(const BPredictable& h, const BProcess& m) {
    detail::require_same_set(h, m, "martingale_integral");
    if (!m.inner())
        throw PreconditionError("martingale_integral: integrator is not an inner local martingale");
    return detail::integrate(h, m, true);
}

/// Splits a decomposed process into its martingale part M (with X_0) and
/// finite-variation part A (A_0 = 0).
inline std::pair<BProcess, BProcess> split_decomposition(const BProcess& x) {
    if (!x.decomposition()) throw PreconditionError("process carries no decomposition");
    const Decomposition& d = *x.decomposition();
    Decomposition dm = Decomposition::zeros(x.set());
    Decomposition da = Decomposition::zeros(x.set());
    dm.x0 = d.x0;
    dm.cont = d.cont;
    dm.disc = d.disc;
    dm.diffusion = d.diffusion;
    da.fv = d.fv;
    da.fv_jump = d.fv_jump;
    return {BProcess::from_decomposition(x.set(), std::move(dm), x.inner()),
            BProcess::from_decomposition(x.set(), std::move(da), true)};
}

/// H.X = H.M + H.A for an inner semimartingale X = M + A. The atom H_0 X_0
/// comes from the martingale part only since A_0 = 0.
inline BProcess semimartingale_integral(const BPredictable& h, const BProcess& x) {
    detail::require_same_set(h, x, "semimartingale_integral");
    if (!x.decomposition())
        throw PreconditionError("semimartingale_integral: integrator carries no decomposition");
    if (!x.inner())
        throw PreconditionError("semimartingale_integral: decomposition is not inner");
    auto [m, a] = split_decomposition(x);
    const BProcess hm = martingale_integral(h, m);
    const BProcess ha = stieltjes(h, a);
    Sections v = hm.sections();
    Decomposition d = *hm.decomposition();
    const Decomposition& da = *ha.decomposition();
    for (std::size_t w = 0; w < v.size(); ++w)
        for (std::size_t k = 0; k < v[w].size(); ++k) {
            v[w][k] += ha.at(w, k);
            d.fv[w][k] = da.fv[w][k];
            d.fv_jump[w][k] = da.fv_jump[w][k];
        }
    return BProcess(x.set(), std::move(v), std::move(d), true);
}

// ---------------------------------------------------------------------------
// Brackets

/// Parts of the grid quadratic covariation.
///  total      X_0Y_0 + sum dX dY (the grid covariation, all increments)
///  continuous sum dX^c dY^c, the realized <X^c, Y^c>
///  jump       sum of products of jump increments (disc + fv_jump)
///  canonical  X_0Y_0 + continuous + jump
/// A process without a decomposition counts every increment as a jump, so
/// for such inputs canonical == total.
struct BracketResult {
    BProcess total;
    BProcess continuous;
    BProcess jump;
    BProcess canonical;
};

namespace detail {

inline double cont_inc(const BProcess& x, std::size_t w, std::size_t k) {
    return x.decomposition() ? x.decomposition()->cont[w][k] : 0.0;
}

inline double jump_inc(const BProcess& x, std::size_t w, std::size_t k) {
    return x.decomposition() ? x.decomposition()->jump_increment(w, k) : x.increment(w, k);
}

}  // namespace detail

inline BracketResult bracket(const BProcess& x, const BProcess& y) {
    detail::require_same_set(x, y, "bracket");
    const std::size_t s = x.n_scenarios();
    Sections tot(s), con(s), jmp(s), can(s);
    for (std::size_t w = 0; w < s; ++w) {
        const std::size_t n = x.set().section_size(w);
        tot[w].resize(n);
        con[w].resize(n);
        jmp[w].resize(n);
        can[w].resize(n);
        const double x0y0 = x.at(w, 0) * y.at(w, 0);
        tot[w][0] = x0y0;
        con[w][0] = 0.0;
        jmp[w][0] = 0.0;
        can[w][0] = x0y0;
        for (std::size_t k = 1; k < n; ++k) {
            const double c = detail::cont_inc(x, w, k) * detail::cont_inc(y, w, k);
            const double j = detail::jump_inc(x, w, k) * detail::jump_inc(y, w, k);
            tot[w][k] = tot[w][k - 1] + x.increment(w, k) * y.increment(w, k);
            con[w][k] = con[w][k - 1] + c;
            jmp[w][k] = jmp[w][k - 1] + j;
            can[w][k] = can[w][k - 1] + c + j;
        }
    }
    return {BProcess(x.set(), std::move(tot)), BProcess(x.set(), std::move(con)),
            BProcess(x.set(), std::move(jmp)), BProcess(x.set(), std::move(can))};
}

enum class BracketConvention { realized, analytic };

/// <X^c, Y^c> from the continuous streams. Realized mode sums products of
/// increments; analytic mode integrates the attached diffusion coefficients.
inline BProcess predictable_qv(const BProcess& x, const BProcess& y,
                               BracketConvention conv = BracketConvention::realized) {
    detail::require_same_set(x, y, "predictable_qv");
    if (!x.decomposition() || !y.decomposition())
        throw PreconditionError("predictable_qv: inputs need continuous-martingale labels");
    const Decomposition& dx = *x.decomposition();
    const Decomposition& dy = *y.decomposition();
    if (conv == BracketConvention::analytic && (!dx.diffusion || !dy.diffusion))
        throw PreconditionError("predictable_qv: analytic mode needs diffusion coefficients");
    const double dt = x.set().grid().dt();
    Sections v(x.n_scenarios());
    for (std::size_t w = 0; w < v.size(); ++w) {
        v[w].assign(x.set().section_size(w), 0.0);
        for (std::size_t k = 1; k < v[w].size(); ++k) {
            const double inc = conv == BracketConvention::realized
                                   ? dx.cont[w][k] * dy.cont[w][k]
                                   : (*dx.diffusion)[w][k] * (*dy.diffusion)[w][k] * dt;
            v[w][k] = v[w][k - 1] + inc;
        }
    }
    return BProcess(x.set(), std::move(v));
}

// ---------------------------------------------------------------------------
// Inner check

struct InnerLevelStat {
    std::size_t level = 0;  // 1-based
    double mean = 0.0;
    double std_error = 0.0;
    bool pass = false;
};

struct InnerReport {
    /// Pure martingale labels on an inner-flagged decomposition.
    bool structural = false;
    /// Every level passes the zero-mean test.
    bool statistical = false;
    std::vector<InnerLevelStat> levels;

    bool is_inner() const noexcept { return structural && statistical; }
};

/// Tests each level of the ladder, stopped at T_n ^ (T_F-), for zero mean:
/// the per-scenario total increment must average to 0 within z_limit
/// standard errors (exactly 0 when there is no dispersion).
inline InnerReport check_inner(const BProcess& m, const CoupledSequence& fcs, double z_limit = 4.0) {
    if (fcs.empty()) throw PreconditionError("check_inner: no coupled sequence supplied");
    const IntervalTypeSet& set = m.set();
    InnerReport rep;
    rep.structural = m.inner() && m.decomposition() && m.decomposition()->pure_martingale();
    rep.statistical = true;
    const std::size_t last_node = set.grid().n_steps();
    for (std::size_t n = 0; n < fcs.size(); ++n) {
        const CoupledLevel& lv = fcs[n];
        if (lv.paths.size() != set.n_scenarios() || lv.time.n_scenarios() != set.n_scenarios())
            throw ValidationError("check_inner: ladder does not match the set");
        std::vector<double> d(set.n_scenarios());
        double scale = 0.0;
        for (std::size_t w = 0; w < d.size(); ++w) {
            const SamplePath& p = lv.paths[w];
            std::size_t node = lv.time.clamped(w, last_node);
            const std::size_t debut = set.debut()[w];
            if (set.is_open(w) && debut != StoppingTime::kInfinity && debut <= node)
                node = debut - 1;  // frozen at the left limit X_{T_F-}
            d[w] = p[node] - p[0];
            scale = std::max({scale, std::abs(p[node]), std::abs(p[0])});
        }
        const double sz = static_cast<double>(d.size());
        const double mean = pairwise_sum(d) / sz;
        double ss = 0.0;
        for (double x : d) ss += (x - mean) * (x - mean);
        const double se = d.size() > 1 ? std::sqrt(ss / (sz - 1.0) / sz) : 0.0;
        InnerLevelStat st{n + 1, mean, se, false};
        st.pass = se > 1e-14 * std::max(1.0, scale) ? std::abs(mean) <= z_limit * se
                                                    : std::abs(mean) <= 1e-12 * std::max(1.0, scale);
        rep.statistical = rep.statistical && st.pass;
        rep.levels.push_back(st);
    }
    return rep;
}

}  // namespace hcalc

#endif
