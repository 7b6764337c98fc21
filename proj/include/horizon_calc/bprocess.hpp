#ifndef HORIZON_CALC_BPROCESS_HPP
#define HORIZON_CALC_BPROCESS_HPP

// Processes that live only on a stochastic set of interval type, their
// coupled-sequence representation and the gluing/stopping/jump toolkit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "horizon_calc/errors.hpp"
#include "horizon_calc/grid_paths.hpp"
#include "horizon_calc/interval_sets.hpp"

namespace hcalc {

/// Per-scenario value arrays, one entry per member node.
using Sections = std::vector<std::vector<double>>;

/// Labelled increment streams of a decomposed process X = X_0 + M^c + M^d + A.
/// Index 0 of every stream is zero; index k is the increment over
/// (t_{k-1}, t_k]. The finite-variation part is split into its continuous
/// (drift) increments and its jumps; only disc and fv_jump count as jumps.
struct Decomposition {
    std::vector<double> x0;
    Sections cont;
    Sections disc;
    Sections fv;
    Sections fv_jump;
    /// Optional diffusion coefficient of the continuous part per interval
    /// (index 0 unused), so that d<X^c> = coefficient^2 dt.
    std::optional<Sections> diffusion;

    /// Zero streams sized like the sections of a set.
    static Decomposition zeros(const IntervalTypeSet& set) {
        Decomposition d;
        d.x0.assign(set.n_scenarios(), 0.0);
        for (Sections* s : {&d.cont, &d.disc, &d.fv, &d.fv_jump}) {
            s->resize(set.n_scenarios());
            for (std::size_t w = 0; w < set.n_scenarios(); ++w)
                (*s)[w].assign(set.section_size(w), 0.0);
        }
        return d;
    }

    double jump_increment(std::size_t w, std::size_t k) const { return disc[w][k] + fv_jump[w][k]; }
    double total_increment(std::size_t w, std::size_t k) const {
        return cont[w][k] + disc[w][k] + fv[w][k] + fv_jump[w][k];
    }
    bool has_jump(std::size_t w, std::size_t k) const {
        return disc[w][k] != 0.0 || fv_jump[w][k] != 0.0;
    }
    bool pure_martingale() const {
        for (const Sections* s : {&fv, &fv_jump})
            for (const auto& v : *s)
                for (double x : v)
                    if (x != 0.0) return false;
        return true;
    }
};

class BProcess {
public:
    BProcess(IntervalTypeSet set, Sections values, std::optional<Decomposition> dec = std::nullopt,
             bool inner = false)
        : set_(std::move(set)), values_(std::move(values)), dec_(std::move(dec)), inner_(inner) {
        if (values_.size() != set_.n_scenarios())
            throw ValidationError("B-process scenario count does not match its set");
        for (std::size_t w = 0; w < values_.size(); ++w) {
            if (values_[w].size() != set_.section_size(w))
                throw ValidationError("B-process section " + std::to_string(w) +
                                      " has wrong length");
            for (double v : values_[w])
                if (!std::isfinite(v)) throw ValidationError("B-process values must be finite");
        }
        if (dec_) check_decomposition();
    }

    /// Values f(w, k) at every member node.
    template <class Fn>
    static BProcess from_fn(IntervalTypeSet set, Fn&& f) {
        Sections v(set.n_scenarios());
        for (std::size_t w = 0; w < v.size(); ++w) {
            v[w].resize(set.section_size(w));
            for (std::size_t k = 0; k < v[w].size(); ++k) v[w][k] = f(w, k);
        }
        return BProcess(std::move(set), std::move(v));
    }

    static BProcess zero(IntervalTypeSet set) {
        return from_fn(std::move(set), [](std::size_t, std::size_t) { return 0.0; });
    }

    /// Rebuild values from x0 plus the summed streams.
    static BProcess from_decomposition(IntervalTypeSet set, Decomposition dec, bool inner) {
        Sections v(set.n_scenarios());
        for (std::size_t w = 0; w < v.size(); ++w) {
            v[w].resize(set.section_size(w));
            v[w][0] = dec.x0.at(w);
            for (std::size_t k = 1; k < v[w].size(); ++k)
                v[w][k] = v[w][k - 1] + dec.total_increment(w, k);
        }
        return BProcess(std::move(set), std::move(v), std::move(dec), inner);
    }

    const IntervalTypeSet& set() const noexcept { return set_; }
    std::size_t n_scenarios() const noexcept { return values_.size(); }
    const Sections& sections() const noexcept { return values_; }
    std::span<const double> section(std::size_t w) const { return values_.at(w); }

    double at(std::size_t w, std::size_t k) const {
        if (w >= values_.size()) throw std::out_of_range("scenario index out of range");
        if (k >= values_[w].size()) throw DomainError(w, k);
        return values_[w][k];
    }

    /// Increment over (t_{k-1}, t_k]; zero at node 0.
    double increment(std::size_t w, std::size_t k) const {
        return k == 0 ? 0.0 : at(w, k) - at(w, k - 1);
    }

    const std::optional<Decomposition>& decomposition() const noexcept { return dec_; }
    bool has_decomposition() const noexcept { return dec_.has_value(); }
    bool inner() const noexcept { return inner_; }

    BProcess without_decomposition() const { return BProcess(set_, values_); }

private:
    void check_decomposition() const {
        const Decomposition& d = *dec_;
        const std::size_t s = set_.n_scenarios();
        if (d.x0.size() != s || d.cont.size() != s || d.disc.size() != s || d.fv.size() != s ||
            d.fv_jump.size() != s || (d.diffusion && d.diffusion->size() != s))
            throw ValidationError("decomposition scenario count does not match the set");
        for (std::size_t w = 0; w < s; ++w) {
            const std::size_t n = set_.section_size(w);
            if (d.cont[w].size() != n || d.disc[w].size() != n || d.fv[w].size() != n ||
                d.fv_jump[w].size() != n || (d.diffusion && (*d.diffusion)[w].size() != n))
                throw ValidationError("decomposition stream length mismatch in scenario " +
                                      std::to_string(w));
            if (d.cont[w][0] != 0.0 || d.disc[w][0] != 0.0 || d.fv[w][0] != 0.0 ||
                d.fv_jump[w][0] != 0.0)
                throw ValidationError("decomposition streams must start from zero");
            const double scale = std::max(1.0, std::abs(values_[w][0]));
            if (std::abs(d.x0[w] - values_[w][0]) > 1e-9 * scale)
                throw ValidationError("decomposition initial value does not match the process");
            for (std::size_t k = 1; k < n; ++k) {
                const double inc = values_[w][k] - values_[w][k - 1];
                const double sc = std::max({1.0, std::abs(values_[w][k]), std::abs(values_[w][k - 1])});
                if (std::abs(inc - d.total_increment(w, k)) > 1e-9 * sc)
                    throw ValidationError("decomposition streams do not sum to the increments "
                                          "(scenario " + std::to_string(w) + ", node " +
                                          std::to_string(k) + ")");
            }
        }
    }

    IntervalTypeSet set_;
    Sections values_;
    std::optional<Decomposition> dec_;
    bool inner_;
};

// ---------------------------------------------------------------------------
// Coupled sequences

struct CoupledLevel {
    StoppingTime time;
    std::vector<SamplePath> paths;  // one full-grid path per scenario
};

/// Finite ladder (T_n, X^(n)): an infinite ladder truncated once
/// [0, T_L] covers the set.
class CoupledSequence {
public:
    CoupledSequence() = default;
    explicit CoupledSequence(std::vector<CoupledLevel> levels) : levels_(std::move(levels)) {}

    std::size_t size() const noexcept { return levels_.size(); }
    bool empty() const noexcept { return levels_.empty(); }
    const CoupledLevel& operator[](std::size_t n) const { return levels_.at(n); }
    const std::vector<CoupledLevel>& levels() const noexcept { return levels_; }
    void push_back(CoupledLevel level) { levels_.push_back(std::move(level)); }

private:
    std::vector<CoupledLevel> levels_;
};

struct FcsViolation {
    enum class Kind { shape, ordering, beyond_debut, exhaustion, consistency };
    Kind kind;
    std::size_t scenario = 0;
    std::size_t node = 0;
    std::size_t k = 0;  // 1-based level indices
    std::size_t l = 0;
};

inline const char* to_string(FcsViolation::Kind kind) {
    switch (kind) {
        case FcsViolation::Kind::shape: return "shape";
        case FcsViolation::Kind::ordering: return "ordering";
        case FcsViolation::Kind::beyond_debut: return "beyond_debut";
        case FcsViolation::Kind::exhaustion: return "exhaustion";
        case FcsViolation::Kind::consistency: return "consistency";
    }
    return "?";
}

struct FcsReport {
    std::vector<FcsViolation> violations;

    bool valid() const noexcept { return violations.empty(); }

    std::string summary(std::size_t max_lines = 10) const {
        std::ostringstream os;
        os << violations.size() << " violation(s)";
        for (std::size_t i = 0; i < violations.size() && i < max_lines; ++i) {
            const auto& v = violations[i];
            os << "\n  " << to_string(v.kind) << " scenario=" << v.scenario << " node=" << v.node
               << " k=" << v.k << " l=" << v.l;
        }
        return os.str();
    }
};

class FcsError : public ValidationError {
public:
    explicit FcsError(FcsReport report)
        : ValidationError("invalid coupled sequence: " + report.summary()),
          report_(std::move(report)) {}
    const FcsReport& report() const noexcept { return report_; }

private:
    FcsReport report_;
};

/// Checks the ladder, exhaustion and pairwise consistency on B n [0, T_k].
/// Values outside B are never compared.
inline FcsReport validate_fcs(const IntervalTypeSet& set, const CoupledSequence& cs) {
    using Kind = FcsViolation::Kind;
    FcsReport rep;
    const std::size_t s = set.n_scenarios();
    if (cs.empty()) {
        rep.violations.push_back({Kind::shape});
        return rep;
    }
    for (std::size_t n = 0; n < cs.size(); ++n) {
        const auto& lv = cs[n];
        bool ok = lv.time.n_scenarios() == s && lv.paths.size() == s;
        for (std::size_t w = 0; ok && w < s; ++w) ok = lv.paths[w].grid() == set.grid();
        if (!ok) rep.violations.push_back({Kind::shape, 0, 0, n + 1, n + 1});
    }
    if (!rep.valid()) return rep;

    for (std::size_t w = 0; w < s; ++w) {
        const std::size_t debut = set.debut()[w];
        for (std::size_t n = 0; n < cs.size(); ++n) {
            const std::size_t t = cs[n].time[w];
            if (n > 0 && t < cs[n - 1].time[w])
                rep.violations.push_back({Kind::ordering, w, 0, n, n + 1});
            if (debut != StoppingTime::kInfinity && t > debut)
                rep.violations.push_back({Kind::beyond_debut, w, 0, n + 1, n + 1});
        }
        const std::size_t last = set.last_member(w);
        if (cs[cs.size() - 1].time[w] < last)
            rep.violations.push_back(
                {Kind::exhaustion, w, cs[cs.size() - 1].time[w] + 1, cs.size(), cs.size()});
        for (std::size_t k = 0; k < cs.size(); ++k) {
            const std::size_t upto = std::min(last, cs[k].time[w]);
            for (std::size_t l = k + 1; l < cs.size(); ++l)
                for (std::size_t node = 0; node <= upto; ++node)
                    if (cs[k].paths[w][node] != cs[l].paths[w][node])
                        rep.violations.push_back({Kind::consistency, w, node, k + 1, l + 1});
        }
    }
    return rep;
}

/// X = X_0 at node 0, and X^(n) on ]T_{n-1}, T_n] at the member nodes.
inline BProcess glue(const IntervalTypeSet& set, const CoupledSequence& cs) {
    FcsReport rep = validate_fcs(set, cs);
    if (!rep.valid()) throw FcsError(std::move(rep));
    Sections v(set.n_scenarios());
    for (std::size_t w = 0; w < v.size(); ++w) {
        v[w].resize(set.section_size(w));
        v[w][0] = cs[0].paths[w][0];
        std::size_t n = 0;
        for (std::size_t t = 1; t < v[w].size(); ++t) {
            while (cs[n].time[w] < t) ++n;  // exhaustion guarantees termination
            v[w][t] = cs[n].paths[w][t];
        }
    }
    return BProcess(set, std::move(v));
}

namespace detail {

inline Sections truncate(const Sections& s, const IntervalTypeSet& sub) {
    Sections out(s.size());
    for (std::size_t w = 0; w < s.size(); ++w)
        out[w].assign(s[w].begin(), s[w].begin() + static_cast<std::ptrdiff_t>(sub.section_size(w)));
    return out;
}

inline Decomposition truncate(const Decomposition& d, const IntervalTypeSet& sub) {
    Decomposition out;
    out.x0 = d.x0;
    out.cont = truncate(d.cont, sub);
    out.disc = truncate(d.disc, sub);
    out.fv = truncate(d.fv, sub);
    out.fv_jump = truncate(d.fv_jump, sub);
    if (d.diffusion) out.diffusion = truncate(*d.diffusion, sub);
    return out;
}

/// Zero every stream after node stop[w].
inline Decomposition freeze(Decomposition d, const StoppingTime& stop) {
    for (std::size_t w = 0; w < d.x0.size(); ++w) {
        const std::size_t t = stop[w];
        for (Sections* s : {&d.cont, &d.disc, &d.fv, &d.fv_jump})
            for (std::size_t k = 0; k < (*s)[w].size(); ++k)
                if (k > t) (*s)[w][k] = 0.0;
        if (d.diffusion)
            for (std::size_t k = 0; k < (*d.diffusion)[w].size(); ++k)
                if (k > t) (*d.diffusion)[w][k] = 0.0;
    }
    return d;
}

inline void require_same_set(const BProcess& x, const BProcess& y, const char* what) {
    if (!x.set().same_sections(y.set()))
        throw ValidationError(std::string(what) + ": processes live on different sets");
}

}  // namespace detail

/// Full-grid paths restricted to a set.
inline BProcess restrict(const std::vector<SamplePath>& paths, const IntervalTypeSet& subset) {
    if (paths.size() != subset.n_scenarios())
        throw ValidationError("restrict: scenario count mismatch");
    return BProcess::from_fn(subset, [&](std::size_t w, std::size_t k) { return paths[w][k]; });
}

/// B-process restricted to a smaller set.
inline BProcess restrict(const BProcess& x, const IntervalTypeSet& subset) {
    if (!subset.subset_of(x.set())) throw PreconditionError("restrict: subset is not inside the domain");
    std::optional<Decomposition> dec;
    if (x.decomposition()) dec = detail::truncate(*x.decomposition(), subset);
    return BProcess(subset, detail::truncate(x.sections(), subset), std::move(dec), x.inner());
}

/// X^T restricted to B: frozen at X_T after T. T must be inner.
inline BProcess stop(const BProcess& x, const StoppingTime& t) {
    if (!is_inner_stopping_time(x.set(), t))
        throw PreconditionError("stop: stopping time is not inner to the set");
    Sections v = x.sections();
    for (std::size_t w = 0; w < v.size(); ++w) {
        const std::size_t k_stop = t[w];
        for (std::size_t k = 0; k < v[w].size(); ++k)
            if (k > k_stop) v[w][k] = v[w][k_stop];
    }
    std::optional<Decomposition> dec;
    if (x.decomposition()) dec = detail::freeze(*x.decomposition(), t);
    return BProcess(x.set(), std::move(v), std::move(dec), x.inner());
}

/// X^{T-}: X before T, frozen at the left limit X_{T-} from T on.
inline SamplePath stop_minus(const SamplePath& path, std::size_t t) {
    if (t == StoppingTime::kInfinity || t >= path.size()) return path;
    std::vector<double> v(path.values().begin(), path.values().end());
    const double frozen = t == 0 ? path[0] : path[t - 1];
    for (std::size_t k = t; k < v.size(); ++k) v[k] = frozen;
    return SamplePath(path.grid(), std::move(v));
}

/// Full-path stopping X^T (no set involved).
inline SamplePath stop_path(const SamplePath& path, std::size_t t) {
    if (t == StoppingTime::kInfinity || t >= path.size()) return path;
    std::vector<double> v(path.values().begin(), path.values().end());
    for (std::size_t k = t + 1; k < v.size(); ++k) v[k] = v[t];
    return SamplePath(path.grid(), std::move(v));
}

/// Jump process on B; zero at node 0.
inline BProcess bjump(const BProcess& x) {
    return BProcess::from_fn(x.set(), [&](std::size_t w, std::size_t k) { return x.increment(w, k); });
}

/// Running nodewise sum, node 0 included.
inline BProcess bsummation(const BProcess& x) {
    Sections v = x.sections();
    for (auto& s : v)
        for (std::size_t k = 1; k < s.size(); ++k) s[k] += s[k - 1];
    return BProcess(x.set(), std::move(v));
}

/// X * I_[0,T] on B.
inline BProcess indicator_up_to(const BProcess& x, const StoppingTime& t) {
    return BProcess::from_fn(x.set(), [&](std::size_t w, std::size_t k) {
        return k <= t[w] ? x.at(w, k) : 0.0;
    });
}

/// a*X + b*Y. Decompositions combine stream-wise when both are present;
/// the inner flag survives when both inputs carry it.
inline BProcess lincomb(double a, const BProcess& x, double b, const BProcess& y) {
    detail::require_same_set(x, y, "lincomb");
    Sections v = x.sections();
    for (std::size_t w = 0; w < v.size(); ++w)
        for (std::size_t k = 0; k < v[w].size(); ++k) v[w][k] = a * v[w][k] + b * y.at(w, k);
    std::optional<Decomposition> dec;
    if (x.decomposition() && y.decomposition()) {
        const Decomposition& dx = *x.decomposition();
        const Decomposition& dy = *y.decomposition();
        Decomposition d = dx;
        for (std::size_t w = 0; w < v.size(); ++w) {
            d.x0[w] = a * dx.x0[w] + b * dy.x0[w];
            for (auto [out, lhs, rhs] : {std::tuple{&d.cont, &dx.cont, &dy.cont},
                                         std::tuple{&d.disc, &dx.disc, &dy.disc},
                                         std::tuple{&d.fv, &dx.fv, &dy.fv},
                                         std::tuple{&d.fv_jump, &dx.fv_jump, &dy.fv_jump}})
                for (std::size_t k = 0; k < v[w].size(); ++k)
                    (*out)[w][k] = a * (*lhs)[w][k] + b * (*rhs)[w][k];
        }
        d.diffusion.reset();
        dec = std::move(d);
    }
    const bool inner = dec.has_value() && x.inner() && y.inner();
    return BProcess(x.set(), std::move(v), std::move(dec), inner);
}

/// Ladder for B n [0, S]: times T_n ^ S, same levels.
inline CoupledSequence restrict_fcs(const CoupledSequence& cs, const StoppingTime& s) {
    CoupledSequence out;
    for (const CoupledLevel& lv : cs.levels()) out.push_back({meet(lv.time, s), lv.paths});
    return out;
}

/// Both ladders re-indexed on tau_n = T_n ^ S_n. The shorter ladder is
/// extended by repeating its last level, which keeps it a valid FCS.
inline std::pair<CoupledSequence, CoupledSequence> merge_fcs_times(const IntervalTypeSet& set,
                                                                   const CoupledSequence& a,
                                                                   const CoupledSequence& b) {
    for (const CoupledSequence* cs : {&a, &b}) {
        FcsReport rep = validate_fcs(set, *cs);
        if (!rep.valid()) throw FcsError(std::move(rep));
    }
    const std::size_t len = std::max(a.size(), b.size());
    CoupledSequence out_a;
    CoupledSequence out_b;
    for (std::size_t n = 0; n < len; ++n) {
        const CoupledLevel& la = a[std::min(n, a.size() - 1)];
        const CoupledLevel& lb = b[std::min(n, b.size() - 1)];
        StoppingTime tau = meet(la.time, lb.time);
        out_a.push_back({tau, la.paths});
        out_b.push_back({tau, lb.paths});
    }
    return {std::move(out_a), std::move(out_b)};
}

}  // namespace hcalc

#endif
