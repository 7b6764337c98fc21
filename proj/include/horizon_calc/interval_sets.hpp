#ifndef HORIZON_CALC_INTERVAL_SETS_HPP
#define HORIZON_CALC_INTERVAL_SETS_HPP

// Stochastic sets of interval type on a grid.
//
// Each scenario section is a down-set of node indices: [0, T[ when the
// scenario is in F (open) or [0, T] otherwise (closed). An infinite debut
// gives the whole grid.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "horizon_calc/errors.hpp"
#include "horizon_calc/grid_paths.hpp"

namespace hcalc {

/// Per-scenario grid index, or the infinity marker.
class StoppingTime {
public:
    static constexpr std::size_t kInfinity = std::numeric_limits<std::size_t>::max();

    StoppingTime() = default;
    explicit StoppingTime(std::vector<std::size_t> index) : index_(std::move(index)) {}

    static StoppingTime constant(std::size_t n_scenarios, std::size_t k) {
        return StoppingTime(std::vector<std::size_t>(n_scenarios, k));
    }
    static StoppingTime infinite(std::size_t n_scenarios) { return constant(n_scenarios, kInfinity); }

    std::size_t n_scenarios() const noexcept { return index_.size(); }
    std::size_t operator[](std::size_t w) const { return index_.at(w); }
    bool is_infinite(std::size_t w) const { return index_.at(w) == kInfinity; }
    const std::vector<std::size_t>& indices() const noexcept { return index_; }

    /// Grid index with infinity clamped to the last node.
    std::size_t clamped(std::size_t w, std::size_t last_node) const {
        return std::min(index_.at(w), last_node);
    }

    friend bool operator==(const StoppingTime&, const StoppingTime&) = default;

private:
    std::vector<std::size_t> index_;
};

/// Pointwise T ^ S.
inline StoppingTime meet(const StoppingTime& a, const StoppingTime& b) {
    if (a.n_scenarios() != b.n_scenarios())
        throw ValidationError("stopping times have different scenario counts");
    std::vector<std::size_t> out(a.n_scenarios());
    for (std::size_t w = 0; w < out.size(); ++w) out[w] = std::min(a[w], b[w]);
    return StoppingTime(std::move(out));
}

enum class SetClass { optional, predictable };

class IntervalTypeSet {
public:
    /// Throws ValidationError listing scenarios whose open section would be
    /// empty (debut 0 in F).
    IntervalTypeSet(TimeGrid grid, StoppingTime debut, std::vector<bool> open,
                    SetClass cls = SetClass::optional)
        : grid_(grid), debut_(std::move(debut)), open_(std::move(open)), class_(cls) {
        if (open_.size() != debut_.n_scenarios())
            throw ValidationError("open flags and debut differ in scenario count");
        if (debut_.n_scenarios() == 0) throw ValidationError("set needs at least one scenario");
        std::string bad;
        for (std::size_t w = 0; w < open_.size(); ++w) {
            const std::size_t k = debut_[w];
            if (k != StoppingTime::kInfinity && k > grid_.n_steps())
                throw ValidationError("debut index " + std::to_string(k) + " beyond grid");
            if (open_[w] && k == 0) bad += (bad.empty() ? "" : ",") + std::to_string(w);
        }
        if (!bad.empty())
            throw ValidationError("open section with zero debut (empty) in scenarios: " + bad);
        last_.resize(open_.size());
        for (std::size_t w = 0; w < open_.size(); ++w) {
            const std::size_t k = debut_[w];
            last_[w] = k == StoppingTime::kInfinity ? grid_.n_steps() : (open_[w] ? k - 1 : k);
        }
    }

    /// The whole grid in every scenario.
    static IntervalTypeSet full(TimeGrid grid, std::size_t n_scenarios) {
        return IntervalTypeSet(grid, StoppingTime::infinite(n_scenarios),
                               std::vector<bool>(n_scenarios, false), SetClass::predictable);
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t n_scenarios() const noexcept { return open_.size(); }
    const StoppingTime& debut() const noexcept { return debut_; }
    bool is_open(std::size_t w) const { return open_.at(w); }
    const std::vector<bool>& open_flags() const noexcept { return open_; }
    /// Recorded metadata only; nothing on a finite grid enforces it.
    SetClass set_class() const noexcept { return class_; }

    /// Largest member node of scenario w.
    std::size_t last_member(std::size_t w) const { return last_.at(w); }
    std::size_t section_size(std::size_t w) const { return last_.at(w) + 1; }

    bool contains(std::size_t w, std::size_t node) const {
        if (w >= n_scenarios()) throw std::out_of_range("scenario index out of range");
        if (node > grid_.n_steps()) throw std::out_of_range("node index out of range");
        return node <= last_[w];
    }

    bool is_full(std::size_t w) const { return last_.at(w) == grid_.n_steps(); }

    /// Same member nodes in every scenario (representations may differ:
    /// [0,3[ and [0,2] have the same grid section).
    bool same_sections(const IntervalTypeSet& other) const {
        return grid_ == other.grid_ && last_ == other.last_;
    }

    /// Every section of this set lies inside the matching section of other.
    bool subset_of(const IntervalTypeSet& other) const {
        if (!(grid_ == other.grid_) || n_scenarios() != other.n_scenarios()) return false;
        for (std::size_t w = 0; w < n_scenarios(); ++w)
            if (last_[w] > other.last_[w]) return false;
        return true;
    }

private:
    TimeGrid grid_;
    StoppingTime debut_;
    std::vector<bool> open_;
    SetClass class_;
    std::vector<std::size_t> last_;
};

inline IntervalTypeSet make_interval_set(const TimeGrid& grid, StoppingTime debut,
                                         std::vector<bool> open_flags) {
    return IntervalTypeSet(grid, std::move(debut), std::move(open_flags));
}

inline bool membership(const IntervalTypeSet& set, std::size_t scenario, std::size_t node) {
    return set.contains(scenario, node);
}

/// Nondecreasing ladder of stopping times.
class FundamentalSequence {
public:
    explicit FundamentalSequence(std::vector<StoppingTime> times) : times_(std::move(times)) {
        if (times_.empty()) throw ValidationError("fundamental sequence is empty");
        const std::size_t s = times_.front().n_scenarios();
        for (std::size_t n = 1; n < times_.size(); ++n) {
            if (times_[n].n_scenarios() != s)
                throw ValidationError("fundamental sequence levels differ in scenario count");
            for (std::size_t w = 0; w < s; ++w)
                if (times_[n][w] < times_[n - 1][w])
                    throw ValidationError("fundamental sequence decreases at level " +
                                          std::to_string(n + 1) + ", scenario " +
                                          std::to_string(w));
        }
    }

    std::size_t size() const noexcept { return times_.size(); }
    const StoppingTime& operator[](std::size_t n) const { return times_.at(n); }
    const std::vector<StoppingTime>& times() const noexcept { return times_; }

private:
    std::vector<StoppingTime> times_;
};

/// Union of [0, tau_n]. A finite grid always attains the supremum, so the
/// result is closed at the last tau (or the whole grid if it is infinite).
inline IntervalTypeSet predictable_from_fs(const TimeGrid& grid, const FundamentalSequence& fs) {
    const StoppingTime& last = fs[fs.size() - 1];
    return IntervalTypeSet(grid, last, std::vector<bool>(last.n_scenarios(), false),
                           SetClass::predictable);
}

/// Sections B_w intersected with [0, S(w)].
inline IntervalTypeSet intersect_stop(const IntervalTypeSet& set, const StoppingTime& stop) {
    if (stop.n_scenarios() != set.n_scenarios())
        throw ValidationError("stopping time and set differ in scenario count");
    std::vector<std::size_t> debut(set.n_scenarios());
    std::vector<bool> open(set.n_scenarios());
    for (std::size_t w = 0; w < set.n_scenarios(); ++w) {
        if (stop[w] >= set.last_member(w)) {
            debut[w] = set.debut()[w];
            open[w] = set.is_open(w);
        } else {
            debut[w] = stop[w];
            open[w] = false;
        }
    }
    return IntervalTypeSet(set.grid(), StoppingTime(std::move(debut)), std::move(open),
                           set.set_class());
}

/// [0, S] is contained in B: S(w) is a member node, and S = infinity only
/// where the section is the whole grid.
inline bool is_inner_stopping_time(const IntervalTypeSet& set, const StoppingTime& stop) {
    if (stop.n_scenarios() != set.n_scenarios()) return false;
    for (std::size_t w = 0; w < set.n_scenarios(); ++w) {
        if (stop.is_infinite(w)) {
            if (!set.is_full(w)) return false;
        } else if (stop[w] > set.last_member(w)) {
            return false;
        }
    }
    return true;
}

}  // namespace hcalc

#endif
