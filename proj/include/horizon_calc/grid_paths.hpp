#ifndef HORIZON_CALC_GRID_PATHS_HPP
#define HORIZON_CALC_GRID_PATHS_HPP

// Uniform time grids, cadlag grid paths and reproducible random streams.
//
// A node value is the right limit X(t_k); the jump at node k is the node
// increment X(t_k) - X(t_{k-1}) and the jump at node 0 is zero (X_{0-} = X_0).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "horizon_calc/errors.hpp"

namespace hcalc {

class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps) : horizon_(horizon), n_steps_(n_steps) {
        if (!(horizon > 0.0) || !std::isfinite(horizon))
            throw ValidationError("grid horizon must be a positive finite number");
        if (n_steps == 0) throw ValidationError("grid needs at least one step");
        dt_ = horizon / static_cast<double>(n_steps);
    }

    double horizon() const noexcept { return horizon_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t n_nodes() const noexcept { return n_steps_ + 1; }
    double dt() const noexcept { return dt_; }

    /// t_k = k * dt, with t_N pinned to the horizon.
    double time(std::size_t k) const {
        if (k > n_steps_) throw std::out_of_range("grid node index out of range");
        return k == n_steps_ ? horizon_ : static_cast<double>(k) * dt_;
    }

    std::vector<double> nodes() const {
        std::vector<double> t(n_nodes());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = time(k);
        return t;
    }

    /// Index of the first node at or after t (clamped to N).
    std::size_t node_at_or_after(double t) const {
        if (t <= 0.0) return 0;
        const double r = t / dt_;
        // tolerate representation error when t sits on a node
        const double nearest = std::round(r);
        const double k = std::abs(r - nearest) < 1e-9 ? nearest : std::ceil(r);
        return k >= static_cast<double>(n_steps_) ? n_steps_ : static_cast<std::size_t>(k);
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double horizon_;
    std::size_t n_steps_;
    double dt_ = 0.0;
};

inline TimeGrid make_grid(double horizon, std::size_t n_steps) { return TimeGrid(horizon, n_steps); }

class SamplePath {
public:
    SamplePath(TimeGrid grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.n_nodes())
            throw ValidationError("path length " + std::to_string(values_.size()) +
                                  " does not match grid with " +
                                  std::to_string(grid_.n_nodes()) + " nodes");
        for (double v : values_)
            if (!std::isfinite(v)) throw ValidationError("path values must be finite");
    }

    static SamplePath constant(TimeGrid grid, double c) {
        return SamplePath(grid, std::vector<double>(grid.n_nodes(), c));
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t k) const { return values_.at(k); }
    double front() const { return values_.front(); }
    double back() const { return values_.back(); }

    friend bool operator==(const SamplePath&, const SamplePath&) = default;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

/// Predictable integrand on the grid: an atom at 0 plus one value per
/// interval (t_{k-1}, t_k], k = 1..N.
class PredictablePath {
public:
    PredictablePath(TimeGrid grid, double atom_at_zero, std::vector<double> interval_values)
        : grid_(grid), atom_(atom_at_zero), intervals_(std::move(interval_values)) {
        if (intervals_.size() != grid_.n_steps())
            throw ValidationError("predictable path needs one value per grid interval");
        if (!std::isfinite(atom_)) throw ValidationError("predictable atom must be finite");
        for (double v : intervals_)
            if (!std::isfinite(v)) throw ValidationError("predictable values must be finite");
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    double atom() const noexcept { return atom_; }
    std::span<const double> intervals() const noexcept { return intervals_; }

    /// Value multiplying increment k (k = 0 is the atom).
    double at(std::size_t k) const {
        if (k > grid_.n_steps()) throw std::out_of_range("predictable index out of range");
        return k == 0 ? atom_ : intervals_[k - 1];
    }

private:
    TimeGrid grid_;
    double atom_;
    std::vector<double> intervals_;
};

/// Jump of a path at node k; zero at node 0.
inline double jump(const SamplePath& path, std::size_t k) {
    if (k >= path.size()) throw std::out_of_range("jump: node index out of range");
    return k == 0 ? 0.0 : path[k] - path[k - 1];
}

/// Grid realization of X_-: w_0 = v_0, w_k = v_{k-1}.
inline SamplePath left_limit(const SamplePath& path) {
    std::vector<double> w(path.size());
    w[0] = path[0];
    for (std::size_t k = 1; k < w.size(); ++k) w[k] = path[k - 1];
    return SamplePath(path.grid(), std::move(w));
}

// ---------------------------------------------------------------------------
// Random streams

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: draw i of a stream is mix64(key + i * golden),
/// so a stream is fully determined by its key and can be created anywhere.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double phi = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// A batch of scenarios sharing a seed. Each (path, tag) pair owns an
/// independent sub-stream; tags separate the different drivers of one path.
class ScenarioBatch {
public:
    ScenarioBatch(std::size_t n_paths, std::uint64_t seed) : n_paths_(n_paths), seed_(seed) {
        if (n_paths == 0) throw ValidationError("batch needs at least one path");
    }

    std::size_t n_paths() const noexcept { return n_paths_; }
    std::uint64_t seed() const noexcept { return seed_; }

    CounterRng stream(std::size_t path, std::uint64_t tag = 0) const {
        if (path >= n_paths_) throw std::out_of_range("batch path index out of range");
        const std::uint64_t a = detail::mix64(seed_ ^ 0x6A09E667F3BCC908ULL);
        const std::uint64_t b = detail::mix64(a + (static_cast<std::uint64_t>(path) + 1) * detail::kGolden);
        return CounterRng(detail::mix64(b ^ (tag * 0xD1B54A32D192ED03ULL + 0x3C6EF372FE94F82BULL)));
    }

private:
    std::size_t n_paths_;
    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Parallel helpers. Work is cut into fixed-size chunks independent of the
// thread count, so chunk-level reductions are order-stable.

inline std::size_t thread_budget() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("HORIZON_CALC_THREADS")) {
        char* end = nullptr;
        const unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && cap > 0) n = std::min<std::size_t>(n, cap);
    }
    return n;
}

/// Calls body(chunk_index, begin, end) for each chunk of [0, n).
template <class Body>
void for_each_chunk(std::size_t n, std::size_t chunk, Body&& body) {
    if (n == 0) return;
    chunk = std::max<std::size_t>(chunk, 1);
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    const std::size_t workers = std::min(thread_budget(), n_chunks);
    auto run = [&](std::size_t w) {
        for (std::size_t c = w; c < n_chunks; c += workers)
            body(c, c * chunk, std::min(n, (c + 1) * chunk));
    };
    if (workers <= 1) {
        run(0);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
    run(0);
}

/// Pairwise summation; fixed order for a given input.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

/// Standard Brownian paths: v_0 = 0, increments N(0, dt). Path i uses
/// sub-stream (i, tag) of the batch.
inline std::vector<SamplePath> sample_brownian(const TimeGrid& grid, const ScenarioBatch& batch,
                                               std::uint64_t tag = 0) {
    std::vector<std::vector<double>> raw(batch.n_paths());
    const double sd = std::sqrt(grid.dt());
    for_each_chunk(batch.n_paths(), 64, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            CounterRng rng = batch.stream(i, tag);
            std::vector<double> v(grid.n_nodes());
            v[0] = 0.0;
            for (std::size_t k = 1; k < v.size(); ++k) v[k] = v[k - 1] + sd * rng.normal();
            raw[i] = std::move(v);
        }
    });
    std::vector<SamplePath> out;
    out.reserve(raw.size());
    for (auto& v : raw) out.emplace_back(grid, std::move(v));
    return out;
}

}  // namespace hcalc

#endif
