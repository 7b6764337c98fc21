#ifndef HORIZON_CALC_CALCULUS_HPP
#define HORIZON_CALC_CALCULUS_HPP

// Ito formula and integration by parts, evaluated term by term on the grid,
// plus the randomized law suite.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "horizon_calc/bprocess.hpp"
#include "horizon_calc/errors.hpp"
#include "horizon_calc/grid_paths.hpp"
#include "horizon_calc/integration.hpp"
#include "horizon_calc/interval_sets.hpp"

namespace hcalc {

/// C^2 function on R^d with closed-form gradient and Hessian.
class SmoothFunction {
public:
    using Point = std::vector<double>;
    using Value = std::function<double(const Point&)>;
    using Gradient = std::function<Point(const Point&)>;
    using Hessian = std::function<std::vector<Point>(const Point&)>;

    /// Validates the derivatives against central differences at random
    /// points of [-probe_radius, probe_radius]^d (relative tolerance 1e-5).
    static SmoothFunction make(std::size_t dim, Value f, Gradient grad, Hessian hess,
                               std::uint64_t seed = 0, double probe_radius = 1.0) {
        if (dim == 0) throw ValidationError("smooth function needs dimension >= 1");
        SmoothFunction fn(dim, std::move(f), std::move(grad), std::move(hess));
        fn.check_derivatives(seed, probe_radius);
        return fn;
    }

    std::size_t dim() const noexcept { return dim_; }
    double operator()(const Point& x) const { return f_(x); }
    Point gradient(const Point& x) const { return grad_(x); }
    std::vector<Point> hessian(const Point& x) const { return hess_(x); }

private:
    SmoothFunction(std::size_t dim, Value f, Gradient g, Hessian h)
        : dim_(dim), f_(std::move(f)), grad_(std::move(g)), hess_(std::move(h)) {}

    void check_derivatives(std::uint64_t seed, double radius) const {
        constexpr double tol = 1e-5;
        CounterRng rng(detail::mix64(seed ^ 0xC2B2AE3D27D4EB4FULL));
        auto close = [](double fd, double exact) {
            return std::abs(fd - exact) <= tol * std::max(1.0, std::abs(exact));
        };
        for (int trial = 0; trial < 8; ++trial) {
            Point x(dim_);
            for (double& xi : x) xi = radius * (2.0 * rng.uniform() - 1.0);
            const Point g = grad_(x);
            const auto h = hess_(x);
            if (g.size() != dim_ || h.size() != dim_)
                throw ValidationError("gradient/Hessian have the wrong dimension");
            for (std::size_t k = 0; k < dim_; ++k) {
                if (h[k].size() != dim_) throw ValidationError("Hessian row has the wrong dimension");
                const double step = 1e-4 * std::max(1.0, std::abs(x[k]));
                Point up = x, dn = x;
                up[k] += step;
                dn[k] -= step;
                const double fd = (f_(up) - f_(dn)) / (2.0 * step);
                if (!close(fd, g[k]))
                    throw ValidationError("gradient component " + std::to_string(k) +
                                          " disagrees with finite differences");
                const Point gu = grad_(up), gd = grad_(dn);
                for (std::size_t l = 0; l < dim_; ++l) {
                    const double fd2 = (gu[l] - gd[l]) / (2.0 * step);
                    if (!close(fd2, h[l][k]))
                        throw ValidationError("Hessian entry (" + std::to_string(l) + "," +
                                              std::to_string(k) +
                                              ") disagrees with finite differences");
                }
            }
        }
    }

    std::size_t dim_;
    Value f_;
    Gradient grad_;
    Hessian hess_;
};

/// Nodewise residual summary over B.
struct ResidualReport {
    std::size_t n_steps = 0;
    std::vector<double> sup_per_scenario;
    std::vector<double> mean_per_scenario;
    double sup = 0.0;            // max over scenarios
    double mean_of_sup = 0.0;    // average of per-scenario sups
    double mean = 0.0;           // average of per-scenario means
    double relative_sup = 0.0;   // max |residual| / max(1, term scale)
};

namespace detail {

/// Summarizes residual[w][k]; scale[w][k] is the magnitude used for the
/// relative error.
inline ResidualReport summarize(const Sections& residual, const Sections& scale, std::size_t n_steps) {
    ResidualReport r;
    r.n_steps = n_steps;
    const std::size_t s = residual.size();
    r.sup_per_scenario.resize(s);
    r.mean_per_scenario.resize(s);
    for (std::size_t w = 0; w < s; ++w) {
        double sup = 0.0, sum = 0.0;
        for (std::size_t k = 0; k < residual[w].size(); ++k) {
            const double a = std::abs(residual[w][k]);
            if (!std::isfinite(a)) throw DivergenceError(w, k);
            sup = std::max(sup, a);
            sum += a;
            r.relative_sup = std::max(r.relative_sup, a / std::max(1.0, scale[w][k]));
        }
        r.sup_per_scenario[w] = sup;
        r.mean_per_scenario[w] = sum / static_cast<double>(residual[w].size());
        r.sup = std::max(r.sup, sup);
    }
    r.mean_of_sup = pairwise_sum(r.sup_per_scenario) / static_cast<double>(s);
    r.mean = pairwise_sum(r.mean_per_scenario) / static_cast<double>(s);
    return r;
}

}  // namespace detail

/// Every term of the Ito expansion, nodewise on B:
///   lhs = F(Z), initial = F(Z_0), first_order = sum_k D_kF(Z_-).(X_k - X_k(0)),
///   eta = jump correction, second_order = 1/2 sum_kl D_klF(Z_-).<X_k^c, X_l^c>.
struct ItoTerms {
    Sections lhs;
    Sections initial;
    Sections first_order;
    Sections eta;
    Sections second_order;
    Sections residual;
};

struct ItoResult {
    ItoTerms terms;
    ResidualReport report;
};

/// Residual F(Z) - [F(Z_0) + first_order + eta + second_order]. The jump
/// correction eta is summed over nodes carrying a labelled jump (disc or
/// fv_jump increment) of any coordinate.
inline ItoResult ito_residual(const SmoothFunction& f, const std::vector<BProcess>& z,
                              BracketConvention conv = BracketConvention::realized) {
    const std::size_t d = f.dim();
    if (z.size() != d) throw ValidationError("ito_residual: dimension mismatch");
    for (const BProcess& x : z) {
        if (!x.decomposition()) throw PreconditionError("ito_residual: coordinate without decomposition");
        if (!x.inner()) throw PreconditionError("ito_residual: coordinate is not an inner semimartingale");
        detail::require_same_set(x, z[0], "ito_residual");
    }
    const IntervalTypeSet& set = z[0].set();
    const std::size_t s = set.n_scenarios();
    const double dt = set.grid().dt();

    ItoTerms t;
    for (Sections* sec : {&t.lhs, &t.initial, &t.first_order, &t.eta, &t.second_order, &t.residual})
        sec->resize(s);
    Sections scale(s);

    for (std::size_t w = 0; w < s; ++w) {
        const std::size_t n = set.section_size(w);
        for (Sections* sec : {&t.lhs, &t.initial, &t.first_order, &t.eta, &t.second_order, &t.residual})
            (*sec)[w].assign(n, 0.0);
        scale[w].assign(n, 0.0);
        std::vector<double> zk(d), zprev(d);
        for (std::size_t i = 0; i < d; ++i) zk[i] = z[i].at(w, 0);
        const double f0 = f(zk);
        t.lhs[w][0] = f0;
        t.initial[w][0] = f0;
        scale[w][0] = std::abs(f0);
        double first = 0.0, eta = 0.0, second = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            zprev = zk;
            for (std::size_t i = 0; i < d; ++i) zk[i] = z[i].at(w, k);
            const auto g = f.gradient(zprev);
            const auto h = f.hessian(zprev);
            double lin = 0.0;
            bool jumped = false;
            for (std::size_t i = 0; i < d; ++i) {
                lin += g[i] * z[i].increment(w, k);
                jumped = jumped || z[i].decomposition()->has_jump(w, k);
            }
            double quad = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const Decomposition& di = *z[i].decomposition();
                for (std::size_t j = 0; j < d; ++j) {
                    const Decomposition& dj = *z[j].decomposition();
                    double qv;
                    if (conv == BracketConvention::realized) {
                        qv = di.cont[w][k] * dj.cont[w][k];
                    } else {
                        if (!di.diffusion || !dj.diffusion)
                            throw PreconditionError("ito_residual: analytic mode needs diffusion coefficients");
                        qv = (*di.diffusion)[w][k] * (*dj.diffusion)[w][k] * dt;
                    }
                    quad += h[i][j] * qv;
                }
            }
            const double fk = f(zk);
            first += lin;
            second += 0.5 * quad;
            if (jumped) eta += fk - f(zprev) - lin;
            t.lhs[w][k] = fk;
            t.initial[w][k] = f0;
            t.first_order[w][k] = first;
            t.eta[w][k] = eta;
            t.second_order[w][k] = second;
            t.residual[w][k] = fk - (f0 + first + eta + second);
            scale[w][k] = std::max({std::abs(fk), std::abs(f0), std::abs(first), std::abs(eta),
                                    std::abs(second)});
        }
    }
    ResidualReport rep = detail::summarize(t.residual, scale, set.grid().n_steps());
    return {std::move(t), std::move(rep)};
}

/// Residual of XY = X_-.Y + Y_-.X + [X,Y] - 2 X_0 Y_0 with the grid bracket.
inline ResidualReport ibp_residual(const BProcess& x, const BProcess& y) {
    detail::require_same_set(x, y, "ibp_residual");
    // The integrals are taken against undecomposed copies: the identity is
    // pathwise and needs no inner structure.
    const BProcess xr = x.without_decomposition();
    const BProcess yr = y.without_decomposition();
    const BProcess xy = stieltjes(BPredictable::left_limit_of(xr), yr);
    const BProcess yx = stieltjes(BPredictable::left_limit_of(yr), xr);
    const BProcess br = bracket(xr, yr).total;
    const std::size_t s = x.n_scenarios();
    Sections res(s), scale(s);
    for (std::size_t w = 0; w < s; ++w) {
        const std::size_t n = x.set().section_size(w);
        res[w].resize(n);
        scale[w].resize(n);
        const double x0y0 = x.at(w, 0) * y.at(w, 0);
        for (std::size_t k = 0; k < n; ++k) {
            const double lhs = x.at(w, k) * y.at(w, k);
            const double rhs = xy.at(w, k) + yx.at(w, k) + br.at(w, k) - 2.0 * x0y0;
            res[w][k] = lhs - rhs;
            scale[w][k] = std::max({std::abs(lhs), std::abs(xy.at(w, k)), std::abs(yx.at(w, k)),
                                    std::abs(br.at(w, k)), std::abs(2.0 * x0y0)});
        }
    }
    return detail::summarize(res, scale, x.set().grid().n_steps());
}

}  // namespace hcalc

#endif
