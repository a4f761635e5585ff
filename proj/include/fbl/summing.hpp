#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "fbl/core.hpp"
#include "fbl/estimate.hpp"
#include "fbl/space.hpp"

namespace fbl {

/// (sum_j |<x_j, v>|^p)^(1/p) -- the quantity whose supremum over the unit
/// ball is the weak p-summing norm.
inline double tuple_objective_at(const std::vector<Func>& tuple, const Vec& v, double p) {
    double s = 0.0;
    for (const auto& f : tuple) s += std::pow(std::abs(pairing(f, v)), p);
    return std::pow(s, 1.0 / p);
}

/// Tuple of functionals over a common space with a per-exponent cache of
/// computed estimates. Immutable after construction; the cache is not
/// synchronized, so share across threads only after warming it.
class FuncTuple {
public:
    explicit FuncTuple(std::vector<Func> funcs) : funcs_(std::move(funcs)) {
        if (funcs_.empty()) throw std::invalid_argument("FuncTuple: empty tuple");
        for (const auto& f : funcs_)
            if (f.dim() != funcs_.front().dim())
                throw std::invalid_argument("FuncTuple: dimension mismatch");
    }

    const std::vector<Func>& funcs() const { return funcs_; }
    std::size_t size() const { return funcs_.size(); }

    const NormEstimate* cached(double p) const {
        auto it = cache_.find(p);
        return it == cache_.end() ? nullptr : &it->second;
    }
    void store(double p, NormEstimate est) const { cache_[p] = std::move(est); }

private:
    std::vector<Func> funcs_;
    mutable std::map<double, NormEstimate> cache_;
};

struct AscentBudget {
    std::size_t restarts = 32;
    std::size_t steps = 500;
    double step = 0.1;
};

inline constexpr std::size_t kSignCap = 20;

/// Exact weak 1-summing norm by the sign-pattern formula
/// sup_eps ||sum_j eps_j x_j*||. Capped at 2^cap patterns.
inline NormEstimate weak_1_norm_signs(const Space& space, const std::vector<Func>& tuple,
                                      std::size_t cap = kSignCap) {
    if (tuple.empty()) throw std::invalid_argument("weak_1_norm_signs: empty tuple");
    const std::size_t m = tuple.size();
    if (m > cap) throw std::domain_error("weak_1_norm_signs: tuple size above sign-pattern cap");
    for (const auto& f : tuple) space.require_dim(f.dim());

    double best = -kInf;
    std::vector<int> best_signs;
    std::vector<int> signs(m, -1);
    for (std::size_t mask = 0; mask < (std::size_t(1) << m); ++mask) {
        Func s(std::vector<double>(space.dim(), 0.0));
        for (std::size_t j = 0; j < m; ++j) {
            signs[j] = (mask >> j) & 1 ? 1 : -1;
            for (std::size_t i = 0; i < space.dim(); ++i)
                s.coords[i] += signs[j] * tuple[j].coords[i];
        }
        double v = space.dual_norm(s);
        bool better = v > best;
        if (!better && v == best) {
            // deterministic tie-break: lexicographically smallest pattern
            // (-1 < +1, compared entry by entry)
            better = std::lexicographical_compare(signs.begin(), signs.end(),
                                                  best_signs.begin(), best_signs.end());
        }
        if (better) {
            best = v;
            best_signs = signs;
        }
    }
    NormEstimate est;
    est.lower = est.upper = best;
    est.method = Method::exact_signs;
    est.witness_signs = std::move(best_signs);
    return est;
}

namespace detail {

inline NormEstimate weak_p_vertices(const Space& space, const std::vector<Func>& tuple, double p) {
    double best = -kInf;
    Vec arg;
    for (const auto& v : space.extreme_points()) {
        double val = tuple_objective_at(tuple, v, p);
        if (val > best) { best = val; arg = v; }
    }
    NormEstimate est;
    est.lower = est.upper = best;
    est.method = Method::exact_vertices;
    est.witness_point = std::move(arg);
    return est;
}

inline NormEstimate weak_2_singular(const Space& space, const std::vector<Func>& tuple) {
    Eigen::MatrixXd m(tuple.size(), space.dim());
    for (std::size_t r = 0; r < tuple.size(); ++r)
        for (std::size_t c = 0; c < space.dim(); ++c)
            m(Eigen::Index(r), Eigen::Index(c)) = tuple[r].coords[c];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
    NormEstimate est;
    est.lower = est.upper = svd.singularValues()(0);
    est.method = Method::exact_singular;
    Vec arg{std::vector<double>(space.dim())};
    for (std::size_t c = 0; c < space.dim(); ++c) arg.coords[c] = svd.matrixV()(Eigen::Index(c), 0);
    // fix the singular vector's sign for reproducibility
    std::size_t pivot = 0;
    for (std::size_t c = 1; c < space.dim(); ++c)
        if (std::abs(arg.coords[c]) > std::abs(arg.coords[pivot])) pivot = c;
    if (arg.coords[pivot] < 0.0) arg = scaled(arg, -1.0);
    est.witness_point = std::move(arg);
    return est;
}

inline NormEstimate weak_p_ascent(const Space& space, const std::vector<Func>& tuple, double p,
                                  const AscentBudget& budget, std::uint64_t seed) {
    const std::size_t n = space.dim();
    Rng rng(seed);
    double best = 0.0;
    Vec arg(std::vector<double>(n, 0.0));

    auto objective = [&](const Vec& x) {
        double s = 0.0;
        for (const auto& f : tuple) s += std::pow(std::abs(pairing(f, x)), p);
        return s;
    };

    for (std::size_t r = 0; r < budget.restarts; ++r) {
        Vec x(rng.gaussian_vector(n));
        double nx = euclidean_norm(x.coords);
        if (nx < 1e-12) continue;
        x = scaled(x, 1.0 / nx);
        double fx = objective(x);
        double step = budget.step;
        for (std::size_t it = 0; it < budget.steps; ++it) {
            // gradient of sum |<f_j, x>|^p
            std::vector<double> grad(n, 0.0);
            for (const auto& f : tuple) {
                double t = pairing(f, x);
                double w = p * std::pow(std::abs(t), p - 1.0) * (t < 0.0 ? -1.0 : 1.0);
                for (std::size_t i = 0; i < n; ++i) grad[i] += w * f.coords[i];
            }
            bool moved = false;
            for (int bt = 0; bt < 8; ++bt) {
                Vec cand = x;
                for (std::size_t i = 0; i < n; ++i) cand.coords[i] += step * grad[i];
                double nc = euclidean_norm(cand.coords);
                if (nc < 1e-12) break;
                cand = scaled(cand, 1.0 / nc);
                double fc = objective(cand);
                if (fc > fx) {
                    x = cand;
                    fx = fc;
                    step *= 1.1;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved && step < 1e-14) break;
        }
        if (fx > best) {
            best = fx;
            arg = x;
        }
    }
    NormEstimate est;
    est.lower = std::pow(best, 1.0 / p);
    est.upper = kInf;
    est.method = Method::search_lower;
    est.witness_point = std::move(arg);
    return est;
}

}  // namespace detail

/// Weak p-summing norm of a tuple in E*. Exact whenever the supremum reduces
/// to a finite maximum: over ball vertices (the objective is convex in v),
/// via the top singular value on (l2, p = 2), or via the sign formula on
/// (l2, p = 1). Everywhere else a certified lower bound from multistart
/// projected ascent on the euclidean sphere.
inline NormEstimate weak_p_norm(const Space& space, const std::vector<Func>& tuple, double p,
                                const AscentBudget& budget = {}, std::uint64_t seed = 0) {
    if (tuple.empty()) throw std::invalid_argument("weak_p_norm: empty tuple");
    if (!(p >= 1.0)) throw std::invalid_argument("weak_p_norm: p must be >= 1");
    for (const auto& f : tuple) space.require_dim(f.dim());

    if (tuple.size() == 1) {
        NormEstimate est;
        est.lower = est.upper = space.dual_norm(tuple.front());
        est.method = space.has_extreme_points() ? Method::exact_vertices : Method::exact_singular;
        est.witness_point = space.norming_vector(tuple.front());
        return est;
    }
    if (space.has_extreme_points()) return detail::weak_p_vertices(space, tuple, p);
    if (p == 2.0) return detail::weak_2_singular(space, tuple);
    if (p == 1.0 && tuple.size() <= kSignCap) return weak_1_norm_signs(space, tuple);
    return detail::weak_p_ascent(space, tuple, p, budget, seed);
}

inline NormEstimate weak_p_norm(const Space& space, const FuncTuple& tuple, double p,
                                const AscentBudget& budget = {}, std::uint64_t seed = 0) {
    if (const NormEstimate* c = tuple.cached(p)) return *c;
    NormEstimate est = weak_p_norm(space, tuple.funcs(), p, budget, seed);
    tuple.store(p, est);
    return est;
}

inline NormEstimate weak_1_norm_signs(const Space& space, const FuncTuple& tuple,
                                      std::size_t cap = kSignCap) {
    return weak_1_norm_signs(space, tuple.funcs(), cap);
}

struct MonotonicityReport {
    bool conclusive = false;  // both sides exact
    bool pass = true;
    double value_p = 0.0;
    double value_q = 0.0;
};

/// Checks ||.||_{q,weak} <= ||.||_{p,weak} for p < q. Lower-bound-only
/// comparisons are reported as inconclusive rather than failed.
inline MonotonicityReport weak_p_monotonicity_check(const Space& space,
                                                    const std::vector<Func>& tuple, double p,
                                                    double q, const AscentBudget& budget = {},
                                                    std::uint64_t seed = 0) {
    if (!(p >= 1.0 && q > p)) throw std::invalid_argument("monotonicity: need 1 <= p < q");
    NormEstimate ep = weak_p_norm(space, tuple, p, budget, seed);
    NormEstimate eq = weak_p_norm(space, tuple, q, budget, seed);
    MonotonicityReport r;
    r.value_p = ep.lower;
    r.value_q = eq.lower;
    if (ep.exact() && eq.exact()) {
        r.conclusive = true;
        r.pass = eq.upper <= ep.lower + 1e-9;
    }
    return r;
}

}  // namespace fbl
