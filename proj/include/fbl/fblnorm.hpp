#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fbl/core.hpp"
#include "fbl/estimate.hpp"
#include "fbl/homfn.hpp"
#include "fbl/lp.hpp"
#include "fbl/summing.hpp"

namespace fbl {

struct FblBudget {
    std::size_t tuple_max = 8;
    std::size_t pool_samples = 96;
    std::size_t top_candidates = 20;  // pool entries considered by greedy growth
    std::size_t restarts = 24;        // random tuple draws
    std::size_t refine_steps = 120;   // perturbation rounds on the best tuple
    std::vector<Func> extra_candidates;
    std::vector<std::vector<Func>> extra_tuples;
};

namespace detail {

// Value of a feasibility-rescaled witness tuple: (sum |f(x_j)|^p)^(1/p) / w
// where w is the tuple's weak p-norm. Only exact w is accepted; dividing by
// a mere lower bound could overstate the result, so such tuples are
// discarded (nullopt).
inline std::optional<double> certified_value(const HomFn& f, double p,
                                             const std::vector<Func>& tuple) {
    if (tuple.empty()) return std::nullopt;
    NormEstimate w;
    try {
        w = weak_p_norm(f.space(), tuple, p);
    } catch (const std::domain_error&) {
        return std::nullopt;  // e.g. sign cap
    }
    if (!w.exact()) return std::nullopt;
    if (active_mutation() == Mutation::skip_rescale) {
        double s = 0.0;
        for (const auto& x : tuple) s += std::pow(std::abs(f.eval(x)), p);
        return std::pow(s, 1.0 / p);
    }
    if (w.lower < 1e-12) return std::nullopt;
    double s = 0.0;
    for (const auto& x : tuple) s += std::pow(std::abs(f.eval(x)), p);
    return std::pow(s, 1.0 / p) / w.lower;
}

inline void collect_leaf_candidates(const Space& space, const NodePtr& node,
                                    std::vector<Func>& out) {
    switch (node->kind()) {
        case NodeKind::delta: {
            const auto& d = static_cast<const DeltaNode&>(*node);
            if (space.norm(d.x) > 1e-12) {
                Func g = space.norming_functional(d.x);
                out.push_back(g);
                out.push_back(scaled(g, -1.0));
            }
            break;
        }
        case NodeKind::mu: {
            const auto& m = static_cast<const MuInducedNode&>(*node);
            for (const auto& atom : m.mu.atoms)
                if (space.norm(atom.point) > 1e-12)
                    out.push_back(space.norming_functional(atom.point));
            break;
        }
        case NodeKind::ray: {
            const auto& r = static_cast<const RayIndicatorNode&>(*node);
            double n = space.dual_norm(r.dir);
            if (n > 1e-12) out.push_back(scaled(r.dir, 1.0 / n));
            break;
        }
        default:
            for (const auto& c : node->children()) collect_leaf_candidates(space, c, out);
    }
}

inline std::vector<Func> candidate_pool(const HomFn& f, const FblBudget& budget,
                                        std::uint64_t seed) {
    const Space& space = f.space();
    std::vector<Func> pool;
    if (space.has_dual_extreme_points()) {
        for (auto& g : space.dual_extreme_points()) pool.push_back(std::move(g));
    }
    for (std::size_t i = 0; i < space.dim(); ++i) {
        Func e = basis_func(space.dim(), i);
        double n = space.dual_norm(e);
        pool.push_back(scaled(e, 1.0 / n));
        pool.push_back(scaled(e, -1.0 / n));
    }
    // coordinate sign-pattern functionals: the finite frame that optimal
    // tuples on the classical balls tend to be built from
    if (space.dim() <= 8) {
        for (std::size_t mask = 0; mask < (std::size_t(1) << space.dim()); ++mask) {
            Func g{std::vector<double>(space.dim(), 1.0)};
            for (std::size_t i = 0; i < space.dim(); ++i)
                if (mask & (std::size_t(1) << i)) g.coords[i] = -1.0;
            pool.push_back(scaled(g, 1.0 / space.dual_norm(g)));
        }
    }
    collect_leaf_candidates(space, f.root(), pool);
    for (const auto& g : budget.extra_candidates) {
        double n = space.dual_norm(g);
        if (n > 1e-12) pool.push_back(scaled(g, 1.0 / n));
    }
    for (auto& g : space.sample_dual_sphere(budget.pool_samples, seed)) pool.push_back(std::move(g));
    return pool;
}

// LP-optimal nonnegative weights for fixed directions: maximize
// sum_j u_j |f(x_j)|^p subject to sum_j u_j |<x_j, v>|^p <= 1 at every ball
// vertex v. The weighted tuple (u_j^{1/p} x_j) is then weak-p feasible.
inline std::optional<std::vector<Func>> lp_weighted_tuple(const HomFn& f, double p,
                                                          std::vector<Func> dirs) {
    const Space& space = f.space();
    if (!space.has_extreme_points()) return std::nullopt;
    std::vector<Func> kept;
    std::vector<double> obj;
    for (auto& d : dirs) {
        double v = std::abs(f.eval(d));
        double mx = 0.0;
        for (const auto& vert : space.extreme_points())
            mx = std::max(mx, std::abs(pairing(d, vert)));
        if (v > 1e-12 && mx > 1e-12) {
            kept.push_back(std::move(d));
            obj.push_back(std::pow(v, p));
        }
    }
    if (kept.empty()) return std::nullopt;
    auto vertices = space.extreme_points();
    std::vector<std::vector<double>> a(vertices.size(), std::vector<double>(kept.size()));
    std::vector<double> b(vertices.size(), 1.0);
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (std::size_t j = 0; j < kept.size(); ++j)
            a[i][j] = std::pow(std::abs(pairing(kept[j], vertices[i])), p);
    auto u = solve_lp_max(a, b, obj);
    if (!u) return std::nullopt;
    std::vector<Func> weighted;
    for (std::size_t j = 0; j < kept.size(); ++j) {
        if ((*u)[j] > 1e-12) weighted.push_back(scaled(kept[j], std::pow((*u)[j], 1.0 / p)));
    }
    if (weighted.empty()) return std::nullopt;
    return weighted;
}

}  // namespace detail

/// (sum_j |f(x_j)|^p)^(1/p) for a given tuple, with no feasibility scaling.
inline double tuple_value(const HomFn& f, double p, const std::vector<Func>& tuple) {
    double s = 0.0;
    for (const auto& x : tuple) s += std::pow(std::abs(f.eval(x)), p);
    return std::pow(s, 1.0 / p);
}

/// Sound value of a caller-supplied witness tuple (rescaled by its exact weak
/// p-norm); nullopt when the tuple's weak norm cannot be computed exactly on
/// this space.
inline std::optional<double> certified_tuple_value(const HomFn& f, double p,
                                                   const std::vector<Func>& tuple) {
    return detail::certified_value(f, p, tuple);
}

/// Certified lower bound for ||f||_{FBL^p}: the best feasibility-rescaled
/// witness tuple found over extreme-point candidates, designed probes, seeded
/// sphere samples, greedy growth, LP weight optimization and local
/// refinement. Every reported bound is reproducible from its witness tuple.
inline NormEstimate fbl_lower(const HomFn& f, double p, const FblBudget& budget = {},
                              std::uint64_t seed = 0) {
    if (!(p >= 1.0)) throw std::invalid_argument("fbl_lower: p must be >= 1");
    const Space& space = f.space();

    std::vector<Func> pool = detail::candidate_pool(f, budget, seed);
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<double> val(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) val[i] = std::abs(f.eval(pool[i]));
    // rank with a quantized key so that rounding noise from sample
    // normalization cannot push sampled directions ahead of the exact
    // designed candidates that tie with them
    auto rank = [](double v) { return std::floor(v * 1e10); };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rank(val[a]) > rank(val[b]); });

    double best = 0.0;
    std::vector<Func> best_tuple;
    auto consider = [&](const std::vector<Func>& tuple) {
        auto v = detail::certified_value(f, p, tuple);
        if (v && *v > best) {
            best = *v;
            best_tuple = tuple;
        }
    };

    // singletons are exactly rescalable on every space
    for (std::size_t i : order) consider({pool[i]});

    const std::size_t top = std::min(budget.top_candidates, pool.size());

    // greedy growth from the best singleton
    if (!best_tuple.empty() && budget.tuple_max > 1) {
        std::vector<Func> current = best_tuple;
        while (current.size() < budget.tuple_max) {
            double gain_best = best;
            std::vector<Func> gain_tuple;
            for (std::size_t k = 0; k < top; ++k) {
                std::vector<Func> ext = current;
                ext.push_back(pool[order[k]]);
                auto v = detail::certified_value(f, p, ext);
                if (v && *v > gain_best) {
                    gain_best = *v;
                    gain_tuple = std::move(ext);
                }
            }
            if (gain_tuple.empty()) break;
            current = gain_tuple;
            best = gain_best;
            best_tuple = current;
        }
    }

    // seeded random tuples biased toward strong candidates
    Rng rng(seed ^ 0x7f4a7c15u);
    for (std::size_t r = 0; r < budget.restarts && pool.size() > 1; ++r) {
        std::size_t m = std::min<std::size_t>(2 + rng.index(budget.tuple_max), pool.size());
        std::vector<Func> tuple;
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t i = rng.uniform01() < 0.7 ? rng.index(top) : rng.index(pool.size());
            tuple.push_back(pool[order[i]]);
        }
        consider(tuple);
    }

    for (const auto& t : budget.extra_tuples) {
        if (t.empty()) continue;
        bool ok = true;
        for (const auto& g : t)
            if (g.dim() != space.dim()) ok = false;
        if (ok) consider(t);
    }

    // LP weight optimization over the strongest directions and over the
    // current best tuple's directions
    if (space.has_extreme_points()) {
        std::vector<Func> dirs;
        for (std::size_t k = 0; k < top && k < budget.tuple_max * 2; ++k)
            dirs.push_back(pool[order[k]]);
        if (auto w = detail::lp_weighted_tuple(f, p, dirs)) consider(*w);
        if (!best_tuple.empty()) {
            if (auto w = detail::lp_weighted_tuple(f, p, best_tuple)) consider(*w);
        }
        for (const auto& t : budget.extra_tuples) {
            if (t.empty() || t.front().dim() != space.dim()) continue;
            if (auto w = detail::lp_weighted_tuple(f, p, t)) consider(*w);
        }
    }

    // local refinement: perturb tuple members, keep improvements
    if (!best_tuple.empty()) {
        double radius = 0.4;
        for (std::size_t s = 0; s < budget.refine_steps; ++s) {
            std::vector<Func> cand = best_tuple;
            std::size_t j = rng.index(cand.size());
            for (auto& c : cand[j].coords) c += radius * rng.gaussian();
            double prev = best;
            consider(cand);
            if (best <= prev) radius *= 0.92;
        }
    }

    NormEstimate est;
    est.method = Method::search_lower;
    est.lower = best;
    est.upper = kInf;
    if (!best_tuple.empty()) {
        // report the rescaled (constraint-tight) witness
        NormEstimate w = weak_p_norm(space, best_tuple, p);
        std::vector<Func> witness = best_tuple;
        if (detail::active_mutation() != detail::Mutation::skip_rescale && w.lower > 1e-12)
            for (auto& g : witness) g = scaled(g, 1.0 / w.lower);
        est.witness_tuple = std::move(witness);
    }
    return est;
}

/// Certified structural upper bound for ||f||_{FBL^p}; +inf when the tree
/// matches no recognized pattern.
inline double fbl_upper_value(const Space& space, const NodePtr& node, double p) {
    switch (node->kind()) {
        case NodeKind::delta:
            return space.norm(static_cast<const DeltaNode&>(*node).x);
        case NodeKind::abs:
            return fbl_upper_value(space, static_cast<const AbsNode&>(*node).child, p);
        case NodeKind::scale: {
            const auto& s = static_cast<const ScaleNode&>(*node);
            return std::abs(s.c) * fbl_upper_value(space, s.child, p);
        }
        case NodeKind::sum:
        case NodeKind::sup: {
            double t = 0.0;
            for (const auto& c : node->children()) t += fbl_upper_value(space, c, p);
            return t;
        }
        case NodeKind::inf: {
            bool nonneg = true;
            for (const auto& c : node->children()) nonneg &= c->shape().nonneg;
            double t = nonneg ? kInf : 0.0;
            for (const auto& c : node->children()) {
                double u = fbl_upper_value(space, c, p);
                t = nonneg ? std::min(t, u) : t + u;
            }
            return t;
        }
        case NodeKind::normfn: {
            double bound = 0.0;
            auto dom = node->ideal_dominator(space);
            for (const auto& x : *dom) bound += space.norm(x);
            if (space.kind() == NormKind::l2 && p == 2.0)
                bound = std::min(bound, std::sqrt(double(space.dim())));
            return bound;
        }
        case NodeKind::mu: {
            const auto& m = static_cast<const MuInducedNode&>(*node);
            double bound = 0.0;
            for (const auto& atom : m.mu.atoms)
                bound += std::pow(atom.weight, 1.0 / m.p) * space.norm(atom.point);
            if (m.p == p) {
                double mass = m.mu.total_mass();
                if (mass >= 1.0) bound = std::min(bound, mass);
            }
            if (space.kind() == NormKind::l2 && p == 2.0 && m.p == 2.0) {
                double s = 0.0;
                for (const auto& atom : m.mu.atoms)
                    s += atom.weight * std::pow(euclidean_norm(atom.point.coords), 2.0);
                bound = std::min(bound, std::sqrt(s));
            }
            return bound;
        }
        default: {
            auto dom = node->ideal_dominator(space);
            if (!dom) return kInf;
            double t = 0.0;
            for (const auto& x : *dom) t += space.norm(x);
            return t;
        }
    }
}

inline NormEstimate fbl_upper(const HomFn& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("fbl_upper: p must be >= 1");
    NormEstimate est;
    est.method = Method::structural_upper;
    est.lower = 0.0;
    est.upper = fbl_upper_value(f.space(), f.root(), p);
    return est;
}

/// Joint bracket. Injects the uniform-norm witness as a singleton candidate
/// (the FBL norm dominates the uniform norm, so the bracket's lower bound may
/// never fall below it) and raises ConsistencyError when lower > upper beyond
/// tolerance -- an implementation bug by construction.
inline NormEstimate fbl_bracket(const HomFn& f, double p, const FblBudget& budget = {},
                                std::uint64_t seed = 0) {
    NormEstimate up = fbl_upper(f, p);
    UniformNormBudget ub;
    ub.samples = std::max<std::size_t>(budget.pool_samples, 64);
    ub.seed = seed;
    NormEstimate uniform = uniform_norm_ball(f, ub);

    FblBudget inner = budget;
    if (uniform.witness_functional) inner.extra_candidates.push_back(*uniform.witness_functional);
    NormEstimate low = fbl_lower(f, p, inner, seed);

    if (low.lower > up.upper + 1e-6 * up.upper)
        throw ConsistencyError("fbl_bracket: lower bound exceeds certified upper bound");
    if (low.lower < uniform.lower - 1e-9)
        throw ConsistencyError("fbl_bracket: lower bound fell below the uniform norm");

    NormEstimate est;
    est.lower = low.lower;
    est.upper = up.upper;
    est.method = low.method;
    est.witness_tuple = std::move(low.witness_tuple);
    return est;
}

}  // namespace fbl
