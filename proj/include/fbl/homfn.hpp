#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fbl/core.hpp"
#include "fbl/estimate.hpp"
#include "fbl/space.hpp"

namespace fbl {

using SpacePtr = std::shared_ptr<const Space>;

inline SpacePtr make_lq_space(std::size_t dim, NormKind kind) {
    return std::make_shared<const Space>(Space::lq(dim, kind));
}

inline SpacePtr make_polyhedral_space(std::size_t dim, std::vector<Vec> vertices) {
    return std::make_shared<const Space>(Space::polyhedral(dim, std::move(vertices)));
}

enum class NodeKind { delta, normfn, scale, sum, sup, inf, abs, ray, mu, compose, custom };

/// Syntactic certificate about a node, used to decide when finite vertex
/// maxima are exact. `convex` must only be set when convexity is provable
/// from the construction.
struct Shape {
    bool linear = false;
    bool convex = false;
    bool nonneg = false;
    bool has_ray = false;
};

class HomFnNode;
using NodePtr = std::shared_ptr<const HomFnNode>;

class HomFnNode {
public:
    virtual ~HomFnNode() = default;

    /// Pointwise value at xstar. `space` is the space the argument's dual
    /// belongs to; composition nodes switch context themselves.
    virtual double eval(const Space& space, const Func& xstar) const = 0;

    virtual NodeKind kind() const { return NodeKind::custom; }
    virtual Shape shape() const { return Shape{}; }
    virtual std::vector<NodePtr> children() const { return {}; }

    /// Vectors x_k with |f| <= sum_k |delta_{x_k}| pointwise, when one is
    /// derivable from the tree structure.
    virtual std::optional<std::vector<Vec>> ideal_dominator(const Space&) const {
        return std::nullopt;
    }

    /// Directions in the argument dual space where the function is designed
    /// to do something special (ray spikes); probes and candidate pools
    /// include them so sampling cannot miss them.
    virtual void collect_special_directions(std::vector<Func>& out) const {
        for (const auto& c : children()) c->collect_special_directions(out);
    }
};

/// Positively homogeneous function on E*, as an immutable expression tree
/// together with its owning space E.
class HomFn {
public:
    HomFn() = default;
    HomFn(SpacePtr space, NodePtr root) : space_(std::move(space)), root_(std::move(root)) {
        if (!space_ || !root_) throw std::invalid_argument("HomFn: null space or node");
    }

    const Space& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    const NodePtr& root() const { return root_; }

    double operator()(const Func& xstar) const { return eval(xstar); }

    double eval(const Func& xstar) const {
        space_->require_dim(xstar.dim());
        return root_->eval(*space_, xstar);
    }

    Shape shape() const { return root_->shape(); }

    std::vector<Func> special_directions() const {
        std::vector<Func> out;
        root_->collect_special_directions(out);
        return out;
    }

    std::optional<std::vector<Vec>> ideal_dominator() const {
        return root_->ideal_dominator(*space_);
    }

private:
    SpacePtr space_;
    NodePtr root_;
};

namespace detail {

// Test-only fault injection; see verify.hpp. Production behaviour is the
// `none` branch everywhere.
enum class Mutation { none, sup_as_inf, skip_rescale, transpose_adjoint };
inline Mutation& active_mutation() {
    static Mutation m = Mutation::none;
    return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Node types

struct DeltaNode final : HomFnNode {
    Vec x;

    explicit DeltaNode(Vec v) : x(std::move(v)) {}
    double eval(const Space&, const Func& xstar) const override { return pairing(xstar, x); }
    NodeKind kind() const override { return NodeKind::delta; }
    Shape shape() const override { return {.linear = true, .convex = true}; }
    std::optional<std::vector<Vec>> ideal_dominator(const Space&) const override {
        return std::vector<Vec>{x};
    }
};

struct NormFnNode final : HomFnNode {
    double eval(const Space& space, const Func& xstar) const override {
        return space.dual_norm(xstar);
    }
    NodeKind kind() const override { return NodeKind::normfn; }
    Shape shape() const override { return {.convex = true, .nonneg = true}; }
    std::optional<std::vector<Vec>> ideal_dominator(const Space& space) const override {
        // ||x*|| <= c * sum_i |x*_i| with c the largest coordinate magnitude
        // over the unit ball, which is 1 for the l_q norms.
        double c = 1.0;
        if (space.kind() == NormKind::polyhedral) {
            c = 0.0;
            for (const auto& u : space.vertices())
                for (double t : u.coords) c = std::max(c, std::abs(t));
        }
        std::vector<Vec> dom;
        for (std::size_t i = 0; i < space.dim(); ++i) dom.push_back(basis_vec(space.dim(), i, c));
        return dom;
    }
};

struct ScaleNode final : HomFnNode {
    double c;
    NodePtr child;

    ScaleNode(double factor, NodePtr node) : c(factor), child(std::move(node)) {}
    double eval(const Space& space, const Func& xstar) const override {
        return c * child->eval(space, xstar);
    }
    NodeKind kind() const override { return NodeKind::scale; }
    Shape shape() const override {
        Shape s = child->shape();
        Shape r;
        r.linear = s.linear;
        r.convex = s.linear || (c >= 0.0 && s.convex);
        r.nonneg = (c >= 0.0 && s.nonneg) || c == 0.0;
        r.has_ray = s.has_ray;
        return r;
    }
    std::vector<NodePtr> children() const override { return {child}; }
    std::optional<std::vector<Vec>> ideal_dominator(const Space& space) const override {
        auto d = child->ideal_dominator(space);
        if (!d) return std::nullopt;
        for (auto& v : *d) v = scaled(v, std::abs(c));
        return d;
    }
};

namespace detail {

inline std::optional<std::vector<Vec>> union_dominator(const Space& space,
                                                       const std::vector<NodePtr>& nodes) {
    std::vector<Vec> dom;
    for (const auto& n : nodes) {
        auto d = n->ideal_dominator(space);
        if (!d) return std::nullopt;
        for (auto& v : *d) dom.push_back(std::move(v));
    }
    return dom;
}

}  // namespace detail

struct SumNode final : HomFnNode {
    std::vector<NodePtr> terms;

    explicit SumNode(std::vector<NodePtr> ts) : terms(std::move(ts)) {
        if (terms.empty()) throw std::invalid_argument("Sum: no children");
    }
    double eval(const Space& space, const Func& xstar) const override {
        double s = 0.0;
        for (const auto& t : terms) s += t->eval(space, xstar);
        return s;
    }
    NodeKind kind() const override { return NodeKind::sum; }
    Shape shape() const override {
        Shape r{.linear = true, .convex = true, .nonneg = true};
        for (const auto& t : terms) {
            Shape s = t->shape();
            r.linear &= s.linear;
            r.convex &= s.convex;
            r.nonneg &= s.nonneg;
            r.has_ray |= s.has_ray;
        }
        return r;
    }
    std::vector<NodePtr> children() const override { return terms; }
    std::optional<std::vector<Vec>> ideal_dominator(const Space& space) const override {
        return detail::union_dominator(space, terms);
    }
};

struct SupNode final : HomFnNode {
    std::vector<NodePtr> terms;

    explicit SupNode(std::vector<NodePtr> ts) : terms(std::move(ts)) {
        if (terms.empty()) throw std::invalid_argument("Sup: no children");
    }
    double eval(const Space& space, const Func& xstar) const override {
        if (detail::active_mutation() == detail::Mutation::sup_as_inf) {
            double m = terms.front()->eval(space, xstar);
            for (std::size_t i = 1; i < terms.size(); ++i)
                m = std::min(m, terms[i]->eval(space, xstar));
            return m;
        }
        double m = terms.front()->eval(space, xstar);
        for (std::size_t i = 1; i < terms.size(); ++i)
            m = std::max(m, terms[i]->eval(space, xstar));
        return m;
    }
    NodeKind kind() const override { return NodeKind::sup; }
    Shape shape() const override {
        if (terms.size() == 1) return terms.front()->shape();
        Shape r{.convex = true};
        bool any_nonneg = false;
        for (const auto& t : terms) {
            Shape s = t->shape();
            r.convex &= s.convex;
            any_nonneg |= s.nonneg;
            r.has_ray |= s.has_ray;
        }
        r.nonneg = any_nonneg;
        return r;
    }
    std::vector<NodePtr> children() const override { return terms; }
    std::optional<std::vector<Vec>> ideal_dominator(const Space& space) const override {
        return detail::union_dominator(space, terms);
    }
};

struct InfNode final : HomFnNode {
    std::vector<NodePtr> terms;

    explicit InfNode(std::vector<NodePtr> ts) : terms(std::move(ts)) {
        if (terms.empty()) throw std::invalid_argument("Inf: no children");
    }
    double eval(const Space& space, const Func& xstar) const override {
        double m = terms.front()->eval(space, xstar);
        for (std::size_t i = 1; i < terms.size(); ++i)
            m = std::min(m, terms[i]->eval(space, xstar));
        return m;
    }
    NodeKind kind() const override { return NodeKind::inf; }
    Shape shape() const override {
        if (terms.size() == 1) return terms.front()->shape();
        Shape r;
        r.nonneg = true;
        for (const auto& t : terms) {
            Shape s = t->shape();
            r.nonneg &= s.nonneg;
            r.has_ray |= s.has_ray;
        }
        return r;
    }
    std::vector<NodePtr> children() const override { return terms; }
    std::optional<std::vector<Vec>> ideal_dominator(const Space& space) const override {
        // |min(g, h)| <= |g| v |h| <= |g| + |h|, so any single child's
        // dominator also works; the union keeps it simple and valid.
        return detail::union_dominator(space, terms);
    }
};

struct AbsNode final : HomFnNode {
    NodePtr child;

    explicit AbsNode(NodePtr node) : child(std::move(node)) {}
    double eval(const Space& space, const Func& xstar) const override {
        return std::abs(child->eval(space, xstar));
    }
    NodeKind kind() const override { return NodeKind::abs; }
    Shape shape() const override {
        Shape s = child->shape();
        Shape r;
        r.convex = s.linear || (s.convex && s.nonneg);
        r.nonneg = true;
        r.has_ray = s.has_ray;
        return r;
    }
    std::vector<NodePtr> children() const override { return {child}; }
    std::optional<std::vector<Vec>> ideal_dominator(const Space& space) const override {
        return child->ideal_dominator(space);
    }
};

/// f(x*) = t when x* = t*dir for some t > 0 (within a directional tolerance
/// of 1e-12 on the normalized direction), and 0 otherwise. The discontinuous
/// ideal member from the dim >= 2 separation argument.
struct RayIndicatorNode final : HomFnNode {
    Func dir;
    double dir_len;  // euclidean

    explicit RayIndicatorNode(Func d) : dir(std::move(d)), dir_len(euclidean_norm(dir.coords)) {
        if (dir_len < 1e-12) throw std::invalid_argument("RayIndicator: zero direction");
    }
    double eval(const Space&, const Func& xstar) const override {
        double len = euclidean_norm(xstar.coords);
        if (len <= 0.0) return 0.0;
        for (std::size_t i = 0; i < dir.dim(); ++i) {
            if (std::abs(xstar.coords[i] / len - dir.coords[i] / dir_len) > 1e-12) return 0.0;
        }
        return len / dir_len;
    }
    NodeKind kind() const override { return NodeKind::ray; }
    Shape shape() const override { return {.has_ray = true}; }
    void collect_special_directions(std::vector<Func>& out) const override {
        out.push_back(dir);
    }
    std::optional<std::vector<Vec>> ideal_dominator(const Space& space) const override {
        // On the ray, f(t*dir) = t = t<dir, x0> for any x0 with <dir, x0> = 1.
        Vec nv = space.norming_vector(dir);
        double d = pairing(dir, nv);
        if (d <= 0.0) return std::nullopt;
        return std::vector<Vec>{scaled(nv, 1.0 / d)};
    }
};

/// Finitely supported positive measure on the unit ball of E.
struct DiscreteMeasure {
    struct Atom {
        double weight;
        Vec point;
    };
    std::vector<Atom> atoms;

    double total_mass() const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.weight;
        return s;
    }
};

/// f_mu(x*) = (sum_i w_i |x*(p_i)|^p)^(1/p): the measure-induced function for
/// a discrete measure, with the ball of E standing in for the bidual ball.
struct MuInducedNode final : HomFnNode {
    DiscreteMeasure mu;
    double p;

    MuInducedNode(DiscreteMeasure m, double exponent) : mu(std::move(m)), p(exponent) {
        if (!(p >= 1.0)) throw std::invalid_argument("MuInduced: p must be >= 1");
        for (const auto& a : mu.atoms)
            if (a.weight < 0.0) throw std::invalid_argument("MuInduced: negative weight");
    }
    double eval(const Space&, const Func& xstar) const override {
        double s = 0.0;
        for (const auto& a : mu.atoms) s += a.weight * std::pow(std::abs(pairing(xstar, a.point)), p);
        return std::pow(s, 1.0 / p);
    }
    NodeKind kind() const override { return NodeKind::mu; }
    Shape shape() const override { return {.convex = true, .nonneg = true}; }
    std::optional<std::vector<Vec>> ideal_dominator(const Space&) const override {
        // l_p of the weighted pairings <= l_1 of them.
        std::vector<Vec> dom;
        for (const auto& a : mu.atoms) dom.push_back(scaled(a.point, std::pow(a.weight, 1.0 / p)));
        return dom;
    }
};

// ---------------------------------------------------------------------------
// Constructors

inline HomFn delta(SpacePtr space, Vec x) {
    space->require_dim(x.dim());
    return HomFn(std::move(space), std::make_shared<DeltaNode>(std::move(x)));
}

inline HomFn norm_fn(SpacePtr space) {
    return HomFn(std::move(space), std::make_shared<NormFnNode>());
}

inline HomFn zero_fn(SpacePtr space) {
    Vec z(std::vector<double>(space->dim(), 0.0));
    return delta(std::move(space), std::move(z));
}

inline HomFn scale(double c, const HomFn& f) {
    return HomFn(f.space_ptr(), std::make_shared<ScaleNode>(c, f.root()));
}

namespace detail {

inline std::vector<NodePtr> same_space_roots(const std::vector<HomFn>& fs, const char* what) {
    if (fs.empty()) throw std::invalid_argument(std::string(what) + ": no children");
    std::vector<NodePtr> roots;
    roots.reserve(fs.size());
    const Space& first = *fs.front().space_ptr();
    for (const auto& f : fs) {
        const Space& s = *f.space_ptr();
        bool same = &s == &first || (s.dim() == first.dim() && s.kind() == first.kind() &&
                                     s.kind() != NormKind::polyhedral);
        if (!same) throw std::invalid_argument(std::string(what) + ": children on different spaces");
        roots.push_back(f.root());
    }
    return roots;
}

}  // namespace detail

inline HomFn sum(const std::vector<HomFn>& fs) {
    auto roots = detail::same_space_roots(fs, "sum");
    return HomFn(fs.front().space_ptr(), std::make_shared<SumNode>(std::move(roots)));
}

inline HomFn sup(const std::vector<HomFn>& fs) {
    auto roots = detail::same_space_roots(fs, "sup");
    return HomFn(fs.front().space_ptr(), std::make_shared<SupNode>(std::move(roots)));
}

inline HomFn inf(const std::vector<HomFn>& fs) {
    auto roots = detail::same_space_roots(fs, "inf");
    return HomFn(fs.front().space_ptr(), std::make_shared<InfNode>(std::move(roots)));
}

inline HomFn sup(const HomFn& a, const HomFn& b) { return sup(std::vector<HomFn>{a, b}); }
inline HomFn inf(const HomFn& a, const HomFn& b) { return inf(std::vector<HomFn>{a, b}); }

inline HomFn abs(const HomFn& f) {
    return HomFn(f.space_ptr(), std::make_shared<AbsNode>(f.root()));
}

inline HomFn ray_indicator(SpacePtr space, Func dir) {
    space->require_dim(dir.dim());
    return HomFn(std::move(space), std::make_shared<RayIndicatorNode>(std::move(dir)));
}

inline HomFn mu_fn(SpacePtr space, DiscreteMeasure mu, double p) {
    for (const auto& a : mu.atoms) {
        space->require_dim(a.point.dim());
        if (space->norm(a.point) > 1.0 + 1e-9)
            throw std::invalid_argument("mu_fn: atom outside the unit ball");
    }
    return HomFn(std::move(space), std::make_shared<MuInducedNode>(std::move(mu), p));
}

/// The dim-1 representation f = delta_{f(1)} v delta_{-f(-1)} (or ^ when
/// f(1) <= -f(-1)): every positively homogeneous function on a 1-dimensional
/// space is a lattice expression in two deltas.
inline HomFn dim1_representation(SpacePtr space, double f1, double fm1) {
    if (space->dim() != 1) throw std::invalid_argument("dim1_representation: dim must be 1");
    HomFn a = delta(space, Vec{f1});
    HomFn b = delta(space, Vec{-fm1});
    return f1 >= -fm1 ? sup(a, b) : inf(a, b);
}

// ---------------------------------------------------------------------------
// Probes

/// Max over seeded samples (lambda in [0,10] including 0, x* on the dual
/// sphere) of |f(lambda x*) - lambda f(x*)|.
inline double homogeneity_defect(const HomFn& f, std::size_t samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("homogeneity_defect: samples must be >= 1");
    auto sphere = f.space().sample_dual_sphere(samples, seed);
    Rng rng(seed ^ 0x5bd1e995u);
    double defect = 0.0;
    for (std::size_t i = 0; i < sphere.size(); ++i) {
        double lambda = i == 0 ? 0.0 : rng.uniform(0.0, 10.0);
        double lhs = f.eval(scaled(sphere[i], lambda));
        double rhs = lambda * f.eval(sphere[i]);
        defect = std::max(defect, std::abs(lhs - rhs));
    }
    return defect;
}

struct UniformNormBudget {
    std::size_t samples = 256;
    std::size_t restarts = 8;
    std::size_t ascent_steps = 60;
    std::uint64_t seed = 0;
};

/// Uniform norm of f restricted to the dual ball. Exact (vertex maximum) for
/// syntactically convex trees over spaces with enumerable dual extreme
/// points; otherwise a sampled lower bound, heuristic-tight for continuous
/// trees and with an unknown (+inf) upper bound when a ray spike could hide
/// from the sampler.
inline NormEstimate uniform_norm_ball(const HomFn& f, const UniformNormBudget& budget = {}) {
    const Space& space = f.space();
    Shape sh = f.shape();

    if (sh.convex && space.has_dual_extreme_points()) {
        NormEstimate est;
        est.method = Method::exact_vertices;
        double best = -kInf;
        Func arg;
        for (const auto& g : space.dual_extreme_points()) {
            double v = f.eval(g);
            if (v > best) { best = v; arg = g; }
        }
        // sup over the symmetric ball of |f| equals sup of f for convex
        // positively homogeneous f, and that sup is >= 0.
        est.lower = est.upper = best;
        est.witness_functional = std::move(arg);
        return est;
    }

    std::vector<Func> probes = space.sample_dual_sphere(budget.samples, budget.seed);
    for (auto& d : f.special_directions()) {
        double n = space.dual_norm(d);
        if (n > 1e-12) probes.push_back(scaled(d, 1.0 / n));
    }
    if (space.has_dual_extreme_points())
        for (auto& g : space.dual_extreme_points()) probes.push_back(std::move(g));

    double best = 0.0;
    Func arg(std::vector<double>(space.dim(), 0.0));
    for (const auto& g : probes) {
        double v = std::abs(f.eval(g));
        if (v > best) { best = v; arg = g; }
    }

    // local ascent: seeded perturbations with a shrinking radius
    Rng rng(budget.seed ^ 0x9e3779b9u);
    for (std::size_t r = 0; r < budget.restarts; ++r) {
        Func cur = arg;
        double val = best;
        double radius = 0.5;
        for (std::size_t s = 0; s < budget.ascent_steps; ++s) {
            Func cand = cur;
            for (auto& c : cand.coords) c += radius * rng.gaussian();
            double n = space.dual_norm(cand);
            if (n < 1e-12) continue;
            cand = scaled(cand, 1.0 / n);
            double v = std::abs(f.eval(cand));
            if (v > val) {
                val = v;
                cur = cand;
            } else {
                radius *= 0.8;
            }
        }
        if (val > best) { best = val; arg = cur; }
    }

    NormEstimate est;
    est.method = Method::search_lower;
    est.lower = best;
    est.upper = sh.has_ray ? kInf : best;
    est.witness_functional = std::move(arg);
    return est;
}

enum class Classification { continuous_on_sphere, bounded_discontinuous, unbounded_flag };

inline const char* to_string(Classification c) {
    switch (c) {
        case Classification::continuous_on_sphere: return "continuous_on_sphere";
        case Classification::bounded_discontinuous: return "bounded_discontinuous";
        case Classification::unbounded_flag: return "unbounded_flag";
    }
    return "?";
}

struct ClassifyProbe {
    std::size_t sphere_samples = 64;
    std::vector<double> radii = {1e-1, 1e-2, 1e-3, 1e-4};
    double jump_threshold = 1e-3;
    double bound_cap = 1e6;
    std::size_t perturbations = 8;
    std::uint64_t seed = 0;
};

struct ClassifyReport {
    Classification classification = Classification::continuous_on_sphere;
    double sup_abs = 0.0;                // max |f| seen over all probe evaluations
    double jump = 0.0;                   // empirical modulus at the smallest radius
    std::vector<double> modulus;         // one entry per radius in the schedule
    std::optional<Func> jump_point;
};

/// Membership probe: empirical modulus of continuity on the dual sphere plus
/// the tree's designed probe points. A probe, not a proof.
inline ClassifyReport classify_finite_dim(const HomFn& f, const ClassifyProbe& probe = {}) {
    const Space& space = f.space();
    ClassifyReport report;
    if (probe.radii.empty()) throw std::invalid_argument("classify: empty radii schedule");
    if (!(probe.radii.back() > 0.0))
        throw std::invalid_argument("classify: radii must be positive");
    for (std::size_t i = 0; i + 1 < probe.radii.size(); ++i)
        if (!(probe.radii[i] > probe.radii[i + 1]))
            throw std::invalid_argument("classify: radii schedule must be strictly decreasing");

    std::vector<Func> points = space.sample_dual_sphere(probe.sphere_samples, probe.seed);
    for (auto& d : f.special_directions()) {
        double n = space.dual_norm(d);
        if (n < 1e-12) continue;
        points.push_back(n <= 1.0 ? d : scaled(d, 1.0 / n));
    }

    std::vector<double> base(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        base[i] = f.eval(points[i]);
        report.sup_abs = std::max(report.sup_abs, std::abs(base[i]));
    }

    Rng rng(probe.seed ^ 0xc2b2ae35u);
    report.modulus.resize(probe.radii.size(), 0.0);
    for (std::size_t ri = 0; ri < probe.radii.size(); ++ri) {
        double r = probe.radii[ri];
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (std::size_t k = 0; k < probe.perturbations; ++k) {
                Func dir(rng.gaussian_vector(space.dim()));
                double n = space.dual_norm(dir);
                if (n < 1e-12) continue;
                Func near = add(points[i], scaled(dir, r / n));
                double v = f.eval(near);
                report.sup_abs = std::max(report.sup_abs, std::abs(v));
                double gap = std::abs(base[i] - v);
                if (gap > report.modulus[ri]) {
                    report.modulus[ri] = gap;
                    if (ri + 1 == probe.radii.size()) report.jump_point = points[i];
                }
            }
        }
    }
    report.jump = report.modulus.back();

    // a genuine jump persists as the radii shrink; a steep continuous
    // function's modulus decays with them instead
    bool persistent =
        report.jump >= probe.jump_threshold && report.jump > 0.25 * report.modulus.front();
    if (report.sup_abs > probe.bound_cap)
        report.classification = Classification::unbounded_flag;
    else if (persistent)
        report.classification = Classification::bounded_discontinuous;
    else
        report.classification = Classification::continuous_on_sphere;
    return report;
}

}  // namespace fbl
