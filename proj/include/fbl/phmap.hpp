#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "fbl/core.hpp"
#include "fbl/estimate.hpp"
#include "fbl/fblnorm.hpp"
#include "fbl/homfn.hpp"
#include "fbl/summing.hpp"

namespace fbl {

enum class MapKind { adjoint, modulus, rank_one, composite, tabulated };

inline const char* to_string(MapKind k) {
    switch (k) {
        case MapKind::adjoint: return "adjoint";
        case MapKind::modulus: return "modulus";
        case MapKind::rank_one: return "rank1";
        case MapKind::composite: return "compose";
        case MapKind::tabulated: return "tabulated";
    }
    return "?";
}

class PHMapNode;
using MapNodePtr = std::shared_ptr<const PHMapNode>;

class PHMapNode {
public:
    virtual ~PHMapNode() = default;
    virtual Func apply(const Func& ystar) const = 0;
    virtual MapKind kind() const = 0;
    virtual bool linear() const { return false; }
};

/// Positively homogeneous map Phi: F* -> E* between the duals of two spaces.
class PHMap {
public:
    PHMap(SpacePtr target_e, SpacePtr source_f, MapNodePtr node)
        : target_(std::move(target_e)), source_(std::move(source_f)), node_(std::move(node)) {
        if (!target_ || !source_ || !node_) throw std::invalid_argument("PHMap: null part");
    }

    const Space& source() const { return *source_; }       // F
    const Space& target() const { return *target_; }       // E
    const SpacePtr& source_ptr() const { return source_; }
    const SpacePtr& target_ptr() const { return target_; }
    const MapNodePtr& node() const { return node_; }
    MapKind kind() const { return node_->kind(); }
    bool linear() const { return node_->linear(); }

    Func apply(const Func& ystar) const {
        source_->require_dim(ystar.dim());
        Func out = node_->apply(ystar);
        target_->require_dim(out.dim());
        return out;
    }

private:
    SpacePtr target_;
    SpacePtr source_;
    MapNodePtr node_;
};

// ---------------------------------------------------------------------------
// Map nodes

/// S* for a bounded operator S: E -> F; the stored matrix is the matrix of
/// S* itself (dim E rows, dim F columns), so S has matrix A^T.
struct AdjointNode final : PHMapNode {
    Eigen::MatrixXd a;

    explicit AdjointNode(Eigen::MatrixXd m) : a(std::move(m)) {}
    Func apply(const Func& ystar) const override {
        const bool transposed = detail::active_mutation() == detail::Mutation::transpose_adjoint &&
                                a.rows() == a.cols();
        Func out{std::vector<double>(std::size_t(a.rows()), 0.0)};
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                s += (transposed ? a(j, i) : a(i, j)) * ystar.coords[std::size_t(j)];
            out.coords[std::size_t(i)] = s;
        }
        return out;
    }
    MapKind kind() const override { return MapKind::adjoint; }
    bool linear() const override { return true; }

    /// Image of x in E under the underlying operator S (matrix A^T).
    Vec forward(const Vec& x) const {
        Vec out{std::vector<double>(std::size_t(a.cols()), 0.0)};
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            double s = 0.0;
            for (Eigen::Index i = 0; i < a.rows(); ++i) s += a(i, j) * x.coords[std::size_t(i)];
            out.coords[std::size_t(j)] = s;
        }
        return out;
    }
};

/// Coordinatewise modulus x* -> |x*| in the fixed basis (basis-dependent by
/// design; the sequence-space realization of the non-linear induced map).
struct ModulusNode final : PHMapNode {
    Func apply(const Func& ystar) const override {
        Func out = ystar;
        for (auto& c : out.coords) c = std::abs(c);
        return out;
    }
    MapKind kind() const override { return MapKind::modulus; }
};

/// y* -> f(y*) x0*: rank-one image scaled by a homogeneous function.
struct RankOneNode final : PHMapNode {
    HomFn f;      // over F*
    Func x0star;  // in E*

    RankOneNode(HomFn fn, Func x0) : f(std::move(fn)), x0star(std::move(x0)) {}
    Func apply(const Func& ystar) const override { return scaled(x0star, f.eval(ystar)); }
    MapKind kind() const override { return MapKind::rank_one; }
};

struct CompositeNode final : PHMapNode {
    PHMap outer;  // G* -> E*
    PHMap inner;  // F* -> G*

    CompositeNode(PHMap out, PHMap in) : outer(std::move(out)), inner(std::move(in)) {}
    Func apply(const Func& ystar) const override { return outer.apply(inner.apply(ystar)); }
    MapKind kind() const override { return MapKind::composite; }
    bool linear() const override { return outer.linear() && inner.linear(); }
};

/// The unique map induced by a lattice homomorphism's action on generators:
/// apply(y*)(e_i) = action_i(y*), extended linearly over the basis of E.
struct TabulatedNode final : PHMapNode {
    std::vector<HomFn> action;  // one HomFn over F* per basis vector of E

    explicit TabulatedNode(std::vector<HomFn> a) : action(std::move(a)) {}
    Func apply(const Func& ystar) const override {
        Func out{std::vector<double>(action.size(), 0.0)};
        for (std::size_t i = 0; i < action.size(); ++i) out.coords[i] = action[i].eval(ystar);
        return out;
    }
    MapKind kind() const override { return MapKind::tabulated; }
};

// ---------------------------------------------------------------------------
// Constructors

inline PHMap adjoint_map(SpacePtr target_e, SpacePtr source_f, const Eigen::MatrixXd& a) {
    if (a.rows() != Eigen::Index(target_e->dim()) || a.cols() != Eigen::Index(source_f->dim()))
        throw std::invalid_argument("adjoint_map: matrix is dim E x dim F");
    return PHMap(std::move(target_e), std::move(source_f), std::make_shared<AdjointNode>(a));
}

inline PHMap adjoint_map(SpacePtr target_e, SpacePtr source_f,
                         const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd a(target_e->dim(), source_f->dim());
    if (rows.size() != target_e->dim()) throw std::invalid_argument("adjoint_map: bad row count");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != source_f->dim())
            throw std::invalid_argument("adjoint_map: bad column count");
        for (std::size_t j = 0; j < rows[i].size(); ++j) a(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    }
    return adjoint_map(std::move(target_e), std::move(source_f), a);
}

inline PHMap identity_map(SpacePtr space) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(space->dim(), space->dim());
    return adjoint_map(space, space, a);
}

inline PHMap modulus_map(SpacePtr target_e, SpacePtr source_f) {
    if (target_e->dim() != source_f->dim())
        throw std::invalid_argument("modulus_map: dimensions must agree");
    return PHMap(std::move(target_e), std::move(source_f), std::make_shared<ModulusNode>());
}

inline PHMap rank_one_map(SpacePtr target_e, HomFn f_over_fstar, Func x0star) {
    target_e->require_dim(x0star.dim());
    SpacePtr source = f_over_fstar.space_ptr();
    return PHMap(std::move(target_e), std::move(source),
                 std::make_shared<RankOneNode>(std::move(f_over_fstar), std::move(x0star)));
}

inline PHMap compose_maps(PHMap outer, PHMap inner) {
    if (inner.target().dim() != outer.source().dim())
        throw std::invalid_argument("compose_maps: dimension mismatch");
    SpacePtr t = outer.target_ptr();
    SpacePtr s = inner.source_ptr();
    return PHMap(std::move(t), std::move(s),
                 std::make_shared<CompositeNode>(std::move(outer), std::move(inner)));
}

/// The generator action e_i -> (T delta_{e_i}) determines the induced map
/// uniquely; this materializes it as a Tabulated node.
inline PHMap extract_phi(SpacePtr target_e, SpacePtr source_f, std::vector<HomFn> action) {
    if (action.size() != target_e->dim())
        throw std::invalid_argument("extract_phi: one action entry per basis vector of E");
    for (const auto& g : action)
        if (g.space().dim() != source_f->dim())
            throw std::invalid_argument("extract_phi: action entries live over F*");
    return PHMap(std::move(target_e), std::move(source_f),
                 std::make_shared<TabulatedNode>(std::move(action)));
}

// ---------------------------------------------------------------------------
// Composition operator

/// f |-> f o Phi as a HomFn over F*. A lattice homomorphism pointwise.
struct ComposeNode final : HomFnNode {
    HomFn inner;  // over E*
    PHMap map;    // F* -> E*

    ComposeNode(HomFn f, PHMap phi) : inner(std::move(f)), map(std::move(phi)) {}
    double eval(const Space&, const Func& ystar) const override {
        return inner.eval(map.apply(ystar));
    }
    NodeKind kind() const override { return NodeKind::compose; }
    Shape shape() const override {
        Shape s = inner.shape();
        Shape r;
        r.linear = s.linear && map.linear();
        r.convex = s.convex && map.linear();
        r.nonneg = s.nonneg;
        r.has_ray = s.has_ray;
        return r;
    }
    std::optional<std::vector<Vec>> ideal_dominator(const Space&) const override {
        if (map.kind() != MapKind::adjoint) return std::nullopt;
        auto dom = inner.ideal_dominator();
        if (!dom) return std::nullopt;
        const auto& adj = static_cast<const AdjointNode&>(*map.node());
        std::vector<Vec> out;
        for (const auto& x : *dom) out.push_back(adj.forward(x));
        return out;
    }
};

inline HomFn compose_op(const PHMap& phi, const HomFn& f) {
    if (f.space().dim() != phi.target().dim())
        throw std::invalid_argument("compose_op: f must live over the map's target dual");
    return HomFn(phi.source_ptr(), std::make_shared<ComposeNode>(f, phi));
}

// ---------------------------------------------------------------------------
// ||Phi||_p

struct PhiBudget {
    std::size_t x_samples = 16;  // ball directions in E when not enumerable
    FblBudget inner;

    PhiBudget() {
        inner.tuple_max = 4;
        inner.pool_samples = 48;
        inner.top_candidates = 14;
        inner.restarts = 12;
        inner.refine_steps = 60;
    }
};

namespace detail {

// Directions of B_E over which ||C_Phi delta_x|| is maximized: extreme points
// when enumerable, otherwise sphere samples plus designed directions.
inline std::vector<Vec> phi_probe_directions(const PHMap& phi, const PhiBudget& budget,
                                             std::uint64_t seed) {
    const Space& e = phi.target();
    if (e.has_extreme_points()) return e.extreme_points();
    std::vector<Vec> xs;
    Rng rng(seed ^ 0xa5a5a5a5u);
    for (std::size_t i = 0; i < budget.x_samples; ++i) {
        Vec x(rng.gaussian_vector(e.dim()));
        double n = e.norm(x);
        if (n > 1e-12) xs.push_back(scaled(x, 1.0 / n));
    }
    if (phi.kind() == MapKind::adjoint && e.kind() == NormKind::l2) {
        const auto& adj = static_cast<const AdjointNode&>(*phi.node());
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(adj.a, Eigen::ComputeThinU);
        Vec u{std::vector<double>(e.dim())};
        for (std::size_t i = 0; i < e.dim(); ++i) u.coords[i] = svd.matrixU()(Eigen::Index(i), 0);
        xs.push_back(std::move(u));
    }
    if (phi.kind() == MapKind::rank_one) {
        const auto& r1 = static_cast<const RankOneNode&>(*phi.node());
        if (e.dual_norm(r1.x0star) > 1e-12) xs.push_back(e.norming_vector(r1.x0star));
    }
    return xs;
}

inline void phi_designed_candidates(const PHMap& phi, const Vec& x, FblBudget& inner) {
    const Space& f_space = phi.source();
    if (phi.kind() == MapKind::adjoint) {
        // norming functional of Sx makes the singleton value ||Sx||_F exact
        const auto& adj = static_cast<const AdjointNode&>(*phi.node());
        Vec sx = adj.forward(x);
        if (f_space.norm(sx) > 1e-12)
            inner.extra_candidates.push_back(f_space.norming_functional(sx));
        if (f_space.kind() == NormKind::l2) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(adj.a, Eigen::ComputeThinV);
            Func v{std::vector<double>(f_space.dim())};
            for (std::size_t i = 0; i < f_space.dim(); ++i)
                v.coords[i] = svd.matrixV()(Eigen::Index(i), 0);
            inner.extra_candidates.push_back(std::move(v));
        }
    }
}

}  // namespace detail

/// Structural upper bound for ||Phi||_p; +inf when no pattern applies.
inline double phi_p_upper_value(const PHMap& phi, double p) {
    switch (phi.kind()) {
        case MapKind::adjoint: {
            // ||Phi_T||_p = ||T|| = ||S||, independent of p
            const auto& adj = static_cast<const AdjointNode&>(*phi.node());
            const Space& e = phi.target();
            const Space& f = phi.source();
            if (e.has_extreme_points()) {
                double m = 0.0;
                for (const auto& x : e.extreme_points()) m = std::max(m, f.norm(adj.forward(x)));
                return m;
            }
            if (e.kind() == NormKind::l2 && f.kind() == NormKind::l2) {
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(adj.a);
                return svd.singularValues()(0);
            }
            return kInf;
        }
        case MapKind::rank_one: {
            const auto& r1 = static_cast<const RankOneNode&>(*phi.node());
            double fu = fbl_upper(r1.f, p).upper;
            return fu * phi.target().dual_norm(r1.x0star);
        }
        case MapKind::modulus:
            // on l1 spaces the modulus changes no pairing magnitude with
            // coordinate vectors, so the weak norm is preserved
            if (phi.source().kind() == NormKind::l1 && phi.target().kind() == NormKind::l1 &&
                phi.source().dim() == phi.target().dim())
                return 1.0;
            return kInf;
        case MapKind::composite: {
            const auto& c = static_cast<const CompositeNode&>(*phi.node());
            double a = phi_p_upper_value(c.outer, p);
            double b = phi_p_upper_value(c.inner, p);
            return a * b;
        }
        case MapKind::tabulated:
            return kInf;
    }
    return kInf;
}

/// Certified lower bound (and structural upper bound when available) for
/// ||Phi||_p = sup { || (Phi y_j*) ||_{p,weak} : || (y_j*) ||_{p,weak} <= 1 }.
/// The lower bound uses the identity ||Phi||_p = sup_{x in B_E} ||C_Phi
/// delta_x||_{FBL^p[F]} and reuses the witness-tuple search per direction.
inline NormEstimate phi_p_norm(const PHMap& phi, double p, const PhiBudget& budget = {},
                               std::uint64_t seed = 0) {
    if (!(p >= 1.0)) throw std::invalid_argument("phi_p_norm: p must be >= 1");
    NormEstimate est;
    est.method = Method::search_lower;
    est.upper = phi_p_upper_value(phi, p);

    double best = 0.0;
    std::optional<std::vector<Func>> witness;
    for (const auto& x : detail::phi_probe_directions(phi, budget, seed)) {
        FblBudget inner = budget.inner;
        detail::phi_designed_candidates(phi, x, inner);
        HomFn fx = compose_op(phi, delta(phi.target_ptr(), x));
        NormEstimate e = fbl_lower(fx, p, inner, seed);
        if (e.lower > best) {
            best = e.lower;
            witness = e.witness_tuple;
        }
    }
    est.lower = best;
    est.witness_tuple = std::move(witness);
    if (est.lower > est.upper * (1.0 + 1e-6))
        throw ConsistencyError("phi_p_norm: lower bound exceeds structural upper bound");
    return est;
}

// ---------------------------------------------------------------------------
// Diagnostics

struct LinearityReport {
    double additivity_defect = 0.0;    // max ||Phi(u+v) - Phi(u) - Phi(v)||
    double homogeneity_defect = 0.0;   // max ||Phi(-u) + Phi(u)||
    double quasilinearity_ratio = 0.0; // max defect / (||u|| + ||v||)
    std::optional<double> ratio_bound; // 2 ||Phi||_p upper, when available
    bool ratio_within_bound = true;
};

inline LinearityReport linearity_report(const PHMap& phi, std::size_t samples, std::uint64_t seed,
                                        std::optional<double> phi_upper = std::nullopt) {
    if (samples < 1) throw std::invalid_argument("linearity_report: samples must be >= 1");
    const Space& f = phi.source();
    const Space& e = phi.target();
    auto us = f.sample_dual_sphere(samples, seed);
    auto vs = f.sample_dual_sphere(samples, seed ^ 0x123456789abcdefULL);
    LinearityReport rep;
    for (std::size_t i = 0; i < samples; ++i) {
        const Func& u = us[i];
        const Func& v = vs[i];
        Func lhs = phi.apply(add(u, v));
        Func rhs = add(phi.apply(u), phi.apply(v));
        double ad = 0.0;
        {
            Func diff = lhs;
            for (std::size_t k = 0; k < diff.dim(); ++k) diff.coords[k] -= rhs.coords[k];
            ad = e.dual_norm(diff);
        }
        rep.additivity_defect = std::max(rep.additivity_defect, ad);
        rep.quasilinearity_ratio =
            std::max(rep.quasilinearity_ratio, ad / (f.dual_norm(u) + f.dual_norm(v)));
        Func h = add(phi.apply(scaled(u, -1.0)), phi.apply(u));
        rep.homogeneity_defect = std::max(rep.homogeneity_defect, e.dual_norm(h));
    }
    if (phi_upper && std::isfinite(*phi_upper)) {
        rep.ratio_bound = 2.0 * *phi_upper;
        rep.ratio_within_bound = rep.quasilinearity_ratio <= *rep.ratio_bound + 1e-9;
    }
    return rep;
}

struct CompNormReport {
    double phi_lower = 0.0;
    double phi_upper = kInf;
    // (a) submultiplicative direction: ||C_Phi f|| <= ||Phi||_p ||f|| on a
    // seeded family with structural upper bounds
    bool submultiplicative_ok = true;
    double worst_ratio = 0.0;  // max fbl_lower(C_Phi f) / (phi_upper * fbl_upper(f))
    // (b) the witness tuple evaluated through the delta-composition route
    bool witness_route_ok = true;
    double witness_route_value = 0.0;
};

/// Two-sided numerical check of ||C_Phi|| = ||Phi||_p.
inline CompNormReport comp_norm_identity_check(const PHMap& phi, double p,
                                               const PhiBudget& budget = {},
                                               std::uint64_t seed = 0) {
    CompNormReport rep;
    NormEstimate pn = phi_p_norm(phi, p, budget, seed);
    rep.phi_lower = pn.lower;
    rep.phi_upper = pn.upper;

    // (a)
    if (std::isfinite(pn.upper)) {
        const Space& e = phi.target();
        SpacePtr eptr = phi.target_ptr();
        Rng rng(seed ^ 0xdeadbeefULL);
        for (int i = 0; i < 8; ++i) {
            Vec x(rng.gaussian_vector(e.dim()));
            Vec y(rng.gaussian_vector(e.dim()));
            HomFn f = i % 2 == 0 ? delta(eptr, x)
                                 : sup(fbl::abs(delta(eptr, x)), fbl::abs(delta(eptr, y)));
            double fu = fbl_upper(f, p).upper;
            double lhs = fbl_lower(compose_op(phi, f), p, budget.inner, seed + i).lower;
            double cap = pn.upper * fu;
            if (cap > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, lhs / cap);
            if (lhs > cap * (1.0 + 1e-6)) rep.submultiplicative_ok = false;
        }
    }

    // (b)
    if (pn.witness_tuple && !pn.witness_tuple->empty()) {
        const Space& e = phi.target();
        double best = 0.0;
        auto eval_through = [&](const Vec& x) {
            HomFn fx = compose_op(phi, delta(phi.target_ptr(), x));
            double s = 0.0;
            for (const auto& y : *pn.witness_tuple) s += std::pow(std::abs(fx.eval(y)), p);
            return std::pow(s, 1.0 / p);
        };
        if (e.has_extreme_points()) {
            for (const auto& x : e.extreme_points()) best = std::max(best, eval_through(x));
        } else {
            for (const auto& x : detail::phi_probe_directions(phi, budget, seed))
                best = std::max(best, eval_through(x));
        }
        rep.witness_route_value = best;
        // the weak norm of the image tuple must reproduce the lower bound
        if (e.has_extreme_points() && std::abs(best - pn.lower) > 1e-6 * std::max(1.0, pn.lower))
            rep.witness_route_ok = false;
        if (!e.has_extreme_points() && best < pn.lower * (1.0 - 1e-3))
            rep.witness_route_ok = false;
    }
    return rep;
}

struct PhiMonotonicityReport {
    bool conclusive = false;
    bool pass = true;
    double lower_q = 0.0;
    double upper_p = kInf;
    double lower_p = 0.0;
};

/// p -> ||Phi||_p is decreasing: checks ||Phi||_q lower <= ||Phi||_p upper.
inline PhiMonotonicityReport phi_p_monotonicity_check(const PHMap& phi, double p, double q,
                                                      const PhiBudget& budget = {},
                                                      std::uint64_t seed = 0) {
    if (!(p >= 1.0 && q > p)) throw std::invalid_argument("phi monotonicity: need 1 <= p < q");
    NormEstimate ep = phi_p_norm(phi, p, budget, seed);
    NormEstimate eq = phi_p_norm(phi, q, budget, seed);
    PhiMonotonicityReport rep;
    rep.lower_p = ep.lower;
    rep.lower_q = eq.lower;
    rep.upper_p = ep.upper;
    if (std::isfinite(ep.upper)) {
        rep.conclusive = true;
        rep.pass = eq.lower <= ep.upper + 1e-6;
    }
    return rep;
}

struct InjectivityReport {
    double min_ratio = kInf;  // min ||Phi u - Phi v|| / ||u - v||
    std::vector<std::pair<Func, Func>> collisions;
};

/// Minimum expansion ratio over seeded sphere pairs, antipodal pairs
/// included; exact collisions are listed.
inline InjectivityReport injectivity_probe(const PHMap& phi, std::size_t samples,
                                           std::uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("injectivity_probe: samples must be >= 2");
    const Space& f = phi.source();
    const Space& e = phi.target();
    std::vector<Func> pts = f.sample_dual_sphere(samples, seed);
    for (std::size_t i = 0; i < f.dim(); ++i) {
        Func b = basis_func(f.dim(), i);
        double n = f.dual_norm(b);
        pts.push_back(scaled(b, 1.0 / n));
    }
    std::size_t base = pts.size();
    for (std::size_t i = 0; i < base; ++i) pts.push_back(scaled(pts[i], -1.0));

    InjectivityReport rep;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            Func du = add(pts[i], scaled(pts[j], -1.0));
            double den = f.dual_norm(du);
            if (den < 1e-9) continue;
            Func di = add(phi.apply(pts[i]), scaled(phi.apply(pts[j]), -1.0));
            double num = e.dual_norm(di);
            double ratio = num / den;
            if (ratio < rep.min_ratio) rep.min_ratio = ratio;
            if (num < 1e-9) rep.collisions.emplace_back(pts[i], pts[j]);
        }
    }
    return rep;
}

}  // namespace fbl
