#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fbl/core.hpp"

namespace fbl {

enum class NormKind { l1, l2, linf, polyhedral };

inline const char* to_string(NormKind k) {
    switch (k) {
        case NormKind::l1: return "l1";
        case NormKind::l2: return "l2";
        case NormKind::linf: return "linf";
        case NormKind::polyhedral: return "polyhedral";
    }
    return "?";
}

/// A finite-dimensional normed space. Supported norms are l_q for
/// q in {1, 2, inf} and polyhedral norms given by a centrally symmetric,
/// full-dimensional vertex list of the unit ball. For everything except l2
/// the unit balls of both the space and its dual have enumerable extreme
/// points, which is what makes exact suprema possible downstream.
class Space {
public:
    static Space lq(std::size_t dim, NormKind kind) {
        if (dim < 1) throw std::invalid_argument("Space: dim must be >= 1");
        if (kind == NormKind::polyhedral)
            throw std::invalid_argument("Space: polyhedral norm needs a vertex list");
        Space s;
        s.dim_ = dim;
        s.kind_ = kind;
        return s;
    }

    static Space polyhedral(std::size_t dim, std::vector<Vec> vertices) {
        if (dim < 1) throw std::invalid_argument("Space: dim must be >= 1");
        if (vertices.empty()) throw std::invalid_argument("Space: empty vertex list");
        if (vertices.size() > kMaxVertices)
            throw std::invalid_argument("Space: vertex list exceeds resource cap");
        for (const auto& v : vertices) {
            if (v.dim() != dim) throw std::invalid_argument("Space: vertex dimension mismatch");
            if (euclidean_norm(v.coords) < 1e-12)
                throw std::invalid_argument("Space: zero vector in vertex list");
        }
        check_symmetric(vertices);
        check_full_dimensional(dim, vertices);
        Space s;
        s.dim_ = dim;
        s.kind_ = NormKind::polyhedral;
        s.vertices_ = std::move(vertices);
        s.polar_vertices_ = enumerate_polar_vertices(dim, s.vertices_);
        if (s.polar_vertices_.size() < 2 * dim)
            throw std::invalid_argument("Space: degenerate vertex list (polar enumeration failed)");
        return s;
    }

    std::size_t dim() const { return dim_; }
    NormKind kind() const { return kind_; }

    /// Vertex list of the unit ball (polyhedral spaces only).
    const std::vector<Vec>& vertices() const { return vertices_; }

    double norm(const Vec& v) const {
        require_dim(v.dim());
        switch (kind_) {
            case NormKind::l1: {
                double s = 0.0;
                for (double x : v.coords) s += std::abs(x);
                return s;
            }
            case NormKind::l2:
                return euclidean_norm(v.coords);
            case NormKind::linf: {
                double m = 0.0;
                for (double x : v.coords) m = std::max(m, std::abs(x));
                return m;
            }
            case NormKind::polyhedral: {
                // Gauge of the vertex hull, evaluated as the support function
                // of the polar polytope.
                double m = 0.0;
                for (const auto& g : polar_vertices_) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < dim_; ++i) s += g.coords[i] * v.coords[i];
                    m = std::max(m, std::abs(s));
                }
                return m;
            }
        }
        return 0.0;
    }

    double dual_norm(const Func& f) const {
        require_dim(f.dim());
        switch (kind_) {
            case NormKind::l1: {
                double m = 0.0;
                for (double x : f.coords) m = std::max(m, std::abs(x));
                return m;
            }
            case NormKind::l2:
                return euclidean_norm(f.coords);
            case NormKind::linf: {
                double s = 0.0;
                for (double x : f.coords) s += std::abs(x);
                return s;
            }
            case NormKind::polyhedral: {
                // Support function of the vertex list.
                double m = 0.0;
                for (const auto& u : vertices_) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < dim_; ++i) s += f.coords[i] * u.coords[i];
                    m = std::max(m, std::abs(s));
                }
                return m;
            }
        }
        return 0.0;
    }

    bool has_extreme_points() const { return kind_ != NormKind::l2; }

    /// Extreme points of the unit ball of E. Signals unsupported for l2.
    std::vector<Vec> extreme_points() const {
        switch (kind_) {
            case NormKind::l1: {
                std::vector<Vec> pts;
                pts.reserve(2 * dim_);
                for (std::size_t i = 0; i < dim_; ++i) {
                    pts.push_back(basis_vec(dim_, i, 1.0));
                    pts.push_back(basis_vec(dim_, i, -1.0));
                }
                return pts;
            }
            case NormKind::linf:
                return sign_vectors(dim_);
            case NormKind::polyhedral:
                return vertices_;
            case NormKind::l2:
                throw std::domain_error("extreme_points: unsupported for l2 (smooth ball)");
        }
        return {};
    }

    bool has_dual_extreme_points() const { return kind_ != NormKind::l2; }

    /// Extreme points of the dual unit ball B_{E*}.
    std::vector<Func> dual_extreme_points() const {
        switch (kind_) {
            case NormKind::l1: {
                auto sv = sign_vectors(dim_);
                std::vector<Func> pts;
                pts.reserve(sv.size());
                for (auto& v : sv) pts.push_back(Func(std::move(v.coords)));
                return pts;
            }
            case NormKind::linf: {
                std::vector<Func> pts;
                pts.reserve(2 * dim_);
                for (std::size_t i = 0; i < dim_; ++i) {
                    pts.push_back(basis_func(dim_, i, 1.0));
                    pts.push_back(basis_func(dim_, i, -1.0));
                }
                return pts;
            }
            case NormKind::polyhedral:
                return polar_vertices_;
            case NormKind::l2:
                throw std::domain_error("dual_extreme_points: unsupported for l2 (smooth ball)");
        }
        return {};
    }

    /// count functionals of dual norm 1, deterministic in seed. Directions are
    /// isotropic Gaussian, rescaled to the dual sphere.
    std::vector<Func> sample_dual_sphere(std::size_t count, std::uint64_t seed) const {
        if (count < 1) throw std::invalid_argument("sample_dual_sphere: count must be >= 1");
        Rng rng(seed);
        std::vector<Func> out;
        out.reserve(count);
        while (out.size() < count) {
            Func f(rng.gaussian_vector(dim_));
            double n = dual_norm(f);
            if (n < 1e-12) continue;
            out.push_back(scaled(f, 1.0 / n));
        }
        return out;
    }

    /// A functional of dual norm 1 attaining pairing(f, v) = norm(v).
    Func norming_functional(const Vec& v) const {
        require_dim(v.dim());
        switch (kind_) {
            case NormKind::l1: {
                Func f(std::vector<double>(dim_, 1.0));
                for (std::size_t i = 0; i < dim_; ++i)
                    if (v.coords[i] < 0.0) f.coords[i] = -1.0;
                return f;
            }
            case NormKind::l2: {
                double n = euclidean_norm(v.coords);
                if (n < 1e-300) return basis_func(dim_, 0, 1.0);
                return scaled(Func(v.coords), 1.0 / n);
            }
            case NormKind::linf: {
                std::size_t best = 0;
                for (std::size_t i = 1; i < dim_; ++i)
                    if (std::abs(v.coords[i]) > std::abs(v.coords[best])) best = i;
                return basis_func(dim_, best, v.coords[best] < 0.0 ? -1.0 : 1.0);
            }
            case NormKind::polyhedral: {
                const Func* best = nullptr;
                double bestval = -kInf;
                double sign = 1.0;
                for (const auto& g : polar_vertices_) {
                    double s = pairing(g, v);
                    if (std::abs(s) > bestval) {
                        bestval = std::abs(s);
                        best = &g;
                        sign = s < 0.0 ? -1.0 : 1.0;
                    }
                }
                return scaled(*best, sign);
            }
        }
        return Func{};
    }

    /// A vector of norm 1 attaining pairing(f, v) = dual_norm(f).
    Vec norming_vector(const Func& f) const {
        require_dim(f.dim());
        switch (kind_) {
            case NormKind::l1: {
                std::size_t best = 0;
                for (std::size_t i = 1; i < dim_; ++i)
                    if (std::abs(f.coords[i]) > std::abs(f.coords[best])) best = i;
                return basis_vec(dim_, best, f.coords[best] < 0.0 ? -1.0 : 1.0);
            }
            case NormKind::l2: {
                double n = euclidean_norm(f.coords);
                if (n < 1e-300) return basis_vec(dim_, 0, 1.0);
                return scaled(Vec(f.coords), 1.0 / n);
            }
            case NormKind::linf: {
                Vec v(std::vector<double>(dim_, 1.0));
                for (std::size_t i = 0; i < dim_; ++i)
                    if (f.coords[i] < 0.0) v.coords[i] = -1.0;
                return v;
            }
            case NormKind::polyhedral: {
                const Vec* best = nullptr;
                double bestval = -kInf;
                double sign = 1.0;
                for (const auto& u : vertices_) {
                    double s = pairing(f, u);
                    if (std::abs(s) > bestval) {
                        bestval = std::abs(s);
                        best = &u;
                        sign = s < 0.0 ? -1.0 : 1.0;
                    }
                }
                return scaled(*best, sign);
            }
        }
        return Vec{};
    }

    void require_dim(std::size_t d) const {
        if (d != dim_) throw std::invalid_argument("Space: dimension mismatch");
    }

private:
    Space() = default;

    static constexpr std::size_t kMaxVertices = 64;
    static constexpr std::size_t kMaxSignDim = 16;

    static std::vector<Vec> sign_vectors(std::size_t dim) {
        if (dim > kMaxSignDim)
            throw std::domain_error("extreme_points: 2^dim enumeration exceeds resource cap");
        std::vector<Vec> pts;
        pts.reserve(std::size_t(1) << dim);
        for (std::size_t mask = 0; mask < (std::size_t(1) << dim); ++mask) {
            Vec v(std::vector<double>(dim, 1.0));
            for (std::size_t i = 0; i < dim; ++i)
                if (mask & (std::size_t(1) << i)) v.coords[i] = -1.0;
            pts.push_back(std::move(v));
        }
        return pts;
    }

    static void check_symmetric(const std::vector<Vec>& vertices) {
        for (const auto& v : vertices) {
            bool found = false;
            for (const auto& w : vertices) {
                double d = 0.0;
                for (std::size_t i = 0; i < v.dim(); ++i) {
                    d = std::max(d, std::abs(v.coords[i] + w.coords[i]));
                }
                if (d <= 1e-9) { found = true; break; }
            }
            if (!found)
                throw std::invalid_argument("Space: vertex list not closed under negation");
        }
    }

    static void check_full_dimensional(std::size_t dim, const std::vector<Vec>& vertices) {
        Eigen::MatrixXd m(vertices.size(), dim);
        for (std::size_t r = 0; r < vertices.size(); ++r)
            for (std::size_t c = 0; c < dim; ++c) m(Eigen::Index(r), Eigen::Index(c)) = vertices[r].coords[c];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        if (svd.rank() < Eigen::Index(dim) ||
            svd.singularValues()(Eigen::Index(dim) - 1) < 1e-9 * svd.singularValues()(0))
            throw std::invalid_argument("Space: vertex list does not span the space");
    }

    // Vertices of the polar polytope {f : <f, u> <= 1 for all u in V}:
    // every choice of dim linearly independent active constraints gives a
    // candidate, kept if feasible. Exact for the small vertex lists we cap at.
    static std::vector<Func> enumerate_polar_vertices(std::size_t dim,
                                                      const std::vector<Vec>& vertices) {
        const std::size_t nv = vertices.size();
        std::vector<std::size_t> idx(dim);
        for (std::size_t i = 0; i < dim; ++i) idx[i] = i;
        std::vector<Func> out;

        auto process = [&](const std::vector<std::size_t>& sel) {
            Eigen::MatrixXd a(dim, dim);
            Eigen::VectorXd b = Eigen::VectorXd::Ones(Eigen::Index(dim));
            for (std::size_t r = 0; r < dim; ++r)
                for (std::size_t c = 0; c < dim; ++c)
                    a(Eigen::Index(r), Eigen::Index(c)) = vertices[sel[r]].coords[c];
            Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
            if (lu.rank() < Eigen::Index(dim)) return;
            Eigen::VectorXd f = lu.solve(b);
            for (const auto& u : vertices) {
                double s = 0.0;
                for (std::size_t i = 0; i < dim; ++i) s += f(Eigen::Index(i)) * u.coords[i];
                if (s > 1.0 + 1e-9) return;
            }
            Func cand{std::vector<double>(dim)};
            for (std::size_t i = 0; i < dim; ++i) cand.coords[i] = f(Eigen::Index(i));
            for (const auto& g : out) {
                double d = 0.0;
                for (std::size_t i = 0; i < dim; ++i)
                    d = std::max(d, std::abs(g.coords[i] - cand.coords[i]));
                if (d <= 1e-9) return;
            }
            out.push_back(std::move(cand));
            // The negation is feasible by symmetry; adding it here keeps the
            // list exactly closed under negation in floating point.
            Func neg = scaled(out.back(), -1.0);
            for (const auto& g : out) {
                double d = 0.0;
                for (std::size_t i = 0; i < dim; ++i)
                    d = std::max(d, std::abs(g.coords[i] - neg.coords[i]));
                if (d <= 1e-9) return;
            }
            out.push_back(std::move(neg));
        };

        if (dim > nv) return out;
        std::uint64_t combos = 1;
        for (std::size_t i = 0; i < dim; ++i) {
            combos = combos * (nv - i) / (i + 1);
            if (combos > 2'000'000) throw std::domain_error("Space: polar enumeration exceeds cap");
        }
        while (true) {
            process(idx);
            // next combination
            std::size_t i = dim;
            while (i > 0 && idx[i - 1] == nv - dim + (i - 1)) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < dim; ++j) idx[j] = idx[j - 1] + 1;
        }
        return out;
    }

    std::size_t dim_ = 0;
    NormKind kind_ = NormKind::l2;
    std::vector<Vec> vertices_;
    std::vector<Func> polar_vertices_;
};

}  // namespace fbl
