#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fbl/core.hpp"
#include "fbl/homfn.hpp"
#include "fbl/summing.hpp"

namespace fbl {

/// A proof construction packaged with its quantitative certificate. Every
/// certificate value is reproducible by re-running the evaluation it labels.
struct WitnessReport {
    std::string construction;
    std::optional<HomFn> f;  // omitted when the tree would exceed the cap
    std::vector<std::pair<std::string, double>> parameters;
    std::vector<std::pair<std::string, double>> certificate;

    double value(const std::string& label) const {
        for (const auto& [k, v] : certificate)
            if (k == label) return v;
        throw std::out_of_range("WitnessReport: no certificate entry " + label);
    }
};

/// sup_n |delta_{s_n x_n}| as an expression tree.
inline HomFn sup_deltas(const SpacePtr& space, const std::vector<Vec>& vectors,
                        const std::vector<double>& scales) {
    if (vectors.size() != scales.size())
        throw std::invalid_argument("sup_deltas: length mismatch");
    if (vectors.empty()) throw std::invalid_argument("sup_deltas: empty sequence");
    std::vector<HomFn> parts;
    parts.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (scales[i] < 0.0) throw std::invalid_argument("sup_deltas: negative scale");
        parts.push_back(abs(delta(space, scaled(vectors[i], scales[i]))));
    }
    return parts.size() == 1 ? parts.front() : sup(parts);
}

/// Exact weak p-summing norm over the euclidean ball of the diagonal tuple
/// (lambda_n e_n*): ||lambda||_{2p/(2-p)} for p < 2 (Hoelder, attained) and
/// max_n lambda_n for p >= 2 (mass concentrates).
inline double diagonal_weak_p(const std::vector<double>& lambdas, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("diagonal_weak_p: p must be >= 1");
    if (p >= 2.0) {
        double m = 0.0;
        for (double l : lambdas) m = std::max(m, l);
        return m;
    }
    double r = 2.0 * p / (2.0 - p);
    double s = 0.0;
    for (double l : lambdas) s += std::pow(l, r);
    return std::pow(s, 1.0 / r);
}

struct DivergenceOptions {
    // overrides for the default sequences: functionals lambda_n e_n* and
    // scales s_n; empty means the p-dependent defaults
    std::vector<double> lambdas;
    std::vector<double> scales;
    std::size_t tree_cap = 512;  // largest truncation materialized as a tree
};

/// The weak-Dvoretzky-Rogers divergence witness at finite truncation, over
/// E = l2^N: f = sup_n |delta_{s_n e_n}| with weakly p-summable diagonal
/// functionals x_n* = lambda_n e_n*. The certificate carries K (the weak
/// p-norm of the functional sequence, exact by the diagonal formula) and the
/// divergence partial sums L(m) = (sum_{k<=m} s_k^p lambda_k^p)^{1/p}, each
/// of which lower-bounds K ||f||_{FBL^p} at truncation m.
inline WitnessReport divergence_witness(std::size_t n_trunc, double p, std::uint64_t seed = 0,
                                        DivergenceOptions opts = {}) {
    if (n_trunc < 2) throw std::invalid_argument("divergence_witness: N must be >= 2");
    if (!(p >= 1.0)) throw std::invalid_argument("divergence_witness: p must be >= 1");

    std::vector<double> lam = std::move(opts.lambdas);
    std::vector<double> sc = std::move(opts.scales);
    if (lam.empty() != sc.empty())
        throw std::invalid_argument("divergence_witness: override both sequences or neither");
    if (lam.empty()) {
        if (p == 1.0) {
            // x_n* = e_n / n is weakly 1-summable; s_n = 1/log(n+1)
            for (std::size_t n = 1; n <= n_trunc; ++n) {
                lam.push_back(1.0 / double(n));
                sc.push_back(1.0 / std::log(double(n) + 1.0));
            }
        } else if (p >= 2.0) {
            // x_n* = e_n has weak p-norm 1; s_n = n^{-1/(2p)} keeps
            // sum s_n^p ||x_n*||^p divergent for every p >= 2
            for (std::size_t n = 1; n <= n_trunc; ++n) {
                lam.push_back(1.0);
                sc.push_back(std::pow(double(n), -1.0 / (2.0 * p)));
            }
        } else {
            throw std::invalid_argument(
                "divergence_witness: default sequences cover p = 1 and p >= 2; "
                "supply custom sequences for 1 < p < 2");
        }
    }
    if (lam.size() != n_trunc || sc.size() != n_trunc)
        throw std::invalid_argument("divergence_witness: sequence length must equal N");

    WitnessReport rep;
    rep.construction = "divergence";
    rep.parameters = {{"N", double(n_trunc)}, {"p", p}, {"seed", double(seed)}};

    double k_exact = diagonal_weak_p(lam, p);
    rep.certificate.emplace_back("K", k_exact);

    // L(m) partial sums; x_k*(x_k) = lambda_k since both sit on e_k
    std::vector<std::size_t> marks = {10, 100, 1000, n_trunc};
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    double running = 0.0;
    std::size_t next = 0;
    for (std::size_t k = 1; k <= n_trunc; ++k) {
        running += std::pow(sc[k - 1] * lam[k - 1], p);
        while (next < marks.size() && marks[next] == k) {
            rep.certificate.emplace_back("L(" + std::to_string(k) + ")",
                                         std::pow(running, 1.0 / p));
            ++next;
        }
    }

    if (n_trunc <= opts.tree_cap) {
        auto space = make_lq_space(n_trunc, NormKind::l2);
        std::vector<Vec> vecs;
        for (std::size_t n = 0; n < n_trunc; ++n) vecs.push_back(basis_vec(n_trunc, n));
        rep.f = sup_deltas(space, vecs, sc);
    }
    rep.certificate.emplace_back("tree_materialized", rep.f ? 1.0 : 0.0);
    return rep;
}

/// f = sum_n |delta_{b_n}| / 2^n at finite truncation. Rejects linearly
/// dependent input (rank check at relative tolerance 1e-9).
inline HomFn series_witness(const SpacePtr& space, const std::vector<Vec>& basis) {
    if (basis.empty()) throw std::invalid_argument("series_witness: empty basis");
    Eigen::MatrixXd m(basis.size(), space->dim());
    for (std::size_t r = 0; r < basis.size(); ++r) {
        space->require_dim(basis[r].dim());
        for (std::size_t c = 0; c < space->dim(); ++c) m(Eigen::Index(r), Eigen::Index(c)) = basis[r].coords[c];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    if (svd.rank() < Eigen::Index(basis.size()) ||
        svd.singularValues()(Eigen::Index(basis.size()) - 1) < 1e-9 * svd.singularValues()(0))
        throw std::invalid_argument("series_witness: basis is linearly dependent");

    std::vector<HomFn> parts;
    double w = 0.5;
    for (const auto& b : basis) {
        parts.push_back(scale(w, abs(delta(space, b))));
        w *= 0.5;
    }
    return parts.size() == 1 ? parts.front() : sum(parts);
}

/// A functional x* = sum_k t_k b_k* with x*(x_j) = 0 for every obstacle x_j:
/// a unit-norm null-space element of the m x (m+1) pairing matrix. Feeding it
/// to the matching series witness yields f(x*) > 0 = sum_j |x*(x_j)|, the
/// non-domination certificate.
inline Func kernel_witness(const SpacePtr& space, const std::vector<Vec>& obstacles,
                           const std::vector<Func>& basis_funcs) {
    if (basis_funcs.size() != obstacles.size() + 1)
        throw std::invalid_argument("kernel_witness: need one more basis functional than obstacles");
    for (const auto& x : obstacles) space->require_dim(x.dim());
    for (const auto& b : basis_funcs) space->require_dim(b.dim());

    const std::size_t m = obstacles.size();
    const std::size_t k = basis_funcs.size();
    Eigen::VectorXd t{Eigen::Index(k)};
    if (m == 0) {
        t.setZero();
        t(0) = 1.0;
    } else {
        Eigen::MatrixXd a{Eigen::Index(m), Eigen::Index(k)};
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t c = 0; c < k; ++c)
                a(Eigen::Index(j), Eigen::Index(c)) = pairing(basis_funcs[c], obstacles[j]);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
        t = svd.matrixV().col(Eigen::Index(k) - 1);  // smallest singular direction
    }
    t.normalize();
    // deterministic sign: largest-magnitude coefficient positive
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < t.size(); ++i)
        if (std::abs(t(i)) > std::abs(t(pivot))) pivot = i;
    if (t(pivot) < 0.0) t = -t;

    Func xstar{std::vector<double>(space->dim(), 0.0)};
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < space->dim(); ++i)
            xstar.coords[i] += t(Eigen::Index(c)) * basis_funcs[c].coords[i];

    for (const auto& x : obstacles) {
        if (std::abs(pairing(xstar, x)) > 1e-9)
            throw std::runtime_error("kernel_witness: numerical rank failure (residual too large)");
    }
    return xstar;
}

// ---------------------------------------------------------------------------
// The gap construction (FBL^p vs the closure of I_{w*} at finite truncation)

/// Orthonormal realization over E = l2^N of the separation construction:
/// f = |delta_{x_1}| ^ sup_n s_n |delta_{x_{n+1}}| with x_{n+1} = e_{n+1},
/// functionals x_{n+1}* = n^{-1/q} e_{n+1}*, s_n = n^{1/q - 1/p}, and witness
/// functionals z_j* = m^{-1/p} x_1* + x_{m+j}*.
struct GapConstruction {
    SpacePtr space;
    std::size_t n_trunc = 0;
    std::size_t m = 0;
    double p = 1.0;
    double q = 2.0;
    HomFn f;
    Func x1star;
    std::vector<Func> z;        // z_1* ... z_m*
    std::vector<Vec> w_basis;   // basis of W_m = span{e_1, ..., e_{m-1}}
    double k_weak = 0.0;        // exact weak p-norm of (x_2*, ..., x_N*)
};

inline GapConstruction make_gap_construction(std::size_t n_trunc, double p, double q,
                                             std::size_t m) {
    if (!(p >= 1.0) || !(q > p)) throw std::invalid_argument("gap: need 1 <= p < q");
    if (m < 1) throw std::invalid_argument("gap: m must be >= 1");
    if (n_trunc < 2 * m + 2) throw std::invalid_argument("gap: need N >= 2m + 2");

    GapConstruction g;
    g.space = make_lq_space(n_trunc, NormKind::l2);
    g.n_trunc = n_trunc;
    g.m = m;
    g.p = p;
    g.q = q;

    std::vector<HomFn> parts;
    std::vector<double> lambdas;
    for (std::size_t n = 1; n + 1 <= n_trunc; ++n) {
        double s_n = std::pow(double(n), 1.0 / q - 1.0 / p);
        parts.push_back(abs(delta(g.space, basis_vec(n_trunc, n, s_n))));
        lambdas.push_back(std::pow(double(n), -1.0 / q));
    }
    g.f = inf(abs(delta(g.space, basis_vec(n_trunc, 0))), sup(parts));
    g.x1star = basis_func(n_trunc, 0);
    g.k_weak = diagonal_weak_p(lambdas, p);

    double mp = std::pow(double(m), -1.0 / p);
    for (std::size_t j = 1; j <= m; ++j) {
        Func zj = basis_func(n_trunc, 0, mp);
        std::size_t n = m + j - 1;  // functional index x_{m+j}* = y_n*
        zj.coords[n] = std::pow(double(n), -1.0 / q);
        g.z.push_back(std::move(zj));
    }
    for (std::size_t i = 0; i + 1 < m; ++i) g.w_basis.push_back(basis_vec(n_trunc, i));
    return g;
}

namespace detail {

inline void check_gap_support(const GapConstruction& g, const NodePtr& node) {
    switch (node->kind()) {
        case NodeKind::delta: {
            const auto& d = static_cast<const DeltaNode&>(*node);
            double scale = 1.0;
            for (double c : d.x.coords) scale = std::max(scale, std::abs(c));
            for (std::size_t i = g.m - 1; i < g.n_trunc; ++i)
                if (std::abs(d.x.coords[i]) > 1e-12 * scale)
                    throw std::invalid_argument(
                        "gap_witness: h has a delta vector outside W_m (nonzero pairing with a "
                        "construction functional)");
            return;
        }
        case NodeKind::sup:
        case NodeKind::inf:
        case NodeKind::sum:
        case NodeKind::abs:
        case NodeKind::scale:
            for (const auto& c : node->children()) check_gap_support(g, c);
            return;
        default:
            throw std::invalid_argument(
                "gap_witness: h must be a lattice expression over delta vectors");
    }
}

}  // namespace detail

/// Certified lower bound on ||f - h||_{FBL^p} for a lattice expression h over
/// W_m, via the witness functionals: since h(z_j*) = m^{-1/p} h(x_1*) for
/// such h, the chain of weak-norm estimates gives
/// (K+2) ||f - h|| >= (sum_j |f(z_j*) - m^{-1/p} f(x_1*)|^p)^{1/p}.
inline WitnessReport gap_witness(const GapConstruction& g, const HomFn& h) {
    if (h.space().dim() != g.n_trunc) throw std::invalid_argument("gap_witness: h dimension");
    detail::check_gap_support(g, h.root());

    WitnessReport rep;
    rep.construction = "gap";
    rep.parameters = {{"N", double(g.n_trunc)}, {"p", g.p}, {"q", g.q}, {"m", double(g.m)}};
    rep.f = g.f;
    rep.certificate.emplace_back("K", g.k_weak);

    double fx1 = g.f.eval(g.x1star);
    rep.certificate.emplace_back("f(x1*)", fx1);

    double mp = std::pow(double(g.m), -1.0 / g.p);
    double hx1 = h.eval(g.x1star);
    double sum_p = 0.0;
    double identity_residual = 0.0;
    for (std::size_t j = 1; j <= g.m; ++j) {
        double fz = g.f.eval(g.z[j - 1]);
        rep.certificate.emplace_back("f(z" + std::to_string(j) + "*)", fz);
        double floor = std::min(mp, std::pow(double(g.m + j - 1), -1.0 / g.p));
        rep.certificate.emplace_back("floor" + std::to_string(j), floor);
        double hz = h.eval(g.z[j - 1]);
        identity_residual = std::max(identity_residual, std::abs(hz - mp * hx1));
        sum_p += std::pow(std::abs(fz - mp * fx1), g.p);
    }
    rep.certificate.emplace_back("h_identity_residual", identity_residual);

    double bound = std::pow(sum_p, 1.0 / g.p) / (g.k_weak + 2.0);
    rep.certificate.emplace_back("distance_lower_bound", bound);
    rep.certificate.emplace_back("uniform_floor",
                                 std::pow(2.0, -(g.p + 1.0) / g.p) / (g.k_weak + 2.0));
    return rep;
}

inline WitnessReport gap_witness(std::size_t n_trunc, double p, double q, std::size_t m) {
    GapConstruction g = make_gap_construction(n_trunc, p, q, m);
    return gap_witness(g, zero_fn(g.space));
}

/// Measure-induced function; alias of the MuInduced node constructor under
/// its construction-side name.
inline HomFn mu_induced(const SpacePtr& space, DiscreteMeasure mu, double p) {
    return mu_fn(space, std::move(mu), p);
}

}  // namespace fbl
