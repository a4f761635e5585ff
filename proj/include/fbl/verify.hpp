#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "fbl/fblnorm.hpp"
#include "fbl/homfn.hpp"
#include "fbl/phmap.hpp"
#include "fbl/space.hpp"
#include "fbl/summing.hpp"
#include "fbl/witnesses.hpp"

namespace fbl::verify {

struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct SuiteReport {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

using fbl::detail::Mutation;

inline const char* to_string(Mutation m) {
    switch (m) {
        case Mutation::none: return "none";
        case Mutation::sup_as_inf: return "sup-as-inf";
        case Mutation::skip_rescale: return "skip-rescale";
        case Mutation::transpose_adjoint: return "transpose-adjoint";
    }
    return "?";
}

namespace detail {

struct MutationGuard {
    explicit MutationGuard(Mutation m) { fbl::detail::active_mutation() = m; }
    ~MutationGuard() { fbl::detail::active_mutation() = Mutation::none; }
};

inline HomFn random_tree(const SpacePtr& space, Rng& rng, int depth) {
    if (depth == 0 || rng.uniform01() < 0.35) {
        if (rng.uniform01() < 0.12) return norm_fn(space);
        Vec x(rng.gaussian_vector(space->dim()));
        return delta(space, x);
    }
    switch (rng.index(5)) {
        case 0: return sup(random_tree(space, rng, depth - 1), random_tree(space, rng, depth - 1));
        case 1: return inf(random_tree(space, rng, depth - 1), random_tree(space, rng, depth - 1));
        case 2: return abs(random_tree(space, rng, depth - 1));
        case 3: return scale(rng.uniform(-1.5, 1.5), random_tree(space, rng, depth - 1));
        default:
            return sum({random_tree(space, rng, depth - 1), random_tree(space, rng, depth - 1)});
    }
}

template <class Fn>
inline void run_check(SuiteReport& rep, const std::string& name, Fn&& body) {
    CheckResult r;
    r.name = name;
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    rep.checks.push_back(std::move(r));
}

inline std::string show(const Func& f) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < f.dim(); ++i) os << (i ? ", " : "") << f.coords[i];
    os << ")";
    return os.str();
}

}  // namespace detail

/// The full invariants-and-properties battery, one named check per invariant
/// family. `mutation` injects one of the standard faults so the suite can
/// demonstrate its own sensitivity.
inline SuiteReport run_suite(std::uint64_t seed, Mutation mutation = Mutation::none) {
    detail::MutationGuard guard(mutation);
    SuiteReport rep;
    using detail::run_check;

    std::vector<SpacePtr> lq_spaces;
    for (auto k : {NormKind::l1, NormKind::l2, NormKind::linf})
        for (std::size_t d : {2, 3}) lq_spaces.push_back(make_lq_space(d, k));

    run_check(rep, "spaces.pairing_bound", [&](CheckResult& r) {
        Rng rng(seed + 1);
        for (const auto& s : lq_spaces) {
            for (int i = 0; i < 1000; ++i) {
                Vec v(rng.gaussian_vector(s->dim()));
                Func f(rng.gaussian_vector(s->dim()));
                double lhs = std::abs(pairing(f, v));
                double rhs = s->dual_norm(f) * s->norm(v);
                if (lhs > rhs * (1.0 + 1e-9)) {
                    r.pass = false;
                    r.detail = "pairing " + std::to_string(lhs) + " > " + std::to_string(rhs);
                    return;
                }
            }
        }
    });

    run_check(rep, "spaces.dual_norm_extreme_points", [&](CheckResult& r) {
        Rng rng(seed + 2);
        for (const auto& s : lq_spaces) {
            if (!s->has_extreme_points()) continue;
            auto pts = s->extreme_points();
            for (int i = 0; i < 300; ++i) {
                Func f(rng.gaussian_vector(s->dim()));
                double m = 0.0;
                for (const auto& v : pts) m = std::max(m, std::abs(pairing(f, v)));
                if (s->dual_norm(f) != m) {
                    r.pass = false;
                    r.detail = "dual norm != vertex max at f = " + detail::show(f);
                    return;
                }
            }
        }
    });

    run_check(rep, "spaces.norm_homogeneity", [&](CheckResult& r) {
        Rng rng(seed + 3);
        for (const auto& s : lq_spaces) {
            for (int i = 0; i < 300; ++i) {
                Vec v(rng.gaussian_vector(s->dim()));
                double lambda = rng.uniform(-4.0, 4.0);
                double a = s->norm(scaled(v, lambda));
                double b = std::abs(lambda) * s->norm(v);
                if (std::abs(a - b) > 1e-12 * std::max(1.0, b)) {
                    r.pass = false;
                    r.detail = "norm(lambda v) deviates by " + std::to_string(a - b);
                    return;
                }
            }
        }
    });

    run_check(rep, "homfn.pointwise_lattice", [&](CheckResult& r) {
        Rng rng(seed + 4);
        auto space = lq_spaces[0];
        for (int i = 0; i < 60; ++i) {
            HomFn f = detail::random_tree(space, rng, 2);
            HomFn g = detail::random_tree(space, rng, 2);
            for (int k = 0; k < 25; ++k) {
                Func x(rng.gaussian_vector(space->dim()));
                double fs = f.eval(x), gs = g.eval(x);
                if (sup(f, g).eval(x) != std::max(fs, gs) ||
                    inf(f, g).eval(x) != std::min(fs, gs) ||
                    fbl::abs(f).eval(x) != std::abs(fs)) {
                    r.pass = false;
                    std::ostringstream os;
                    os << "lattice law broken at x* = " << detail::show(x) << " with f(x*) = "
                       << fs << ", g(x*) = " << gs << ", sup eval = " << sup(f, g).eval(x);
                    r.detail = os.str();
                    return;
                }
            }
        }
    });

    run_check(rep, "homfn.positive_homogeneity", [&](CheckResult& r) {
        Rng rng(seed + 5);
        for (const auto& s : lq_spaces) {
            for (int i = 0; i < 4; ++i) {
                HomFn f = detail::random_tree(s, rng, 3);
                double d = homogeneity_defect(f, 420, seed + 50 + std::uint64_t(i));
                if (d > 1e-9) {
                    r.pass = false;
                    r.detail = "defect " + std::to_string(d);
                    return;
                }
            }
        }
    });

    run_check(rep, "homfn.dim1_completeness", [&](CheckResult& r) {
        Rng rng(seed + 6);
        auto line = make_lq_space(1, NormKind::l2);
        for (int i = 0; i < 100; ++i) {
            double f1 = rng.uniform(-5.0, 5.0), fm1 = rng.uniform(-5.0, 5.0);
            HomFn f = dim1_representation(line, f1, fm1);
            for (int k = 0; k <= 1000; ++k) {
                double y = -10.0 + 20.0 * k / 1000.0;
                double want = y >= 0.0 ? f1 * y : fm1 * (-y);
                if (std::abs(f.eval(Func{y}) - want) > 1e-12) {
                    r.pass = false;
                    r.detail = "mismatch at y = " + std::to_string(y);
                    return;
                }
            }
        }
    });

    run_check(rep, "homfn.mu_dirac_is_abs_delta", [&](CheckResult& r) {
        Rng rng(seed + 7);
        auto s = make_lq_space(3, NormKind::l2);
        for (int i = 0; i < 20; ++i) {
            Vec x(rng.gaussian_vector(3));
            double n = s->norm(x);
            if (n > 1.0) x = scaled(x, 0.9 / n);
            HomFn a = mu_fn(s, DiscreteMeasure{{{1.0, x}}}, 1.0 + rng.index(3));
            HomFn b = fbl::abs(delta(s, x));
            for (int k = 0; k < 50; ++k) {
                Func y(rng.gaussian_vector(3));
                if (std::abs(a.eval(y) - b.eval(y)) > 1e-12 * std::max(1.0, std::abs(b.eval(y)))) {
                    r.pass = false;
                    r.detail = "mu-dirac != |delta| at " + detail::show(y);
                    return;
                }
            }
        }
    });

    run_check(rep, "homfn.vanishes_at_zero", [&](CheckResult& r) {
        Rng rng(seed + 8);
        for (const auto& s : lq_spaces) {
            Func zero{std::vector<double>(s->dim(), 0.0)};
            for (int i = 0; i < 20; ++i) {
                if (detail::random_tree(s, rng, 3).eval(zero) != 0.0) {
                    r.pass = false;
                    r.detail = "f(0) != 0";
                    return;
                }
            }
        }
    });

    run_check(rep, "summing.sign_formula_oracle", [&](CheckResult& r) {
        Rng rng(seed + 9);
        for (auto kind : {NormKind::l1, NormKind::linf}) {
            for (std::size_t dim : {2, 3, 5}) {
                Space s = Space::lq(dim, kind);
                for (int i = 0; i < 34; ++i) {
                    std::vector<Func> t;
                    std::size_t m = 1 + rng.index(4);
                    for (std::size_t j = 0; j < m; ++j) t.push_back(Func(rng.gaussian_vector(dim)));
                    double a = weak_1_norm_signs(s, t).lower;
                    double b = weak_p_norm(s, t, 1.0).lower;
                    if (std::abs(a - b) > 1e-9) {
                        r.pass = false;
                        r.detail = "signs " + std::to_string(a) + " vs vertices " + std::to_string(b);
                        return;
                    }
                }
            }
        }
    });

    run_check(rep, "summing.l2_top_singular_value", [&](CheckResult& r) {
        Rng rng(seed + 10);
        Space s = Space::lq(3, NormKind::l2);
        for (int i = 0; i < 25; ++i) {
            std::vector<Func> t;
            std::size_t m = 1 + rng.index(4);
            for (std::size_t j = 0; j < m; ++j) t.push_back(Func(rng.gaussian_vector(3)));
            // power-iteration oracle
            std::vector<double> v{1.0, 1.0, 1.0};
            double sigma = 0.0;
            for (int it = 0; it < 2000; ++it) {
                std::vector<double> w(3, 0.0);
                for (const auto& f : t) {
                    double c = 0.0;
                    for (int k = 0; k < 3; ++k) c += f.coords[std::size_t(k)] * v[std::size_t(k)];
                    for (int k = 0; k < 3; ++k) w[std::size_t(k)] += c * f.coords[std::size_t(k)];
                }
                double n = euclidean_norm(w);
                if (n < 1e-300) break;
                for (int k = 0; k < 3; ++k) v[std::size_t(k)] = w[std::size_t(k)] / n;
                sigma = std::sqrt(n);
            }
            double a = weak_p_norm(s, t, 2.0).lower;
            if (std::abs(a - sigma) > 1e-9 * std::max(1.0, sigma)) {
                r.pass = false;
                r.detail = "svd " + std::to_string(a) + " vs power iteration " + std::to_string(sigma);
                return;
            }
        }
    });

    run_check(rep, "summing.tuple_norm_axioms", [&](CheckResult& r) {
        Rng rng(seed + 11);
        Space s = Space::lq(3, NormKind::l1);
        for (int i = 0; i < 60; ++i) {
            std::vector<Func> t, u;
            std::size_t m = 1 + rng.index(3);
            for (std::size_t j = 0; j < m; ++j) {
                t.push_back(Func(rng.gaussian_vector(3)));
                u.push_back(Func(rng.gaussian_vector(3)));
            }
            double nt = weak_p_norm(s, t, 2.0).lower;
            double lambda = rng.uniform(-3.0, 3.0);
            auto ts = t;
            for (auto& f : ts) f = scaled(f, lambda);
            if (std::abs(weak_p_norm(s, ts, 2.0).lower - std::abs(lambda) * nt) >
                1e-12 * std::max(1.0, nt)) {
                r.pass = false;
                r.detail = "scaling violated";
                return;
            }
            std::vector<Func> sum_t;
            for (std::size_t j = 0; j < m; ++j) sum_t.push_back(add(t[j], u[j]));
            if (weak_p_norm(s, sum_t, 2.0).lower >
                nt + weak_p_norm(s, u, 2.0).lower + 1e-9) {
                r.pass = false;
                r.detail = "subadditivity violated";
                return;
            }
            auto ext = t;
            ext.push_back(Func(rng.gaussian_vector(3)));
            if (weak_p_norm(s, ext, 2.0).lower < nt - 1e-12) {
                r.pass = false;
                r.detail = "extension monotonicity violated";
                return;
            }
        }
    });

    run_check(rep, "summing.sign_cap_guard", [&](CheckResult& r) {
        Space s = Space::lq(2, NormKind::l2);
        std::vector<Func> big(25, basis_func(2, 0));
        try {
            weak_1_norm_signs(s, big);
            r.pass = false;
            r.detail = "no cap error raised for tuple size 25";
        } catch (const std::domain_error&) {
            // graceful refusal, no hang
        }
    });

    FblBudget vb;
    vb.pool_samples = 32;
    vb.restarts = 8;
    vb.refine_steps = 30;
    vb.tuple_max = 4;

    run_check(rep, "fblnorm.bracket_soundness", [&](CheckResult& r) {
        Rng rng(seed + 12);
        for (int i = 0; i < 30; ++i) {
            const auto& s = lq_spaces[std::size_t(i) % lq_spaces.size()];
            HomFn f = detail::random_tree(s, rng, 3);
            double p = (i % 2) ? 1.0 : 2.0;
            NormEstimate e = fbl_bracket(f, p, vb, seed + 200 + std::uint64_t(i));
            if (e.lower > e.upper * (1.0 + 1e-6)) {
                r.pass = false;
                r.detail = "lower " + std::to_string(e.lower) + " > upper " + std::to_string(e.upper);
                return;
            }
            NormEstimate u = uniform_norm_ball(f, {.samples = 48, .seed = seed + 200 + std::uint64_t(i)});
            if (e.lower < u.lower - 1e-9) {
                r.pass = false;
                r.detail = "norm domination violated: fbl " + std::to_string(e.lower) +
                           " < uniform " + std::to_string(u.lower);
                return;
            }
        }
    });

    run_check(rep, "fblnorm.delta_isometry", [&](CheckResult& r) {
        Rng rng(seed + 13);
        for (const auto& s : lq_spaces) {
            for (int i = 0; i < 4; ++i) {
                Vec x(rng.gaussian_vector(s->dim()));
                double nx = s->norm(x);
                double p = (i % 2) ? 1.0 : 2.0;
                HomFn d = delta(s, x);
                if (fbl_upper(d, p).upper != nx) {
                    r.pass = false;
                    r.detail = "upper != ||x||";
                    return;
                }
                double low = fbl_lower(d, p, vb, seed + 300).lower;
                if (low < 0.99 * nx || low > nx * (1.0 + 1e-9)) {
                    r.pass = false;
                    r.detail = "lower " + std::to_string(low) + " vs ||x|| " + std::to_string(nx);
                    return;
                }
            }
        }
    });

    run_check(rep, "fblnorm.p_monotonicity", [&](CheckResult& r) {
        Rng rng(seed + 14);
        for (auto kind : {NormKind::l1, NormKind::linf}) {
            auto s = make_lq_space(3, kind);
            for (int i = 0; i < 6; ++i) {
                HomFn f = detail::random_tree(s, rng, 3);
                NormEstimate eq = fbl_lower(f, 2.0, vb, seed + 400 + std::uint64_t(i));
                FblBudget bp = vb;
                if (eq.witness_tuple) bp.extra_tuples.push_back(*eq.witness_tuple);
                NormEstimate ep = fbl_lower(f, 1.0, bp, seed + 400 + std::uint64_t(i));
                if (eq.lower > ep.lower + 1e-9) {
                    r.pass = false;
                    r.detail = "q-norm " + std::to_string(eq.lower) + " > p-norm " +
                               std::to_string(ep.lower);
                    return;
                }
            }
        }
    });

    run_check(rep, "fblnorm.lattice_and_scaling", [&](CheckResult& r) {
        Rng rng(seed + 15);
        auto s = make_lq_space(2, NormKind::l1);
        for (int i = 0; i < 10; ++i) {
            HomFn f = detail::random_tree(s, rng, 2);
            double a = fbl_lower(f, 1.0, vb, seed + 500 + std::uint64_t(i)).lower;
            double b = fbl_lower(fbl::abs(f), 1.0, vb, seed + 500 + std::uint64_t(i)).lower;
            if (a != b) {
                r.pass = false;
                r.detail = "|f| changed the lower bound";
                return;
            }
            double c = rng.uniform(-2.0, 2.0);
            double sc = fbl_lower(scale(c, f), 1.0, vb, seed + 500 + std::uint64_t(i)).lower;
            if (std::abs(sc - std::abs(c) * a) > 1e-12 * std::max(1.0, std::abs(c) * a)) {
                r.pass = false;
                r.detail = "scaling not exact";
                return;
            }
        }
    });

    run_check(rep, "witnesses.divergence_partial_sums", [&](CheckResult& r) {
        WitnessReport w = divergence_witness(200, 2.0, seed);
        if (!(w.value("L(10)") < w.value("L(100)") && w.value("L(100)") < w.value("L(200)"))) {
            r.pass = false;
            r.detail = "L(m) not increasing";
            return;
        }
        std::vector<Func> tuple;
        for (std::size_t k = 0; k < 10; ++k) tuple.push_back(basis_func(200, k));
        auto v = certified_tuple_value(*w.f, 2.0, tuple);
        if (!v || *v < w.value("L(10)") / w.value("K") - 1e-9) {
            r.pass = false;
            r.detail = "injected tuple does not reproduce L(m)/K";
        }
    });

    run_check(rep, "witnesses.kernel_residuals", [&](CheckResult& r) {
        Rng rng(seed + 16);
        for (int trial = 0; trial < 20; ++trial) {
            std::size_t n = 3 + rng.index(6);
            std::size_t m = 1 + rng.index(std::min<std::size_t>(n - 1, 4));
            auto space = make_lq_space(n, NormKind::l2);
            std::vector<Func> basis_funcs;
            std::vector<Vec> series_basis;
            for (std::size_t k = 0; k <= m; ++k) {
                series_basis.push_back(basis_vec(n, k));
                basis_funcs.push_back(basis_func(n, k));
            }
            std::vector<Vec> obstacles;
            for (std::size_t j = 0; j < m; ++j) obstacles.push_back(Vec(rng.gaussian_vector(n)));
            Func xstar = kernel_witness(space, obstacles, basis_funcs);
            double res = 0.0;
            for (const auto& o : obstacles) res = std::max(res, std::abs(pairing(xstar, o)));
            double fx = series_witness(space, series_basis).eval(xstar);
            if (res > 1e-9 || fx <= 1e-6) {
                r.pass = false;
                r.detail = "residual " + std::to_string(res) + ", f(x*) " + std::to_string(fx);
                return;
            }
        }
    });

    run_check(rep, "witnesses.gap_floor", [&](CheckResult& r) {
        GapConstruction g = make_gap_construction(18, 1.0, 2.0, 4);
        Rng rng(seed + 17);
        for (int trial = 0; trial < 10; ++trial) {
            Vec v{std::vector<double>(18, 0.0)};
            for (std::size_t i = 0; i + 1 < g.m; ++i) v.coords[i] = rng.gaussian();
            HomFn h = sup(delta(g.space, v), scale(rng.uniform(-1.0, 1.0), delta(g.space, v)));
            WitnessReport w = gap_witness(g, h);
            if (w.value("h_identity_residual") > 1e-9 ||
                w.value("distance_lower_bound") < w.value("uniform_floor") - 1e-12) {
                r.pass = false;
                r.detail = "bound " + std::to_string(w.value("distance_lower_bound")) +
                           " vs floor " + std::to_string(w.value("uniform_floor"));
                return;
            }
        }
    });

    run_check(rep, "phmaps.compose_is_lattice_hom", [&](CheckResult& r) {
        Rng rng(seed + 18);
        auto s = make_lq_space(2, NormKind::l1);
        PHMap mod = modulus_map(s, s);
        for (int i = 0; i < 25; ++i) {
            HomFn f = detail::random_tree(s, rng, 2);
            HomFn g = detail::random_tree(s, rng, 2);
            for (int k = 0; k < 10; ++k) {
                Func y(rng.gaussian_vector(2));
                if (compose_op(mod, sup(f, g)).eval(y) !=
                        std::max(compose_op(mod, f).eval(y), compose_op(mod, g).eval(y)) ||
                    compose_op(mod, inf(f, g)).eval(y) !=
                        std::min(compose_op(mod, f).eval(y), compose_op(mod, g).eval(y))) {
                    r.pass = false;
                    r.detail = "composition does not distribute over the lattice ops";
                    return;
                }
            }
        }
    });

    run_check(rep, "phmaps.adjoint_extraction", [&](CheckResult& r) {
        Rng rng(seed + 19);
        auto s = make_lq_space(2, NormKind::l2);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::MatrixXd m(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) m(i, j) = rng.gaussian();
            std::vector<HomFn> action;
            for (std::size_t i = 0; i < 2; ++i) {
                Vec sei{std::vector<double>(2)};
                for (int row = 0; row < 2; ++row) sei.coords[std::size_t(row)] = m(row, int(i));
                action.push_back(delta(s, sei));
            }
            PHMap tab = extract_phi(s, s, action);
            PHMap adj = adjoint_map(s, s, m.transpose());
            for (int k = 0; k < 40; ++k) {
                Func y(rng.gaussian_vector(2));
                Func a = tab.apply(y);
                Func b = adj.apply(y);
                for (std::size_t c = 0; c < 2; ++c) {
                    if (std::abs(a.coords[c] - b.coords[c]) > 1e-12) {
                        r.pass = false;
                        std::ostringstream os;
                        os << "tabulated and adjoint disagree at y* = " << detail::show(y)
                           << ": " << detail::show(a) << " vs " << detail::show(b);
                        r.detail = os.str();
                        return;
                    }
                }
            }
        }
    });

    run_check(rep, "phmaps.quasilinearity_bound", [&](CheckResult& r) {
        auto l1 = make_lq_space(2, NormKind::l1);
        auto l2 = make_lq_space(2, NormKind::l2);
        Rng rng(seed + 20);
        Eigen::MatrixXd a(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) a(i, j) = rng.gaussian();
        std::vector<PHMap> maps{adjoint_map(l2, l2, a), modulus_map(l1, l1),
                                rank_one_map(l2, norm_fn(l1), Func{1.0, 0.0})};
        for (const auto& phi : maps) {
            double up = phi_p_upper_value(phi, 1.0);
            if (!std::isfinite(up)) continue;
            auto lr = linearity_report(phi, 3400, seed + 21, up);
            if (!lr.ratio_within_bound) {
                r.pass = false;
                r.detail = std::string("ratio ") + std::to_string(lr.quasilinearity_ratio) +
                           " above 2*||Phi||_p = " + std::to_string(2.0 * up);
                return;
            }
        }
    });

    run_check(rep, "phmaps.adjoint_full_homogeneity", [&](CheckResult& r) {
        auto l2 = make_lq_space(3, NormKind::l2);
        Rng rng(seed + 22);
        Eigen::MatrixXd a(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a(i, j) = rng.gaussian();
        auto lr = linearity_report(adjoint_map(l2, l2, a), 800, seed + 23);
        if (lr.homogeneity_defect != 0.0 || lr.additivity_defect > 1e-12) {
            r.pass = false;
            r.detail = "adjoint map shows nonlinearity";
        }
    });

    run_check(rep, "phmaps.comp_norm_identity", [&](CheckResult& r) {
        auto l1 = make_lq_space(2, NormKind::l1);
        auto rep1 = comp_norm_identity_check(identity_map(l1), 1.0, {}, seed + 24);
        if (!rep1.submultiplicative_ok || !rep1.witness_route_ok ||
            std::abs(rep1.phi_lower - 1.0) > 1e-6) {
            r.pass = false;
            r.detail = "identity map: lower " + std::to_string(rep1.phi_lower);
            return;
        }
        auto l2 = make_lq_space(2, NormKind::l2);
        Eigen::MatrixXd d(2, 2);
        d << 2.0, 0.0, 0.0, 1.0;
        auto rep2 = comp_norm_identity_check(adjoint_map(l2, l2, d), 2.0, {}, seed + 25);
        if (!rep2.submultiplicative_ok || !rep2.witness_route_ok ||
            std::abs(rep2.phi_lower - 2.0) > 2e-3) {
            r.pass = false;
            r.detail = "diag(2,1): lower " + std::to_string(rep2.phi_lower);
        }
    });

    run_check(rep, "phmaps.p_monotonicity", [&](CheckResult& r) {
        auto l1 = make_lq_space(2, NormKind::l1);
        Rng rng(seed + 26);
        for (int i = 0; i < 4; ++i) {
            Eigen::MatrixXd a(2, 2);
            for (int row = 0; row < 2; ++row)
                for (int col = 0; col < 2; ++col) a(row, col) = rng.gaussian();
            auto mrep = phi_p_monotonicity_check(adjoint_map(l1, l1, a), 1.0, 2.0, {}, seed + 27);
            if (mrep.conclusive && !mrep.pass) {
                r.pass = false;
                r.detail = "||Phi||_2 " + std::to_string(mrep.lower_q) + " > ||Phi||_1 upper " +
                           std::to_string(mrep.upper_p);
                return;
            }
        }
        auto mrep = phi_p_monotonicity_check(modulus_map(l1, l1), 1.0, 2.0, {}, seed + 28);
        if (mrep.conclusive && !mrep.pass) {
            r.pass = false;
            r.detail = "modulus map violates p-monotonicity";
        }
    });

    return rep;
}

}  // namespace fbl::verify
