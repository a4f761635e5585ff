#include <catch2/catch_amalgamated.hpp>

#include "fbl/phmap.hpp"

using namespace fbl;

namespace {

Eigen::MatrixXd from_rows(std::vector<std::vector<double>> rows) {
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

HomFn random_tree(const SpacePtr& space, Rng& rng, int depth) {
    if (depth == 0 || rng.uniform01() < 0.35) {
        Vec x(rng.gaussian_vector(space->dim()));
        return delta(space, x);
    }
    switch (rng.index(4)) {
        case 0: return sup(random_tree(space, rng, depth - 1), random_tree(space, rng, depth - 1));
        case 1: return inf(random_tree(space, rng, depth - 1), random_tree(space, rng, depth - 1));
        case 2: return abs(random_tree(space, rng, depth - 1));
        default: return scale(rng.uniform(-2.0, 2.0), random_tree(space, rng, depth - 1));
    }
}

}  // namespace

TEST_CASE("apply") {
    auto l2 = make_lq_space(2, NormKind::l2);
    PHMap id = identity_map(l2);
    Func y{1.0, -2.0};
    CHECK(id.apply(y).coords == std::vector<double>{1.0, -2.0});

    PHMap mod = modulus_map(l2, l2);
    CHECK(mod.apply(y).coords == std::vector<double>{1.0, 2.0});

    PHMap r1 = rank_one_map(l2, norm_fn(l2), Func{1.0, 0.0});
    CHECK(r1.apply(Func{3.0, 4.0}).coords == std::vector<double>{5.0, 0.0});

    CHECK_THROWS_AS(id.apply(Func{1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(adjoint_map(l2, l2, from_rows({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}})),
                    std::invalid_argument);
}

TEST_CASE("apply is positively homogeneous") {
    auto l1 = make_lq_space(3, NormKind::l1);
    auto l2 = make_lq_space(3, NormKind::l2);
    Rng rng(4);
    Eigen::MatrixXd a(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = rng.gaussian();
    std::vector<PHMap> maps{adjoint_map(l2, l1, a), modulus_map(l1, l1),
                            rank_one_map(l2, norm_fn(l1), Func{0.0, 1.0, 0.0}),
                            compose_maps(modulus_map(l1, l1), modulus_map(l1, l1))};
    for (const auto& phi : maps) {
        for (int i = 0; i < 200; ++i) {
            Func y(rng.gaussian_vector(3));
            double lambda = rng.uniform(0.0, 5.0);
            Func a1 = phi.apply(scaled(y, lambda));
            Func a2 = scaled(phi.apply(y), lambda);
            for (std::size_t k = 0; k < 3; ++k)
                CHECK(a1.coords[k] == Catch::Approx(a2.coords[k]).margin(1e-9));
        }
    }
}

TEST_CASE("composition operator agrees with the underlying operator") {
    auto l2 = make_lq_space(2, NormKind::l2);
    // S has matrix A^T where A is the stored S* matrix
    Eigen::MatrixXd astar = from_rows({{1.0, 2.0}, {-1.0, 0.5}});
    PHMap phi = adjoint_map(l2, l2, astar);
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        Vec x(rng.gaussian_vector(2));
        const auto& adj = static_cast<const AdjointNode&>(*phi.node());
        HomFn lhs = compose_op(phi, delta(l2, x));
        HomFn rhs = delta(l2, adj.forward(x));
        Func y(rng.gaussian_vector(2));
        CHECK(lhs.eval(y) == Catch::Approx(rhs.eval(y)).margin(1e-12));
    }

    // modulus: delta_{e_n} composes to |delta_{e_n}|
    PHMap mod = modulus_map(l2, l2);
    for (std::size_t n = 0; n < 2; ++n) {
        HomFn lhs = compose_op(mod, delta(l2, basis_vec(2, n)));
        HomFn rhs = abs(delta(l2, basis_vec(2, n)));
        for (int i = 0; i < 100; ++i) {
            Func y(rng.gaussian_vector(2));
            CHECK(lhs.eval(y) == rhs.eval(y));
        }
    }

    // identity: f o Phi = f
    PHMap id = identity_map(l2);
    HomFn f = random_tree(l2, rng, 3);
    for (int i = 0; i < 100; ++i) {
        Func y(rng.gaussian_vector(2));
        CHECK(compose_op(id, f).eval(y) == f.eval(y));
    }
}

TEST_CASE("composition is a lattice homomorphism pointwise") {
    auto l1 = make_lq_space(2, NormKind::l1);
    PHMap mod = modulus_map(l1, l1);
    Rng rng(12);
    for (int i = 0; i < 50; ++i) {
        HomFn f = random_tree(l1, rng, 2);
        HomFn g = random_tree(l1, rng, 2);
        for (int k = 0; k < 20; ++k) {
            Func y(rng.gaussian_vector(2));
            CHECK(compose_op(mod, sup(f, g)).eval(y) ==
                  std::max(compose_op(mod, f).eval(y), compose_op(mod, g).eval(y)));
            CHECK(compose_op(mod, inf(f, g)).eval(y) ==
                  std::min(compose_op(mod, f).eval(y), compose_op(mod, g).eval(y)));
            CHECK(compose_op(mod, abs(f)).eval(y) == std::abs(compose_op(mod, f).eval(y)));
        }
    }
}

TEST_CASE("inverse adjoints compose to the identity") {
    auto l2 = make_lq_space(2, NormKind::l2);
    Eigen::MatrixXd a = from_rows({{2.0, 1.0}, {0.5, 1.0}});
    PHMap phi = adjoint_map(l2, l2, a);
    PHMap phi_inv = adjoint_map(l2, l2, a.inverse());
    Rng rng(3);
    HomFn f = random_tree(l2, rng, 2);
    HomFn round_trip = compose_op(phi, compose_op(phi_inv, f));
    for (int i = 0; i < 200; ++i) {
        Func y(rng.gaussian_vector(2));
        CHECK(round_trip.eval(y) == Catch::Approx(f.eval(y)).margin(1e-9));
    }
}

TEST_CASE("phi_p_norm: identity and diagonal adjoints") {
    auto l1 = make_lq_space(2, NormKind::l1);
    for (double p : {1.0, 2.0}) {
        NormEstimate e = phi_p_norm(identity_map(l1), p);
        CHECK(e.upper == 1.0);
        CHECK(e.lower == Catch::Approx(1.0).margin(1e-9));
    }

    auto l2 = make_lq_space(2, NormKind::l2);
    Eigen::MatrixXd d = from_rows({{2.0, 0.0}, {0.0, 1.0}});
    NormEstimate e2 = phi_p_norm(adjoint_map(l2, l2, d), 2.0);
    CHECK(e2.upper == Catch::Approx(2.0).margin(1e-12));
    CHECK(e2.lower == Catch::Approx(2.0).margin(1e-3));
}

TEST_CASE("phi_p_norm: modulus on l1 spaces is 1") {
    auto l1 = make_lq_space(3, NormKind::l1);
    PHMap mod = modulus_map(l1, l1);
    NormEstimate e = phi_p_norm(mod, 1.0);
    CHECK(e.upper == 1.0);
    CHECK(e.lower == Catch::Approx(1.0).margin(1e-9));

    // brute force: the modulus never increases the weak 1-norm of a tuple
    Rng rng(21);
    for (int i = 0; i < 100; ++i) {
        std::vector<Func> t;
        std::size_t m = 1 + rng.index(3);
        for (std::size_t j = 0; j < m; ++j) t.push_back(Func(rng.gaussian_vector(3)));
        std::vector<Func> images;
        for (const auto& y : t) images.push_back(mod.apply(y));
        double w = weak_p_norm(*l1, t, 1.0).lower;
        double wi = weak_p_norm(*l1, images, 1.0).lower;
        CHECK(wi <= w * (1.0 + 1e-9));
    }
}

TEST_CASE("phi_p_norm: rank-one map brackets ||f|| * ||x0*||") {
    auto l1 = make_lq_space(2, NormKind::l1);  // F
    auto l2 = make_lq_space(2, NormKind::l2);  // E
    PHMap r1 = rank_one_map(l2, norm_fn(l1), Func{1.0, 0.0});
    for (double p : {1.0, 2.0}) {
        double true_norm_f = p == 1.0 ? 2.0 : weak_p_norm(*l1, {basis_func(2, 0), basis_func(2, 1)}, p).lower;
        NormEstimate e = phi_p_norm(r1, p);
        CHECK(e.upper >= true_norm_f - 1e-9);  // = fbl_upper(nu) * 1
        CHECK(e.lower <= e.upper * (1.0 + 1e-9));
        if (p == 1.0) {
            CHECK(e.upper == Catch::Approx(2.0).margin(1e-12));
            CHECK(e.lower == Catch::Approx(2.0).margin(1e-6));
        }
    }
}

TEST_CASE("phi_p_norm on tabulated maps") {
    auto l1 = make_lq_space(2, NormKind::l1);
    // tabulated realization of the modulus map
    std::vector<HomFn> action{abs(delta(l1, basis_vec(2, 0))), abs(delta(l1, basis_vec(2, 1)))};
    PHMap tab = extract_phi(l1, l1, action);
    NormEstimate e = phi_p_norm(tab, 1.0);
    CHECK(e.upper == kInf);  // no structural pattern for tabulated maps
    CHECK(e.lower == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(e.witness_tuple.has_value());
}

TEST_CASE("extract_phi recovers adjoints exactly") {
    auto l2 = make_lq_space(2, NormKind::l2);
    Eigen::MatrixXd s = from_rows({{0.0, 1.0}, {1.0, 0.0}});  // swap
    // action e_i -> delta_{S e_i}
    std::vector<HomFn> action;
    for (std::size_t i = 0; i < 2; ++i) {
        Vec sei{std::vector<double>(2)};
        for (int r = 0; r < 2; ++r) sei.coords[std::size_t(r)] = s(r, int(i));
        action.push_back(delta(l2, sei));
    }
    PHMap tab = extract_phi(l2, l2, action);
    PHMap adj = adjoint_map(l2, l2, s.transpose());
    Rng rng(8);
    for (int i = 0; i < 300; ++i) {
        Func y(rng.gaussian_vector(2));
        Func a = tab.apply(y);
        Func b = adj.apply(y);
        CHECK(a.coords[0] == Catch::Approx(b.coords[0]).margin(1e-12));
        CHECK(a.coords[1] == Catch::Approx(b.coords[1]).margin(1e-12));
    }

    // random matrices
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd m(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m(i, j) = rng.gaussian();
        std::vector<HomFn> act;
        for (std::size_t i = 0; i < 2; ++i) {
            Vec sei{std::vector<double>(2)};
            for (int r = 0; r < 2; ++r) sei.coords[std::size_t(r)] = m(r, int(i));
            act.push_back(delta(l2, sei));
        }
        PHMap t = extract_phi(l2, l2, act);
        PHMap a = adjoint_map(l2, l2, m.transpose());
        for (int k = 0; k < 50; ++k) {
            Func y(rng.gaussian_vector(2));
            Func u = t.apply(y);
            Func v = a.apply(y);
            for (std::size_t c = 0; c < 2; ++c)
                CHECK(u.coords[c] == Catch::Approx(v.coords[c]).margin(1e-12));
        }
    }
}

TEST_CASE("extract_phi recovers the modulus map") {
    auto l1 = make_lq_space(3, NormKind::l1);
    std::vector<HomFn> action;
    for (std::size_t i = 0; i < 3; ++i) action.push_back(abs(delta(l1, basis_vec(3, i))));
    PHMap tab = extract_phi(l1, l1, action);
    PHMap mod = modulus_map(l1, l1);
    Rng rng(14);
    for (int i = 0; i < 1000; ++i) {
        Func y(rng.gaussian_vector(3));
        CHECK(tab.apply(y).coords == mod.apply(y).coords);
    }

    // zero action gives the zero map
    std::vector<HomFn> zact(3, zero_fn(l1));
    PHMap z = extract_phi(l1, l1, zact);
    CHECK(z.apply(Func{1.0, 2.0, 3.0}).coords == std::vector<double>{0.0, 0.0, 0.0});

    CHECK_THROWS_AS(extract_phi(l1, l1, std::vector<HomFn>{norm_fn(l1)}), std::invalid_argument);
}

TEST_CASE("linearity diagnostics") {
    auto l1 = make_lq_space(2, NormKind::l1);
    auto l2 = make_lq_space(2, NormKind::l2);

    Eigen::MatrixXd a = from_rows({{1.0, 2.0}, {3.0, -1.0}});
    auto rep = linearity_report(adjoint_map(l2, l2, a), 500, 0);
    CHECK(rep.additivity_defect <= 1e-12);
    CHECK(rep.homogeneity_defect == 0.0);
    CHECK(rep.quasilinearity_ratio <= 1e-12);

    PHMap mod = modulus_map(l1, l1);
    auto repm = linearity_report(mod, 500, 1, phi_p_upper_value(mod, 1.0));
    CHECK(repm.homogeneity_defect == Catch::Approx(2.0).margin(1e-9));
    CHECK(repm.ratio_within_bound);  // quasi-linearity constant 2 ||Phi||_p

    PHMap r1 = rank_one_map(l2, delta(l2, Vec{0.5, 0.5}), Func{1.0, 0.0});
    auto repr = linearity_report(r1, 500, 2);
    CHECK(repr.additivity_defect <= 1e-12);
}

TEST_CASE("composition norm identity") {
    auto l1 = make_lq_space(2, NormKind::l1);
    auto rep = comp_norm_identity_check(identity_map(l1), 1.0);
    CHECK(rep.submultiplicative_ok);
    CHECK(rep.witness_route_ok);
    CHECK(rep.phi_lower == Catch::Approx(1.0).margin(1e-6));
    CHECK(rep.phi_upper == 1.0);

    auto l13 = make_lq_space(3, NormKind::l1);
    auto repm = comp_norm_identity_check(modulus_map(l13, l13), 1.0);
    CHECK(repm.submultiplicative_ok);
    CHECK(repm.witness_route_ok);
    CHECK(repm.phi_lower == Catch::Approx(1.0).epsilon(1e-3));

    auto l2 = make_lq_space(2, NormKind::l2);
    Eigen::MatrixXd d = from_rows({{2.0, 0.0}, {0.0, 1.0}});
    auto repd = comp_norm_identity_check(adjoint_map(l2, l2, d), 2.0);
    CHECK(repd.submultiplicative_ok);
    CHECK(repd.witness_route_ok);
    CHECK(repd.phi_lower == Catch::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("p-monotonicity of the map norm") {
    auto l1 = make_lq_space(2, NormKind::l1);
    auto l2 = make_lq_space(2, NormKind::l2);
    Rng rng(77);

    for (int i = 0; i < 10; ++i) {
        Eigen::MatrixXd a(2, 2);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) a(r, c) = rng.gaussian();
        auto rep = phi_p_monotonicity_check(adjoint_map(l1, l1, a), 1.0, 2.0);
        CHECK(rep.conclusive);
        CHECK(rep.pass);
        // operator-norm independence of p for adjoints
        CHECK(rep.lower_q == Catch::Approx(rep.upper_p).epsilon(1e-6));
    }

    auto repm = phi_p_monotonicity_check(modulus_map(l1, l1), 1.0, 2.0);
    CHECK(repm.conclusive);
    CHECK(repm.pass);

    PHMap r1 = rank_one_map(l2, norm_fn(l1), Func{0.0, 1.0});
    auto repr = phi_p_monotonicity_check(r1, 1.0, 2.0);
    CHECK(repr.conclusive);
    CHECK(repr.pass);
}

TEST_CASE("operator norm into l_p^n equals the weak p-norm of the rows") {
    // S: E -> l_p^m with Sx = (<x_j*, x>)_j; the operator-norm oracle and the
    // weak p-summing norm of (x_j*) are two routes to the same number
    Rng rng(53);
    for (auto ekind : {NormKind::l1, NormKind::linf}) {
        auto e = make_lq_space(3, ekind);
        for (double p : {1.0, 2.0}) {
            auto f = make_lq_space(2, p == 1.0 ? NormKind::l1 : NormKind::l2);
            for (int i = 0; i < 25; ++i) {
                std::vector<Func> rows{Func(rng.gaussian_vector(3)), Func(rng.gaussian_vector(3))};
                // stored adjoint matrix is dim E x dim F, columns = the rows of S
                Eigen::MatrixXd a(3, 2);
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 2; ++c) a(r, c) = rows[std::size_t(c)].coords[std::size_t(r)];
                double op_norm = phi_p_upper_value(adjoint_map(e, f, a), p);
                double weak = weak_p_norm(*e, rows, p).lower;
                CHECK(op_norm == Catch::Approx(weak).epsilon(1e-12).margin(1e-12));
            }
        }
    }
}

TEST_CASE("isometric bijections with a strictly convex target stay homogeneous") {
    // rotations of l2: positively homogeneous bijections with unit map norm
    // in both directions; full homogeneity is forced and indeed exact here
    auto l2 = make_lq_space(2, NormKind::l2);
    Rng rng(31);
    for (int i = 0; i < 10; ++i) {
        double a = rng.uniform(0.0, 6.283185307179586);
        Eigen::MatrixXd q(2, 2);
        q << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        PHMap phi = adjoint_map(l2, l2, q);
        PHMap phi_inv = adjoint_map(l2, l2, q.transpose());
        for (double p : {1.0, 2.0}) {
            CHECK(phi_p_upper_value(phi, p) == Catch::Approx(1.0).margin(1e-12));
            CHECK(phi_p_upper_value(phi_inv, p) == Catch::Approx(1.0).margin(1e-12));
        }
        auto rep = linearity_report(phi, 200, 31 + std::uint64_t(i));
        CHECK(rep.homogeneity_defect == 0.0);
    }
}

TEST_CASE("injectivity probe") {
    auto l2 = make_lq_space(2, NormKind::l2);
    Eigen::MatrixXd a = from_rows({{2.0, 1.0}, {0.0, 1.0}});
    auto inv = injectivity_probe(adjoint_map(l2, l2, a), 40, 0);
    CHECK(inv.min_ratio > 0.0);
    CHECK(inv.collisions.empty());

    auto mod = injectivity_probe(modulus_map(l2, l2), 40, 0);
    CHECK_FALSE(mod.collisions.empty());
    // the antipodal basis pair collides
    bool found = false;
    for (const auto& [u, v] : mod.collisions) {
        Func diff = add(u, v);
        if (l2->dual_norm(diff) <= 1e-12 &&
            std::abs(std::abs(u.coords[0]) - 1.0) <= 1e-12 && std::abs(u.coords[1]) <= 1e-12)
            found = true;
    }
    CHECK(found);

    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 2);
    auto zero = injectivity_probe(adjoint_map(l2, l2, z), 10, 0);
    CHECK(zero.min_ratio == 0.0);
    CHECK(zero.collisions.size() > 10);
}
