#include <catch2/catch_amalgamated.hpp>

#include "fbl/fblnorm.hpp"
#include "fbl/witnesses.hpp"

using namespace fbl;

TEST_CASE("sup of deltas") {
    auto l1 = make_lq_space(2, NormKind::l1);
    Rng rng(1);

    HomFn single = sup_deltas(l1, {basis_vec(2, 0)}, {1.0});
    for (int i = 0; i < 50; ++i) {
        Func x(rng.gaussian_vector(2));
        CHECK(single.eval(x) == std::abs(x.coords[0]));
    }

    // sup over both coordinates reproduces the dual norm on l1^2
    HomFn both = sup_deltas(l1, {basis_vec(2, 0), basis_vec(2, 1)}, {1.0, 1.0});
    auto samples = l1->sample_dual_sphere(1000, 3);
    for (const auto& x : samples) CHECK(both.eval(x) == l1->dual_norm(x));

    HomFn zero = sup_deltas(l1, {basis_vec(2, 0), basis_vec(2, 1)}, {0.0, 0.0});
    for (int i = 0; i < 20; ++i) CHECK(zero.eval(Func(rng.gaussian_vector(2))) == 0.0);

    CHECK_THROWS_AS(sup_deltas(l1, {basis_vec(2, 0)}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("diagonal weak p-norm formula agrees with the generic computation") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 3 + rng.index(4);
        Space l2 = Space::lq(n, NormKind::l2);
        std::vector<double> lam;
        std::vector<Func> tuple;
        for (std::size_t i = 0; i < n; ++i) {
            lam.push_back(rng.uniform(0.1, 2.0));
            tuple.push_back(basis_func(n, i, lam.back()));
        }
        // p = 1: sign-pattern route; p = 2: singular-value route
        CHECK(diagonal_weak_p(lam, 1.0) ==
              Catch::Approx(weak_p_norm(l2, tuple, 1.0).lower).epsilon(1e-12));
        CHECK(diagonal_weak_p(lam, 2.0) ==
              Catch::Approx(weak_p_norm(l2, tuple, 2.0).lower).epsilon(1e-12));
        // 1 < p < 2: the ascent search stays below the closed form
        double closed = diagonal_weak_p(lam, 1.5);
        double searched = weak_p_norm(l2, tuple, 1.5).lower;
        CHECK(searched <= closed * (1.0 + 1e-9));
        CHECK(searched >= closed * 0.99);
    }
}

TEST_CASE("divergence witness, p = 2") {
    WitnessReport rep = divergence_witness(100, 2.0);
    CHECK(rep.value("K") == 1.0);

    // direct-summation oracle for the partial sums
    auto oracle = [](std::size_t m) {
        double s = 0.0;
        for (std::size_t k = 1; k <= m; ++k) s += 1.0 / std::sqrt(double(k));
        return std::sqrt(s);
    };
    CHECK(rep.value("L(10)") == Catch::Approx(oracle(10)).margin(1e-12));
    CHECK(rep.value("L(100)") == Catch::Approx(oracle(100)).margin(1e-12));
    CHECK(rep.value("L(100)") > rep.value("L(10)"));
    // integral bound: sum k^{-1/2} ~ 2 sqrt(m)
    CHECK(rep.value("L(100)") * rep.value("L(100)") > 17.0);
    CHECK(rep.value("L(100)") * rep.value("L(100)") < 20.0);

    REQUIRE(rep.f.has_value());
    CHECK(rep.f->space().dim() == 100);
}

TEST_CASE("divergence witness, p = 1") {
    WitnessReport rep = divergence_witness(10000, 1.0);
    double l2 = 0.0, l4 = 0.0;
    for (std::size_t k = 1; k <= 10000; ++k) {
        double term = 1.0 / (double(k) * std::log(double(k) + 1.0));
        if (k <= 100) l2 += term;
        l4 += term;
    }
    CHECK(rep.value("L(100)") == Catch::Approx(l2).margin(1e-12));
    CHECK(rep.value("L(10000)") == Catch::Approx(l4).margin(1e-12));
    // frozen from the direct-summation oracle: the tail grows like log log
    CHECK(rep.value("L(10000)") / rep.value("L(100)") ==
          Catch::Approx(1.2052535604540420).margin(1e-12));
    // K is the euclidean norm of (1/n) by Cauchy-Schwarz
    double k2 = 0.0;
    for (std::size_t n = 1; n <= 10000; ++n) k2 += 1.0 / (double(n) * double(n));
    CHECK(rep.value("K") == Catch::Approx(std::sqrt(k2)).margin(1e-12));
    // large truncations are certificate-only
    CHECK_FALSE(rep.f.has_value());

    CHECK_THROWS_AS(divergence_witness(100, 1.5), std::invalid_argument);
}

TEST_CASE("divergence witness feeds the norm search") {
    WitnessReport rep = divergence_witness(40, 2.0);
    REQUIRE(rep.f.has_value());
    // inject the construction's tuple (x_1*, ..., x_m*) / K
    std::size_t m = 10;
    std::vector<Func> tuple;
    for (std::size_t k = 0; k < m; ++k) tuple.push_back(basis_func(40, k));
    auto value = certified_tuple_value(*rep.f, 2.0, tuple);
    REQUIRE(value.has_value());
    double floor = rep.value("L(10)") / rep.value("K");
    CHECK(*value >= floor - 1e-9);

    // the full search with the tuple injected meets the same floor
    FblBudget b;
    b.pool_samples = 16;
    b.restarts = 4;
    b.refine_steps = 10;
    b.extra_tuples.push_back(tuple);
    CHECK(fbl_lower(*rep.f, 2.0, b, 5).lower >= floor - 1e-9);
}

TEST_CASE("series witness") {
    auto l2 = make_lq_space(2, NormKind::l2);
    HomFn f1 = series_witness(l2, {basis_vec(2, 0)});
    CHECK(f1.eval(Func{3.0, 1.0}) == 1.5);  // |3| / 2

    HomFn f2 = series_witness(l2, {basis_vec(2, 0), basis_vec(2, 1)});
    CHECK(f2.eval(Func{1.0, 1.0}) == 0.75);

    CHECK_THROWS_AS(series_witness(l2, {basis_vec(2, 0), basis_vec(2, 0)}),
                    std::invalid_argument);

    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        Func x(rng.gaussian_vector(2));
        CHECK(f2.eval(x) == std::abs(x.coords[0]) / 2.0 + std::abs(x.coords[1]) / 4.0);
    }
}

TEST_CASE("kernel witness") {
    auto l2 = make_lq_space(2, NormKind::l2);
    Func x = kernel_witness(l2, {basis_vec(2, 0)}, {basis_func(2, 0), basis_func(2, 1)});
    CHECK(std::abs(x.coords[0]) <= 1e-12);
    CHECK(x.coords[1] == Catch::Approx(1.0).margin(1e-12));
    HomFn f = series_witness(l2, {basis_vec(2, 0), basis_vec(2, 1)});
    CHECK(f.eval(x) == Catch::Approx(0.25).margin(1e-12));

    // no obstacles: the single functional itself (t = (1))
    Func same = kernel_witness(l2, {}, {Func{0.3, 0.4}});
    CHECK(same.coords == std::vector<double>{0.3, 0.4});

    CHECK_THROWS_AS(kernel_witness(l2, {basis_vec(2, 0)}, {basis_func(2, 0)}),
                    std::invalid_argument);
}

TEST_CASE("kernel witness: seeded non-domination certificates") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 3 + rng.index(10);  // dimension <= 12
        std::size_t m = 1 + rng.index(std::min<std::size_t>(n - 1, 5));
        auto space = make_lq_space(n, NormKind::l2);

        // random invertible basis with biorthogonal functionals
        Eigen::MatrixXd b(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) b(Eigen::Index(i), Eigen::Index(j)) = rng.gaussian();
        Eigen::MatrixXd binv_t = b.inverse().transpose();

        std::vector<Vec> series_basis;
        std::vector<Func> basis_funcs;
        for (std::size_t k = 0; k < m + 1; ++k) {
            Vec col{std::vector<double>(n)};
            Func fn{std::vector<double>(n)};
            for (std::size_t i = 0; i < n; ++i) {
                col.coords[i] = b(Eigen::Index(i), Eigen::Index(k));
                fn.coords[i] = binv_t(Eigen::Index(i), Eigen::Index(k));
            }
            double nn = space->norm(col);
            series_basis.push_back(scaled(col, 1.0 / nn));
            basis_funcs.push_back(scaled(fn, nn));  // keep biorthogonality
        }
        std::vector<Vec> obstacles;
        for (std::size_t j = 0; j < m; ++j) obstacles.push_back(Vec(rng.gaussian_vector(n)));

        Func xstar = kernel_witness(space, obstacles, basis_funcs);
        double residual = 0.0;
        for (const auto& o : obstacles) residual = std::max(residual, std::abs(pairing(xstar, o)));
        CHECK(residual <= 1e-9);

        HomFn f = series_witness(space, series_basis);
        CHECK(f.eval(xstar) > 1e-6);
    }
}

TEST_CASE("gap construction values") {
    GapConstruction g = make_gap_construction(16, 1.0, 2.0, 4);
    WitnessReport rep = gap_witness(g, zero_fn(g.space));

    CHECK(rep.value("f(x1*)") == 0.0);
    for (std::size_t j = 1; j <= 4; ++j) {
        double fz = rep.value("f(z" + std::to_string(j) + "*)");
        // realized value (m+j-1)^{-1} meets the proof's floor
        CHECK(fz == Catch::Approx(1.0 / double(4 + j - 1)).margin(1e-12));
        CHECK(fz >= rep.value("floor" + std::to_string(j)) - 1e-12);
    }
    double expected = 0.0;
    for (std::size_t j = 1; j <= 4; ++j) expected += 1.0 / double(4 + j - 1);
    expected /= rep.value("K") + 2.0;
    CHECK(rep.value("distance_lower_bound") == Catch::Approx(expected).margin(1e-12));
    CHECK(rep.value("distance_lower_bound") >= rep.value("uniform_floor"));
    // at p = 1 the paper floor is 2^{-2} / (K+2)
    CHECK(rep.value("uniform_floor") == Catch::Approx(0.25 / (rep.value("K") + 2.0)).margin(1e-15));
}

TEST_CASE("gap K matches the generic weak-norm computation") {
    GapConstruction g = make_gap_construction(12, 1.0, 2.0, 2);
    std::vector<Func> xs;
    for (std::size_t n = 1; n < 12; ++n)
        xs.push_back(basis_func(12, n, std::pow(double(n), -0.5)));
    CHECK(g.k_weak == Catch::Approx(weak_p_norm(g.space ? *g.space : Space::lq(12, NormKind::l2),
                                                xs, 1.0)
                                        .lower)
                          .epsilon(1e-12));
    GapConstruction g2 = make_gap_construction(12, 2.0, 3.0, 2);
    std::vector<Func> xs2;
    for (std::size_t n = 1; n < 12; ++n)
        xs2.push_back(basis_func(12, n, std::pow(double(n), -1.0 / 3.0)));
    CHECK(g2.k_weak == Catch::Approx(weak_p_norm(*g2.space, xs2, 2.0).lower).epsilon(1e-12));
}

TEST_CASE("gap witness with lattice expressions over W_m") {
    GapConstruction g = make_gap_construction(20, 1.0, 2.0, 4);
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        // random lattice expression over delta vectors supported on W_m
        std::vector<HomFn> parts;
        for (int k = 0; k < 3; ++k) {
            Vec v{std::vector<double>(20, 0.0)};
            for (std::size_t i = 0; i + 1 < g.m; ++i) v.coords[i] = rng.gaussian();
            parts.push_back(delta(g.space, v));
        }
        HomFn h = sup(sup(parts[0], scale(rng.uniform(-2.0, 2.0), parts[1])),
                      inf(parts[2], abs(parts[0])));
        WitnessReport rep = gap_witness(g, h);
        CHECK(rep.value("h_identity_residual") <= 1e-9);
        CHECK(rep.value("distance_lower_bound") >= rep.value("uniform_floor") - 1e-12);
    }

    // vectors outside W_m are rejected
    HomFn bad = delta(g.space, basis_vec(20, g.m - 1));
    CHECK_THROWS_AS(gap_witness(g, bad), std::invalid_argument);
    // non-lattice nodes are rejected
    CHECK_THROWS_AS(gap_witness(g, norm_fn(g.space)), std::invalid_argument);
}

TEST_CASE("mu_induced witness") {
    auto l2 = make_lq_space(2, NormKind::l2);
    HomFn dirac = mu_induced(l2, DiscreteMeasure{{{1.0, Vec{0.6, 0.8}}}}, 1.0);
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        Func x(rng.gaussian_vector(2));
        CHECK(dirac.eval(x) == std::abs(0.6 * x.coords[0] + 0.8 * x.coords[1]));
    }
    CHECK_THROWS_AS(mu_induced(l2, DiscreteMeasure{{{-0.5, Vec{0.1, 0.0}}}}, 1.0),
                    std::invalid_argument);
}
