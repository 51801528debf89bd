#include <doctest.h>

#include <cmath>
#include <random>

#include "sheetlab/plane.hpp"

using namespace sheetlab;

TEST_CASE("sup_join") {
    CHECK(sup_join({1, 3}, {2, 1}) == Point{2, 3});
    CHECK(sup_join({0, 0}, {0, 0}) == Point{0, 0});
    CHECK(sup_join({0.7, 0.2}, {0, 0}) == Point{0.7, 0.2});
}

TEST_CASE("sup_join is a commutative idempotent semilattice with identity (0,0)") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int k = 0; k < 200; ++k) {
        const Point a{u(gen), u(gen)}, b{u(gen), u(gen)}, c{u(gen), u(gen)};
        CHECK(sup_join(a, b) == sup_join(b, a));
        CHECK(sup_join(sup_join(a, b), c) == sup_join(a, sup_join(b, c)));
        CHECK(sup_join(a, a) == a);
        CHECK(sup_join(a, {0, 0}) == a);
    }
}

TEST_CASE("quarter_indicator") {
    CHECK(quarter_indicator({1, 3}, {2, 1}) == 1);
    CHECK(quarter_indicator({2, 1}, {1, 3}) == 0);
    CHECK(quarter_indicator({1, 1}, {1, 1}) == 1);

    std::mt19937_64 gen(4);
    std::uniform_int_distribution<int> u(0, 3);
    for (int k = 0; k < 500; ++k) {
        const Point a{double(u(gen)), double(u(gen))}, b{double(u(gen)), double(u(gen))};
        CHECK((quarter_indicator(a, b) * quarter_indicator(b, a) == 1) == (a == b));
    }
}

TEST_CASE("make_point rejects negative or non-finite input") {
    CHECK_THROWS_AS(make_point(-1, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_point(0, NAN), std::invalid_argument);
    CHECK(make_point(0.5, 2) == Point{0.5, 2});
}

TEST_CASE("grid nodes") {
    const Grid g({2.0, 1.0}, 4, 8);
    CHECK(g.node_count() == 45);
    CHECK(g.node_index({1.5, 0.25}) == NodeIndex{3, 2});
    CHECK_THROWS_AS(g.node_index({0.3, 0.25}), std::invalid_argument);
    CHECK_THROWS_AS(g.node_index({2.5, 0.25}), std::invalid_argument);
    CHECK_THROWS_AS(Grid({1, 1}, 0, 3), std::invalid_argument);
    CHECK(g.coarsened(2) == Grid({2.0, 1.0}, 2, 4));
    CHECK_THROWS_AS(g.coarsened(3), std::invalid_argument);
}

TEST_CASE("rect_integral") {
    const Grid g({1, 1}, 10, 10);
    CHECK(rect_integral(tabulate(g, [](Point) { return 1.0; }), {1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rect_integral(tabulate(g, [](Point) { return 0.0; }), {1, 1}) == 0.0);
}

TEST_CASE("rect_integral of s*a converges to 1/4 at first order") {
    double prev_err = 0.0;
    for (int n : {8, 16, 32, 64, 128}) {
        const Grid g({1, 1}, n, n);
        const double err = std::abs(rect_integral(tabulate(g, [](Point p) { return p.t * p.x; }), {1, 1}) - 0.25);
        if (prev_err > 0.0) CHECK(prev_err / err == doctest::Approx(2.0).epsilon(0.05));
        prev_err = err;
    }
    CHECK(prev_err < 1.0 / 128.0);
}

TEST_CASE("rect_integral is linear and monotone") {
    const Grid g({1, 2}, 6, 9);
    std::mt19937_64 gen(5);
    std::normal_distribution<double> n01;
    NodeField<double> a(g), b(g), c(g);
    for (int i = 0; i <= 6; ++i)
        for (int j = 0; j <= 9; ++j) {
            a(i, j) = n01(gen);
            b(i, j) = a(i, j) + std::abs(n01(gen));
            c(i, j) = 2.0 * a(i, j) - 3.0 * b(i, j);
        }
    const Point z{1, 2};
    CHECK(rect_integral(c, z) == doctest::Approx(2 * rect_integral(a, z) - 3 * rect_integral(b, z)).epsilon(1e-12));
    CHECK(rect_integral(a, z) <= rect_integral(b, z));
}

TEST_CASE("double_rect_integral") {
    const Grid g({1, 1}, 6, 6);
    CHECK(double_rect_integral([](NodeIndex, NodeIndex) { return 1.0; }, {1, 1}, g) == doctest::Approx(1.0));

    const auto f = tabulate(g, [](Point p) { return p.t + 1.0; });
    const auto h = tabulate(g, [](Point p) { return p.x * p.x; });
    const double sep = double_rect_integral([&](NodeIndex a, NodeIndex b) { return f(a.i, a.j) * h(b.i, b.j); },
                                            {1, 1}, g);
    CHECK(sep == doctest::Approx(rect_integral(f, {1, 1}) * rect_integral(h, {1, 1})).epsilon(1e-13));
}

TEST_CASE("double_rect_integral of the quarter indicator tends to 1/4") {
    double prev = 1.0;
    for (int n : {4, 8, 16}) {
        const Grid g({1, 1}, n, n);
        const double v = double_rect_integral(
            [&](NodeIndex a, NodeIndex b) { return double(quarter_indicator(g.node(a), g.node(b))); }, {1, 1}, g);
        // Exact lower-corner count: pairs with i <= i' and j >= j' over n^4.
        const double exact = std::pow(n * (n + 1) / 2.0, 2) / std::pow(n, 4);
        CHECK(v == doctest::Approx(exact).epsilon(1e-13));
        CHECK(std::abs(v - 0.25) < prev);
        prev = std::abs(v - 0.25);
    }
}

TEST_CASE("mixed_partial") {
    CHECK(mixed_partial([](Point p) { return p.t * p.x; }, {0.3, 0.7}, 0.1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mixed_partial([](Point) { return 3.0; }, {0.3, 0.7}, 0.1) == 0.0);
    CHECK(mixed_partial([](Point p) { return p.t * p.t * p.x; }, {1, 1}, 1e-4) == doctest::Approx(2.0).epsilon(2e-4));
    CHECK_THROWS_AS(mixed_partial([](Point) { return 0.0; }, {1, 1}, 0.0), std::invalid_argument);
}

TEST_CASE("quarter_pair_contract matches the brute-force sum") {
    const Grid g({1, 1}, 5, 7);
    std::mt19937_64 gen(6);
    std::normal_distribution<double> n01;
    const int na = 2, nb = 3;
    std::vector<double> node(g.node_count() * na * nb), gv(5 * 7 * na), hv(5 * 7 * nb);
    for (auto& v : node) v = n01(gen);
    for (auto& v : gv) v = n01(gen);
    for (auto& v : hv) v = n01(gen);
    for (NodeIndex z : {NodeIndex{5, 7}, NodeIndex{3, 4}, NodeIndex{1, 7}, NodeIndex{0, 3}}) {
        const double fast = quarter_pair_contract<double>(g, z, node, gv, na, hv, nb);
        const double slow = quarter_pair_contract_bruteforce<double>(g, z, node, gv, na, hv, nb);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    }
}

TEST_CASE("derivative of the double integral needs all four boundary terms") {
    const auto one = diff_double_integral_identity_check([](Point, Point) { return 1.0; }, {1, 1}, Grid({1, 1}, 4, 4), 1e-3);
    CHECK(one.lhs == doctest::Approx(4.0).epsilon(2e-3));
    CHECK(one.point_terms == doctest::Approx(2.0));
    CHECK(one.rhs == doctest::Approx(4.0));
    CHECK(one.residual < 5e-3);
    CHECK(one.point_only_gap > 1.9);

    const auto zero = diff_double_integral_identity_check([](Point, Point) { return 0.0; }, {1, 1}, Grid({1, 1}, 4, 4), 1e-3);
    CHECK(zero.residual == 0.0);

    // G(z) = (t^2 x / 2)(t x^2 / 2), so the mixed derivative at (1,1) is 9/4.
    const auto poly = diff_double_integral_identity_check([](Point a, Point b) { return a.t * b.x; }, {1, 1},
                                                          Grid({1, 1}, 16, 16), 1e-3);
    CHECK(poly.lhs == doctest::Approx(2.25).epsilon(5e-3));
    CHECK(poly.residual < 1e-2);
}

TEST_CASE("identity residual shrinks with the difference step") {
    const auto kernel = [](Point a, Point b) { return a.t * b.x + a.x * a.x; };
    const Grid g({1, 1}, 12, 12);
    const double coarse = diff_double_integral_identity_check(kernel, {1, 1}, g, 1e-2).residual;
    const double fine = diff_double_integral_identity_check(kernel, {1, 1}, g, 1e-3).residual;
    CHECK(fine < coarse);
}
