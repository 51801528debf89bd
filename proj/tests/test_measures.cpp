#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "sheetlab/measures.hpp"

using namespace sheetlab;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

EmpiricalMeasure random_cloud(std::mt19937_64& gen, int size, double shift) {
    std::normal_distribution<double> n01;
    std::vector<double> s;
    for (int k = 0; k < size; ++k) s.push_back(shift + n01(gen));
    return EmpiricalMeasure::uniform(1, s);
}

}  // namespace

TEST_CASE("empirical measure validation") {
    CHECK_THROWS_AS(EmpiricalMeasure(1, {0.0, 1.0}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(EmpiricalMeasure(2, {0.0, 1.0, 2.0}, {1.0}), std::invalid_argument);
    const EmpiricalMeasure mu(2, {0, 1, 2, 3}, {0.25, 0.75});
    CHECK(mu.size() == 2);
    CHECK(mu.mean(0) == doctest::Approx(1.5));
    CHECK(mu.mean(1) == doctest::Approx(2.5));
}

TEST_CASE("fourier transform") {
    const std::vector<double> zero{0.0}, c{0.8};
    for (double w : {-2.0, 0.0, 3.0}) {
        const std::vector<double> wv{w};
        CHECK(std::abs(fourier(EmpiricalMeasure::dirac(zero), wv) - 1.0) < 1e-15);
        const auto v = fourier(EmpiricalMeasure::dirac(c), wv);
        CHECK(std::abs(v - std::exp(std::complex<double>(0, -w * 0.8))) < 1e-15);
        CHECK(std::abs(v) == doctest::Approx(1.0));
        CHECK(std::abs(fourier(EmpiricalMeasure::uniform(1, {-1.0, 1.0}), wv) - std::cos(w)) < 1e-15);
    }
}

TEST_CASE("quadrature integrates 1 to pi^(n/2)") {
    for (int n : {1, 2, 3}) {
        const MQuadrature q(n, n == 3 ? 20 : 40);
        CHECK(std::abs(q.integrate([](std::span<const double>) { return 1.0; }) - std::pow(std::numbers::pi, n / 2.0)) < 1e-10);
    }
}

TEST_CASE("m_norm_sq") {
    const MQuadrature q(1);
    const std::vector<double> zero{0.0}, c{3.7};
    CHECK(std::abs(m_norm_sq(EmpiricalMeasure::dirac(zero), q) - kSqrtPi) < 1e-8);
    CHECK(m_norm_sq(EmpiricalMeasure::dirac(c), q) == doctest::Approx(m_norm_sq(EmpiricalMeasure::dirac(zero), q)).epsilon(1e-12));
    const EmpiricalMeasure a = EmpiricalMeasure::uniform(1, {0.1, -2, 0.5, 1.3});
    const EmpiricalMeasure b = EmpiricalMeasure::uniform(1, {1.3, 0.5, 0.1, -2});
    CHECK(m_norm_sq(a, q) == doctest::Approx(m_norm_sq(b, q)).epsilon(1e-14));
}

TEST_CASE("m_dist_sq of point masses matches the Gaussian integral") {
    const MQuadrature q(1);
    const std::vector<double> zero{0.0};
    for (double c : {0.1, 1.0, 3.0, 10.0}) {
        const std::vector<double> cv{c};
        const double exact = 2.0 * kSqrtPi * (1.0 - std::exp(-c * c / 4.0));
        CHECK(std::abs(m_dist_sq(EmpiricalMeasure::dirac(zero), EmpiricalMeasure::dirac(cv), q) - exact) < 1e-6);
    }
}

TEST_CASE("m_dist_sq is a pseudometric") {
    const MQuadrature q(1);
    std::mt19937_64 gen(31);
    for (int k = 0; k < 30; ++k) {
        const auto a = random_cloud(gen, 20, 0.0), b = random_cloud(gen, 15, 0.5), c = random_cloud(gen, 25, -0.3);
        CHECK(m_dist_sq(a, a, q) < 1e-12);
        CHECK(m_dist_sq(a, b, q) >= 0.0);
        CHECK(m_dist_sq(a, b, q) == doctest::Approx(m_dist_sq(b, a, q)).epsilon(1e-13));
        CHECK(std::sqrt(m_dist_sq(a, c, q)) <= std::sqrt(m_dist_sq(a, b, q)) + std::sqrt(m_dist_sq(b, c, q)) + 1e-10);
    }
}

TEST_CASE("m_inner") {
    const MQuadrature q(1);
    std::mt19937_64 gen(32);
    const auto mu = random_cloud(gen, 30, 0.0), eta = random_cloud(gen, 10, 1.0);
    CHECK(std::abs(m_inner(mu, mu, q) - m_norm_sq(mu, q)) < 1e-12);
    CHECK(m_inner(mu, eta, q) == doctest::Approx(m_inner(eta, mu, q)).epsilon(1e-13));
    CHECK(std::abs(m_dist_sq(mu, eta, q) - (m_norm_sq(mu, q) + m_norm_sq(eta, q) - 2.0 * m_inner(mu, eta, q))) < 1e-10);
}

TEST_CASE("wasserstein2_sq_1d") {
    const EmpiricalMeasure a = EmpiricalMeasure::uniform(1, {3.0, 0.5, -1.0});
    CHECK(wasserstein2_sq_1d(a, a) == 0.0);
    const std::vector<double> zero{0.0}, c{2.5};
    CHECK(wasserstein2_sq_1d(EmpiricalMeasure::dirac(zero), EmpiricalMeasure::dirac(c)) == doctest::Approx(6.25));
    CHECK(wasserstein2_sq_1d(EmpiricalMeasure::uniform(1, {0, 1}), EmpiricalMeasure::uniform(1, {2, 1})) == doctest::Approx(1.0));
    CHECK_THROWS(wasserstein2_sq_1d(a, EmpiricalMeasure::uniform(1, {0, 1})));
}

TEST_CASE("M-distance is bounded by pi times W2 squared") {
    const MQuadrature q(1);
    std::mt19937_64 gen(33);
    for (int k = 0; k < 50; ++k) {
        const auto a = random_cloud(gen, 40, 0.0), b = random_cloud(gen, 40, 0.7 * (k % 5) - 1.0);
        CHECK(m_dist_sq(a, b, q) <= std::numbers::pi * wasserstein2_sq_1d(a, b) * 1.02);
    }
}

TEST_CASE("est_inequality_check") {
    const MQuadrature q(1);
    const CoupledSample same{1, {0.1, 0.4, -2.0}, {0.1, 0.4, -2.0}};
    const EstReport r = est_inequality_check(std::span(&same, 1), q);
    CHECK(r.lhs < 1e-14);
    CHECK(r.rhs == 0.0);
    CHECK(r.holds);

    for (double c : {0.1, 1.0, 10.0}) {
        const CoupledSample d{1, {0.0}, {c}};
        const EstReport e = est_inequality_check(std::span(&d, 1), q);
        CHECK(std::abs(e.lhs - 2.0 * kSqrtPi * (1.0 - std::exp(-c * c / 4.0))) < 1e-6);
        CHECK(e.rhs == doctest::Approx(std::numbers::pi * c * c));
        CHECK(e.holds);
    }
}

TEST_CASE("CSV round trip keeps samples and weights") {
    const EmpiricalMeasure mu(2, {0.125, -1, 3, 4.5, 2, 2}, {0.2, 0.3, 0.5});
    std::stringstream buf;
    write_measure_csv(mu, buf);
    const EmpiricalMeasure back = read_measure_csv(buf);
    CHECK(back.dim() == 2);
    CHECK(std::equal(back.samples().begin(), back.samples().end(), mu.samples().begin()));
    CHECK(std::equal(back.weights().begin(), back.weights().end(), mu.weights().begin()));
}
