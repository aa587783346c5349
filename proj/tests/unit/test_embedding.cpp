#include <cmath>
#include <random>

#include "doctest.h"
#include "isingclt/embedding.hpp"
#include "isingclt/errors.hpp"
#include "support.hpp"

using namespace isingclt;
using isingclt::testing::pair_model;
using isingclt::testing::product_model;
using isingclt::testing::random_model;

namespace {

/// Conditional pmf of Y_1 given Y_t = y from Bayes' rule on the joint law.
std::vector<double> bayes_pmf(const IsingModel& m, double t, const Vector& y) {
    const std::vector<double> prior = brute_force_pmf(m);
    std::vector<double> post(prior.size());
    double total = 0.0;
    for (std::uint64_t code = 0; code < prior.size(); ++code) {
        const SpinConfig x = SpinConfig::from_code(code, m.size());
        double sq = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double r = y(static_cast<Eigen::Index>(i)) - t * x[i];
            sq += r * r;
        }
        post[code] = prior[code] * std::exp(-sq / (2 * t * (1 - t)));
        total += post[code];
    }
    for (double& p : post) p /= total;
    return post;
}

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("Gauss-Legendre is exact on polynomials") {
    for (std::size_t count : {1u, 2u, 5u, 16u}) {
        std::vector<double> x, w;
        gauss_legendre(count, 0.0, 0.95, x, w);
        REQUIRE(x.size() == count);
        for (std::size_t k = 0; k <= 2 * count - 1; ++k) {
            double q = 0.0;
            for (std::size_t j = 0; j < count; ++j) q += w[j] * std::pow(x[j], static_cast<double>(k));
            const double exact = std::pow(0.95, static_cast<double>(k + 1)) / static_cast<double>(k + 1);
            CHECK(q == doctest::Approx(exact).epsilon(1e-13));
        }
    }
}

TEST_CASE("interpolant moments") {
    const IsingModel m = product_model(3, 0.0);
    const ExactSampler sampler(m);
    CounterRng rng = CounterRng::stream(4, 0);
    const std::size_t reps = 40000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const InterpolantDraw d = sample_interpolant(sampler, 0.5, rng);
        const double v = d.y(0);
        s1 += v;
        s2 += v * v;
        s4 += v * v * v * v;
    }
    const double mean = s1 / reps;
    const double var = s2 / reps - mean * mean;
    const double var_se = std::sqrt((s4 / reps - (s2 / reps) * (s2 / reps)) / reps);
    CHECK(std::abs(mean) <= 4 * std::sqrt(0.5 / reps));
    CHECK(std::abs(var - 0.5) <= 4 * var_se);

    auto spread = [&](double t) {
        double a = 0.0, b = 0.0;
        for (std::size_t r = 0; r < 2000; ++r) {
            const double v = sample_interpolant(sampler, t, rng).y(1);
            a += v;
            b += v * v;
        }
        return b / 2000 - (a / 2000) * (a / 2000);
    };
    const double v1 = spread(0.1);
    const double v01 = spread(0.01);
    CHECK(v01 < v1);
    CHECK(v01 < 0.02);

    const InterpolantDraw a = sample_interpolant(m, 0.3, 17);
    const InterpolantDraw b = sample_interpolant(m, 0.3, 17);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK_THROWS_AS(sample_interpolant(m, 0.0, 1), ValidationError);
    CHECK_THROWS_AS(sample_interpolant(m, 1.0, 1), ValidationError);
}

TEST_CASE("tilted model") {
    std::mt19937_64 gen(12);
    const IsingModel m = random_model(4, gen);
    CHECK(tilted_model(m, 0.3, Vector::Zero(4)).field() == m.field());
    Vector w(4);
    w << 0.1, -0.2, 0.3, 0.0;
    const IsingModel half = tilted_model(m, 0.5, w);
    CHECK((half.field() - (m.field() + 2 * w)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(half.interaction() == m.interaction());
    CHECK_THROWS_AS(tilted_model(m, 1.0, w), ValidationError);

    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> ut(0.05, 0.95);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 2 + rep % 5;
        const IsingModel mm = random_model(n, gen);
        const double t = ut(gen);
        Vector y(static_cast<Eigen::Index>(n));
        for (auto& v : y) v = z(gen);
        const std::vector<double> tilted = brute_force_pmf(tilted_model(mm, t, y));
        const std::vector<double> bayes = bayes_pmf(mm, t, y);
        for (std::size_t c = 0; c < tilted.size(); ++c) CHECK(std::abs(tilted[c] - bayes[c]) < 1e-10);
    }
}

TEST_CASE("gamma direction") {
    const IsingModel free = product_model(3, 0.0);
    CHECK(gamma_direction(free, 0.5, Vector::Zero(3), DirectionVector::basis(3, 0)) ==
          doctest::Approx(4.0).epsilon(1e-13));

    Vector y = Vector::Zero(3);
    y(0) = 40 * (1 - 0.5);
    CHECK(gamma_direction(free, 0.5, y, DirectionVector::basis(3, 0)) < 1e-30);

    std::mt19937_64 gen(8);
    const IsingModel m = random_model(2, gen);
    Vector y2(2);
    y2 << 0.3, -0.7;
    const double t = 0.35;
    const DirectionVector th = DirectionVector::uniform(2);
    const std::vector<double> post = bayes_pmf(m, t, y2);
    double e[2] = {0, 0}, e2[2][2] = {{0, 0}, {0, 0}};
    for (std::uint64_t c = 0; c < 4; ++c) {
        const SpinConfig x = SpinConfig::from_code(c, 2);
        for (int i = 0; i < 2; ++i) {
            e[i] += post[c] * x[i];
            for (int k = 0; k < 2; ++k) e2[i][k] += post[c] * x[i] * x[k];
        }
    }
    double norm2 = 0.0;
    for (int k = 0; k < 2; ++k) {
        double comp = 0.0;
        for (int i = 0; i < 2; ++i) comp += th[i] * (e2[i][k] - e[i] * e[k]);
        norm2 += comp * comp;
    }
    const double oracle = norm2 / ((1 - t) * (1 - t));
    CHECK(std::abs(gamma_direction(m, t, y2, th) - oracle) < 1e-10);
    CHECK(gamma_direction(m, t, y2, -th) == doctest::Approx(gamma_direction(m, t, y2, th)).epsilon(1e-14));
    const EmbeddingPoint pt = embedding_point(m, t, y2, th);
    CHECK(pt.gamma_dir_sq == doctest::Approx(oracle).epsilon(1e-10));
    CHECK((pt.tilted_field - (m.field() + y2 / (1 - t))).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("covariance derivative identity") {
    const IsingModel free = product_model(3, 0.0);
    const DerivativeCheck zero = derivative_identity_check(free, 0.4, Vector::Zero(3), 1, 1, 1);
    CHECK(std::abs(zero.formula) < 1e-14);
    CHECK(std::abs(zero.fd) < 1e-9);

    const double t = 0.3;
    Vector y = Vector::Constant(3, 0.2);
    const double m = std::tanh(0.2 / (1 - t));
    const DerivativeCheck single = derivative_identity_check(free, t, y, 2, 2, 2);
    CHECK(single.formula == doctest::Approx(-2 * m * (1 - m * m) / (1 - t)).epsilon(1e-12));
    CHECK(single.rel_err < 1e-6);

    std::mt19937_64 gen(41);
    const IsingModel r = random_model(6, gen);
    std::normal_distribution<double> z;
    Vector y6(6);
    for (auto& v : y6) v = z(gen);
    for (std::size_t i = 0; i < 6; i += 2)
        for (std::size_t l = 0; l < 6; l += 3)
            for (std::size_t k = 0; k < 6; ++k) {
                const DerivativeCheck d = derivative_identity_check(r, 0.4, y6, i, l, k);
                CHECK(d.rel_err <= 1e-4);
                CHECK(std::abs(d.expansion - d.formula) <= 1e-12);
            }
}

TEST_CASE("variance identity on a free spin") {
    const IsingModel free = product_model(3, 0.0);
    const DirectionVector th = DirectionVector::basis(3, 0);
    const VarianceIdentityEstimate v = variance_identity_estimate(free, th, 12, 400, 0.95, 3);
    CHECK(v.sigma2_exact == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(v.tail_bound == doctest::Approx(4 * 0.05 / 0.95));
    CHECK(v.integral_estimate >= v.sigma2_exact - v.tail_bound - 3 * v.integral_se);
    CHECK(v.integral_estimate <= v.sigma2_exact + 3 * v.integral_se);
    CHECK(v.discrepancy == doctest::Approx(v.integral_estimate - v.sigma2_exact));

    const VarianceIdentityEstimate neg = variance_identity_estimate(free, -th, 12, 400, 0.95, 3);
    CHECK(neg.integral_estimate == doctest::Approx(v.integral_estimate).epsilon(1e-13));
    CHECK_THROWS_AS(variance_identity_estimate(free, th, 12, 10, 1.0, 3), ValidationError);
}

TEST_CASE("variance identity standard errors shrink with reps") {
    std::mt19937_64 gen(2);
    const IsingModel m = random_model(4, gen, 0.3, 0.3);
    const DirectionVector th = DirectionVector::uniform(4);
    const VarianceIdentityEstimate a = variance_identity_estimate(m, th, 8, 200, 0.95, 10);
    const VarianceIdentityEstimate b = variance_identity_estimate(m, th, 8, 800, 0.95, 10);
    const double ratio = a.integral_se / b.integral_se;
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.7);
}

}  // TEST_SUITE
