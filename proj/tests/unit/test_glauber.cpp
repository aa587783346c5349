#include <cmath>
#include <random>

#include "doctest.h"
#include "isingclt/errors.hpp"
#include "isingclt/exact.hpp"
#include "isingclt/glauber.hpp"
#include "isingclt/lattice.hpp"
#include "support.hpp"

using namespace isingclt;
using isingclt::testing::pair_model;
using isingclt::testing::product_model;
using isingclt::testing::random_model;

namespace {

IsingModel ferromagnet(std::size_t n, std::mt19937_64& gen, double scale) {
    std::uniform_real_distribution<double> u(0.0, scale);
    const auto ni = static_cast<Eigen::Index>(n);
    Matrix a = Matrix::Zero(ni, ni);
    Vector h(ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
        h(i) = u(gen) - scale / 2;
        for (Eigen::Index j = i + 1; j < ni; ++j) a(i, j) = a(j, i) = u(gen);
    }
    return validate_model(a, h);
}

}  // namespace

TEST_SUITE("glauber") {

TEST_CASE("heat-bath threshold convention") {
    const IsingModel free = product_model(2, 0.0);
    const SpinConfig x = SpinConfig::all(2, -1);
    CHECK(heat_bath_step(free, x, 0, 0.49)[0] == 1);
    CHECK(heat_bath_step(free, x, 0, 0.5)[0] == -1);
    CHECK(heat_bath_step(free, x, 0, 0.49)[1] == -1);

    Vector h(1);
    h << 20.0;
    CHECK(heat_bath_step(validate_model(Matrix::Zero(1, 1), h), SpinConfig::all(1, -1), 0, 0.999)[0] == 1);

    const double a = 0.35;
    const double p = (1 + std::tanh(a)) / 2;
    const SpinConfig up = SpinConfig::all(2, 1);
    CHECK(heat_bath_step(pair_model(a), up, 0, p - 1e-9)[0] == 1);
    CHECK(heat_bath_step(pair_model(a), up, 0, p + 1e-9)[0] == -1);
}

TEST_CASE("chain config validation") {
    ChainConfig c;
    c.steps = 10;
    c.burn_in = 10;
    CHECK_THROWS_AS(run_chain(product_model(3, 0.0), c), ValidationError);
    c.burn_in = 1;
    c.pins = {Pin{0, 1}, Pin{0, 1}};
    CHECK_THROWS_AS(run_chain(product_model(3, 0.0), c), ValidationError);
    c.pins = {Pin{5, 1}};
    CHECK_THROWS_AS(run_chain(product_model(3, 0.0), c), ValidationError);
    c.pins.clear();
    c.record_every = 0;
    CHECK_THROWS_AS(run_chain(product_model(3, 0.0), c), ValidationError);
}

TEST_CASE("chain means agree with exact enumeration") {
    ChainConfig c;
    c.steps = 2000000;
    c.burn_in = 20000;
    c.seed = 5;
    c.track_pairs = true;

    const ChainStatistics free = run_chain(product_model(6, 0.0), c);
    CHECK(std::abs(free.magnetization_mean) <= 4 * free.magnetization_se);

    std::mt19937_64 gen(31);
    const IsingModel m = random_model(10, gen, 0.08, 0.5);
    const MomentSummary exact = moments(m, DirectionVector::uniform(10));
    const ChainStatistics s = run_chain(m, c);
    for (Eigen::Index i = 0; i < 10; ++i) {
        CHECK(std::abs(s.mean(i) - exact.mean(i)) <= 4 * s.mean_se(i));
        CHECK(s.mean_se(i) > 0.0);
    }
    int outside = 0;
    for (Eigen::Index i = 0; i < 10; ++i)
        for (Eigen::Index j = i + 1; j < 10; ++j)
            outside += std::abs(s.cov(i, j) - exact.cov(i, j)) > 4 * s.cov_se(i, j);
    CHECK(outside <= 1);

    c.pins = {Pin{0, 1}};
    const ChainStatistics pinned = run_chain(m, c);
    const ClampedModel cm = clamp(m, c.pins);
    const MomentSummary cond = moments(cm.model, DirectionVector::uniform(cm.model.size()));
    CHECK(pinned.mean(0) == 1.0);
    for (std::size_t j = 0; j < cm.free_sites.size(); ++j) {
        const auto site = static_cast<Eigen::Index>(cm.free_sites[j]);
        CHECK(std::abs(pinned.mean(site) - cond.mean(static_cast<Eigen::Index>(j))) <= 4 * pinned.mean_se(site));
    }
}

TEST_CASE("chains are deterministic in the seed") {
    std::mt19937_64 gen(1);
    const IsingModel m = random_model(8, gen);
    ChainConfig c;
    c.steps = 20000;
    c.burn_in = 100;
    const Vector th = DirectionVector::uniform(8).values();
    const ChainStatistics a = run_chain(m, c, th);
    const ChainStatistics b = run_chain(m, c, th);
    CHECK(a.projection_samples == b.projection_samples);
    CHECK(a.final_state == b.final_state);
    c.seed = 2;
    CHECK_FALSE(run_chain(m, c, th).projection_samples == a.projection_samples);
}

TEST_CASE("coupled pair without interaction never disagrees") {
    ChainConfig c;
    c.steps = 50000;
    c.burn_in = 0;
    const CouplingTrace t = monotone_coupled_pair(product_model(6, 0.2), 2, c);
    for (auto d : t.d_series) CHECK(d == 0);
    const DisagreementSummary s = summarize_disagreement(t);
    REQUIRE(!s.pmf.empty());
    CHECK(s.pmf[0] == 1.0);
    CHECK(s.mean == 0.0);
    const auto rows = drift_statistics(std::span<const CouplingTrace>(&t, 1), product_model(6, 0.2));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].level == 0);
    CHECK(rows[0].drift == 0.0);
    CHECK(rows[0].drift_bound == 0.0);
}

TEST_CASE("two-site coupling disagreement probability") {
    const double a = 0.6;
    const double h1 = 0.2;
    const IsingModel m = pair_model(a, h1, 0.0);
    ChainConfig c;
    c.steps = 400000;
    c.burn_in = 100;
    c.seed = 13;
    const CouplingTrace t = monotone_coupled_pair(m, 1, c);
    std::vector<double> series(t.d_series.begin(), t.d_series.end());
    const auto [mean, se] = batch_means(series, 32);
    const double expected = 0.5 * std::abs(std::tanh(h1 + a) - std::tanh(h1 - a));
    CHECK(std::abs(mean - expected) <= 4 * se);
    CHECK(t.monotone_violations == 0);
}

TEST_CASE("ferromagnetic coupling keeps the order and moves one step at a time") {
    std::mt19937_64 gen(77);
    const IsingModel m = ferromagnet(12, gen, 0.15);
    ChainConfig c;
    c.steps = 300000;
    c.burn_in = 0;
    const std::vector<std::size_t> extra = {4, 9};
    const CouplingTrace t = monotone_coupled_pair(m, 0, c, extra);
    CHECK(t.ferromagnetic);
    CHECK(t.monotone_violations == 0);
    for (std::size_t s = 1; s < t.d_series.size(); ++s) {
        const auto diff = static_cast<long>(t.d_series[s]) - static_cast<long>(t.d_series[s - 1]);
        CHECK(std::abs(diff) <= 1);
        CHECK(t.d_series[s] >= 2);
    }
    for (std::size_t i = 0; i < 12; ++i) CHECK(t.final_minus[i] <= t.final_plus[i]);
    CHECK(t.final_plus[4] == 1);
    CHECK(t.final_minus[4] == -1);

    CHECK(monotone_coupled_pair(m, 0, c, extra).d_series == t.d_series);
    const std::vector<std::size_t> clash = {0};
    CHECK_THROWS_AS(monotone_coupled_pair(m, 0, c, clash), ValidationError);
}

TEST_CASE("drift statistics bounds") {
    const IsingModel m = build_box_model(chain_spec(20, 0.2, 0.1));
    ChainConfig c;
    c.steps = 400000;
    c.burn_in = 1000;
    const CouplingTrace t = monotone_coupled_pair(m, 10, c);
    const auto rows = drift_statistics(std::span<const CouplingTrace>(&t, 1), m);
    const double alpha = 0.4;
    for (const DriftRow& r : rows) {
        CHECK(r.drift_bound == doctest::Approx(-(1 - alpha) * r.level / 19.0 + alpha / 19.0));
        CHECK(r.up_bound == doctest::Approx(alpha * (r.level + 1) / 19.0));
        if (r.visits < 100) continue;
        CHECK(r.drift <= r.drift_bound + 3 * r.drift_se);
        CHECK(r.up_prob <= r.up_bound + 3 * r.up_se);
    }
    c.record_every = 2;
    const CouplingTrace thinned = monotone_coupled_pair(m, 10, c);
    CHECK_THROWS_AS(drift_statistics(std::span<const CouplingTrace>(&thinned, 1), m), ValidationError);
}

TEST_CASE("stationary disagreement requires a ferromagnet") {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 1) = a(1, 0) = -0.3;
    ChainConfig c;
    c.steps = 1000;
    c.burn_in = 10;
    CHECK_THROWS_AS(stationary_disagreement(validate_model(a, Vector::Zero(3)), 0, c), ValidationError);
    CHECK_FALSE(monotone_coupled_pair(validate_model(a, Vector::Zero(3)), 0, c).ferromagnetic);
}

TEST_CASE("batch means") {
    const std::vector<double> flat(640, 2.5);
    const auto [m, se] = batch_means(flat, 32);
    CHECK(m == 2.5);
    CHECK(se == 0.0);
    std::vector<double> iid(64000);
    std::mt19937_64 gen(3);
    std::normal_distribution<double> z;
    for (auto& x : iid) x = z(gen);
    const auto [m2, se2] = batch_means(iid, 32);
    CHECK(se2 == doctest::Approx(1 / std::sqrt(64000.0)).epsilon(0.35));
    CHECK(std::abs(m2) < 4 * se2);
}

}  // TEST_SUITE
