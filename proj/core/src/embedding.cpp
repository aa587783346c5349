#include "isingclt/embedding.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "isingclt/errors.hpp"
#include "isingclt/parallel.hpp"

namespace isingclt {

namespace {

void check_time(double t, const char* what) {
    if (!(t > 0.0 && t < 1.0)) throw ValidationError(std::string(what) + ": t must lie in (0, 1)");
}

struct CenteredProducts {
    double cov_il = 0.0;
    double third = 0.0;   // E[~X_i ~X_l ~X_k]
};

// One Gray-code pass accumulating products of centered spins directly, so that
// rounding scales with the (possibly tiny) cumulants rather than with O(1) raw
// moments.
CenteredProducts centered_products(const IsingModel& model, const Vector& mean, double log_partition,
                                   std::size_t i, std::size_t l, std::size_t k) {
    const std::size_t n = model.size();
    SpinConfig x = SpinConfig::all(n, -1);
    double energy = model.energy(x);
    CenteredProducts c;
    const auto mi = mean(static_cast<Eigen::Index>(i));
    const auto ml = mean(static_cast<Eigen::Index>(l));
    const auto mk = mean(static_cast<Eigen::Index>(k));
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t step = 0;; ++step) {
        const double p = std::exp(energy - log_partition);
        const double a = x[i] - mi, b = x[l] - ml;
        c.cov_il += p * a * b;
        c.third += p * a * b * (x[k] - mk);
        if (step + 1 == total) break;
        const auto j = static_cast<std::size_t>(std::countr_zero(step + 1));
        energy -= 2.0 * x[j] * model.local_field(x, j);
        x.values[j] = static_cast<std::int8_t>(-x.values[j]);
    }
    return c;
}

}  // namespace

InterpolantDraw sample_interpolant(const ExactSampler& sampler, double t, CounterRng& rng) {
    check_time(t, "sample_interpolant");
    InterpolantDraw d;
    d.x = sampler.draw(rng);
    const std::size_t n = d.x.size();
    std::normal_distribution<double> normal;
    const double scale = std::sqrt(t * (1.0 - t));
    d.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) d.y(static_cast<Eigen::Index>(i)) = t * d.x[i] + scale * normal(rng);
    return d;
}

InterpolantDraw sample_interpolant(const IsingModel& model, double t, std::uint64_t seed,
                                   const EnumerationOptions& options) {
    check_time(t, "sample_interpolant");
    ExactSampler sampler(model, options);
    CounterRng rng = CounterRng::stream(seed, 0);
    return sample_interpolant(sampler, t, rng);
}

IsingModel tilted_model(const IsingModel& model, double t, const Vector& y_t) {
    check_time(t, "tilted_model");
    if (static_cast<std::size_t>(y_t.size()) != model.size())
        throw ValidationError("tilted_model: y_t has wrong dimension");
    return model.with_field(model.field() + y_t / (1.0 - t));
}

double gamma_direction(const IsingModel& model, double t, const Vector& y_t, const DirectionVector& theta,
                       const EnumerationOptions& options) {
    const MomentSummary m = moments(tilted_model(model, t, y_t), theta, options);
    return m.v.squaredNorm() / ((1.0 - t) * (1.0 - t));
}

EmbeddingPoint embedding_point(const IsingModel& model, double t, const Vector& y_t, const DirectionVector& theta,
                               const EnumerationOptions& options) {
    EmbeddingPoint p;
    p.t = t;
    p.y_t = y_t;
    p.tilted_field = tilted_model(model, t, y_t).field();
    p.gamma_dir_sq = gamma_direction(model, t, y_t, theta, options);
    return p;
}

DerivativeCheck derivative_identity_check(const IsingModel& model, double t, const Vector& y_t, std::size_t i,
                                          std::size_t l, std::size_t k, double delta,
                                          const EnumerationOptions& options) {
    const std::size_t n = model.size();
    if (i >= n || l >= n || k >= n) throw ValidationError("derivative_identity_check: index out of range");
    if (!(delta > 0.0)) throw ValidationError("derivative_identity_check: delta must be positive");
    const auto ii = static_cast<Eigen::Index>(i);
    const auto kk = static_cast<Eigen::Index>(k);
    const DirectionVector e_l = DirectionVector::basis(n, l);

    auto centered = [&](const Vector& y) {
        const IsingModel tilted = tilted_model(model, t, y);
        const MomentSummary m = moments(tilted, e_l, options);
        return std::pair{m, centered_products(tilted, m.mean, m.log_partition, i, l, k)};
    };
    Vector up = y_t;
    Vector down = y_t;
    up(kk) += delta;
    down(kk) -= delta;
    const double cov_up = centered(up).second.cov_il;
    const double cov_down = centered(down).second.cov_il;

    // With theta = e_l: third_raw_ik = E[X_i X_k X_l], cross_raw_i = E[X_i X_l].
    const auto [at, products] = centered(y_t);
    DerivativeCheck c;
    c.fd = (cov_up - cov_down) / (2.0 * delta);
    c.formula = products.third / (1.0 - t);
    const double m_i = at.mean(ii);
    const double m_l = at.mean(static_cast<Eigen::Index>(l));
    const double m_k = at.mean(kk);
    const double cov_il_k = at.third_raw(ii, kk) - at.cross_raw(ii) * m_k;
    c.expansion = (cov_il_k - at.cov(ii, kk) * m_l - at.cov(static_cast<Eigen::Index>(l), kk) * m_i) / (1.0 - t);
    c.rel_err = std::abs(c.fd - c.formula) / std::max(std::abs(c.formula), 1e-12);
    return c;
}

void gauss_legendre(std::size_t count, double a, double b, std::vector<double>& nodes, std::vector<double>& weights) {
    if (count == 0) throw ValidationError("gauss_legendre: need at least one node");
    nodes.assign(count, 0.0);
    weights.assign(count, 0.0);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    const auto nn = static_cast<double>(count);
    for (std::size_t r = 0; r < (count + 1) / 2; ++r) {
        // Newton on P_n starting from the Chebyshev-like guess.
        double x = std::cos(std::numbers::pi * (static_cast<double>(r) + 0.75) / (nn + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t j = 2; j <= count; ++j) {
                const auto jj = static_cast<double>(j);
                const double p2 = ((2.0 * jj - 1.0) * x * p1 - (jj - 1.0) * p0) / jj;
                p0 = p1;
                p1 = p2;
            }
            dp = nn * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[r] = mid - half * x;
        nodes[count - 1 - r] = mid + half * x;
        weights[r] = weights[count - 1 - r] = half * w;
    }
}

VarianceIdentityEstimate variance_identity_estimate(const IsingModel& model, const DirectionVector& theta,
                                                    std::size_t quad_nodes, std::size_t mc_reps, double t_max,
                                                    std::uint64_t seed, const EnumerationOptions& options) {
    if (!(t_max > 0.0 && t_max < 1.0)) throw ValidationError("variance_identity_estimate: t_max must lie in (0, 1)");
    if (quad_nodes == 0 || mc_reps < 2) throw ValidationError("variance_identity_estimate: need nodes >= 1, reps >= 2");
    if (theta.size() != model.size()) throw ValidationError("variance_identity_estimate: theta has wrong dimension");

    VarianceIdentityEstimate est;
    gauss_legendre(quad_nodes, 0.0, t_max, est.nodes, est.weights);
    const ExactSampler sampler(model, options);

    // One task per (node, rep); each owns stream (seed, node, rep).
    std::vector<double> values(quad_nodes * mc_reps);
    parallel_for(values.size(), [&](std::size_t task) {
        const std::size_t q = task / mc_reps;
        const std::size_t r = task % mc_reps;
        CounterRng rng = CounterRng::stream(seed, q, r);
        const InterpolantDraw d = sample_interpolant(sampler, est.nodes[q], rng);
        values[task] = gamma_direction(model, est.nodes[q], d.y, theta, options);
    });

    double var_sum = 0.0;
    for (std::size_t q = 0; q < quad_nodes; ++q) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t r = 0; r < mc_reps; ++r) {
            const double v = values[q * mc_reps + r];
            s += v;
            s2 += v * v;
        }
        const auto reps = static_cast<double>(mc_reps);
        const double mean = s / reps;
        const double var = std::max(0.0, (s2 - reps * mean * mean) / (reps - 1.0));
        est.node_means.push_back(mean);
        est.node_se.push_back(std::sqrt(var / reps));
        est.integral_estimate += est.weights[q] * mean;
        var_sum += est.weights[q] * est.weights[q] * var / reps;
    }
    est.integral_se = std::sqrt(var_sum);
    est.tail_bound = 4.0 * (1.0 - t_max) / t_max;
    est.sigma2_exact = moments(model, theta, options).sigma2_n;
    est.discrepancy = est.integral_estimate - est.sigma2_exact;
    return est;
}

}  // namespace isingclt
