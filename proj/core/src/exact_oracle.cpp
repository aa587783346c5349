// Definition-level reference implementations. Nothing here shares code with
// the Gray-code enumerator in exact.cpp.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "isingclt/errors.hpp"
#include "isingclt/exact.hpp"

namespace isingclt {

std::vector<double> brute_force_pmf(const IsingModel& model) {
    const std::size_t n = model.size();
    if (n > kOracleCap) throw NumericalError("brute_force_pmf: n exceeds " + std::to_string(kOracleCap));
    const std::size_t count = std::size_t{1} << n;
    std::vector<double> energy(count);
    double emax = -1e300;
    for (std::size_t c = 0; c < count; ++c) {
        energy[c] = model.energy(SpinConfig::from_code(c, n));
        if (energy[c] > emax) emax = energy[c];
    }
    double z = 0.0;
    for (double& e : energy) {
        e = std::exp(e - emax);
        z += e;
    }
    for (double& e : energy) e /= z;
    return energy;
}

MomentSummary brute_force_oracle_moments(const IsingModel& model, const DirectionVector& theta) {
    const std::size_t n = model.size();
    if (n > kOracleCap)
        throw NumericalError("brute_force_oracle_moments: n exceeds " + std::to_string(kOracleCap));
    if (theta.size() != n) throw ValidationError("brute_force_oracle_moments: theta has wrong dimension");
    const auto ni = static_cast<Eigen::Index>(n);
    const std::size_t count = std::size_t{1} << n;

    std::vector<SpinConfig> configs;
    configs.reserve(count);
    std::vector<double> energy(count);
    double emax = -1e300;
    for (std::size_t c = 0; c < count; ++c) {
        configs.push_back(SpinConfig::from_code(c, n));
        energy[c] = model.energy(configs.back());
        emax = std::max(emax, energy[c]);
    }
    std::vector<double> p(count);
    double z = 0.0;
    for (std::size_t c = 0; c < count; ++c) {
        p[c] = std::exp(energy[c] - emax);
        z += p[c];
    }
    for (double& v : p) v /= z;

    MomentSummary out;
    out.log_partition = emax + std::log(z);
    out.mean = Vector::Zero(ni);
    for (std::size_t c = 0; c < count; ++c)
        for (std::size_t i = 0; i < n; ++i) out.mean(static_cast<Eigen::Index>(i)) += p[c] * configs[c][i];

    out.cov = Matrix::Zero(ni, ni);
    out.M = Matrix::Zero(ni, ni);
    out.second_raw = Matrix::Zero(ni, ni);
    out.third_raw = Matrix::Zero(ni, ni);
    out.cross_raw = Vector::Zero(ni);
    out.mu_n = 0.0;
    for (std::size_t c = 0; c < count; ++c) {
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i) w += theta[i] * configs[c][i];
        out.mu_n += p[c] * w;
    }
    out.sigma2_n = 0.0;

    std::vector<double> centred(n);
    for (std::size_t c = 0; c < count; ++c) {
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            centred[i] = configs[c][i] - out.mean(static_cast<Eigen::Index>(i));
            w += theta[i] * configs[c][i];
        }
        out.sigma2_n += p[c] * (w - out.mu_n) * (w - out.mu_n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            out.cross_raw(ii) += p[c] * configs[c][i] * w;
            for (std::size_t k = 0; k < n; ++k) {
                const auto kk = static_cast<Eigen::Index>(k);
                out.cov(ii, kk) += p[c] * centred[i] * centred[k];
                out.second_raw(ii, kk) += p[c] * configs[c][i] * configs[c][k];
                out.third_raw(ii, kk) += p[c] * configs[c][i] * configs[c][k] * w;
                // sum_l theta_l E[(X_i - m_i)(X_l - m_l)(X_k - m_k)]
                for (std::size_t l = 0; l < n; ++l)
                    out.M(ii, kk) += theta[l] * p[c] * centred[i] * centred[l] * centred[k];
            }
        }
    }
    out.v = Vector::Zero(ni);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.v(static_cast<Eigen::Index>(i)) += theta[j] * out.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

std::vector<double> brute_force_third_central_tensor(const IsingModel& model) {
    const std::size_t n = model.size();
    if (n > 6) throw NumericalError("brute_force_third_central_tensor: n exceeds 6");
    const std::vector<double> p = brute_force_pmf(model);
    std::vector<double> mean(n, 0.0);
    for (std::size_t c = 0; c < p.size(); ++c) {
        SpinConfig x = SpinConfig::from_code(c, n);
        for (std::size_t i = 0; i < n; ++i) mean[i] += p[c] * x[i];
    }
    std::vector<double> tensor(n * n * n, 0.0);
    for (std::size_t c = 0; c < p.size(); ++c) {
        SpinConfig x = SpinConfig::from_code(c, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l)
                for (std::size_t k = 0; k < n; ++k)
                    tensor[(i * n + l) * n + k] += p[c] * (x[i] - mean[i]) * (x[l] - mean[l]) * (x[k] - mean[k]);
    }
    return tensor;
}

}  // namespace isingclt
