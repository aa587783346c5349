#pragma once

// Shared helpers for the unit and acceptance tests. Random test models come
// from std::mt19937_64 so they do not depend on the library's own generator.

#include <cmath>
#include <cstdint>
#include <random>

#include "isingclt/model.hpp"

namespace isingclt::testing {

/// Symmetric couplings uniform in [-a_scale, a_scale], fields in [-h_scale, h_scale].
inline IsingModel random_model(std::size_t n, std::mt19937_64& gen, double a_scale = 0.6, double h_scale = 0.8) {
    std::uniform_real_distribution<double> ua(-a_scale, a_scale);
    std::uniform_real_distribution<double> uh(-h_scale, h_scale);
    const auto ni = static_cast<Eigen::Index>(n);
    Matrix a = Matrix::Zero(ni, ni);
    Vector h(ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
        h(i) = uh(gen);
        for (Eigen::Index j = i + 1; j < ni; ++j) a(i, j) = a(j, i) = ua(gen);
    }
    return validate_model(a, h);
}

inline IsingModel product_model(std::size_t n, double h) {
    const auto ni = static_cast<Eigen::Index>(n);
    return validate_model(Matrix::Zero(ni, ni), Vector::Constant(ni, h));
}

inline IsingModel pair_model(double a, double h1 = 0.0, double h2 = 0.0) {
    Matrix m(2, 2);
    m << 0.0, a, a, 0.0;
    Vector h(2);
    h << h1, h2;
    return validate_model(m, h);
}

}  // namespace isingclt::testing
