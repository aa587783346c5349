#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isingclt/exact.hpp"
#include "isingclt/model.hpp"

namespace isingclt {

/// sum_k ( sum_i v_i M_ik )^2 with v = Cov(X, theta'X) and M the
/// theta-contracted central third moments: the field-dependent statistic
/// inside the Wasserstein bound.
double contracted_statistic(const IsingModel& model, const DirectionVector& theta,
                            const EnumerationOptions& options = {});

enum class SupStrategy { UniformScan, Grid, MultistartAscent, ProductClosedForm };

std::string to_string(SupStrategy s);
SupStrategy parse_sup_strategy(const std::string& name);

struct SupOptions {
    // uniform-scan
    double scan_min = -3.0;
    double scan_max = 3.0;
    std::size_t scan_points = 121;
    // grid
    std::vector<Vector> grid;
    // multistart-ascent
    std::size_t starts = 16;
    double start_range = 2.0;
    std::uint64_t seed = 1;
    double fd_step = 1e-4;
    double tolerance = 1e-12;
    std::size_t max_sweeps = 200;

    EnumerationOptions enumeration;
};

struct SupResult {
    double sup_estimate = 0.0;
    Vector field;
    SupStrategy strategy = SupStrategy::UniformScan;
    /// True only for the closed form; everything else is a lower bound on the sup.
    bool exact = false;
    std::size_t evaluations = 0;
};

SupResult sup_over_fields(const IsingModel& model, const DirectionVector& theta, SupStrategy strategy,
                          const SupOptions& options = {});

/// (1024/3125) sum_k theta_k^4: the exact sup for independent spins.
double product_closed_form_sup(const DirectionVector& theta);

struct BoundReport {
    double epsilon = 0.0;
    double sup_estimate = 0.0;
    SupStrategy sup_strategy = SupStrategy::UniformScan;
    bool sup_exact = false;
    Vector achieving_field;
    double poincare_constant = 0.0;
    bool poincare_override = false;
    double bound_value = 0.0;
    std::optional<double> exact_w2;
};

/// 5 sqrt(eps) + sqrt(4 sup C_p / eps^6), for 0 < eps < 1/2.
double bound_value(double epsilon, double sup_estimate, double poincare_constant);

/// C_p is c_p_override when given, else 1 / (1 - spectral spread).
BoundReport theorem1_bound(const IsingModel& model, double epsilon, double sup_estimate,
                           std::optional<double> c_p_override = std::nullopt);

struct EpsilonOptimum {
    double epsilon = 0.0;
    double bound_value = 0.0;
};

/// Minimizes 5 sqrt(eps) + c eps^-3, c = sqrt(4 sup C_p), over 0 < eps < 1/2.
EpsilonOptimum optimize_epsilon(double sup_estimate, double poincare_constant);

/// Largest epsilon accepted: just below 1/2.
inline constexpr double kEpsilonCeiling = 0.5 * (1.0 - 1e-9);

}  // namespace isingclt
