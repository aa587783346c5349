#pragma once

#include <cstddef>
#include <cstdint>

#include "isingclt/exact.hpp"
#include "isingclt/model.hpp"
#include "isingclt/rng.hpp"

namespace isingclt {

// Gaussian interpolation Y_t = t Y_1 + sqrt(t(1-t)) Z with Y_1 ~ mu. Given
// Y_t = y, Y_1 is again an Ising model with the same couplings and field
// h + y / (1 - t); every conditional quantity below is computed by exact
// enumeration of that tilted model.

struct InterpolantDraw {
    SpinConfig x;
    Vector y;
};

InterpolantDraw sample_interpolant(const IsingModel& model, double t, std::uint64_t seed,
                                   const EnumerationOptions& options = {});

/// Same, reusing an existing sampler and stream.
InterpolantDraw sample_interpolant(const ExactSampler& sampler, double t, CounterRng& rng);

/// Conditional law of Y_1 given Y_t = y_t.
IsingModel tilted_model(const IsingModel& model, double t, const Vector& y_t);

struct EmbeddingPoint {
    double t = 0.0;
    Vector y_t;
    Vector tilted_field;
    double gamma_dir_sq = 0.0;
};

/// |theta' Cov(Y_1 | Y_t = y_t)|^2 / (1 - t)^2.
double gamma_direction(const IsingModel& model, double t, const Vector& y_t, const DirectionVector& theta,
                       const EnumerationOptions& options = {});

EmbeddingPoint embedding_point(const IsingModel& model, double t, const Vector& y_t, const DirectionVector& theta,
                               const EnumerationOptions& options = {});

struct DerivativeCheck {
    double fd = 0.0;       // central difference of Cov(Y_1i, Y_1l | y_t) in y_t,k
    double formula = 0.0;  // E[~Y_i ~Y_l ~Y_k | y_t] / (1 - t)
    double rel_err = 0.0;
    /// Covariance-expansion form of the same derivative:
    /// [Cov(Y_i Y_l, Y_k) - Cov(Y_i, Y_k) E Y_l - Cov(Y_l, Y_k) E Y_i] / (1 - t).
    double expansion = 0.0;
};

DerivativeCheck derivative_identity_check(const IsingModel& model, double t, const Vector& y_t, std::size_t i,
                                          std::size_t l, std::size_t k, double delta = 1e-5,
                                          const EnumerationOptions& options = {});

struct VarianceIdentityEstimate {
    double integral_estimate = 0.0;
    double integral_se = 0.0;
    double tail_bound = 0.0;
    double sigma2_exact = 0.0;
    double discrepancy = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> node_means;
    std::vector<double> node_se;
};

/// Gauss-Legendre quadrature over [0, t_max] of t -> E|theta' Gamma_t|^2, the
/// expectation estimated from mc_reps exact draws of Y_t per node.
VarianceIdentityEstimate variance_identity_estimate(const IsingModel& model, const DirectionVector& theta,
                                                    std::size_t quad_nodes, std::size_t mc_reps, double t_max,
                                                    std::uint64_t seed, const EnumerationOptions& options = {});

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(std::size_t count, double a, double b, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace isingclt
