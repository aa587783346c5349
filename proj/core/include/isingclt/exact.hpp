#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "isingclt/model.hpp"
#include "isingclt/rng.hpp"

namespace isingclt {

inline constexpr std::size_t kDefaultEnumerationCap = 24;
inline constexpr std::size_t kOracleCap = 12;
inline constexpr double kDefaultMergeTolerance = 1e-9;

struct EnumerationOptions {
    std::size_t max_sites = kDefaultEnumerationCap;
};

/// Unit vector theta defining the projection W = theta'X.
class DirectionVector {
public:
    /// Throws ValidationError unless | |theta| - 1 | <= 1e-12.
    explicit DirectionVector(Vector theta);

    static DirectionVector normalized(const Vector& v);
    static DirectionVector uniform(std::size_t n);
    static DirectionVector basis(std::size_t n, std::size_t i);

    const Vector& values() const { return theta_; }
    std::size_t size() const { return static_cast<std::size_t>(theta_.size()); }
    double operator[](std::size_t i) const { return theta_(static_cast<Eigen::Index>(i)); }
    DirectionVector operator-() const { return DirectionVector(-theta_); }

private:
    Vector theta_;
};

/// First three moments of X and of W = theta'X under the model.
struct MomentSummary {
    Vector mean;          // E X_i
    Matrix cov;           // B_ij = Cov(X_i, X_j)
    Vector v;             // Cov(X_i, W) = sum_j theta_j B_ij
    Matrix M;             // sum_l theta_l B_ilk = E[X~_i X~_k W~]
    double mu_n = 0.0;    // E W
    double sigma2_n = 0.0;
    double log_partition = 0.0;

    // Raw (uncentered) moments the central ones were built from.
    Matrix second_raw;    // E X_i X_k
    Vector cross_raw;     // E X_i W
    Matrix third_raw;     // E X_i X_k W
};

struct Atom {
    double value = 0.0;
    double prob = 0.0;
};

/// Law of W = theta'X as sorted atoms.
struct ProjectionPmf {
    std::vector<Atom> atoms;

    double mean() const;
    double variance() const;
};

/// log sum_x exp(x'Ax/2 + h'x) by Gray-code enumeration.
double log_partition(const IsingModel& model, const EnumerationOptions& options = {});

/// All moments in a single enumeration pass.
MomentSummary moments(const IsingModel& model, const DirectionVector& theta,
                      const EnumerationOptions& options = {});

/// Same contract as `moments`, computed from the definitions: naive energies,
/// binary order, explicit central third-moment tensor. For n <= 12 only.
MomentSummary brute_force_oracle_moments(const IsingModel& model, const DirectionVector& theta);

/// Full central third-moment tensor, entry (i, l, k) at (i * n + l) * n + k. n <= 6.
std::vector<double> brute_force_third_central_tensor(const IsingModel& model);

/// Probabilities of every configuration, index = packed code. n <= 12.
std::vector<double> brute_force_pmf(const IsingModel& model);

struct ClampedModel {
    IsingModel model;
    /// free_sites[j] is the original index of reduced site j.
    std::vector<std::size_t> free_sites;
};

/// Conditional law of the unpinned spins given the pins, as an Ising model.
ClampedModel clamp(const IsingModel& model, std::span<const Pin> pins);

ProjectionPmf exact_pmf_of_projection(const IsingModel& model, const DirectionVector& theta,
                                      double merge_tol = kDefaultMergeTolerance,
                                      const EnumerationOptions& options = {});

/// Inverse-cdf sampler over the enumerated configurations.
class ExactSampler {
public:
    explicit ExactSampler(const IsingModel& model, const EnumerationOptions& options = {});

    SpinConfig draw(CounterRng& rng) const;
    std::size_t size() const { return n_; }

private:
    std::size_t n_ = 0;
    std::vector<std::uint32_t> codes_;
    std::vector<double> cumulative_;
};

std::vector<SpinConfig> sample_exact(const IsingModel& model, std::size_t count, std::uint64_t seed,
                                     const EnumerationOptions& options = {});

}  // namespace isingclt
