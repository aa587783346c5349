#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isingclt/bound.hpp"
#include "isingclt/exact.hpp"
#include "isingclt/glauber.hpp"
#include "isingclt/model.hpp"

namespace isingclt {

enum class Boundary { Free, Periodic };

/// Finite box in Z^d with couplings depending on the Chebyshev distance
/// max_k |i_k - j_k| (wrapped per axis when periodic).
///
/// Sites are numbered row-major: the last coordinate varies fastest, so in
/// 2-D site (r, c) has index r * sides[1] + c.
struct LatticeSpec {
    std::vector<std::size_t> sides;
    std::size_t range = 1;
    /// coupling[d - 1] is the coupling at distance d, for 1 <= d <= range.
    std::vector<double> coupling;
    /// One value (constant field) or one per site.
    std::vector<double> field = {0.0};
    Boundary boundary = Boundary::Free;

    std::size_t dim() const { return sides.size(); }
    std::size_t volume() const;
    std::vector<std::size_t> coordinates(std::size_t site) const;
    std::size_t index(std::span<const std::size_t> coords) const;
    std::size_t distance(std::size_t i, std::size_t j) const;
    void validate() const;
};

inline constexpr std::size_t kMaxLatticeVolume = 4096;

IsingModel build_box_model(const LatticeSpec& spec);

/// 1-D chain of n sites with nearest-neighbour coupling beta.
LatticeSpec chain_spec(std::size_t n, double beta, double field = 0.0, Boundary boundary = Boundary::Free);

/// Sparse ferromagnet: union of `matchings` random perfect matchings, each
/// edge weighted alpha / matchings, so every row sums to alpha (n even).
IsingModel dobrushin_ferromagnet(std::size_t n, double alpha, std::size_t matchings, double field,
                                 std::uint64_t seed);

enum class Estimator { Exact, Mcmc };

std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& name);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
    std::size_t points = 0;
};

/// Least squares y = intercept + slope x. Weighted when weights are given.
std::optional<LinearFit> fit_line(std::span<const double> x, std::span<const double> y,
                                  std::span<const double> weights = {});

struct DecayRow {
    std::size_t distance = 0;
    double max_abs_cov = 0.0;
    double se = 0.0;
    std::size_t site = 0;
    std::size_t shell_size = 0;
};

struct DecayProfile {
    std::vector<DecayRow> rows;
    std::optional<LinearFit> fit;
};

/// Worst-case |Cov(X_origin, X_j)| per distance shell and a fit of its log
/// against distance, over shells where the covariance exceeds 3 SE.
DecayProfile correlation_decay_profile(const LatticeSpec& spec, const IsingModel& model, std::size_t origin,
                                       Estimator estimator, const ChainConfig& chain = {},
                                       const EnumerationOptions& options = {});

struct CltOptions {
    Estimator estimator = Estimator::Exact;
    ChainConfig chain;
    /// One chain replica per seed (MCMC path).
    std::vector<std::uint64_t> seeds = {1};
    bool with_bound = false;
    SupStrategy bound_strategy = SupStrategy::UniformScan;
    EnumerationOptions enumeration;
};

struct CltRow {
    std::size_t n = 0;
    double mu_n = 0.0;
    double sigma2_n = 0.0;
    std::optional<double> w2;
    double w2_se = 0.0;
    std::optional<double> bound;
    std::optional<double> skewness;
    std::optional<double> excess_kurtosis;
    bool degenerate = false;
    std::size_t replicas = 0;
};

inline constexpr double kDegenerateVariance = 1e-8;

/// W_2 distance between theta'X (theta uniform) and its matching normal for
/// each member of a family of models.
std::vector<CltRow> clt_convergence_experiment(std::span<const IsingModel> family, const CltOptions& options);

}  // namespace isingclt
