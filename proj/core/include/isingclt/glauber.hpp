#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "isingclt/model.hpp"

namespace isingclt {

/// Random-scan heat-bath run parameters. `steps` counts single-site updates
/// and includes the burn-in.
struct ChainConfig {
    std::uint64_t steps = 100000;
    std::uint64_t burn_in = 10000;
    std::uint64_t seed = 1;
    std::vector<Pin> pins;
    std::uint64_t record_every = 1;

    /// Autocorrelation lags of the magnetization, in recorded samples.
    std::vector<std::size_t> lags = {1, 2, 5, 10};
    /// Accumulate E[X_i X_j] (n^2 work per recorded sample).
    bool track_pairs = true;
    /// Batch count for batch-means standard errors.
    std::size_t batches = 32;

    void validate(std::size_t n) const;
};

/// One heat-bath update: spin `site` becomes +1 iff u < P(X_site = +1 | rest).
SpinConfig heat_bath_step(const IsingModel& model, const SpinConfig& config, std::size_t site, double u);

struct ChainStatistics {
    std::uint64_t samples = 0;
    Vector mean;
    Vector mean_se;
    /// E[X_i X_j] and Cov(X_i, X_j) with batch-means SEs (empty unless track_pairs).
    Matrix pair;
    Matrix cov;
    Matrix cov_se;
    double magnetization_mean = 0.0;   // mean spin, (1/n) sum_i X_i
    double magnetization_se = 0.0;
    std::vector<std::pair<std::size_t, double>> autocorrelation;
    /// theta'X at every recorded sample when a projection was requested.
    std::vector<double> projection_samples;
    SpinConfig final_state;
};

/// Samples from the model (or its pinned conditional) with random-scan
/// heat-bath dynamics; sites are drawn uniformly among the unpinned ones.
ChainStatistics run_chain(const IsingModel& model, const ChainConfig& config,
                          const std::optional<Vector>& projection = std::nullopt);

/// Per-level transition counts {down, stay, up} of the disagreement process.
using TransitionRow = std::array<std::uint64_t, 3>;

struct CouplingTrace {
    std::size_t n = 0;
    std::size_t pinned_site = 0;
    std::size_t extra_pins = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t record_every = 1;
    /// D_t after step burn_in + record_every, burn_in + 2 record_every, ...
    std::vector<std::uint32_t> d_series;
    /// transitions[d] counts one-step moves out of level d over the whole run.
    std::vector<TransitionRow> transitions;
    SpinConfig final_plus;
    SpinConfig final_minus;
    std::uint64_t monotone_violations = 0;
    bool ferromagnetic = true;
};

/// Two heat-bath chains sharing (site, u) at every step, with spin k pinned
/// to +1 in one and -1 in the other. `extra_pins` are further sites pinned
/// oppositely (+1 / -1). Common pins from the config hold in both chains.
/// The updated site is uniform over the n - 1 sites other than k; pinned
/// sites are left unchanged when drawn.
CouplingTrace monotone_coupled_pair(const IsingModel& model, std::size_t k, const ChainConfig& config,
                                    std::span<const std::size_t> extra_pins = {});

struct DriftRow {
    std::size_t level = 0;
    std::uint64_t visits = 0;
    double drift = 0.0;
    double drift_se = 0.0;
    double drift_bound = 0.0;
    double up_prob = 0.0;
    double up_se = 0.0;
    double up_bound = 0.0;
};

/// Empirical E[D_{t+1} - D_t | D_t = d] and P(D_{t+1} - D_t = 1 | D_t = d)
/// against -(1-alpha)d/(n-1) + (alpha + e)/(n-1) and alpha(d+1)/(n-1), with e
/// the number of extra pinned disagreements. Unvisited levels are omitted.
std::vector<DriftRow> drift_statistics(std::span<const CouplingTrace> traces, const IsingModel& model);

struct GeometricFit {
    std::size_t start_level = 0;   // d_1
    double scale = 0.0;            // c in p_d ~ c * rate^d
    double rate = 0.0;
    std::size_t points = 0;
};

struct DisagreementSummary {
    std::vector<double> pmf;
    std::uint64_t samples = 0;
    double mean = 0.0;
    double mean_se = 0.0;
    double second_moment = 0.0;
    double second_moment_se = 0.0;
    std::optional<GeometricFit> fit;
    double first_half_mean = 0.0;
    double second_half_mean = 0.0;
    double half_difference_se = 0.0;
    bool burn_in_ok = false;
    std::uint64_t monotone_violations = 0;
};

struct DisagreementOptions {
    std::size_t batches = 32;
    /// Levels with fewer samples than this are left out of the tail fit.
    std::uint64_t min_tail_count = 10;
};

/// Stationary law of D from one long coupled run (requires a ferromagnetic model).
DisagreementSummary stationary_disagreement(const IsingModel& model, std::size_t k, const ChainConfig& config,
                                            std::span<const std::size_t> extra_pins = {},
                                            const DisagreementOptions& options = {});

/// Summarizes an existing trace the same way.
DisagreementSummary summarize_disagreement(const CouplingTrace& trace, const DisagreementOptions& options = {});

/// Batch-means estimate of the mean and its standard error.
std::pair<double, double> batch_means(std::span<const double> series, std::size_t batches);

}  // namespace isingclt
