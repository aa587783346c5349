#include "isingclt/glauber.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "isingclt/errors.hpp"
#include "isingclt/model.hpp"
#include "isingclt/rng.hpp"

namespace isingclt {

namespace {

constexpr std::uint64_t kChainStream = 0;
constexpr std::uint64_t kCoupledStream = 1;

/// Sparse rows of A, shared by every chain on the same model.
struct Neighborhood {
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;

    explicit Neighborhood(const IsingModel& model) : rows(model.size()) {
        const std::size_t n = model.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (model.coupling(i, j) != 0.0) rows[i].emplace_back(j, model.coupling(i, j));
    }
};

/// Heat-bath chain with cached local fields.
class HeatBathChain {
public:
    HeatBathChain(const IsingModel& model, const Neighborhood& nb, SpinConfig init)
        : nb_(nb), x_(std::move(init)), local_(model.size()) {
        for (std::size_t i = 0; i < model.size(); ++i) local_[i] = model.local_field(x_, i);
    }

    /// Returns true when the spin changed.
    bool update(std::size_t site, double u) {
        const std::int8_t next = u < prob_plus_from_local_field(local_[site]) ? 1 : -1;
        if (next == x_.values[site]) return false;
        set(site, next);
        return true;
    }

    void set(std::size_t site, std::int8_t spin) {
        if (x_.values[site] == spin) return;
        const double delta = 2.0 * spin;
        for (const auto& [j, a] : nb_.rows[site]) local_[j] += a * delta;
        x_.values[site] = spin;
    }

    std::int8_t spin(std::size_t i) const { return x_.values[i]; }
    const SpinConfig& state() const { return x_; }

private:
    const Neighborhood& nb_;
    SpinConfig x_;
    std::vector<double> local_;
};

SpinConfig random_start(std::size_t n, std::span<const Pin> pins, CounterRng& rng) {
    SpinConfig x = SpinConfig::all(n, 1);
    for (std::size_t i = 0; i < n; ++i) x.values[i] = (rng() >> 63) ? 1 : -1;
    for (const Pin& p : pins) x.values[p.site] = static_cast<std::int8_t>(p.spin);
    return x;
}

std::vector<char> pin_mask(std::size_t n, std::span<const Pin> pins) {
    std::vector<char> mask(n, 0);
    for (const Pin& p : pins) mask[p.site] = 1;
    return mask;
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

void ChainConfig::validate(std::size_t n) const {
    if (steps == 0) throw ValidationError("ChainConfig: steps must be positive");
    if (burn_in >= steps) throw ValidationError("ChainConfig: burn_in must be smaller than steps");
    if (record_every == 0) throw ValidationError("ChainConfig: record_every must be positive");
    if (batches < 2) throw ValidationError("ChainConfig: need at least 2 batches");
    std::vector<char> seen(n, 0);
    for (const Pin& p : pins) {
        if (p.site >= n) throw ValidationError("ChainConfig: pin site " + std::to_string(p.site) + " out of range");
        if (p.spin != 1 && p.spin != -1) throw ValidationError("ChainConfig: pin spin must be +1 or -1");
        if (seen[p.site]) throw ValidationError("ChainConfig: duplicate pin at site " + std::to_string(p.site));
        seen[p.site] = 1;
    }
}

std::pair<double, double> batch_means(std::span<const double> series, std::size_t batches) {
    if (series.empty()) return {0.0, 0.0};
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
    batches = std::min(batches, series.size());
    if (batches < 2) return {mean, 0.0};
    const std::size_t size = series.size() / batches;
    std::vector<double> bm(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t i = 0; i < size; ++i) bm[b] += series[b * size + i];
        bm[b] /= static_cast<double>(size);
    }
    return {mean, sample_sd(bm) / std::sqrt(static_cast<double>(batches))};
}

SpinConfig heat_bath_step(const IsingModel& model, const SpinConfig& config, std::size_t site, double u) {
    SpinConfig next = config;
    next.values[site] = u < conditional_prob_plus(model, config, site) ? 1 : -1;
    return next;
}

ChainStatistics run_chain(const IsingModel& model, const ChainConfig& config, const std::optional<Vector>& projection) {
    const std::size_t n = model.size();
    config.validate(n);
    if (projection && static_cast<std::size_t>(projection->size()) != n)
        throw ValidationError("run_chain: projection has wrong dimension");

    const std::vector<char> pinned = pin_mask(n, config.pins);
    std::vector<std::size_t> free_sites;
    for (std::size_t i = 0; i < n; ++i)
        if (!pinned[i]) free_sites.push_back(i);
    if (free_sites.empty()) throw ValidationError("run_chain: every site is pinned");

    CounterRng rng = CounterRng::stream(config.seed, kChainStream);
    Neighborhood nb(model);
    HeatBathChain chain(model, nb, random_start(n, config.pins, rng));

    const std::uint64_t samples = (config.steps - config.burn_in) / config.record_every;
    if (samples < 2) throw ValidationError("run_chain: fewer than 2 recorded samples");
    const std::size_t batches = static_cast<std::size_t>(std::min<std::uint64_t>(config.batches, samples));

    const auto ni = static_cast<Eigen::Index>(n);
    std::vector<Vector> batch_sum(batches, Vector::Zero(ni));
    std::vector<Matrix> batch_pair;
    if (config.track_pairs) batch_pair.assign(batches, Matrix::Zero(ni, ni));
    std::vector<std::uint64_t> batch_count(batches, 0);
    std::vector<double> magnetization;
    magnetization.reserve(samples);

    ChainStatistics out;
    if (projection) out.projection_samples.reserve(samples);

    Vector x(ni);
    std::uint64_t recorded = 0;
    for (std::uint64_t t = 1; t <= config.steps; ++t) {
        const std::size_t site = free_sites[rng.below(free_sites.size())];
        chain.update(site, rng.uniform());
        if (t <= config.burn_in || (t - config.burn_in) % config.record_every != 0 || recorded >= samples) continue;

        const std::size_t b = static_cast<std::size_t>(recorded * batches / samples);
        double mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x(static_cast<Eigen::Index>(i)) = chain.spin(i);
            mag += chain.spin(i);
        }
        batch_sum[b] += x;
        if (config.track_pairs) batch_pair[b].selfadjointView<Eigen::Upper>().rankUpdate(x);
        ++batch_count[b];
        magnetization.push_back(mag / static_cast<double>(n));
        if (projection) out.projection_samples.push_back(projection->dot(x));
        ++recorded;
    }

    out.samples = recorded;
    out.final_state = chain.state();
    out.mean = Vector::Zero(ni);
    for (const auto& s : batch_sum) out.mean += s;
    out.mean /= static_cast<double>(recorded);

    std::vector<Vector> batch_mean(batches);
    for (std::size_t b = 0; b < batches; ++b) batch_mean[b] = batch_sum[b] / static_cast<double>(batch_count[b]);
    out.mean_se = Vector::Zero(ni);
    for (const auto& bm : batch_mean) out.mean_se += (bm - out.mean).cwiseAbs2();
    out.mean_se = (out.mean_se / static_cast<double>((batches - 1) * batches)).cwiseSqrt();

    if (config.track_pairs) {
        out.pair = Matrix::Zero(ni, ni);
        std::vector<Matrix> batch_cov(batches);
        for (std::size_t b = 0; b < batches; ++b) {
            Matrix full = batch_pair[b].selfadjointView<Eigen::Upper>();
            out.pair += full;
            full /= static_cast<double>(batch_count[b]);
            batch_cov[b] = full - batch_mean[b] * batch_mean[b].transpose();
        }
        out.pair /= static_cast<double>(recorded);
        out.cov = out.pair - out.mean * out.mean.transpose();
        out.cov_se = Matrix::Zero(ni, ni);
        Matrix cov_bar = Matrix::Zero(ni, ni);
        for (const auto& c : batch_cov) cov_bar += c;
        cov_bar /= static_cast<double>(batches);
        for (const auto& c : batch_cov) out.cov_se += (c - cov_bar).cwiseAbs2();
        out.cov_se = (out.cov_se / static_cast<double>((batches - 1) * batches)).cwiseSqrt();
    }

    auto [mag_mean, mag_se] = batch_means(magnetization, batches);
    out.magnetization_mean = mag_mean;
    out.magnetization_se = mag_se;
    double var0 = 0.0;
    for (double m : magnetization) var0 += (m - mag_mean) * (m - mag_mean);
    for (std::size_t lag : config.lags) {
        if (lag >= magnetization.size()) continue;
        double c = 0.0;
        for (std::size_t i = 0; i + lag < magnetization.size(); ++i)
            c += (magnetization[i] - mag_mean) * (magnetization[i + lag] - mag_mean);
        out.autocorrelation.emplace_back(lag, var0 > 0.0 ? c / var0 : 0.0);
    }
    return out;
}

CouplingTrace monotone_coupled_pair(const IsingModel& model, std::size_t k, const ChainConfig& config,
                                    std::span<const std::size_t> extra_pins) {
    const std::size_t n = model.size();
    config.validate(n);
    if (n < 2) throw ValidationError("monotone_coupled_pair: need at least 2 sites");
    if (k >= n) throw ValidationError("monotone_coupled_pair: pinned site out of range");

    std::vector<char> pinned = pin_mask(n, config.pins);
    if (pinned[k]) throw ValidationError("monotone_coupled_pair: site k is also a common pin");
    pinned[k] = 1;
    for (std::size_t s : extra_pins) {
        if (s >= n) throw ValidationError("monotone_coupled_pair: extra pin out of range");
        if (pinned[s]) throw ValidationError("monotone_coupled_pair: extra pin " + std::to_string(s) + " collides");
        pinned[s] = 1;
    }

    CounterRng rng = CounterRng::stream(config.seed, kCoupledStream);
    SpinConfig start = random_start(n, config.pins, rng);
    SpinConfig plus_start = start;
    SpinConfig minus_start = start;
    plus_start.values[k] = 1;
    minus_start.values[k] = -1;
    for (std::size_t s : extra_pins) {
        plus_start.values[s] = 1;
        minus_start.values[s] = -1;
    }

    Neighborhood nb(model);
    HeatBathChain plus(model, nb, plus_start);
    HeatBathChain minus(model, nb, minus_start);

    std::vector<std::size_t> others;
    others.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
        if (j != k) others.push_back(j);

    CouplingTrace trace;
    trace.n = n;
    trace.pinned_site = k;
    trace.extra_pins = extra_pins.size();
    trace.burn_in = config.burn_in;
    trace.record_every = config.record_every;
    trace.ferromagnetic = model.is_ferromagnetic();
    trace.transitions.assign(n, TransitionRow{0, 0, 0});
    trace.d_series.reserve((config.steps - config.burn_in) / config.record_every);

    std::uint32_t d = 0;
    for (std::size_t j : others)
        if (plus.spin(j) != minus.spin(j)) ++d;

    for (std::uint64_t t = 1; t <= config.steps; ++t) {
        const std::size_t j = others[rng.below(others.size())];
        const double u = rng.uniform();
        const std::uint32_t before = d;
        if (!pinned[j]) {
            const bool was_diff = plus.spin(j) != minus.spin(j);
            plus.update(j, u);
            minus.update(j, u);
            const bool is_diff = plus.spin(j) != minus.spin(j);
            if (minus.spin(j) > plus.spin(j)) ++trace.monotone_violations;
            if (was_diff != is_diff) d = is_diff ? d + 1 : d - 1;
        }
        trace.transitions[before][static_cast<std::size_t>(static_cast<int>(d) - static_cast<int>(before) + 1)]++;
        if (t > config.burn_in && (t - config.burn_in) % config.record_every == 0) trace.d_series.push_back(d);
    }
    trace.final_plus = plus.state();
    trace.final_minus = minus.state();
    return trace;
}

std::vector<DriftRow> drift_statistics(std::span<const CouplingTrace> traces, const IsingModel& model) {
    if (traces.empty()) return {};
    const std::size_t n = model.size();
    const std::size_t extra = traces.front().extra_pins;
    for (const auto& tr : traces) {
        if (tr.n != n) throw ValidationError("drift_statistics: trace does not match the model size");
        if (tr.extra_pins != extra) throw ValidationError("drift_statistics: traces disagree on extra pins");
        if (tr.record_every != 1) throw ValidationError("drift_statistics: traces must use record_every = 1");
    }
    const double alpha = dobrushin_report(model).alpha;
    const double nm1 = static_cast<double>(n - 1);

    std::vector<TransitionRow> total(n, TransitionRow{0, 0, 0});
    for (const auto& tr : traces)
        for (std::size_t d = 0; d < tr.transitions.size(); ++d)
            for (std::size_t c = 0; c < 3; ++c) total[d][c] += tr.transitions[d][c];

    std::vector<DriftRow> rows;
    for (std::size_t d = 0; d < total.size(); ++d) {
        const auto [down, stay, up] = total[d];
        const std::uint64_t visits = down + stay + up;
        if (visits == 0) continue;
        const double v = static_cast<double>(visits);
        DriftRow r;
        r.level = d;
        r.visits = visits;
        r.drift = (static_cast<double>(up) - static_cast<double>(down)) / v;
        const double second = (static_cast<double>(up) + static_cast<double>(down)) / v;
        r.drift_se = std::sqrt(std::max(0.0, second - r.drift * r.drift) / v);
        r.up_prob = static_cast<double>(up) / v;
        r.up_se = std::sqrt(r.up_prob * (1.0 - r.up_prob) / v);
        const double dd = static_cast<double>(d);
        r.drift_bound = -(1.0 - alpha) * dd / nm1 + (alpha + static_cast<double>(extra)) / nm1;
        r.up_bound = alpha * (dd + 1.0) / nm1;
        rows.push_back(r);
    }
    return rows;
}

DisagreementSummary summarize_disagreement(const CouplingTrace& trace, const DisagreementOptions& options) {
    DisagreementSummary s;
    s.monotone_violations = trace.monotone_violations;
    s.samples = trace.d_series.size();
    if (s.samples == 0) return s;

    std::vector<std::uint64_t> counts;
    std::vector<double> d1(trace.d_series.size());
    std::vector<double> d2(trace.d_series.size());
    for (std::size_t i = 0; i < trace.d_series.size(); ++i) {
        const std::uint32_t d = trace.d_series[i];
        if (d >= counts.size()) counts.resize(d + 1, 0);
        ++counts[d];
        d1[i] = d;
        d2[i] = static_cast<double>(d) * d;
    }
    s.pmf.resize(counts.size());
    for (std::size_t d = 0; d < counts.size(); ++d)
        s.pmf[d] = static_cast<double>(counts[d]) / static_cast<double>(s.samples);

    std::tie(s.mean, s.mean_se) = batch_means(d1, options.batches);
    std::tie(s.second_moment, s.second_moment_se) = batch_means(d2, options.batches);

    const std::size_t half = d1.size() / 2;
    auto [m1, se1] = batch_means(std::span<const double>(d1).first(half), options.batches / 2);
    auto [m2, se2] = batch_means(std::span<const double>(d1).subspan(half), options.batches / 2);
    s.first_half_mean = m1;
    s.second_half_mean = m2;
    s.half_difference_se = std::sqrt(se1 * se1 + se2 * se2);
    s.burn_in_ok = std::abs(m1 - m2) <= 2.0 * s.half_difference_se;

    // Tail fit: start at the first level past the mode with p_d < 0.1 p_mode.
    const auto mode_it = std::max_element(s.pmf.begin(), s.pmf.end());
    const std::size_t mode = static_cast<std::size_t>(mode_it - s.pmf.begin());
    std::size_t start = s.pmf.size();
    for (std::size_t d = mode + 1; d < s.pmf.size(); ++d)
        if (s.pmf[d] < 0.1 * *mode_it) {
            start = d;
            break;
        }
    std::vector<double> xs, ys;
    for (std::size_t d = start; d < s.pmf.size(); ++d)
        if (counts[d] >= options.min_tail_count) {
            xs.push_back(static_cast<double>(d));
            ys.push_back(std::log(s.pmf[d]));
        }
    if (xs.size() >= 2) {
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        const double slope = sxy / sxx;
        s.fit = GeometricFit{start, std::exp(my - slope * mx), std::exp(slope), xs.size()};
    }
    return s;
}

DisagreementSummary stationary_disagreement(const IsingModel& model, std::size_t k, const ChainConfig& config,
                                            std::span<const std::size_t> extra_pins,
                                            const DisagreementOptions& options) {
    if (!model.is_ferromagnetic())
        throw ValidationError("stationary_disagreement: model must be ferromagnetic");
    return summarize_disagreement(monotone_coupled_pair(model, k, config, extra_pins), options);
}

}  // namespace isingclt
