#include "isingclt/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "isingclt/errors.hpp"
#include "isingclt/parallel.hpp"
#include "isingclt/rng.hpp"
#include "isingclt/wasserstein.hpp"

namespace isingclt {

std::size_t LatticeSpec::volume() const {
    std::size_t v = 1;
    for (std::size_t s : sides) {
        if (s != 0 && v > kMaxLatticeVolume / s + 1) return kMaxLatticeVolume + 1;
        v *= s;
    }
    return v;
}

void LatticeSpec::validate() const {
    if (sides.empty()) throw ValidationError("LatticeSpec: dimension must be positive");
    for (std::size_t s : sides)
        if (s == 0) throw ValidationError("LatticeSpec: side lengths must be positive");
    if (range == 0) throw ValidationError("LatticeSpec: range must be positive");
    if (coupling.size() != range) throw ValidationError("LatticeSpec: need one coupling per distance 1..range");
    for (double c : coupling)
        if (!std::isfinite(c)) throw ValidationError("LatticeSpec: non-finite coupling");
    const std::size_t v = volume();
    if (v > kMaxLatticeVolume)
        throw ValidationError("LatticeSpec: volume exceeds " + std::to_string(kMaxLatticeVolume) + " sites");
    if (field.size() != 1 && field.size() != v)
        throw ValidationError("LatticeSpec: field must have 1 or |box| entries");
}

std::vector<std::size_t> LatticeSpec::coordinates(std::size_t site) const {
    std::vector<std::size_t> c(sides.size());
    for (std::size_t k = sides.size(); k-- > 0;) {
        c[k] = site % sides[k];
        site /= sides[k];
    }
    return c;
}

std::size_t LatticeSpec::index(std::span<const std::size_t> coords) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < sides.size(); ++k) idx = idx * sides[k] + coords[k];
    return idx;
}

std::size_t LatticeSpec::distance(std::size_t i, std::size_t j) const {
    const auto ci = coordinates(i);
    const auto cj = coordinates(j);
    std::size_t d = 0;
    for (std::size_t k = 0; k < sides.size(); ++k) {
        std::size_t diff = ci[k] > cj[k] ? ci[k] - cj[k] : cj[k] - ci[k];
        if (boundary == Boundary::Periodic) diff = std::min(diff, sides[k] - diff);
        d = std::max(d, diff);
    }
    return d;
}

IsingModel build_box_model(const LatticeSpec& spec) {
    spec.validate();
    const std::size_t n = spec.volume();
    const auto ni = static_cast<Eigen::Index>(n);
    Matrix a = Matrix::Zero(ni, ni);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::size_t d = spec.distance(i, j);
            if (d >= 1 && d <= spec.range)
                a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = spec.coupling[d - 1];
        }
    Vector h(ni);
    for (std::size_t i = 0; i < n; ++i)
        h(static_cast<Eigen::Index>(i)) = spec.field.size() == 1 ? spec.field[0] : spec.field[i];
    return validate_model(a, h);
}

LatticeSpec chain_spec(std::size_t n, double beta, double field, Boundary boundary) {
    LatticeSpec s;
    s.sides = {n};
    s.range = 1;
    s.coupling = {beta};
    s.field = {field};
    s.boundary = boundary;
    return s;
}

IsingModel dobrushin_ferromagnet(std::size_t n, double alpha, std::size_t matchings, double field,
                                 std::uint64_t seed) {
    if (n < 2) throw ValidationError("dobrushin_ferromagnet: need at least 2 sites");
    if (matchings == 0) throw ValidationError("dobrushin_ferromagnet: need at least one matching");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("dobrushin_ferromagnet: alpha must be >= 0");
    const auto ni = static_cast<Eigen::Index>(n);
    Matrix a = Matrix::Zero(ni, ni);
    const double w = alpha / static_cast<double>(matchings);
    std::vector<std::size_t> perm(n);
    for (std::size_t m = 0; m < matchings; ++m) {
        CounterRng rng = CounterRng::stream(seed, m);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
        for (std::size_t p = 0; p + 1 < n; p += 2) {
            const auto i = static_cast<Eigen::Index>(perm[p]);
            const auto j = static_cast<Eigen::Index>(perm[p + 1]);
            a(i, j) += w;
            a(j, i) += w;
        }
    }
    IsingModel model = validate_model(a, Vector::Constant(ni, field));
    model.set_label("dobrushin-ferromagnet");
    return model;
}

std::string to_string(Estimator e) { return e == Estimator::Exact ? "exact" : "mcmc"; }

Estimator parse_estimator(const std::string& name) {
    if (name == "exact") return Estimator::Exact;
    if (name == "mcmc") return Estimator::Mcmc;
    throw ValidationError("unknown estimator '" + name + "'");
}

std::optional<LinearFit> fit_line(std::span<const double> x, std::span<const double> y,
                                  std::span<const double> weights) {
    const std::size_t m = x.size();
    if (m < 2 || y.size() != m || (!weights.empty() && weights.size() != m)) return std::nullopt;
    auto wt = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
    double sw = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sw += wt(i);
        mx += wt(i) * x[i];
        my += wt(i) * y[i];
    }
    mx /= sw;
    my /= sw;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += wt(i) * (x[i] - mx) * (x[i] - mx);
        sxy += wt(i) * (x[i] - mx) * (y[i] - my);
        syy += wt(i) * (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) return std::nullopt;
    LinearFit f;
    f.points = m;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        sse += wt(i) * r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    if (weights.empty()) {
        f.slope_se = m > 2 ? std::sqrt(sse / static_cast<double>(m - 2) / sxx) : 0.0;
    } else {
        // Weights are inverse variances.
        f.slope_se = std::sqrt(1.0 / sxx);
    }
    return f;
}

DecayProfile correlation_decay_profile(const LatticeSpec& spec, const IsingModel& model, std::size_t origin,
                                       Estimator estimator, const ChainConfig& chain,
                                       const EnumerationOptions& options) {
    spec.validate();
    const std::size_t n = model.size();
    if (spec.volume() != n) throw ValidationError("correlation_decay_profile: lattice and model sizes differ");
    if (origin >= n) throw ValidationError("correlation_decay_profile: origin out of range");

    Matrix cov;
    Matrix cov_se;
    if (estimator == Estimator::Exact) {
        cov = moments(model, DirectionVector::uniform(n), options).cov;
        cov_se = Matrix::Zero(cov.rows(), cov.cols());
    } else {
        ChainConfig cfg = chain;
        cfg.track_pairs = true;
        const ChainStatistics stats = run_chain(model, cfg);
        cov = stats.cov;
        cov_se = stats.cov_se;
    }

    std::size_t max_d = 0;
    for (std::size_t j = 0; j < n; ++j) max_d = std::max(max_d, spec.distance(origin, j));
    DecayProfile prof;
    for (std::size_t d = 1; d <= max_d; ++d) {
        DecayRow row;
        row.distance = d;
        bool any = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (spec.distance(origin, j) != d) continue;
            ++row.shell_size;
            const double c = std::abs(cov(static_cast<Eigen::Index>(origin), static_cast<Eigen::Index>(j)));
            if (!any || c > row.max_abs_cov) {
                row.max_abs_cov = c;
                row.se = cov_se(static_cast<Eigen::Index>(origin), static_cast<Eigen::Index>(j));
                row.site = j;
                any = true;
            }
        }
        if (any) prof.rows.push_back(row);
    }

    // Roundoff floor for enumerated covariances.
    constexpr double kExactFloor = 1e-13;
    std::vector<double> xs, ys, ws;
    for (const DecayRow& r : prof.rows) {
        const bool significant = estimator == Estimator::Exact ? r.max_abs_cov > kExactFloor
                                                               : r.max_abs_cov > 3.0 * r.se && r.se > 0.0;
        if (!significant) continue;
        xs.push_back(static_cast<double>(r.distance));
        ys.push_back(std::log(r.max_abs_cov));
        if (estimator == Estimator::Mcmc) {
            const double rel = r.se / r.max_abs_cov;  // SE of the log by the delta method
            ws.push_back(1.0 / (rel * rel));
        }
    }
    prof.fit = fit_line(xs, ys, ws);
    return prof;
}

namespace {

struct StandardizedMoments {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

StandardizedMoments standardized_from_pmf(const ProjectionPmf& pmf, double mu, double sigma) {
    double m3 = 0.0, m4 = 0.0;
    for (const Atom& a : pmf.atoms) {
        const double z = (a.value - mu) / sigma;
        m3 += a.prob * z * z * z;
        m4 += a.prob * z * z * z * z;
    }
    return {m3, m4 - 3.0};
}

struct ReplicaResult {
    double mu = 0.0;
    double var = 0.0;
    double w2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    std::size_t count = 0;
};

std::optional<double> bound_for(const IsingModel& model, const DirectionVector& theta, const CltOptions& opt) {
    std::optional<double> cp;
    const SpectralReport spec = spectral_report(model);
    if (spec.poincare_constant) {
        cp = spec.poincare_constant;
    } else {
        const double alpha = dobrushin_report(model).alpha;
        if (alpha < 1.0) cp = 1.0 / (1.0 - alpha);
    }
    if (!cp) return std::nullopt;
    SupStrategy strategy = opt.bound_strategy;
    if (model.interaction().isZero(0.0)) strategy = SupStrategy::ProductClosedForm;
    else if (strategy == SupStrategy::ProductClosedForm) return std::nullopt;
    SupOptions so;
    so.enumeration = opt.enumeration;
    const SupResult sup = sup_over_fields(model, theta, strategy, so);
    return optimize_epsilon(sup.sup_estimate, *cp).bound_value;
}

}  // namespace

std::vector<CltRow> clt_convergence_experiment(std::span<const IsingModel> family, const CltOptions& options) {
    std::vector<CltRow> rows(family.size());
    if (options.estimator == Estimator::Exact) {
        parallel_for(family.size(), [&](std::size_t f) {
            const IsingModel& model = family[f];
            const std::size_t n = model.size();
            const DirectionVector theta = DirectionVector::uniform(n);
            const ProjectionPmf pmf = exact_pmf_of_projection(model, theta, kDefaultMergeTolerance, options.enumeration);
            CltRow& row = rows[f];
            row.n = n;
            row.replicas = 1;
            row.mu_n = pmf.mean();
            row.sigma2_n = pmf.variance();
            row.degenerate = row.sigma2_n < kDegenerateVariance;
            if (!row.degenerate) {
                const double sd = std::sqrt(row.sigma2_n);
                row.w2 = w2_discrete_vs_normal(pmf, NormalParams(row.mu_n, sd));
                const StandardizedMoments sm = standardized_from_pmf(pmf, row.mu_n, sd);
                row.skewness = sm.skewness;
                row.excess_kurtosis = sm.excess_kurtosis;
            }
            if (options.with_bound) row.bound = bound_for(model, theta, options);
        });
        return rows;
    }

    if (options.seeds.empty()) throw ValidationError("clt_convergence_experiment: need at least one seed");
    const std::size_t reps = options.seeds.size();
    std::vector<ReplicaResult> results(family.size() * reps);
    parallel_for(results.size(), [&](std::size_t task) {
        const IsingModel& model = family[task / reps];
        ChainConfig cfg = options.chain;
        cfg.seed = options.seeds[task % reps];
        cfg.track_pairs = false;
        cfg.pins.clear();
        const Vector theta = DirectionVector::uniform(model.size()).values();
        ChainStatistics stats = run_chain(model, cfg, theta);
        std::vector<double>& w = stats.projection_samples;
        ReplicaResult& r = results[task];
        r.count = w.size();
        const double cnt = static_cast<double>(w.size());
        r.mu = std::accumulate(w.begin(), w.end(), 0.0) / cnt;
        for (double x : w) r.var += (x - r.mu) * (x - r.mu);
        r.var /= cnt;
        if (r.var >= kDegenerateVariance) {
            const double sd = std::sqrt(r.var);
            for (double x : w) {
                const double z = (x - r.mu) / sd;
                r.m3 += z * z * z / cnt;
                r.m4 += z * z * z * z / cnt;
            }
            std::sort(w.begin(), w.end());
            r.w2 = w2_empirical(w, NormalParams(r.mu, sd));
        }
    });

    for (std::size_t f = 0; f < family.size(); ++f) {
        CltRow& row = rows[f];
        row.n = family[f].size();
        row.replicas = reps;
        double w2_sum = 0.0, w2_sq = 0.0, m3 = 0.0, m4 = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            const ReplicaResult& rr = results[f * reps + r];
            row.mu_n += rr.mu / static_cast<double>(reps);
            row.sigma2_n += rr.var / static_cast<double>(reps);
            w2_sum += rr.w2;
            w2_sq += rr.w2 * rr.w2;
            m3 += rr.m3;
            m4 += rr.m4;
        }
        row.degenerate = row.sigma2_n < kDegenerateVariance;
        if (row.degenerate) continue;
        const double k = static_cast<double>(reps);
        const double mean = w2_sum / k;
        row.w2 = mean;
        row.w2_se = reps > 1 ? std::sqrt(std::max(0.0, (w2_sq - k * mean * mean) / (k - 1.0)) / k) : 0.0;
        row.skewness = m3 / k;
        row.excess_kurtosis = m4 / k - 3.0;
    }
    return rows;
}

}  // namespace isingclt
