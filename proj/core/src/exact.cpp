#include "isingclt/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gray_walk.hpp"
#include "isingclt/errors.hpp"
#include "isingclt/parallel.hpp"

namespace isingclt {

using detail::BlockPlan;
using detail::GrayWalker;

DirectionVector::DirectionVector(Vector theta) : theta_(std::move(theta)) {
    if (theta_.size() == 0) throw ValidationError("DirectionVector: empty vector");
    if (!theta_.allFinite()) throw ValidationError("DirectionVector: non-finite entry");
    if (std::abs(theta_.norm() - 1.0) > 1e-12)
        throw ValidationError("DirectionVector: theta must be a unit vector");
}

DirectionVector DirectionVector::normalized(const Vector& v) {
    double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw ValidationError("DirectionVector: cannot normalize a zero or non-finite vector");
    return DirectionVector(v / norm);
}

DirectionVector DirectionVector::uniform(std::size_t n) {
    return DirectionVector(Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(static_cast<double>(n))));
}

DirectionVector DirectionVector::basis(std::size_t n, std::size_t i) {
    if (i >= n) throw ValidationError("DirectionVector::basis: index out of range");
    Vector e = Vector::Zero(static_cast<Eigen::Index>(n));
    e(static_cast<Eigen::Index>(i)) = 1.0;
    return DirectionVector(std::move(e));
}

double ProjectionPmf::mean() const {
    double m = 0.0;
    for (const Atom& a : atoms) m += a.prob * a.value;
    return m;
}

double ProjectionPmf::variance() const {
    const double m = mean();
    double v = 0.0;
    for (const Atom& a : atoms) v += a.prob * (a.value - m) * (a.value - m);
    return v;
}

namespace {

double max_energy(const IsingModel& model, const BlockPlan& plan) {
    std::vector<double> block_max(plan.blocks, -std::numeric_limits<double>::infinity());
    parallel_for(plan.blocks, [&](std::size_t b) {
        GrayWalker w(model);
        double m = -std::numeric_limits<double>::infinity();
        detail::walk_block(w, plan, b, [&](const GrayWalker& g) { m = std::max(m, g.energy()); });
        block_max[b] = m;
    });
    return *std::max_element(block_max.begin(), block_max.end());
}

struct MomentAccumulator {
    std::size_t n = 0;
    double z = 0.0;
    double ew = 0.0;
    double ew2 = 0.0;
    std::vector<double> m;   // sum w x_i
    std::vector<double> r;   // sum w x_i W
    std::vector<double> s;   // sum w x_i x_k, upper triangle, row-major n*n
    std::vector<double> t;   // sum w x_i x_k W, upper triangle

    explicit MomentAccumulator(std::size_t n_)
        : n(n_), m(n_, 0.0), r(n_, 0.0), s(n_ * n_, 0.0), t(n_ * n_, 0.0) {}

    void add(const std::vector<double>& x, double weight, double w_val) {
        z += weight;
        ew += weight * w_val;
        ew2 += weight * w_val * w_val;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = weight * x[i];
            const double aw = a * w_val;
            m[i] += a;
            r[i] += aw;
            double* srow = s.data() + i * n;
            double* trow = t.data() + i * n;
            for (std::size_t k = i; k < n; ++k) {
                srow[k] += a * x[k];
                trow[k] += aw * x[k];
            }
        }
    }

    void merge(const MomentAccumulator& o) {
        z += o.z;
        ew += o.ew;
        ew2 += o.ew2;
        for (std::size_t i = 0; i < n; ++i) {
            m[i] += o.m[i];
            r[i] += o.r[i];
        }
        for (std::size_t i = 0; i < n * n; ++i) {
            s[i] += o.s[i];
            t[i] += o.t[i];
        }
    }
};

}  // namespace

double log_partition(const IsingModel& model, const EnumerationOptions& options) {
    const std::size_t n = model.size();
    detail::check_cap(n, options.max_sites, "log_partition");
    const BlockPlan plan = BlockPlan::make(n);
    const double umax = max_energy(model, plan);

    std::vector<double> block_sum(plan.blocks, 0.0);
    parallel_for(plan.blocks, [&](std::size_t b) {
        GrayWalker w(model);
        double acc = 0.0;
        detail::walk_block(w, plan, b, [&](const GrayWalker& g) { acc += std::exp(g.energy() - umax); });
        block_sum[b] = acc;
    });
    double total = 0.0;
    for (double v : block_sum) total += v;
    return umax + std::log(total);
}

MomentSummary moments(const IsingModel& model, const DirectionVector& theta, const EnumerationOptions& options) {
    const std::size_t n = model.size();
    if (theta.size() != n) throw ValidationError("moments: theta has wrong dimension");
    detail::check_cap(n, options.max_sites, "moments");
    const BlockPlan plan = BlockPlan::make(n);
    const double umax = max_energy(model, plan);
    const Vector& th = theta.values();

    std::vector<MomentAccumulator> parts(plan.blocks, MomentAccumulator(n));
    parallel_for(plan.blocks, [&](std::size_t b) {
        GrayWalker w(model);
        MomentAccumulator& acc = parts[b];
        bool first = true;
        double w_val = 0.0;
        const std::uint64_t start = b * plan.block_size;
        w.start(start);
        for (std::uint64_t k = start; k < start + plan.block_size; ++k) {
            if (first) {
                w_val = 0.0;
                for (std::size_t i = 0; i < n; ++i) w_val += th(static_cast<Eigen::Index>(i)) * w.spins()[i];
                first = false;
            } else {
                std::size_t flipped = w.advance(k);
                w_val += 2.0 * th(static_cast<Eigen::Index>(flipped)) * w.spins()[flipped];
            }
            acc.add(w.spins(), std::exp(w.energy() - umax), w_val);
        }
    });
    MomentAccumulator total(n);
    for (const auto& p : parts) total.merge(p);

    const auto ni = static_cast<Eigen::Index>(n);
    const double inv_z = 1.0 / total.z;
    MomentSummary out;
    out.log_partition = umax + std::log(total.z);
    out.mean.resize(ni);
    out.cross_raw.resize(ni);
    out.second_raw.resize(ni, ni);
    out.third_raw.resize(ni, ni);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        out.mean(ii) = total.m[i] * inv_z;
        out.cross_raw(ii) = total.r[i] * inv_z;
        for (std::size_t k = i; k < n; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double sv = (i == k) ? 1.0 : total.s[i * n + k] * inv_z;
            const double tv = total.t[i * n + k] * inv_z;
            out.second_raw(ii, kk) = out.second_raw(kk, ii) = sv;
            out.third_raw(ii, kk) = out.third_raw(kk, ii) = tv;
        }
    }
    const double mu = total.ew * inv_z;
    out.mu_n = mu;
    out.sigma2_n = std::max(0.0, total.ew2 * inv_z - mu * mu);

    const Vector& m = out.mean;
    out.cov = out.second_raw - m * m.transpose();
    out.v = out.cross_raw - mu * m;
    // E[(X_i - m_i)(X_k - m_k)(W - mu)]
    //   = E[X_i X_k W] - m_i E[X_k W] - m_k E[X_i W] - mu E[X_i X_k] + 2 m_i m_k mu
    out.M = out.third_raw - m * out.cross_raw.transpose() - out.cross_raw * m.transpose() -
            mu * out.second_raw + 2.0 * mu * (m * m.transpose());
    return out;
}

ClampedModel clamp(const IsingModel& model, std::span<const Pin> pins) {
    const std::size_t n = model.size();
    std::vector<int> pinned(n, 0);
    for (const Pin& p : pins) {
        if (p.site >= n) throw ValidationError("clamp: pin site " + std::to_string(p.site) + " out of range");
        if (p.spin != 1 && p.spin != -1) throw ValidationError("clamp: pin spin must be +1 or -1");
        if (pinned[p.site] != 0) throw ValidationError("clamp: duplicate pin at site " + std::to_string(p.site));
        pinned[p.site] = p.spin;
    }
    ClampedModel out;
    for (std::size_t i = 0; i < n; ++i)
        if (pinned[i] == 0) out.free_sites.push_back(i);
    if (out.free_sites.empty()) throw ValidationError("clamp: every site is pinned");

    const auto m = static_cast<Eigen::Index>(out.free_sites.size());
    Matrix a(m, m);
    Vector h(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto i = static_cast<Eigen::Index>(out.free_sites[static_cast<std::size_t>(r)]);
        double field = model.field()(i);
        for (std::size_t j = 0; j < n; ++j)
            if (pinned[j] != 0) field += model.interaction()(i, static_cast<Eigen::Index>(j)) * pinned[j];
        h(r) = field;
        for (Eigen::Index c = 0; c < m; ++c)
            a(r, c) = model.interaction()(i, static_cast<Eigen::Index>(out.free_sites[static_cast<std::size_t>(c)]));
    }
    out.model = validate_model(a, h);
    out.model.set_label(model.label());
    return out;
}

namespace {

struct WeightedValue {
    double value;
    double log_weight;
    std::uint64_t index;
};

}  // namespace

ProjectionPmf exact_pmf_of_projection(const IsingModel& model, const DirectionVector& theta, double merge_tol,
                                      const EnumerationOptions& options) {
    const std::size_t n = model.size();
    if (theta.size() != n) throw ValidationError("exact_pmf_of_projection: theta has wrong dimension");
    if (!(merge_tol >= 0.0)) throw ValidationError("exact_pmf_of_projection: merge tolerance must be >= 0");
    detail::check_cap(n, options.max_sites, "exact_pmf_of_projection");
    const BlockPlan plan = BlockPlan::make(n);
    const Vector& th = theta.values();

    std::vector<WeightedValue> all(plan.total);
    parallel_for(plan.blocks, [&](std::size_t b) {
        GrayWalker w(model);
        const std::uint64_t start = b * plan.block_size;
        w.start(start);
        double w_val = 0.0;
        for (std::size_t i = 0; i < n; ++i) w_val += th(static_cast<Eigen::Index>(i)) * w.spins()[i];
        all[start] = {w_val, w.energy(), start};
        for (std::uint64_t k = start + 1; k < start + plan.block_size; ++k) {
            std::size_t flipped = w.advance(k);
            w_val += 2.0 * th(static_cast<Eigen::Index>(flipped)) * w.spins()[flipped];
            all[k] = {w_val, w.energy(), k};
        }
    });

    double umax = -std::numeric_limits<double>::infinity();
    for (const auto& e : all) umax = std::max(umax, e.log_weight);
    std::sort(all.begin(), all.end(), [](const WeightedValue& a, const WeightedValue& b) {
        return a.value != b.value ? a.value < b.value : a.index < b.index;
    });

    // Merge runs whose consecutive gaps are within merge_tol; the atom sits at
    // the probability-weighted mean of its run.
    ProjectionPmf pmf;
    double z = 0.0;
    double run_mass = 0.0;
    double run_moment = 0.0;
    double last_value = 0.0;
    for (std::size_t idx = 0; idx < all.size(); ++idx) {
        const double wgt = std::exp(all[idx].log_weight - umax);
        if (idx > 0 && all[idx].value - last_value > merge_tol) {
            pmf.atoms.push_back({run_moment / run_mass, run_mass});
            run_mass = run_moment = 0.0;
        }
        run_mass += wgt;
        run_moment += wgt * all[idx].value;
        last_value = all[idx].value;
        z += wgt;
    }
    pmf.atoms.push_back({run_moment / run_mass, run_mass});

    std::erase_if(pmf.atoms, [](const Atom& a) { return !(a.prob > 0.0); });
    for (Atom& a : pmf.atoms) a.prob /= z;
    return pmf;
}

ExactSampler::ExactSampler(const IsingModel& model, const EnumerationOptions& options) : n_(model.size()) {
    detail::check_cap(n_, options.max_sites, "ExactSampler");
    if (n_ > 32) throw NumericalError("ExactSampler: at most 32 sites");
    const BlockPlan plan = BlockPlan::make(n_);
    const double umax = max_energy(model, plan);

    codes_.resize(plan.total);
    std::vector<double> weights(plan.total);
    parallel_for(plan.blocks, [&](std::size_t b) {
        GrayWalker w(model);
        detail::walk_block(w, plan, b, [&, k = b * plan.block_size](const GrayWalker& g) mutable {
            codes_[k] = static_cast<std::uint32_t>(g.code());
            weights[k] = std::exp(g.energy() - umax);
            ++k;
        });
    });
    cumulative_.resize(plan.total);
    std::partial_sum(weights.begin(), weights.end(), cumulative_.begin());
}

SpinConfig ExactSampler::draw(CounterRng& rng) const {
    const double target = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) --it;
    return SpinConfig::from_code(codes_[static_cast<std::size_t>(it - cumulative_.begin())], n_);
}

std::vector<SpinConfig> sample_exact(const IsingModel& model, std::size_t count, std::uint64_t seed,
                                     const EnumerationOptions& options) {
    ExactSampler sampler(model, options);
    CounterRng rng = CounterRng::stream(seed, 0);
    std::vector<SpinConfig> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.draw(rng));
    return out;
}

}  // namespace isingclt
