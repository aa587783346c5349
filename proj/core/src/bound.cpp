#include "isingclt/bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isingclt/errors.hpp"
#include "isingclt/parallel.hpp"
#include "isingclt/rng.hpp"

namespace isingclt {

double contracted_statistic(const IsingModel& model, const DirectionVector& theta, const EnumerationOptions& options) {
    const MomentSummary m = moments(model, theta, options);
    return (m.M.transpose() * m.v).squaredNorm();
}

std::string to_string(SupStrategy s) {
    switch (s) {
        case SupStrategy::UniformScan: return "uniform-scan";
        case SupStrategy::Grid: return "grid";
        case SupStrategy::MultistartAscent: return "multistart-ascent";
        case SupStrategy::ProductClosedForm: return "product-closed-form";
    }
    return "unknown";
}

SupStrategy parse_sup_strategy(const std::string& name) {
    if (name == "uniform-scan") return SupStrategy::UniformScan;
    if (name == "grid") return SupStrategy::Grid;
    if (name == "multistart-ascent") return SupStrategy::MultistartAscent;
    if (name == "product-closed-form") return SupStrategy::ProductClosedForm;
    throw ValidationError("unknown sup strategy '" + name + "'");
}

double product_closed_form_sup(const DirectionVector& theta) {
    return (1024.0 / 3125.0) * theta.values().array().pow(4).sum();
}

namespace {

class FieldObjective {
public:
    FieldObjective(const IsingModel& model, const DirectionVector& theta, const EnumerationOptions& opt)
        : model_(model), theta_(theta), opt_(opt) {}

    double operator()(const Vector& h) {
        ++evaluations;
        return contracted_statistic(model_.with_field(h), theta_, opt_);
    }

    std::size_t evaluations = 0;

private:
    const IsingModel& model_;
    const DirectionVector& theta_;
    const EnumerationOptions& opt_;
};

struct Candidate {
    double value = -std::numeric_limits<double>::infinity();
    Vector field;
};

void keep_best(Candidate& best, double value, const Vector& field) {
    if (value > best.value) {
        best.value = value;
        best.field = field;
    }
}

Candidate uniform_scan(FieldObjective& f, std::size_t n, const SupOptions& opt) {
    if (opt.scan_points < 3 || !(opt.scan_max > opt.scan_min))
        throw ValidationError("sup_over_fields: uniform scan needs >= 3 points on a non-empty range");
    const auto ni = static_cast<Eigen::Index>(n);
    const double step = (opt.scan_max - opt.scan_min) / static_cast<double>(opt.scan_points - 1);
    auto eval = [&](double c) { return f(Vector::Constant(ni, c)); };

    std::size_t best_j = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < opt.scan_points; ++j) {
        const double v = eval(opt.scan_min + step * static_cast<double>(j));
        if (v > best_v) {
            best_v = v;
            best_j = j;
        }
    }
    Candidate best{best_v, Vector::Constant(ni, opt.scan_min + step * static_cast<double>(best_j))};

    // Golden-section refinement on the bracketing grid cells.
    double lo = opt.scan_min + step * static_cast<double>(best_j == 0 ? 0 : best_j - 1);
    double hi = opt.scan_min + step * static_cast<double>(std::min(best_j + 1, opt.scan_points - 1));
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = hi - g * (hi - lo);
    double c2 = lo + g * (hi - lo);
    double f1 = eval(c1);
    double f2 = eval(c2);
    while (hi - lo > 1e-10) {
        if (f1 >= f2) {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi - g * (hi - lo);
            f1 = eval(c1);
        } else {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo + g * (hi - lo);
            f2 = eval(c2);
        }
    }
    keep_best(best, f1, Vector::Constant(ni, c1));
    keep_best(best, f2, Vector::Constant(ni, c2));
    return best;
}

Candidate coordinate_ascent(FieldObjective& f, Vector h, const SupOptions& opt) {
    const Eigen::Index n = h.size();
    double value = f(h);
    std::vector<double> step(static_cast<std::size_t>(n), 0.5);
    for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        const double sweep_start = value;
        for (Eigen::Index i = 0; i < n; ++i) {
            Vector probe = h;
            probe(i) += opt.fd_step;
            const double up = f(probe);
            probe(i) = h(i) - opt.fd_step;
            const double down = f(probe);
            const double grad = (up - down) / (2.0 * opt.fd_step);
            if (grad == 0.0) continue;
            const double dir = grad > 0.0 ? 1.0 : -1.0;
            double& s = step[static_cast<std::size_t>(i)];
            bool moved = false;
            for (double trial_step = s; trial_step > 1e-12; trial_step *= 0.5) {
                Vector trial = h;
                trial(i) += dir * trial_step;
                const double tv = f(trial);
                if (tv > value) {
                    h = std::move(trial);
                    value = tv;
                    s = std::min(2.0 * trial_step, 4.0);
                    moved = true;
                    break;
                }
            }
            if (!moved) s = std::max(s * 0.5, 1e-6);
        }
        if (value - sweep_start < opt.tolerance) break;
    }
    return {value, h};
}

}  // namespace

SupResult sup_over_fields(const IsingModel& model, const DirectionVector& theta, SupStrategy strategy,
                          const SupOptions& options) {
    const std::size_t n = model.size();
    if (theta.size() != n) throw ValidationError("sup_over_fields: theta has wrong dimension");
    SupResult out;
    out.strategy = strategy;

    if (strategy == SupStrategy::ProductClosedForm) {
        if (!model.interaction().isZero(0.0))
            throw ValidationError("sup_over_fields: product-closed-form requires A = 0");
        out.sup_estimate = product_closed_form_sup(theta);
        out.field = Vector::Constant(static_cast<Eigen::Index>(n), std::atanh(1.0 / std::sqrt(5.0)));
        out.exact = true;
        return out;
    }

    FieldObjective f(model, theta, options.enumeration);
    Candidate best;
    keep_best(best, f(model.field()), model.field());

    switch (strategy) {
        case SupStrategy::UniformScan: {
            Candidate c = uniform_scan(f, n, options);
            keep_best(best, c.value, c.field);
            break;
        }
        case SupStrategy::Grid: {
            for (const Vector& h : options.grid) {
                if (static_cast<std::size_t>(h.size()) != n)
                    throw ValidationError("sup_over_fields: grid field has wrong dimension");
                keep_best(best, f(h), h);
            }
            break;
        }
        case SupStrategy::MultistartAscent: {
            Candidate scan = uniform_scan(f, n, options);
            std::vector<Vector> starts;
            starts.push_back(model.field());
            starts.push_back(scan.field);
            for (std::size_t r = 0; r < options.starts; ++r) {
                CounterRng rng = CounterRng::stream(options.seed, r);
                Vector h(static_cast<Eigen::Index>(n));
                for (Eigen::Index i = 0; i < h.size(); ++i)
                    h(i) = options.start_range * (2.0 * rng.uniform() - 1.0);
                starts.push_back(std::move(h));
            }
            std::vector<Candidate> results(starts.size());
            std::vector<std::size_t> evals(starts.size(), 0);
            parallel_for(starts.size(), [&](std::size_t s) {
                FieldObjective local(model, theta, options.enumeration);
                results[s] = coordinate_ascent(local, starts[s], options);
                evals[s] = local.evaluations;
            });
            keep_best(best, scan.value, scan.field);
            for (std::size_t s = 0; s < results.size(); ++s) {
                keep_best(best, results[s].value, results[s].field);
                f.evaluations += evals[s];
            }
            break;
        }
        case SupStrategy::ProductClosedForm: break;
    }
    out.sup_estimate = best.value;
    out.field = best.field;
    out.evaluations = f.evaluations;
    return out;
}

double bound_value(double epsilon, double sup_estimate, double poincare_constant) {
    return 5.0 * std::sqrt(epsilon) + std::sqrt(4.0 * sup_estimate * poincare_constant / std::pow(epsilon, 6));
}

BoundReport theorem1_bound(const IsingModel& model, double epsilon, double sup_estimate,
                           std::optional<double> c_p_override) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw ValidationError("theorem1_bound: epsilon must lie in (0, 1/2)");
    if (!(sup_estimate >= 0.0)) throw ValidationError("theorem1_bound: sup estimate must be >= 0");
    BoundReport rep;
    rep.epsilon = epsilon;
    rep.sup_estimate = sup_estimate;
    if (c_p_override) {
        if (!(*c_p_override > 0.0)) throw ValidationError("theorem1_bound: C_p override must be positive");
        rep.poincare_constant = *c_p_override;
        rep.poincare_override = true;
    } else {
        const SpectralReport spec = spectral_report(model);
        if (!spec.poincare_constant)
            throw ValidationError("theorem1_bound: spectral spread >= 1 and no C_p override given");
        rep.poincare_constant = *spec.poincare_constant;
    }
    rep.bound_value = bound_value(epsilon, sup_estimate, rep.poincare_constant);
    return rep;
}

EpsilonOptimum optimize_epsilon(double sup_estimate, double poincare_constant) {
    if (!(sup_estimate >= 0.0)) throw ValidationError("optimize_epsilon: sup estimate must be >= 0");
    if (!(poincare_constant > 0.0)) throw ValidationError("optimize_epsilon: C_p must be positive");
    const double c = std::sqrt(4.0 * sup_estimate * poincare_constant);
    if (c == 0.0) return {std::numeric_limits<double>::min(), 0.0};
    // d/de [5 sqrt(e) + c e^-3] = 0  <=>  e^(7/2) = 6c/5
    const double eps = std::min(kEpsilonCeiling, std::pow(6.0 * c / 5.0, 2.0 / 7.0));
    return {eps, 5.0 * std::sqrt(eps) + c / (eps * eps * eps)};
}

}  // namespace isingclt
