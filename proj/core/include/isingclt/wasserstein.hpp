#pragma once

#include <span>

#include "isingclt/exact.hpp"

namespace isingclt {

struct NormalParams {
    double mean = 0.0;
    double sd = 1.0;

    NormalParams() = default;
    /// Throws ValidationError unless sd > 0 and both are finite.
    NormalParams(double mean_, double sd_);
};

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse of the standard normal cdf on (0, 1).
double normal_quantile(double u);

/// 2-Wasserstein distance between a discrete law (atoms sorted by value,
/// probabilities summing to one) and a normal law, via the quantile coupling
/// integrated atom by atom in closed form.
double w2_discrete_vs_normal(std::span<const Atom> atoms, const NormalParams& ref);
double w2_discrete_vs_normal(const ProjectionPmf& pmf, const NormalParams& ref);

double w2_normal_normal(const NormalParams& p, const NormalParams& q);

/// Samples must be sorted ascending; each carries mass 1/N.
double w2_empirical(std::span<const double> sorted_samples, const NormalParams& ref);

}  // namespace isingclt
