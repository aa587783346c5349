#include "isingclt/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "isingclt/errors.hpp"

namespace isingclt {

NormalParams::NormalParams(double mean_, double sd_) : mean(mean_), sd(sd_) {
    if (!std::isfinite(mean) || !std::isfinite(sd) || !(sd > 0.0))
        throw ValidationError("NormalParams: need finite mean and sd > 0");
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

// Acklam's rational approximation, relative error below 1.2e-9 on (0, 1/2].
double quantile_lower(double u) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    double x;
    if (u < 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    // One Newton step on Phi(x) = u.
    return x - (normal_cdf(x) - u) / normal_pdf(x);
}

struct QuantileTerms {
    double pdf_at_q = 0.0;    // phi(Phi^-1(u))
    double q_pdf_at_q = 0.0;  // Phi^-1(u) phi(Phi^-1(u))
};

constexpr double kEndpointClamp = 1e-15;

QuantileTerms terms_at(double u) {
    // Both antiderivative pieces vanish at u = 0 and u = 1.
    if (u <= 0.0 || u >= 1.0) return {};
    u = std::clamp(u, kEndpointClamp, 1.0 - kEndpointClamp);
    const double q = normal_quantile(u);
    const double p = normal_pdf(q);
    return {p, q * p};
}

}  // namespace

double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) throw ValidationError("normal_quantile: u must lie in (0, 1)");
    if (u == 0.5) return 0.0;
    // 1 - u is exact for u in [1/2, 1).
    return u < 0.5 ? quantile_lower(u) : -quantile_lower(1.0 - u);
}

double w2_discrete_vs_normal(std::span<const Atom> atoms, const NormalParams& ref) {
    if (atoms.empty()) throw ValidationError("w2_discrete_vs_normal: empty pmf");
    // Per atom c on [a, b):
    //   int (c - m - s Q(u))^2 du = (c-m)^2 (b-a) - 2 (c-m) s int Q + s^2 int Q^2
    //   int_a^b Q = phi(Q(a)) - phi(Q(b)),  int_a^b Q^2 = [u - Q(u) phi(Q(u))]_a^b
    double total = 0.0;
    double a = 0.0;
    QuantileTerms ta = terms_at(0.0);
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        const double b = (j + 1 == atoms.size()) ? 1.0 : std::min(1.0, a + atoms[j].prob);
        const QuantileTerms tb = terms_at(b);
        const double c = atoms[j].value - ref.mean;
        const double int_q = ta.pdf_at_q - tb.pdf_at_q;
        const double int_q2 = (b - tb.q_pdf_at_q) - (a - ta.q_pdf_at_q);
        total += c * c * (b - a) - 2.0 * c * ref.sd * int_q + ref.sd * ref.sd * int_q2;
        a = b;
        ta = tb;
    }
    return std::sqrt(std::max(0.0, total));
}

double w2_discrete_vs_normal(const ProjectionPmf& pmf, const NormalParams& ref) {
    return w2_discrete_vs_normal(std::span<const Atom>(pmf.atoms), ref);
}

double w2_normal_normal(const NormalParams& p, const NormalParams& q) {
    return std::hypot(p.mean - q.mean, p.sd - q.sd);
}

double w2_empirical(std::span<const double> sorted_samples, const NormalParams& ref) {
    if (sorted_samples.size() < 2) throw ValidationError("w2_empirical: need at least 2 samples");
    if (!std::is_sorted(sorted_samples.begin(), sorted_samples.end()))
        throw ValidationError("w2_empirical: samples must be sorted");
    const double mass = 1.0 / static_cast<double>(sorted_samples.size());
    std::vector<Atom> atoms;
    atoms.reserve(sorted_samples.size());
    for (double x : sorted_samples) atoms.push_back({x, mass});
    return w2_discrete_vs_normal(atoms, ref);
}

}  // namespace isingclt
