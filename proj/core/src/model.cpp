#include "isingclt/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isingclt/errors.hpp"

namespace isingclt {

SpinConfig SpinConfig::all(std::size_t n, int spin) {
    return SpinConfig{std::vector<std::int8_t>(n, static_cast<std::int8_t>(spin > 0 ? 1 : -1))};
}

SpinConfig SpinConfig::from_code(std::uint64_t code, std::size_t n) {
    SpinConfig x;
    x.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) x.values[i] = ((code >> i) & 1U) ? 1 : -1;
    return x;
}

std::uint64_t SpinConfig::code() const {
    if (values.size() > 64) throw ValidationError("SpinConfig::code: more than 64 spins");
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] > 0) c |= std::uint64_t{1} << i;
    return c;
}

double IsingModel::local_field(const SpinConfig& x, std::size_t i) const {
    double l = field_(i);
    const std::size_t n = size();
    for (std::size_t j = 0; j < n; ++j) l += interaction_(i, j) * x.values[j];
    return l;
}

double IsingModel::energy(const SpinConfig& x) const {
    const std::size_t n = size();
    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += interaction_(i, j) * x.values[j];
        u += x.values[i] * (0.5 * row + field_(i));
    }
    return u;
}

IsingModel IsingModel::with_field(const Vector& h) const {
    if (static_cast<std::size_t>(h.size()) != size())
        throw ValidationError("with_field: field has wrong dimension");
    if (!h.allFinite()) throw ValidationError("with_field: non-finite field entry");
    IsingModel m = *this;
    m.field_ = h;
    return m;
}

bool IsingModel::is_ferromagnetic() const {
    return (interaction_.array() >= 0.0).all();
}

IsingModel validate_model(const Matrix& a_raw, const Vector& h, double symmetry_tol) {
    if (a_raw.rows() != a_raw.cols())
        throw ValidationError("validate_model: interaction matrix is not square");
    if (a_raw.rows() != h.size())
        throw ValidationError("validate_model: dimension mismatch between A (" +
                              std::to_string(a_raw.rows()) + ") and h (" +
                              std::to_string(h.size()) + ")");
    if (h.size() == 0) throw ValidationError("validate_model: empty model");
    if (!a_raw.allFinite() || !h.allFinite())
        throw ValidationError("validate_model: non-finite entry");

    const Eigen::Index n = a_raw.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (std::abs(a_raw(i, j) - a_raw(j, i)) > symmetry_tol)
                throw ValidationError("validate_model: A is not symmetric at (" +
                                      std::to_string(i) + ", " + std::to_string(j) + ")");

    IsingModel m;
    m.interaction_ = 0.5 * (a_raw + a_raw.transpose());
    m.discarded_diagonal_ = m.interaction_.diagonal();
    m.interaction_.diagonal().setZero();
    m.field_ = h;
    return m;
}

double prob_plus_from_local_field(double l) {
    // exp(L) / (exp(L) + exp(-L)) = 1 / (1 + exp(-2L))
    if (l >= 0.0) return 1.0 / (1.0 + std::exp(-2.0 * l));
    double e = std::exp(2.0 * l);
    return e / (1.0 + e);
}

double conditional_prob_plus(const IsingModel& model, const SpinConfig& config, std::size_t site) {
    if (site >= model.size())
        throw ValidationError("conditional_prob_plus: site index out of range");
    if (config.size() != model.size())
        throw ValidationError("conditional_prob_plus: configuration has wrong dimension");
    return prob_plus_from_local_field(model.local_field(config, site));
}

namespace {

struct RitzPair {
    double value;
    double residual;
};

/// Lanczos with full reorthogonalization. Stops when both extremal Ritz
/// residuals fall below tol * max(1, |lambda|) or the Krylov space is exhausted.
SpectralReport lanczos_extremes(const Matrix& a, const SpectralOptions& opt) {
    const Eigen::Index n = a.rows();
    const Eigen::Index max_steps = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(opt.max_iterations));

    Matrix basis(n, max_steps);
    std::vector<double> alpha;
    std::vector<double> beta;

    // Deterministic, generic start vector.
    Vector q(n);
    for (Eigen::Index i = 0; i < n; ++i) q(i) = 1.0 + 0.5 * std::sin(1.0 + 0.7 * static_cast<double>(i));
    q.normalize();

    SpectralReport rep;
    rep.iterative = true;
    double beta_prev = 0.0;
    for (Eigen::Index k = 0; k < max_steps; ++k) {
        basis.col(k) = q;
        Vector w = a * q;
        double ak = q.dot(w);
        alpha.push_back(ak);
        w -= ak * q;
        if (k > 0) w -= beta_prev * basis.col(k - 1);
        // Full reorthogonalization, twice for stability.
        for (int pass = 0; pass < 2; ++pass) {
            Vector coeff = basis.leftCols(k + 1).transpose() * w;
            w -= basis.leftCols(k + 1) * coeff;
        }
        double bk = w.norm();

        const Eigen::Index m = k + 1;
        Matrix t = Matrix::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            t(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(t);
        const Vector& evals = es.eigenvalues();
        const Matrix& evecs = es.eigenvectors();
        RitzPair lo{evals(0), std::abs(bk * evecs(m - 1, 0))};
        RitzPair hi{evals(m - 1), std::abs(bk * evecs(m - 1, m - 1))};
        rep.iterations = static_cast<std::size_t>(m);

        bool exhausted = bk <= 1e-14 * std::max(1.0, std::abs(hi.value)) || m == n;
        bool converged = lo.residual <= opt.tolerance * std::max(1.0, std::abs(lo.value)) &&
                         hi.residual <= opt.tolerance * std::max(1.0, std::abs(hi.value));
        if (converged || exhausted) {
            rep.lambda_min = lo.value;
            rep.lambda_max = hi.value;
            return rep;
        }
        beta.push_back(bk);
        beta_prev = bk;
        q = w / bk;
    }
    throw NumericalError("spectral_report: Lanczos did not converge within " +
                         std::to_string(max_steps) + " iterations");
}

}  // namespace

SpectralReport spectral_report(const Matrix& a, const SpectralOptions& options) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw ValidationError("spectral_report: matrix must be square and non-empty");

    SpectralReport rep;
    if (static_cast<std::size_t>(a.rows()) <= options.dense_limit) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericalError("spectral_report: eigensolver failed");
        rep.lambda_min = es.eigenvalues()(0);
        rep.lambda_max = es.eigenvalues()(a.rows() - 1);
    } else {
        rep = lanczos_extremes(a, options);
    }
    rep.spread = rep.lambda_max - rep.lambda_min;
    rep.psd_shift = std::max(0.0, -rep.lambda_min);
    rep.high_temp_margin = 1.0 - rep.spread;
    if (rep.high_temp_margin > 0.0) rep.poincare_constant = 1.0 / rep.high_temp_margin;
    return rep;
}

SpectralReport spectral_report(const IsingModel& model, const SpectralOptions& options) {
    return spectral_report(model.interaction(), options);
}

DobrushinReport dobrushin_report(const IsingModel& model) {
    const Eigen::Index n = static_cast<Eigen::Index>(model.size());
    const Matrix abs_a = model.interaction().cwiseAbs();

    DobrushinReport rep;
    rep.row_sums = abs_a.rowwise().sum();
    rep.col_sums = abs_a.colwise().sum().transpose();
    rep.alpha = n > 0 ? rep.row_sums.maxCoeff() : 0.0;
    rep.c_tanh = abs_a.array().tanh().matrix();
    rep.beta = rep.c_tanh.colwise().sum().maxCoeff();
    rep.gamma = rep.c_tanh.rowwise().sum().maxCoeff();
    return rep;
}

}  // namespace isingclt
