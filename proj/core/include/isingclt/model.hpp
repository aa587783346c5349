#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace isingclt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Spin configuration in {-1, +1}^n.
///
/// Bit convention used by the enumerators: bit i of a packed code is 1 iff
/// spin i is +1.
struct SpinConfig {
    std::vector<std::int8_t> values;

    static SpinConfig all(std::size_t n, int spin);
    static SpinConfig from_code(std::uint64_t code, std::size_t n);

    std::size_t size() const { return values.size(); }
    int operator[](std::size_t i) const { return values[i]; }
    std::uint64_t code() const;

    friend bool operator==(const SpinConfig&, const SpinConfig&) = default;
};

/// A spin held fixed at +1 or -1.
struct Pin {
    std::size_t site = 0;
    int spin = 1;
};

/// Ising model on {-1,+1}^n with law proportional to exp(x'Ax/2 + h'x).
///
/// A is stored symmetric with zero diagonal; any diagonal supplied at
/// construction is kept only in `discarded_diagonal()` since it does not change
/// the law.
class IsingModel {
public:
    IsingModel() = default;

    std::size_t size() const { return static_cast<std::size_t>(field_.size()); }
    const Matrix& interaction() const { return interaction_; }
    const Vector& field() const { return field_; }
    const Vector& discarded_diagonal() const { return discarded_diagonal_; }
    const std::string& label() const { return label_; }

    double coupling(std::size_t i, std::size_t j) const { return interaction_(i, j); }
    double field(std::size_t i) const { return field_(i); }

    /// h_i + sum_j A_ij x_j.
    double local_field(const SpinConfig& x, std::size_t i) const;

    /// x'Ax/2 + h'x (unnormalized log-weight).
    double energy(const SpinConfig& x) const;

    /// Same couplings, new field.
    IsingModel with_field(const Vector& h) const;

    bool is_ferromagnetic() const;

    void set_label(std::string label) { label_ = std::move(label); }

private:
    friend IsingModel validate_model(const Matrix& a_raw, const Vector& h, double symmetry_tol);

    Matrix interaction_;
    Vector field_;
    Vector discarded_diagonal_;
    std::string label_;
};

inline constexpr double kSymmetryTolerance = 1e-12;

/// Canonicalizes (A_raw, h): checks shape, finiteness and symmetry within
/// `symmetry_tol` (absolute), then stores (A + A')/2 with the diagonal zeroed.
IsingModel validate_model(const Matrix& a_raw, const Vector& h,
                          double symmetry_tol = kSymmetryTolerance);

/// P(X_i = +1 | X_{~i} = x_{~i}) = (1 + tanh L)/2, L the local field at i.
double conditional_prob_plus(const IsingModel& model, const SpinConfig& config, std::size_t site);

/// Logistic form used by the samplers: (1 + tanh L)/2 evaluated without overflow.
double prob_plus_from_local_field(double local_field);

struct SpectralReport {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double spread = 0.0;
    double psd_shift = 0.0;
    double high_temp_margin = 1.0;
    /// 1 / high_temp_margin; empty when the margin is not positive.
    std::optional<double> poincare_constant;
    bool iterative = false;
    std::size_t iterations = 0;
};

struct SpectralOptions {
    double tolerance = 1e-10;
    /// Dense eigensolve up to this size, Lanczos above.
    std::size_t dense_limit = 64;
    std::size_t max_iterations = 2000;
};

SpectralReport spectral_report(const IsingModel& model, const SpectralOptions& options = {});

/// Extremal eigenvalues of a symmetric matrix (A diagonal included as given).
SpectralReport spectral_report(const Matrix& symmetric, const SpectralOptions& options = {});

struct DobrushinReport {
    double alpha = 0.0;
    Vector row_sums;
    Vector col_sums;
    /// tanh(|A_ij|), an upper bound on the Dobrushin interdependence C_ij.
    Matrix c_tanh;
    double beta = 0.0;
    double gamma = 0.0;
};

DobrushinReport dobrushin_report(const IsingModel& model);

}  // namespace isingclt
