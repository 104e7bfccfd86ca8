#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "smoothnorm/anova_models.hpp"
#include "smoothnorm/basis.hpp"

namespace smoothnorm {

/// Largest basis dimension accepted by the test statistics. The correction
/// matrix loses its smallest eigenvalue quickly as K grows (about 2.6e-3 at
/// K = 8), so conditioning is monitored rather than pushed further.
inline constexpr int kMaxTestOrder = 8;

enum class CovKind {
    sigma,          ///< data-free correction for common-variance cases
    omega_mixture,  ///< per-group mixture for the common-mean/heteroskedastic case
};

/**
 * @brief Symmetric positive-definite normalizer for the basis-score vector.
 *
 * Holds the assembled entries, a cached Cholesky factor, and the spectrum.
 * When the Cholesky factorization fails the solver falls back to an
 * eigendecomposition with eigenvalues clipped at 1e-12 and flags the result.
 */
class CovarianceMatrix {
  public:
    /// @throws std::invalid_argument if entries are not square/symmetric
    /// @throws numerical_error if the matrix is materially non-positive-definite
    CovarianceMatrix(Eigen::MatrixXd entries, CovKind kind);

    [[nodiscard]] int dim() const { return static_cast<int>(entries_.rows()); }
    [[nodiscard]] CovKind kind() const { return kind_; }
    [[nodiscard]] const Eigen::MatrixXd& entries() const { return entries_; }

    /// v' M^{-1} v via the cached Cholesky factor (never an explicit inverse).
    [[nodiscard]] double quadratic_form(const Eigen::VectorXd& v) const;

    /// Same, restricted to the leading k-by-k block (valid because the
    /// leading block of the Cholesky factor factorizes the leading block).
    [[nodiscard]] double quadratic_form_prefix(int k, const Eigen::VectorXd& v) const;

    [[nodiscard]] bool clipped() const { return clipped_; }
    [[nodiscard]] double condition_number() const;
    [[nodiscard]] std::vector<double> eigenvalues() const;

  private:
    Eigen::MatrixXd entries_;
    Eigen::MatrixXd chol_lower_;
    Eigen::VectorXd eigvals_;
    CovKind kind_;
    bool clipped_ = false;
};

/// delta_{kl} - c1_k c1_l - c2_k c2_l / 2 for k, l = 1..K.
[[nodiscard]] CovarianceMatrix sigma_matrix(const BasisConstants& constants, int K);

/// Shared, lazily built sigma_matrix cache; safe for concurrent use.
[[nodiscard]] std::shared_ptr<const CovarianceMatrix> cached_sigma(int K);

/**
 * @brief Mixture normalizer sum_j p_j Omega^(j) for the common-mean,
 * per-group-variance case, with the sample plug-ins p_hat, q_hat and
 * sigma_hat (the unknown per-group scales enter only through their
 * estimates).
 */
[[nodiscard]] CovarianceMatrix omega_mixture_matrix(const FittedModel& fitted,
                                                    const BasisConstants& constants, int K);

/// Assembly core for the mixture, exposed for direct verification.
[[nodiscard]] Eigen::MatrixXd omega_mixture_entries(std::span<const double> p_hat,
                                                    std::span<const double> q_hat,
                                                    std::span<const double> sigma_hat,
                                                    const BasisConstants& constants, int K);

/// Mean basis-score vector: v_k = N^{-1} sum_ij pi_k(z_hat[ij]), k = 1..K.
[[nodiscard]] Eigen::VectorXd basis_score_mean(const FittedModel& fitted, int K);

/**
 * @brief The normalized smooth statistic N * v' Cov^{-1} v.
 *
 * @throws std::invalid_argument when the covariance dimension does not
 * match K or K exceeds the basis order
 */
[[nodiscard]] double statistic(const FittedModel& fitted, const OrthonormalBasis& basis, int K,
                               const CovarianceMatrix& cov);

struct TestResult {
    enum class Method { fixed_k, data_driven_chi1, data_driven_revised };

    int k_used = 0;
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    Method method = Method::fixed_k;
    bool reject = false;
    double alpha = 0.05;
    ModelKind model_kind = ModelKind::pooled;
    std::size_t n_total = 0;
    std::vector<std::string> warnings;
};

[[nodiscard]] std::string_view to_string(TestResult::Method method);

/**
 * @brief Fixed-K chi-square test at level alpha.
 *
 * The normalizer is the data-free sigma matrix except for the
 * group_variances case, which rebuilds the omega mixture from the fit.
 * For group_full this produces the combined informational statistic over
 * all jointly standardized residuals; the per-group report from
 * test_group_full is the primary reading of that case.
 */
[[nodiscard]] TestResult test_fixed_K(const Dataset& data, ModelKind kind, int K, double alpha);

/// Fixed-K result computed from an existing fit (shared by the runners).
[[nodiscard]] TestResult test_fixed_K_fitted(const FittedModel& fitted, int K, double alpha);

/**
 * @brief Per-group report for the per-group-mean/variance case.
 *
 * Each group is tested on its own (its own N in the chi-square scaling);
 * p-values carry no multiplicity adjustment, which is left to the caller.
 * The combined entry normalizes all residuals jointly and is informational.
 */
struct GroupFullReport {
    std::vector<TestResult> per_group;
    TestResult combined;
};

[[nodiscard]] GroupFullReport test_group_full(const Dataset& data, int K, double alpha);

}  // namespace smoothnorm
