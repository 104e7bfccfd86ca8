#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "smoothnorm/anova_models.hpp"
#include "smoothnorm/basis.hpp"
#include "smoothnorm/smooth_test.hpp"

namespace smoothnorm {

/// Outcome of the Schwarz-rule dimension search over K = 1..D.
struct SelectionResult {
    int k_star = 1;                 ///< smallest maximizer of the penalized sequence
    std::vector<double> penalized;  ///< CH_K - K log N for K = 1..D
    int d_used = 0;
};

/// Index (0-based) of the first strict maximum; ties resolve to the left.
[[nodiscard]] int min_argmax(std::span<const double> values);

/// CH_K = N * Psi_K^2 for K = 1..D, reusing the nested score prefixes and a
/// single factorization of the order-D normalizer.
[[nodiscard]] std::vector<double> ch_sequence(const FittedModel& fitted,
                                              const BasisConstants& constants, int D);

/**
 * @brief Schwarz-rule choice of the basis dimension.
 *
 * K* = min argmax over 1 <= K <= D of CH_K - K log N. D must stay within
 * kMaxTestOrder; keeping D well under log^2 N preserves the concentration
 * of K* at 1 under the null.
 *
 * @throws config_error when D is out of range
 */
[[nodiscard]] SelectionResult select_K(const Dataset& data, ModelKind kind, int D);

/**
 * @brief Finite-sample approximation to the null CDF of the selected-K
 * statistic, replacing the anticonservative chi-square(1) limit.
 *
 * Three branches: a chi-square(1)-times-constant head for x <= log N,
 * linear interpolation on (log N, 2 log N), and the head plus the upper
 * tail mass 2(1 - Phi(sqrt(log N))) beyond. Continuous at both knots,
 * nondecreasing, with limits 0 at x = 0 and 1 at infinity.
 *
 * @throws std::domain_error if x < 0 or n < 2
 */
[[nodiscard]] double revised_cdf(double x, std::size_t n);

enum class Approximation { chi1, revised };

struct DataDrivenResult {
    TestResult result;
    SelectionResult selection;
};

/**
 * @brief Data-driven test: select K*, then refer N * Psi_{K*}^2 either to
 * chi-square(1) or to the revised finite-sample approximation.
 */
[[nodiscard]] DataDrivenResult test_data_driven(const Dataset& data, ModelKind kind, int D,
                                                double alpha, Approximation approximation);

}  // namespace smoothnorm
