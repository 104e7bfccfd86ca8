#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace smoothnorm {

/// The four one-way fixed-effects model cases.
enum class ModelKind {
    pooled,           ///< common mean, common variance
    group_means,      ///< per-group means, common variance
    group_variances,  ///< common mean, per-group variances
    group_full,       ///< per-group means and variances
};

[[nodiscard]] std::string_view to_string(ModelKind kind);
[[nodiscard]] std::optional<ModelKind> model_kind_from_string(std::string_view name);

/// Grouped real observations Y[j][i], j = 0..J-1.
struct Dataset {
    std::vector<std::vector<double>> groups;

    [[nodiscard]] std::size_t group_count() const { return groups.size(); }
    [[nodiscard]] std::size_t total_size() const;
    [[nodiscard]] std::vector<std::size_t> group_sizes() const;
};

/**
 * @brief Estimates, standardized residuals and PIT values for one model case.
 *
 * mu_hat and sigma_hat have one entry for cases with a common parameter and
 * J entries otherwise. Variance estimates always use the maximum-likelihood
 * divisor (N or N_j, never N-1). z_hat holds Phi(e_hat) elementwise, with
 * residuals clamped at |e| = pit_clamp before the transform so every PIT
 * value stays strictly inside (0,1); `clamped` counts how often that fired.
 */
struct FittedModel {
    ModelKind kind = ModelKind::pooled;
    std::vector<double> mu_hat;
    std::vector<double> sigma_hat;
    std::vector<std::vector<double>> e_hat;
    std::vector<std::vector<double>> z_hat;
    std::vector<double> p_hat;  ///< N_j / N
    std::vector<double> q_hat;  ///< J * N_j / N
    std::vector<std::size_t> group_sizes;
    std::size_t n_total = 0;
    long clamped = 0;
    static constexpr double pit_clamp = 8.0;
};

/**
 * @brief Fit one of the four model cases and standardize the residuals.
 *
 * Estimators per case:
 *  - pooled:          mu = grand mean, sigma^2 = RSS/N
 *  - group_means:     mu_j = group means, sigma^2 = pooled RSS/N
 *  - group_variances: mu = unweighted mean of the group means (not the grand
 *                     mean), sigma_j^2 = per-group RSS/N_j about that mu
 *  - group_full:      mu_j and sigma_j^2 per group
 *
 * @throws insufficient_data_error when a group (or the dataset) is too small
 * @throws degenerate_data_error on zero estimated variance or non-finite data
 */
[[nodiscard]] FittedModel fit(const Dataset& data, ModelKind kind);

/**
 * @brief Map a one-way random-effects layout onto the fixed-effects machinery.
 *
 * Centering each group at its own mean removes the group-level random
 * component, so the random-effects residuals coincide with the group_means
 * case; this returns the data unchanged together with that model kind.
 */
[[nodiscard]] std::pair<Dataset, ModelKind> reduce_random_effects(Dataset data);

/**
 * @brief Flatten a two-way grid of cells into a one-way Dataset, row-major.
 *
 * Downstream testing treats each cell as a group (group_means for a common
 * variance, group_full otherwise).
 *
 * @throws insufficient_data_error on an empty cell, naming its coordinates
 */
[[nodiscard]] Dataset flatten_two_way(const std::vector<std::vector<std::vector<double>>>& table);

}  // namespace smoothnorm
