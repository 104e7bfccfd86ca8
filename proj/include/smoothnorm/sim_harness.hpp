#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "smoothnorm/anova_models.hpp"
#include "smoothnorm/data_driven.hpp"

namespace smoothnorm {

enum class Scenario {
    means,      ///< five groups of sizes j*m, means 5j, common variance 4
    variances,  ///< five groups of sizes j*m, common mean 8, per-group scales
    custom,     ///< one group of size m, standard normal vs standardized chi-square(2)
};

[[nodiscard]] std::string_view to_string(Scenario scenario);
[[nodiscard]] std::optional<Scenario> scenario_from_string(std::string_view name);

/// Model case under which each scenario is tested.
[[nodiscard]] ModelKind scenario_model(Scenario scenario);

struct SimMethod {
    enum class Kind { fixed_k, kstar_chi1, kstar_revised };
    Kind kind = Kind::fixed_k;
    int k = 1;  ///< only for fixed_k

    [[nodiscard]] std::string tag() const;
    [[nodiscard]] static std::optional<SimMethod> from_tag(std::string_view tag);
};

struct SimConfig {
    Scenario scenario = Scenario::means;
    std::vector<int> m_values = {10, 20, 30};
    int replications = 500;
    double alpha = 0.05;
    int d_max = 5;
    std::vector<SimMethod> methods = default_methods();
    std::uint64_t master_seed = 20240817ull;
    int threads = 1;

    /// K = 1..5 fixed, then the selected-K test under both approximations.
    [[nodiscard]] static std::vector<SimMethod> default_methods();
};

struct RateCell {
    std::string arm;  ///< "h0" or "h1"
    int m = 0;
    std::string method;
    long rejections = 0;
    long replications = 0;
    double rate = 0.0;
};

struct KStarHistogram {
    std::string arm;
    int m = 0;
    std::vector<long> counts;  ///< counts[k-1] = replications with K* = k
    std::vector<double> freq;
};

struct SimReport {
    SimConfig config;
    std::vector<RateCell> rates;
    std::vector<KStarHistogram> k_star;
    double runtime_seconds = 0.0;  ///< console diagnostics only, never serialized
};

/// Paired null/alternative draws for one replication; both arms share the
/// replication seed but use independent substreams, deterministic bit for bit.
[[nodiscard]] std::pair<Dataset, Dataset> generate_scenario1(int m, std::uint64_t seed);
[[nodiscard]] std::pair<Dataset, Dataset> generate_scenario2(int m, std::uint64_t seed);
[[nodiscard]] std::pair<Dataset, Dataset> generate_custom(int m, std::uint64_t seed);

/// One arm of a scenario; the pair generators are thin wrappers over this.
[[nodiscard]] Dataset generate_arm(Scenario scenario, bool alternative, int m, std::uint64_t seed);

/// Replication seed: a keyed hash of the master seed and the cell coordinates,
/// so any single cell can be replayed in isolation and the aggregate is
/// independent of execution order.
[[nodiscard]] std::uint64_t replication_seed(std::uint64_t master, Scenario scenario,
                                             std::string_view arm, int m, std::string_view method,
                                             int replication);

/**
 * @brief Run the Monte Carlo grid and collect rejection rates and the
 * distribution of the selected dimension K*.
 *
 * Cells are independent; with threads > 1 they are processed concurrently
 * and the report is identical to the single-threaded one. A replication
 * failure aborts the run and names the offending cell and seed.
 */
[[nodiscard]] SimReport run_simulation(const SimConfig& config);

/// Deterministic serializations (runtime is deliberately omitted).
[[nodiscard]] std::string report_json(const SimReport& report);
[[nodiscard]] std::string report_csv(const SimReport& report);
/// Console table shaped like the fixed-K / K* / revised columns per m.
[[nodiscard]] std::string report_table(const SimReport& report);

struct NoncentralityEstimate {
    double value = 0.0;      ///< bias-corrected estimate of a' Sigma^{-1} a
    double std_error = 0.0;  ///< delta-method plus quadratic-term error
    std::vector<double> a_hat;
    std::vector<double> a_se;
};

/**
 * @brief Monte Carlo estimate of the consistency limit a' Sigma^{-1} a,
 * with a_k = E pi_k(Phi(e)) under standardized draws from `sampler`.
 *
 * Independent of the test pipeline: draws are transformed directly, no
 * fitting involved. Requires at least 1e5 draws.
 */
[[nodiscard]] NoncentralityEstimate estimate_noncentrality(
    const std::function<double(std::mt19937_64&)>& sampler, ModelKind kind, int K, long draws,
    std::uint64_t seed);

}  // namespace smoothnorm
