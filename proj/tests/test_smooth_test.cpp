// Covariance assembly, the normalized statistic, and the fixed-K test.

#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "smoothnorm/errors.hpp"
#include "smoothnorm/rng.hpp"
#include "smoothnorm/smooth_test.hpp"
#include "smoothnorm/special_functions.hpp"

using namespace smoothnorm;

namespace {

constexpr double kPi = 3.14159265358979323846;

Dataset normal_dataset(std::uint64_t seed, std::vector<std::size_t> sizes, double mu, double sd) {
    std::mt19937_64 gen(seed);
    Dataset d;
    for (std::size_t n : sizes) {
        std::vector<double> g(n);
        for (double& y : g) y = mu + sd * rng::standard_normal(gen);
        d.groups.push_back(std::move(g));
    }
    return d;
}

// Independent route: invert the matrix by Gauss-Jordan elimination in
// extended precision and form the quadratic form directly.
double brute_force_statistic(const FittedModel& f, int K) {
    const BasisConstants& c = cached_constants();
    std::vector<std::vector<long double>> aug(K, std::vector<long double>(2 * K, 0.0L));
    for (int k = 1; k <= K; ++k) {
        for (int l = 1; l <= K; ++l) {
            const long double delta = (k == l) ? 1.0L : 0.0L;
            aug[k - 1][l - 1] = delta -
                                static_cast<long double>(c.c1[k - 1]) * c.c1[l - 1] -
                                0.5L * static_cast<long double>(c.c2[k - 1]) * c.c2[l - 1];
        }
        aug[k - 1][K + k - 1] = 1.0L;
    }
    for (int col = 0; col < K; ++col) {
        int pivot = col;
        for (int r = col + 1; r < K; ++r) {
            if (std::fabs(static_cast<double>(aug[r][col])) >
                std::fabs(static_cast<double>(aug[pivot][col]))) {
                pivot = r;
            }
        }
        std::swap(aug[pivot], aug[col]);
        const long double diag = aug[col][col];
        for (int cc = 0; cc < 2 * K; ++cc) aug[col][cc] /= diag;
        for (int r = 0; r < K; ++r) {
            if (r == col) continue;
            const long double factor = aug[r][col];
            for (int cc = 0; cc < 2 * K; ++cc) aug[r][cc] -= factor * aug[col][cc];
        }
    }

    std::vector<long double> vbar(K, 0.0L);
    const OrthonormalBasis basis(K);
    for (const auto& group : f.z_hat) {
        for (double z : group) {
            for (int k = 1; k <= K; ++k) vbar[k - 1] += basis.pi(k, z);
        }
    }
    for (int k = 0; k < K; ++k) vbar[k] /= static_cast<long double>(f.n_total);

    long double quad = 0.0L;
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < K; ++l) quad += vbar[k] * aug[k][K + l] * vbar[l];
    }
    return static_cast<double>(static_cast<long double>(f.n_total) * quad);
}

}  // namespace

TEST_CASE("sigma matrix: parity zero, pinned diagonal entries") {
    const BasisConstants& c = cached_constants();
    const CovarianceMatrix s2 = sigma_matrix(c, 2);
    CHECK(std::fabs(s2.entries()(0, 1)) < 1e-9);
    CHECK(std::fabs(s2.entries()(0, 0) - (1.0 - 3.0 / kPi)) < 1e-7);
    CHECK(std::fabs(s2.entries()(1, 1) - (1.0 - 15.0 / (2.0 * kPi * kPi))) < 1e-7);

    // Entries are exactly the assembled expression.
    for (int k = 1; k <= 2; ++k) {
        for (int l = 1; l <= 2; ++l) {
            const double expected = (k == l ? 1.0 : 0.0) - c.c1[k - 1] * c.c1[l - 1] -
                                    0.5 * c.c2[k - 1] * c.c2[l - 1];
            CHECK(s2.entries()(k - 1, l - 1) == expected);
        }
    }
}

TEST_CASE("sigma matrix stays positive definite up to K = 8") {
    const CovarianceMatrix s8 = sigma_matrix(cached_constants(), 8);
    for (double ev : s8.eigenvalues()) CHECK(ev > 0.0);
    CHECK(!s8.clipped());
    CHECK(s8.kind() == CovKind::sigma);
}

TEST_CASE("covariance matrix construction guards") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 0.5, 0.2, 1.0;
    CHECK_THROWS_AS(CovarianceMatrix(bad, CovKind::sigma), std::invalid_argument);

    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(CovarianceMatrix(indefinite, CovKind::sigma), numerical_error);
}

TEST_CASE("near-singular covariance falls back to clipped eigenvalues") {
    Eigen::MatrixXd nearly(2, 2);
    nearly << 1.0, 1.0, 1.0, 1.0 + 1e-13;
    const CovarianceMatrix cov(nearly, CovKind::sigma);
    CHECK(cov.clipped());
    Eigen::VectorXd v(2);
    v << 0.3, -0.2;
    const double q = cov.quadratic_form(v);
    CHECK(std::isfinite(q));
    CHECK(q >= 0.0);
    CHECK(cov.condition_number() >= 1.0);
}

TEST_CASE("omega mixture collapses to sigma for balanced equal-variance fits") {
    // Two identical groups: balanced sizes, identical scale estimates.
    const std::vector<double> block{1.0, 2.0, 3.0, 4.0, 5.0};
    const Dataset d{{block, block}};
    const FittedModel f = fit(d, ModelKind::group_variances);
    const BasisConstants& c = cached_constants();
    const CovarianceMatrix omega = omega_mixture_matrix(f, c, 4);
    const CovarianceMatrix sigma = sigma_matrix(c, 4);
    CHECK(omega.kind() == CovKind::omega_mixture);
    CHECK((omega.entries() - sigma.entries()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("omega mixture: parity keeps K=2 off-diagonal at zero") {
    const Dataset d{{{-1.0, 1.0, -1.0, 1.0}, {-2.0, 2.0, -2.0, 2.0}}};
    const FittedModel f = fit(d, ModelKind::group_variances);
    const CovarianceMatrix omega = omega_mixture_matrix(f, cached_constants(), 2);
    CHECK(std::fabs(omega.entries()(0, 1)) < 1e-12);
}

TEST_CASE("omega mixture matches an independent evaluation of the displayed formula") {
    // Two balanced groups with scale estimates exactly 1 and 2.
    const Dataset d{{{-1.0, 1.0, -1.0, 1.0}, {-2.0, 2.0, -2.0, 2.0}}};
    const FittedModel f = fit(d, ModelKind::group_variances);
    REQUIRE(f.sigma_hat[0] == 1.0);
    REQUIRE(f.sigma_hat[1] == 2.0);
    REQUIRE(f.q_hat[0] == 1.0);
    REQUIRE(f.q_hat[1] == 1.0);

    const BasisConstants& c = cached_constants();
    const int K = 3;
    const Eigen::MatrixXd got = omega_mixture_entries(f.p_hat, f.q_hat, f.sigma_hat, c, K);

    const double scale_sum = 0.5 / 1.0 + 0.5 / 2.0;  // sum p_l / sigma_l = 0.75
    for (int k = 1; k <= K; ++k) {
        for (int l = 1; l <= K; ++l) {
            long double expected = 0.0L;
            for (int j = 0; j < 2; ++j) {
                const double delta = (k == l) ? 1.0 : 0.0;
                const double sj = f.sigma_hat[static_cast<std::size_t>(j)];
                const double qj = f.q_hat[static_cast<std::size_t>(j)];
                const double omega_j = delta -
                                       2.0 * c.c1[k - 1] * c.c1[l - 1] * sj / qj * scale_sum +
                                       c.c1[k - 1] * c.c1[l - 1] * sj * sj / (qj * qj) *
                                           scale_sum * scale_sum -
                                       0.5 * c.c2[k - 1] * c.c2[l - 1];
                expected += 0.5L * omega_j;
            }
            CHECK(std::fabs(got(k - 1, l - 1) - static_cast<double>(expected)) < 1e-12);
        }
    }

    // Spot value for the K=1 entry: 1 - (3/pi) * 0.84375.
    CHECK(std::fabs(got(0, 0) - (1.0 - (3.0 / kPi) * 0.84375)) < 1e-7);
}

TEST_CASE("statistic vanishes when every score mean is zero") {
    FittedModel f;
    f.kind = ModelKind::pooled;
    f.n_total = 4;
    f.z_hat = {{0.25, 0.75, 0.125, 0.875}};  // symmetric about 1/2
    const OrthonormalBasis basis(1);
    const auto sigma = cached_sigma(1);
    CHECK(statistic(f, basis, 1, *sigma) == 0.0);
}

TEST_CASE("statistic is invariant under Y -> 3Y + 7 for the pooled fit") {
    const Dataset base = normal_dataset(31, {20, 35, 25}, 1.0, 2.0);
    Dataset moved = base;
    for (auto& g : moved.groups) {
        for (double& y : g) y = 3.0 * y + 7.0;
    }
    const OrthonormalBasis basis(3);
    const auto sigma = cached_sigma(3);
    const double s0 = statistic(fit(base, ModelKind::pooled), basis, 3, *sigma);
    const double s1 = statistic(fit(moved, ModelKind::pooled), basis, 3, *sigma);
    CHECK(std::fabs(s0 - s1) < 1e-12);
}

TEST_CASE("statistic agrees with the extended-precision Gauss-Jordan route") {
    // Seed 20240817 is the documented fixture for this oracle comparison.
    const Dataset d = normal_dataset(20240817, {15, 30, 45}, 4.0, 1.5);
    const FittedModel f = fit(d, ModelKind::group_means);
    const OrthonormalBasis basis(4);
    const auto sigma = cached_sigma(4);
    const double fast = statistic(f, basis, 4, *sigma);
    const double brute = brute_force_statistic(f, 4);
    CHECK(std::fabs(fast - brute) < 1e-9 * std::max(1.0, std::fabs(brute)));
}

TEST_CASE("cholesky and eigendecomposition solves agree") {
    const Dataset d = normal_dataset(47, {25, 25, 25, 25}, 0.0, 1.0);
    const FittedModel f = fit(d, ModelKind::group_means);
    for (int K : {1, 3, 5, 8}) {
        const auto sigma = cached_sigma(K);
        const Eigen::VectorXd v = basis_score_mean(f, K);
        const double via_chol = sigma->quadratic_form(v);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma->entries());
        const Eigen::VectorXd y = es.eigenvectors().transpose() * v;
        double via_eig = 0.0;
        for (int i = 0; i < K; ++i) via_eig += y[i] * y[i] / es.eigenvalues()[i];

        CHECK(std::fabs(via_chol - via_eig) < 1e-9 * std::max(1.0, via_chol));
    }
}

TEST_CASE("prefix solves match freshly built smaller matrices") {
    const Dataset d = normal_dataset(53, {40, 40}, -1.0, 3.0);
    const FittedModel f = fit(d, ModelKind::group_means);
    const Eigen::VectorXd v = basis_score_mean(f, 6);
    const auto big = cached_sigma(6);
    for (int K = 1; K <= 6; ++K) {
        const auto small = cached_sigma(K);
        const double via_prefix = big->quadratic_form_prefix(K, v);
        const double direct = small->quadratic_form(v.head(K));
        CHECK(std::fabs(via_prefix - direct) < 1e-12 * std::max(1.0, direct));
    }
}

TEST_CASE("fixed-K test: p-value wiring and the rejection boundary") {
    // At the exact quantile the p-value equals alpha and reject stays false.
    for (int K : {1, 3}) {
        const double q = chi_square_quantile(0.95, K);
        CHECK(std::fabs((1.0 - chi_square_cdf(q, K)) - 0.05) < 1e-9);
    }

    const Dataset d = normal_dataset(61, {30, 30, 30}, 2.0, 1.0);
    const TestResult r = test_fixed_K(d, ModelKind::group_means, 3, 0.05);
    CHECK(r.k_used == 3);
    CHECK(r.dof == 3);
    CHECK(r.statistic >= 0.0);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    CHECK(r.reject == (r.p_value < r.alpha));
    CHECK(r.method == TestResult::Method::fixed_k);
    CHECK(r.model_kind == ModelKind::group_means);
    CHECK(r.n_total == 90);
    CHECK(std::fabs(r.p_value - (1.0 - chi_square_cdf(r.statistic, 3))) < 1e-15);

    CHECK_THROWS_AS((void)test_fixed_K(d, ModelKind::group_means, 0, 0.05), config_error);
    CHECK_THROWS_AS((void)test_fixed_K(d, ModelKind::group_means, kMaxTestOrder + 1, 0.05),
                    config_error);
    CHECK_THROWS_AS((void)test_fixed_K(d, ModelKind::group_means, 3, 0.0), std::domain_error);
}

TEST_CASE("fixed-K test under the heteroskedastic model uses the mixture") {
    std::mt19937_64 gen(71);
    Dataset d;
    for (int j = 1; j <= 3; ++j) {
        std::vector<double> g(static_cast<std::size_t>(20 * j));
        for (double& y : g) y = 5.0 + j * rng::standard_normal(gen);
        d.groups.push_back(std::move(g));
    }
    const TestResult r = test_fixed_K(d, ModelKind::group_variances, 2, 0.05);
    CHECK(r.model_kind == ModelKind::group_variances);
    CHECK(std::isfinite(r.statistic));
    CHECK(r.statistic >= 0.0);
}

TEST_CASE("group-full report: per-group tests are primary, combined is flagged") {
    const Dataset d = normal_dataset(83, {12, 18, 24}, 0.0, 1.0);
    const GroupFullReport report = test_group_full(d, 2, 0.05);
    REQUIRE(report.per_group.size() == 3);
    CHECK(report.per_group[0].n_total == 12);
    CHECK(report.per_group[1].n_total == 18);
    CHECK(report.per_group[2].n_total == 24);
    for (const auto& r : report.per_group) {
        CHECK(r.model_kind == ModelKind::pooled);
        CHECK(r.reject == (r.p_value < r.alpha));
    }
    CHECK(report.combined.n_total == 54);
    bool flagged = false;
    for (const auto& w : report.combined.warnings) {
        if (w.find("informational") != std::string::npos) flagged = true;
    }
    CHECK(flagged);
}

TEST_CASE("sigma cache hands out one shared instance per K") {
    std::array<std::shared_ptr<const CovarianceMatrix>, 8> seen;
    std::vector<std::thread> pool;
    for (int t = 0; t < 8; ++t) {
        pool.emplace_back([&, t] { seen[static_cast<std::size_t>(t)] = cached_sigma(5); });
    }
    for (auto& th : pool) th.join();
    for (int t = 1; t < 8; ++t) CHECK(seen[static_cast<std::size_t>(t)] == seen[0]);
    CHECK_THROWS_AS((void)cached_sigma(0), config_error);
    CHECK_THROWS_AS((void)cached_sigma(kMaxTestOrder + 1), config_error);
}

TEST_CASE("statistic rejects shape mismatches") {
    const Dataset d = normal_dataset(91, {10, 10}, 0.0, 1.0);
    const FittedModel f = fit(d, ModelKind::pooled);
    const OrthonormalBasis basis(2);
    const auto sigma3 = cached_sigma(3);
    CHECK_THROWS_AS((void)statistic(f, basis, 3, *sigma3), std::invalid_argument);
    const auto sigma2 = cached_sigma(2);
    CHECK_THROWS_AS((void)statistic(f, basis, 1, *sigma2), std::invalid_argument);
}
