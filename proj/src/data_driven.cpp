#include "smoothnorm/data_driven.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "smoothnorm/errors.hpp"
#include "smoothnorm/special_functions.hpp"

namespace smoothnorm {

int min_argmax(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("min_argmax: empty sequence");
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

std::vector<double> ch_sequence(const FittedModel& fitted, const BasisConstants& constants, int D) {
    if (D < 1 || D > kMaxTestOrder) {
        throw config_error("ch_sequence: D must lie in [1, " + std::to_string(kMaxTestOrder) + "]");
    }
    const Eigen::VectorXd v = basis_score_mean(fitted, D);
    std::optional<CovarianceMatrix> local;
    std::shared_ptr<const CovarianceMatrix> shared;
    const CovarianceMatrix* cov = nullptr;
    if (fitted.kind == ModelKind::group_variances) {
        local.emplace(omega_mixture_matrix(fitted, constants, D));
        cov = &*local;
    } else {
        shared = cached_sigma(D);
        cov = shared.get();
    }
    std::vector<double> ch(D);
    const double n = static_cast<double>(fitted.n_total);
    for (int K = 1; K <= D; ++K) {
        ch[K - 1] = n * cov->quadratic_form_prefix(K, v);
    }
    return ch;
}

namespace {

SelectionResult select_from_ch(const std::vector<double>& ch, std::size_t n_total) {
    SelectionResult out;
    out.d_used = static_cast<int>(ch.size());
    out.penalized.resize(ch.size());
    const double log_n = std::log(static_cast<double>(n_total));
    for (std::size_t k = 0; k < ch.size(); ++k) {
        out.penalized[k] = ch[k] - static_cast<double>(k + 1) * log_n;
    }
    out.k_star = min_argmax(out.penalized) + 1;
    return out;
}

}  // namespace

SelectionResult select_K(const Dataset& data, ModelKind kind, int D) {
    const FittedModel fitted = fit(data, kind);
    return select_from_ch(ch_sequence(fitted, cached_constants(), D), fitted.n_total);
}

double revised_cdf(double x, std::size_t n) {
    if (n < 2) throw std::domain_error("revised_cdf: N must be at least 2");
    if (!std::isfinite(x) || x < 0.0) throw std::domain_error("revised_cdf: x must be >= 0");

    const double log_n = std::log(static_cast<double>(n));
    const double head_factor = 2.0 * std_normal_cdf(std::sqrt(log_n)) - 1.0;
    const auto head = [&](double t) { return (2.0 * std_normal_cdf(std::sqrt(t)) - 1.0) * head_factor; };

    if (x <= log_n) return head(x);
    const double tail_mass = 2.0 * (1.0 - std_normal_cdf(std::sqrt(log_n)));
    if (x >= 2.0 * log_n) return head(x) + tail_mass;
    const double at_lo = head(log_n);
    const double at_hi = head(2.0 * log_n) + tail_mass;
    return at_lo + (x - log_n) / log_n * (at_hi - at_lo);
}

DataDrivenResult test_data_driven(const Dataset& data, ModelKind kind, int D, double alpha,
                                  Approximation approximation) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie strictly in (0,1)");
    const FittedModel fitted = fit(data, kind);
    const std::vector<double> ch = ch_sequence(fitted, cached_constants(), D);

    DataDrivenResult out;
    out.selection = select_from_ch(ch, fitted.n_total);

    TestResult& r = out.result;
    r.k_used = out.selection.k_star;
    r.statistic = ch[out.selection.k_star - 1];
    r.dof = 1;
    r.alpha = alpha;
    r.model_kind = kind;
    r.n_total = fitted.n_total;
    if (approximation == Approximation::chi1) {
        r.method = TestResult::Method::data_driven_chi1;
        r.p_value = 1.0 - chi_square_cdf(r.statistic, 1);
    } else {
        r.method = TestResult::Method::data_driven_revised;
        r.p_value = 1.0 - revised_cdf(r.statistic, fitted.n_total);
    }
    r.reject = r.p_value < alpha;

    const double log_n = std::log(static_cast<double>(fitted.n_total));
    if (static_cast<double>(D) > log_n * log_n) {
        r.warnings.emplace_back("selection bound D = " + std::to_string(D) +
                                " exceeds log^2(N); the concentration of K* is not guaranteed");
    }
    if (fitted.clamped > 0) {
        r.warnings.emplace_back(std::to_string(fitted.clamped) + " residual(s) clamped at |e| = " +
                                std::to_string(FittedModel::pit_clamp) + " for the PIT");
    }
    return out;
}

}  // namespace smoothnorm
