#include "smoothnorm/anova_models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smoothnorm/errors.hpp"
#include "smoothnorm/special_functions.hpp"

namespace smoothnorm {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::pooled: return "pooled";
        case ModelKind::group_means: return "group-means";
        case ModelKind::group_variances: return "group-variances";
        case ModelKind::group_full: return "group-full";
    }
    return "unknown";
}

std::optional<ModelKind> model_kind_from_string(std::string_view name) {
    if (name == "pooled") return ModelKind::pooled;
    if (name == "group-means") return ModelKind::group_means;
    if (name == "group-variances") return ModelKind::group_variances;
    if (name == "group-full") return ModelKind::group_full;
    return std::nullopt;
}

std::size_t Dataset::total_size() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
}

std::vector<std::size_t> Dataset::group_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.reserve(groups.size());
    for (const auto& g : groups) sizes.push_back(g.size());
    return sizes;
}

namespace {

void validate(const Dataset& data, ModelKind kind) {
    if (data.groups.empty()) throw insufficient_data_error("fit: dataset has no groups");
    for (std::size_t j = 0; j < data.groups.size(); ++j) {
        if (data.groups[j].empty()) {
            throw insufficient_data_error("fit: group " + std::to_string(j + 1) + " is empty");
        }
        for (double y : data.groups[j]) {
            if (!std::isfinite(y)) {
                throw degenerate_data_error("fit: non-finite observation in group " +
                                            std::to_string(j + 1));
            }
        }
    }
    if (kind == ModelKind::pooled || kind == ModelKind::group_means) {
        if (data.total_size() < 3) {
            throw insufficient_data_error("fit: need at least 3 observations in total");
        }
    } else {
        for (std::size_t j = 0; j < data.groups.size(); ++j) {
            if (data.groups[j].size() < 3) {
                throw insufficient_data_error("fit: group " + std::to_string(j + 1) + " has " +
                                              std::to_string(data.groups[j].size()) +
                                              " observations; this model needs at least 3 per group");
            }
        }
    }
}

long double sum_of(const std::vector<double>& xs) {
    long double s = 0.0L;
    for (double x : xs) s += x;
    return s;
}

long double sum_sq_about(const std::vector<double>& xs, double center) {
    long double s = 0.0L;
    for (double x : xs) {
        const long double d = static_cast<long double>(x) - center;
        s += d * d;
    }
    return s;
}

double checked_sigma(long double ss, std::size_t n, const std::string& scope) {
    const double var = static_cast<double>(ss / static_cast<long double>(n));
    if (!(var > 0.0) || !std::isfinite(var)) {
        throw degenerate_data_error("fit: estimated variance is zero or invalid for " + scope);
    }
    return std::sqrt(var);
}

}  // namespace

FittedModel fit(const Dataset& data, ModelKind kind) {
    validate(data, kind);

    const std::size_t J = data.groups.size();
    FittedModel out;
    out.kind = kind;
    out.group_sizes = data.group_sizes();
    out.n_total = data.total_size();
    const double n = static_cast<double>(out.n_total);

    std::vector<double> group_mean(J);
    for (std::size_t j = 0; j < J; ++j) {
        group_mean[j] = static_cast<double>(sum_of(data.groups[j]) /
                                            static_cast<long double>(data.groups[j].size()));
    }

    switch (kind) {
        case ModelKind::pooled: {
            long double total = 0.0L;
            for (const auto& g : data.groups) total += sum_of(g);
            const double mu = static_cast<double>(total / static_cast<long double>(out.n_total));
            long double ss = 0.0L;
            for (const auto& g : data.groups) ss += sum_sq_about(g, mu);
            out.mu_hat = {mu};
            out.sigma_hat = {checked_sigma(ss, out.n_total, "the pooled sample")};
            break;
        }
        case ModelKind::group_means: {
            long double ss = 0.0L;
            for (std::size_t j = 0; j < J; ++j) ss += sum_sq_about(data.groups[j], group_mean[j]);
            out.mu_hat = group_mean;
            out.sigma_hat = {checked_sigma(ss, out.n_total, "the pooled residuals")};
            break;
        }
        case ModelKind::group_variances: {
            long double mean_of_means = 0.0L;
            for (std::size_t j = 0; j < J; ++j) mean_of_means += group_mean[j];
            const double mu = static_cast<double>(mean_of_means / static_cast<long double>(J));
            out.mu_hat = {mu};
            out.sigma_hat.resize(J);
            for (std::size_t j = 0; j < J; ++j) {
                out.sigma_hat[j] = checked_sigma(sum_sq_about(data.groups[j], mu),
                                                 data.groups[j].size(),
                                                 "group " + std::to_string(j + 1));
            }
            break;
        }
        case ModelKind::group_full: {
            out.mu_hat = group_mean;
            out.sigma_hat.resize(J);
            for (std::size_t j = 0; j < J; ++j) {
                out.sigma_hat[j] = checked_sigma(sum_sq_about(data.groups[j], group_mean[j]),
                                                 data.groups[j].size(),
                                                 "group " + std::to_string(j + 1));
            }
            break;
        }
    }

    out.e_hat.resize(J);
    out.z_hat.resize(J);
    out.p_hat.resize(J);
    out.q_hat.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
        const double mu = out.mu_hat.size() == 1 ? out.mu_hat[0] : out.mu_hat[j];
        const double sigma = out.sigma_hat.size() == 1 ? out.sigma_hat[0] : out.sigma_hat[j];
        const std::size_t nj = data.groups[j].size();
        out.e_hat[j].resize(nj);
        out.z_hat[j].resize(nj);
        for (std::size_t i = 0; i < nj; ++i) {
            const double e = (data.groups[j][i] - mu) / sigma;
            out.e_hat[j][i] = e;
            double clamped_e = e;
            if (clamped_e > FittedModel::pit_clamp) {
                clamped_e = FittedModel::pit_clamp;
                ++out.clamped;
            } else if (clamped_e < -FittedModel::pit_clamp) {
                clamped_e = -FittedModel::pit_clamp;
                ++out.clamped;
            }
            out.z_hat[j][i] = std_normal_cdf(clamped_e);
        }
        out.p_hat[j] = static_cast<double>(nj) / n;
        out.q_hat[j] = static_cast<double>(J) * static_cast<double>(nj) / n;
    }
    return out;
}

std::pair<Dataset, ModelKind> reduce_random_effects(Dataset data) {
    // Group-centered residuals are free of the group-level random component,
    // so the test is exactly the group_means fixed-effects test.
    return {std::move(data), ModelKind::group_means};
}

Dataset flatten_two_way(const std::vector<std::vector<std::vector<double>>>& table) {
    if (table.empty()) throw insufficient_data_error("flatten_two_way: table has no rows");
    Dataset out;
    for (std::size_t j = 0; j < table.size(); ++j) {
        if (table[j].empty()) {
            throw insufficient_data_error("flatten_two_way: row " + std::to_string(j + 1) +
                                          " has no cells");
        }
        for (std::size_t l = 0; l < table[j].size(); ++l) {
            if (table[j][l].empty()) {
                throw insufficient_data_error("flatten_two_way: cell (" + std::to_string(j + 1) +
                                              ", " + std::to_string(l + 1) + ") is empty");
            }
            out.groups.push_back(table[j][l]);
        }
    }
    return out;
}

}  // namespace smoothnorm
