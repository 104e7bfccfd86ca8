#include "smoothnorm/sim_harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "smoothnorm/errors.hpp"
#include "smoothnorm/rng.hpp"
#include "smoothnorm/smooth_test.hpp"
#include "smoothnorm/special_functions.hpp"

namespace smoothnorm {

std::string_view to_string(Scenario scenario) {
    switch (scenario) {
        case Scenario::means: return "means";
        case Scenario::variances: return "variances";
        case Scenario::custom: return "custom";
    }
    return "unknown";
}

std::optional<Scenario> scenario_from_string(std::string_view name) {
    if (name == "means") return Scenario::means;
    if (name == "variances") return Scenario::variances;
    if (name == "custom") return Scenario::custom;
    return std::nullopt;
}

ModelKind scenario_model(Scenario scenario) {
    switch (scenario) {
        case Scenario::means: return ModelKind::group_means;
        case Scenario::variances: return ModelKind::group_variances;
        case Scenario::custom: return ModelKind::pooled;
    }
    return ModelKind::pooled;
}

std::string SimMethod::tag() const {
    switch (kind) {
        case Kind::fixed_k: return "K" + std::to_string(k);
        case Kind::kstar_chi1: return "Kstar";
        case Kind::kstar_revised: return "Hx";
    }
    return "?";
}

std::optional<SimMethod> SimMethod::from_tag(std::string_view tag) {
    if (tag == "Kstar") return SimMethod{Kind::kstar_chi1, 0};
    if (tag == "Hx") return SimMethod{Kind::kstar_revised, 0};
    if (tag.size() >= 2 && tag.front() == 'K') {
        int k = 0;
        for (char c : tag.substr(1)) {
            if (c < '0' || c > '9') return std::nullopt;
            k = 10 * k + (c - '0');
        }
        if (k >= 1 && k <= kMaxTestOrder) return SimMethod{Kind::fixed_k, k};
    }
    return std::nullopt;
}

std::vector<SimMethod> SimConfig::default_methods() {
    std::vector<SimMethod> out;
    for (int k = 1; k <= 5; ++k) out.push_back({SimMethod::Kind::fixed_k, k});
    out.push_back({SimMethod::Kind::kstar_chi1, 0});
    out.push_back({SimMethod::Kind::kstar_revised, 0});
    return out;
}

namespace {
constexpr double kTwoSqrt3 = 3.46410161513775459;  // 2 sqrt(3)
}

Dataset generate_arm(Scenario scenario, bool alternative, int m, std::uint64_t seed) {
    if (m < 1) throw std::domain_error("generate_arm: m must be at least 1");
    // Arms draw from independent substreams of the same replication seed.
    std::mt19937_64 gen(rng::combine(seed, alternative ? "h1" : "h0"));
    Dataset out;
    if (scenario == Scenario::custom) {
        std::vector<double> g(static_cast<std::size_t>(m));
        for (double& y : g) {
            y = alternative ? 0.5 * (rng::chi_square_2(gen) - 2.0) : rng::standard_normal(gen);
        }
        out.groups.push_back(std::move(g));
        return out;
    }
    for (int j = 1; j <= 5; ++j) {
        std::vector<double> g(static_cast<std::size_t>(j) * m);
        for (double& y : g) {
            if (scenario == Scenario::means) {
                y = alternative ? rng::chi_square_2(gen) + (5.0 * j - 2.0)
                                : 5.0 * j + 2.0 * rng::standard_normal(gen);
            } else {
                y = alternative ? 8.0 + kTwoSqrt3 * j * (2.0 * rng::uniform_open01(gen) - 1.0)
                                : 8.0 + j * rng::standard_normal(gen);
            }
        }
        out.groups.push_back(std::move(g));
    }
    return out;
}

namespace {
std::pair<Dataset, Dataset> generate_pair(Scenario scenario, int m, std::uint64_t seed) {
    return {generate_arm(scenario, false, m, seed), generate_arm(scenario, true, m, seed)};
}
}  // namespace

std::pair<Dataset, Dataset> generate_scenario1(int m, std::uint64_t seed) {
    return generate_pair(Scenario::means, m, seed);
}
std::pair<Dataset, Dataset> generate_scenario2(int m, std::uint64_t seed) {
    return generate_pair(Scenario::variances, m, seed);
}
std::pair<Dataset, Dataset> generate_custom(int m, std::uint64_t seed) {
    return generate_pair(Scenario::custom, m, seed);
}

std::uint64_t replication_seed(std::uint64_t master, Scenario scenario, std::string_view arm,
                               int m, std::string_view method, int replication) {
    std::uint64_t s = rng::combine(master, to_string(scenario));
    s = rng::combine(s, arm);
    s = rng::combine(s, static_cast<std::uint64_t>(m));
    s = rng::combine(s, method);
    return rng::combine(s, static_cast<std::uint64_t>(replication));
}

namespace {

struct Cell {
    std::string arm;
    bool alternative = false;
    int m = 0;
    SimMethod method;
    long rejections = 0;
    std::vector<long> k_star_counts;  // only for data-driven methods
    std::string failure;
};

void run_cell(const SimConfig& cfg, Cell& cell) {
    const ModelKind kind = scenario_model(cfg.scenario);
    const std::string method_tag = cell.method.tag();
    if (cell.method.kind != SimMethod::Kind::fixed_k) {
        cell.k_star_counts.assign(static_cast<std::size_t>(cfg.d_max), 0);
    }
    for (int rep = 0; rep < cfg.replications; ++rep) {
        const std::uint64_t seed =
            replication_seed(cfg.master_seed, cfg.scenario, cell.arm, cell.m, method_tag, rep);
        try {
            const Dataset data = generate_arm(cfg.scenario, cell.alternative, cell.m, seed);
            bool reject = false;
            if (cell.method.kind == SimMethod::Kind::fixed_k) {
                reject = test_fixed_K(data, kind, cell.method.k, cfg.alpha).reject;
            } else {
                const auto approx = cell.method.kind == SimMethod::Kind::kstar_chi1
                                        ? Approximation::chi1
                                        : Approximation::revised;
                const DataDrivenResult r = test_data_driven(data, kind, cfg.d_max, cfg.alpha, approx);
                reject = r.result.reject;
                ++cell.k_star_counts[static_cast<std::size_t>(r.selection.k_star - 1)];
            }
            if (reject) ++cell.rejections;
        } catch (const std::exception& ex) {
            std::ostringstream msg;
            msg << "replication failed: scenario=" << to_string(cfg.scenario)
                << " arm=" << cell.arm << " m=" << cell.m << " method=" << method_tag
                << " replication=" << rep << " seed=0x" << std::hex << seed << std::dec << ": "
                << ex.what();
            cell.failure = msg.str();
            return;
        }
    }
}

void validate_config(const SimConfig& cfg) {
    if (cfg.replications < 1) throw config_error("simulation: replications must be at least 1");
    if (cfg.m_values.empty()) throw config_error("simulation: m_values must be nonempty");
    for (int m : cfg.m_values) {
        if (m < 1) throw config_error("simulation: every m must be at least 1");
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw config_error("simulation: alpha must lie in (0,1)");
    if (cfg.d_max < 1 || cfg.d_max > kMaxTestOrder) {
        throw config_error("simulation: d_max must lie in [1, " + std::to_string(kMaxTestOrder) + "]");
    }
    if (cfg.methods.empty()) throw config_error("simulation: methods must be nonempty");
    for (const auto& method : cfg.methods) {
        if (method.kind == SimMethod::Kind::fixed_k &&
            (method.k < 1 || method.k > kMaxTestOrder)) {
            throw config_error("simulation: fixed K out of range");
        }
    }
    if (cfg.threads < 0) throw config_error("simulation: threads must be >= 0");
}

}  // namespace

SimReport run_simulation(const SimConfig& cfg) {
    validate_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    // Touch the shared caches up front so worker threads only read them.
    (void)cached_constants();
    (void)cached_sigma(cfg.d_max);

    std::vector<Cell> cells;
    for (const char* arm : {"h0", "h1"}) {
        for (int m : cfg.m_values) {
            for (const auto& method : cfg.methods) {
                Cell c;
                c.arm = arm;
                c.alternative = std::string_view(arm) == "h1";
                c.m = m;
                c.method = method;
                cells.push_back(std::move(c));
            }
        }
    }

    int threads = cfg.threads;
    if (threads == 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));

    if (threads == 1) {
        for (Cell& cell : cells) run_cell(cfg, cell);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cells.size()) return;
                    run_cell(cfg, cells[i]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    for (const Cell& cell : cells) {
        if (!cell.failure.empty()) throw numerical_error(cell.failure);
    }

    SimReport report;
    report.config = cfg;
    for (const Cell& cell : cells) {
        RateCell rc;
        rc.arm = cell.arm;
        rc.m = cell.m;
        rc.method = cell.method.tag();
        rc.rejections = cell.rejections;
        rc.replications = cfg.replications;
        rc.rate = static_cast<double>(cell.rejections) / static_cast<double>(cfg.replications);
        report.rates.push_back(std::move(rc));
    }

    // K* histogram per (arm, m), read from the chi1 selection cells when
    // present, else from the revised ones (the selection itself is identical).
    const auto hist_source = [&]() -> std::optional<SimMethod::Kind> {
        for (const auto& method : cfg.methods) {
            if (method.kind == SimMethod::Kind::kstar_chi1) return method.kind;
        }
        for (const auto& method : cfg.methods) {
            if (method.kind == SimMethod::Kind::kstar_revised) return method.kind;
        }
        return std::nullopt;
    }();
    if (hist_source) {
        for (const Cell& cell : cells) {
            if (cell.method.kind != *hist_source) continue;
            KStarHistogram h;
            h.arm = cell.arm;
            h.m = cell.m;
            h.counts = cell.k_star_counts;
            h.freq.resize(h.counts.size());
            for (std::size_t i = 0; i < h.counts.size(); ++i) {
                h.freq[i] =
                    static_cast<double>(h.counts[i]) / static_cast<double>(cfg.replications);
            }
            report.k_star.push_back(std::move(h));
        }
    }

    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::string report_json(const SimReport& report) {
    nlohmann::ordered_json j;
    j["scenario"] = std::string(to_string(report.config.scenario));
    j["alpha"] = report.config.alpha;
    j["d_max"] = report.config.d_max;
    j["replications"] = report.config.replications;
    j["master_seed"] = report.config.master_seed;
    j["m_values"] = report.config.m_values;
    {
        std::vector<std::string> tags;
        for (const auto& method : report.config.methods) tags.push_back(method.tag());
        j["methods"] = tags;
    }
    j["rates"] = nlohmann::ordered_json::array();
    for (const auto& rc : report.rates) {
        nlohmann::ordered_json cell;
        cell["arm"] = rc.arm;
        cell["m"] = rc.m;
        cell["method"] = rc.method;
        cell["rejections"] = rc.rejections;
        cell["replications"] = rc.replications;
        cell["rate"] = rc.rate;
        j["rates"].push_back(std::move(cell));
    }
    j["k_star_hist"] = nlohmann::ordered_json::array();
    for (const auto& h : report.k_star) {
        nlohmann::ordered_json row;
        row["arm"] = h.arm;
        row["m"] = h.m;
        row["counts"] = h.counts;
        row["freq"] = h.freq;
        j["k_star_hist"].push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

std::string report_csv(const SimReport& report) {
    std::string out = "scenario,arm,m,method,rate\n";
    char buf[64];
    for (const auto& rc : report.rates) {
        std::snprintf(buf, sizeof(buf), "%.6f", rc.rate);
        out += std::string(to_string(report.config.scenario)) + "," + rc.arm + "," +
               std::to_string(rc.m) + "," + rc.method + "," + buf + "\n";
    }
    return out;
}

std::string report_table(const SimReport& report) {
    std::vector<std::string> tags;
    for (const auto& method : report.config.methods) tags.push_back(method.tag());

    std::ostringstream os;
    os << "scenario: " << to_string(report.config.scenario)
       << "   replications: " << report.config.replications
       << "   alpha: " << report.config.alpha << "   seed: " << report.config.master_seed << "\n";
    const auto rate_of = [&](const std::string& arm, int m, const std::string& tag) -> double {
        for (const auto& rc : report.rates) {
            if (rc.arm == arm && rc.m == m && rc.method == tag) return rc.rate;
        }
        return std::nan("");
    };
    for (const char* arm : {"h0", "h1"}) {
        os << "\n[" << (std::string_view(arm) == "h0" ? "null arm" : "alternative arm") << "]\n";
        os << "      m";
        for (const auto& tag : tags) {
            os << "  " << tag;
            for (std::size_t pad = tag.size(); pad < 6; ++pad) os << ' ';
        }
        os << "\n";
        for (int m : report.config.m_values) {
            char lead[32];
            std::snprintf(lead, sizeof(lead), "%7d", m);
            os << lead;
            for (const auto& tag : tags) {
                char buf[16];
                std::snprintf(buf, sizeof(buf), "  %.3f ", rate_of(arm, m, tag));
                os << buf;
            }
            os << "\n";
        }
    }
    if (report.runtime_seconds > 0) {
        os << "\nruntime: " << report.runtime_seconds << " s\n";
    }
    return os.str();
}

NoncentralityEstimate estimate_noncentrality(
    const std::function<double(std::mt19937_64&)>& sampler, ModelKind kind, int K, long draws,
    std::uint64_t seed) {
    if (draws < 100000) {
        throw config_error("estimate_noncentrality: needs at least 1e5 draws");
    }
    if (K < 1 || K > kMaxTestOrder) {
        throw config_error("estimate_noncentrality: K must lie in [1, " +
                           std::to_string(kMaxTestOrder) + "]");
    }
    if (kind == ModelKind::group_variances) {
        throw std::invalid_argument(
            "estimate_noncentrality: the limit uses the common-variance normalizer; "
            "the heteroskedastic mixture depends on a fitted dataset");
    }

    std::mt19937_64 gen(seed);
    std::array<double, kMaxBasisOrder + 1> buf;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(K);
    Eigen::MatrixXd sum_outer = Eigen::MatrixXd::Zero(K, K);
    for (long i = 0; i < draws; ++i) {
        const double e = sampler(gen);
        detail::eval_pi_all(K, std_normal_cdf(std::clamp(e, -8.0, 8.0)), buf.data());
        for (int k = 1; k <= K; ++k) sum[k - 1] += buf[k];
        for (int k = 1; k <= K; ++k) {
            for (int l = k; l <= K; ++l) sum_outer(k - 1, l - 1) += buf[k] * buf[l];
        }
    }
    const double n = static_cast<double>(draws);
    const Eigen::VectorXd a = sum / n;
    Eigen::MatrixXd cov(K, K);
    for (int k = 0; k < K; ++k) {
        for (int l = k; l < K; ++l) {
            cov(k, l) = sum_outer(k, l) / n - a[k] * a[l];
            cov(l, k) = cov(k, l);
        }
    }

    const auto sigma = cached_sigma(K);
    const Eigen::MatrixXd sigma_inv =
        sigma->entries().llt().solve(Eigen::MatrixXd::Identity(K, K));
    const Eigen::VectorXd w = sigma_inv * a;
    const double raw = a.dot(w);
    const Eigen::MatrixXd sc = sigma_inv * cov;
    const double bias = sc.trace() / n;
    const double var_linear = 4.0 * w.dot(cov * w) / n;
    const double var_quad = 2.0 * (sc * sc).trace() / (n * n);

    NoncentralityEstimate out;
    out.value = raw - bias;
    out.std_error = std::sqrt(var_linear + var_quad);
    out.a_hat.assign(a.data(), a.data() + K);
    out.a_se.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) out.a_se[static_cast<std::size_t>(k)] = std::sqrt(cov(k, k) / n);
    return out;
}

}  // namespace smoothnorm
