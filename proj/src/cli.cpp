#include "smoothnorm/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "smoothnorm/csv.hpp"
#include "smoothnorm/data_driven.hpp"
#include "smoothnorm/errors.hpp"
#include "smoothnorm/sim_harness.hpp"
#include "smoothnorm/smooth_test.hpp"

namespace smoothnorm {

namespace {

using nlohmann::ordered_json;

std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string join12(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ' ';
        out += fmt12(xs[i]);
    }
    return out;
}

std::string dof_or_approx(const TestResult& r) {
    switch (r.method) {
        case TestResult::Method::fixed_k: return "chi2(" + std::to_string(r.dof) + ")";
        case TestResult::Method::data_driven_chi1: return "chi2(1)";
        case TestResult::Method::data_driven_revised:
            return "revised(N=" + std::to_string(r.n_total) + ")";
    }
    return "?";
}

ordered_json result_core_json(const TestResult& r, const std::vector<std::size_t>& sizes) {
    ordered_json j;
    j["model"] = std::string(to_string(r.model_kind));
    j["n_total"] = r.n_total;
    j["group_sizes"] = sizes;
    j["k_used"] = r.k_used;
    j["statistic"] = r.statistic;
    j["dof_or_approx"] = dof_or_approx(r);
    j["p_value"] = r.p_value;
    j["reject"] = r.reject;
    j["alpha"] = r.alpha;
    j["warnings"] = r.warnings;
    return j;
}

ordered_json selection_json(const SelectionResult& s) {
    ordered_json j;
    j["k_star"] = s.k_star;
    j["penalized"] = s.penalized;
    j["d_used"] = s.d_used;
    return j;
}

void write_if_requested(const std::string& path, const std::string& payload, std::ostream& err) {
    if (path.empty()) return;
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::invalid_argument(path + ": cannot open for writing");
    }
    f << payload;
    if (!f) {
        err << "warning: short write to " << path << "\n";
    }
}

void print_result_text(std::ostream& out, const TestResult& r,
                       const std::vector<std::size_t>& sizes, const FittedModel& fitted,
                       const SelectionResult* selection) {
    out << "model:         " << to_string(r.model_kind) << "\n";
    out << "n_total:       " << r.n_total << "\n";
    out << "group_sizes:  ";
    for (auto s : sizes) out << ' ' << s;
    out << "\n";
    out << "k_used:        " << r.k_used << "\n";
    out << "statistic:     " << fmt12(r.statistic) << "\n";
    out << "dof_or_approx: " << dof_or_approx(r) << "\n";
    out << "p_value:       " << fmt12(r.p_value) << "\n";
    out << "reject:        " << (r.reject ? "true" : "false") << "\n";
    out << "alpha:         " << fmt12(r.alpha) << "\n";
    out << "mu_hat:        " << join12(fitted.mu_hat) << "\n";
    out << "sigma_hat:     " << join12(fitted.sigma_hat) << "\n";
    if (selection) {
        out << "k_star:        " << selection->k_star << "\n";
        out << "penalized:     " << join12(selection->penalized) << "\n";
    }
    if (r.warnings.empty()) {
        out << "warnings:      (none)\n";
    } else {
        out << "warnings:\n";
        for (const auto& w : r.warnings) out << "  - " << w << "\n";
    }
}

struct TestOptions {
    std::string input;
    std::string model = "pooled";
    std::string k = "auto";
    double alpha = 0.05;
    std::string pvalue = "asymptotic";
    int d_max = 5;
    std::string format = "text";
    std::string out_path;
};

int cmd_test(const TestOptions& opt, std::ostream& out, std::ostream& err) {
    const auto kind = model_kind_from_string(opt.model);
    if (!kind) throw config_error("unknown model '" + opt.model + "'");
    const bool auto_k = opt.k == "auto";
    int fixed_k = 0;
    if (!auto_k) {
        try {
            fixed_k = std::stoi(opt.k);
        } catch (const std::exception&) {
            throw config_error("--k must be an integer in [1, " +
                               std::to_string(kMaxTestOrder) + "] or 'auto'");
        }
        if (fixed_k < 1 || fixed_k > kMaxTestOrder) {
            throw config_error("--k must lie in [1, " + std::to_string(kMaxTestOrder) + "]");
        }
    }
    if (opt.pvalue != "asymptotic" && opt.pvalue != "revised") {
        throw config_error("--pvalue must be 'asymptotic' or 'revised'");
    }
    if (opt.pvalue == "revised" && !auto_k) {
        throw config_error("--pvalue revised requires --k auto");
    }
    if (opt.format != "text" && opt.format != "json") {
        throw config_error("--format must be 'text' or 'json'");
    }

    const LabeledDataset input = read_csv_file(opt.input);
    const auto sizes = input.data.group_sizes();
    const FittedModel fitted = fit(input.data, *kind);

    TestResult result;
    std::optional<SelectionResult> selection;
    if (auto_k) {
        const auto approx =
            opt.pvalue == "revised" ? Approximation::revised : Approximation::chi1;
        DataDrivenResult dd = test_data_driven(input.data, *kind, opt.d_max, opt.alpha, approx);
        result = std::move(dd.result);
        selection = std::move(dd.selection);
    } else {
        result = test_fixed_K(input.data, *kind, fixed_k, opt.alpha);
    }

    ordered_json j = result_core_json(result, sizes);
    if (selection) j["selection"] = selection_json(*selection);
    if (*kind == ModelKind::group_full) {
        // Per-group tests are the primary reading of this case; the top-level
        // statistic is the combined informational one. No multiplicity
        // adjustment is applied across groups.
        ordered_json groups = ordered_json::array();
        for (std::size_t g = 0; g < input.data.groups.size(); ++g) {
            Dataset single;
            single.groups.push_back(input.data.groups[g]);
            ordered_json row;
            row["group"] = input.labels[g];
            if (auto_k) {
                const auto approx =
                    opt.pvalue == "revised" ? Approximation::revised : Approximation::chi1;
                const DataDrivenResult dd =
                    test_data_driven(single, ModelKind::pooled, opt.d_max, opt.alpha, approx);
                row["n"] = dd.result.n_total;
                row["k_used"] = dd.result.k_used;
                row["statistic"] = dd.result.statistic;
                row["p_value"] = dd.result.p_value;
                row["reject"] = dd.result.reject;
            } else {
                const TestResult r = test_fixed_K(single, ModelKind::pooled, fixed_k, opt.alpha);
                row["n"] = r.n_total;
                row["k_used"] = r.k_used;
                row["statistic"] = r.statistic;
                row["p_value"] = r.p_value;
                row["reject"] = r.reject;
            }
            groups.push_back(std::move(row));
        }
        j["per_group"] = std::move(groups);
    }

    const std::string payload = j.dump(2) + "\n";
    if (opt.format == "json") {
        out << payload;
    } else {
        print_result_text(out, result, sizes, fitted, selection ? &*selection : nullptr);
        if (j.contains("per_group")) {
            out << "per_group (primary for group-full; unadjusted p-values):\n";
            for (const auto& row : j["per_group"]) {
                out << "  " << row["group"].get<std::string>() << ": n=" << row["n"]
                    << " k=" << row["k_used"] << " statistic=" << fmt12(row["statistic"])
                    << " p=" << fmt12(row["p_value"])
                    << " reject=" << (row["reject"].get<bool>() ? "true" : "false") << "\n";
            }
        }
    }
    write_if_requested(opt.out_path, payload, err);
    return 0;
}

struct SimulateOptions {
    std::string scenario = "means";
    std::vector<int> m_values;
    int replications = 500;
    double alpha = 0.05;
    int d_max = 5;
    std::uint64_t seed = 20240817ull;
    int threads = 1;
    std::vector<std::string> methods;
    std::string out_prefix = "simreport";
    bool full_grid = false;
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
    SimConfig cfg;
    const auto scen = scenario_from_string(opt.scenario);
    if (!scen) throw config_error("unknown scenario '" + opt.scenario + "'");
    cfg.scenario = *scen;
    if (opt.full_grid) {
        cfg.m_values.clear();
        for (int m = 10; m <= 150; m += 10) cfg.m_values.push_back(m);
    } else if (!opt.m_values.empty()) {
        cfg.m_values = opt.m_values;
    }
    cfg.replications = opt.replications;
    cfg.alpha = opt.alpha;
    cfg.d_max = opt.d_max;
    cfg.master_seed = opt.seed;
    cfg.threads = opt.threads;
    if (!opt.methods.empty()) {
        cfg.methods.clear();
        for (const auto& tag : opt.methods) {
            const auto method = SimMethod::from_tag(tag);
            if (!method) throw config_error("unknown method tag '" + tag + "'");
            cfg.methods.push_back(*method);
        }
    }

    const SimReport report = run_simulation(cfg);
    write_if_requested(opt.out_prefix + ".json", report_json(report), err);
    write_if_requested(opt.out_prefix + ".csv", report_csv(report), err);
    out << report_table(report);
    out << "reports: " << opt.out_prefix << ".json, " << opt.out_prefix << ".csv\n";
    return 0;
}

struct ConstantsOptions {
    int k = kMaxTestOrder;
    std::string out_path;
};

int cmd_constants(const ConstantsOptions& opt, std::ostream& out, std::ostream& err) {
    if (opt.k < 1 || opt.k > kMaxTestOrder) {
        throw config_error("--k must lie in [1, " + std::to_string(kMaxTestOrder) + "]");
    }
    const BasisConstants& constants = cached_constants();
    const CovarianceMatrix sigma = sigma_matrix(constants, opt.k);

    ordered_json j;
    j["k"] = opt.k;
    j["c1"] = std::vector<double>(constants.c1.begin(), constants.c1.begin() + opt.k);
    j["c2"] = std::vector<double>(constants.c2.begin(), constants.c2.begin() + opt.k);
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < opt.k; ++r) {
        std::vector<double> row(static_cast<std::size_t>(opt.k));
        for (int c = 0; c < opt.k; ++c) row[static_cast<std::size_t>(c)] = sigma.entries()(r, c);
        rows.push_back(row);
    }
    j["sigma"] = std::move(rows);
    j["eigenvalues"] = sigma.eigenvalues();

    const std::string payload = j.dump(2) + "\n";
    out << payload;
    write_if_requested(opt.out_path, payload, err);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Neyman-type smooth tests for the normality of ANOVA errors"};
    app.require_subcommand(1);

    TestOptions topt;
    auto* test_cmd = app.add_subcommand("test", "Test one CSV dataset for normal errors");
    test_cmd->add_option("input", topt.input, "CSV file with header 'group,value'")->required();
    test_cmd->add_option("--model", topt.model,
                         "pooled | group-means | group-variances | group-full");
    test_cmd->add_option("--k", topt.k, "basis dimension 1..8, or 'auto' for the Schwarz rule");
    test_cmd->add_option("--alpha", topt.alpha, "significance level (default 0.05)");
    test_cmd->add_option("--pvalue", topt.pvalue, "asymptotic | revised (revised needs --k auto)");
    test_cmd->add_option("--d-max", topt.d_max, "upper bound for the Schwarz search (default 5)");
    test_cmd->add_option("--format", topt.format, "text | json (default text)");
    test_cmd->add_option("--out", topt.out_path, "also write the JSON report to this file");

    SimulateOptions sopt;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo rejection-rate study");
    sim_cmd->add_option("--scenario", sopt.scenario, "means | variances | custom");
    sim_cmd->add_option("--m", sopt.m_values, "group-size multipliers (default 10 20 30)");
    sim_cmd->add_option("--reps", sopt.replications, "replications per cell (default 500)");
    sim_cmd->add_option("--alpha", sopt.alpha, "significance level (default 0.05)");
    sim_cmd->add_option("--d-max", sopt.d_max, "Schwarz search bound (default 5)");
    sim_cmd->add_option("--seed", sopt.seed, "master seed (default 20240817)");
    sim_cmd->add_option("--threads", sopt.threads, "worker threads; 0 = hardware (default 1)");
    sim_cmd->add_option("--methods", sopt.methods, "subset of K1..K5 Kstar Hx (default all)");
    sim_cmd->add_option("--out", sopt.out_prefix, "output prefix for .json/.csv (default simreport)");
    sim_cmd->add_flag("--full", sopt.full_grid, "use the full m = 10..150 grid");

    ConstantsOptions copt;
    auto* const_cmd = app.add_subcommand("constants", "Dump c1, c2 and the sigma matrix as JSON");
    const_cmd->add_option("--k", copt.k, "matrix dimension (default 8)");
    const_cmd->add_option("--out", copt.out_path, "also write the JSON dump to this file");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("smoothnorm");
    for (const auto& a : args) argv_storage.push_back(a);
    std::vector<char*> argv;
    argv.reserve(argv_storage.size());
    for (auto& s : argv_storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (test_cmd->parsed()) return cmd_test(topt, out, err);
        if (sim_cmd->parsed()) return cmd_simulate(sopt, out, err);
        if (const_cmd->parsed()) return cmd_constants(copt, out, err);
        err << "error: no subcommand\n";
        return 2;
    } catch (const numerical_error& e) {
        err << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "unexpected error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace smoothnorm
