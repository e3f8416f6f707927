// wbis: run importance-sampling experiments, compute credit references and
// summarize record files.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wbis/error.hpp"
#include "wbis/harness.hpp"

namespace {

using nlohmann::json;

struct RunFlags
{
    std::string config_path;
    std::optional<std::string> problem;
    std::optional<std::string> method;
    std::optional<std::size_t> n;
    std::optional<std::size_t> repeats;
    std::optional<double> alpha;
    std::optional<double> significance;
    std::optional<double> c_constant;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> portfolio_seed;
    std::optional<double> reference;
    std::optional<std::string> out;
    std::optional<std::string> snapshot;
    std::size_t threads = 1;
    bool no_timing = false;
};

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw wbis::config_error("cannot open " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw wbis::config_error(path + ": " + e.what());
    }
}

wbis::ExperimentConfig config_from_flags(const RunFlags& f)
{
    json j = f.config_path.empty() ? json::object() : read_json_file(f.config_path);
    if (f.problem) j["problem"] = *f.problem;
    if (f.method) j["method"] = *f.method;
    if (f.n) j["n"] = *f.n;
    if (f.repeats) j["repeats"] = *f.repeats;
    if (f.alpha) j["alpha"] = *f.alpha;
    if (f.significance) j["significance"] = *f.significance;
    if (f.c_constant) j["c_constant"] = *f.c_constant;
    if (f.seed) j["master_seed"] = *f.seed;
    if (f.portfolio_seed) j["portfolio_seed"] = *f.portfolio_seed;
    if (f.reference) j["reference_value"] = *f.reference;
    if (f.out) j["output_path"] = *f.out;
    if (f.snapshot) j["snapshot_path"] = *f.snapshot;
    if (!j.contains("n")) j["n"] = 10000;
    if (!j.contains("repeats")) j["repeats"] = 1000;
    return wbis::parse_config(j.dump());
}

void print_summary_row(const wbis::ExperimentConfig& c, const wbis::MetricsSummary& m)
{
    std::string param = "-";
    if (c.alpha) param = "alpha=" + std::to_string(*c.alpha).substr(0, 4);
    if (c.significance) param = "sig=" + std::to_string(*c.significance).substr(0, 4);
    std::cout << std::left << std::setw(8) << wbis::to_string(c.problem) << std::setw(6) << wbis::to_string(c.method)
              << std::setw(11) << param << std::right << std::setw(9) << m.n << std::setw(8) << m.repeats
              << std::scientific << std::setprecision(4) << std::setw(13) << m.nmse << std::setw(13) << m.rmse
              << std::setw(13) << m.bias_squared << std::setw(13) << m.variance;
    if (m.mean_threshold_r) {
        std::cout << std::fixed << std::setprecision(1) << std::setw(10) << *m.mean_threshold_r;
    } else {
        std::cout << std::setw(10) << "-";
    }
    std::cout << std::defaultfloat << '\n';
}

void print_summary_header()
{
    std::cout << std::left << std::setw(8) << "problem" << std::setw(6) << "method" << std::setw(11) << "param"
              << std::right << std::setw(9) << "n" << std::setw(8) << "repeats" << std::setw(13) << "NMSE"
              << std::setw(13) << "RMSE" << std::setw(13) << "bias^2" << std::setw(13) << "variance"
              << std::setw(10) << "mean r" << '\n';
}

int cmd_run(const RunFlags& flags)
{
    const auto config = config_from_flags(flags);
    const double reference = wbis::config_reference(config);
    const auto records = wbis::run_experiment(config, flags.threads);
    const auto metrics = wbis::summarize_records(records, reference, config.n);

    if (config.output_path.empty()) {
        wbis::write_records_csv(std::cout, records, !flags.no_timing);
    } else {
        std::ofstream out(config.output_path);
        if (!out) {
            throw wbis::error("cannot write " + config.output_path);
        }
        wbis::write_records_csv(out, records, !flags.no_timing);
        std::ofstream summary(config.output_path + ".summary.json");
        summary << wbis::summary_json(config, metrics, reference) << '\n';
        print_summary_header();
        print_summary_row(config, metrics);
    }
    return 0;
}

int cmd_reference(const RunFlags& flags, std::size_t runs, std::size_t n)
{
    RunFlags f = flags;
    f.problem = "credit";
    f.method = "IS";
    f.n = n;
    f.repeats = runs;
    const auto config = config_from_flags(f);
    const auto setup = wbis::prepare_credit(config);
    const auto ref = wbis::compute_credit_reference(setup, config.master_seed, runs, n, flags.threads);
    const std::string text = wbis::credit_reference_json(ref);
    if (config.output_path.empty()) {
        std::cout << text << '\n';
    } else {
        std::ofstream(config.output_path) << text << '\n';
        std::cout << "reference " << std::setprecision(6) << ref.value << " (se " << ref.standard_error
                  << ", WBIS agreement " << ref.relative_agreement << ") -> " << config.output_path << '\n';
    }
    if (!ref.accepted) {
        std::cerr << "reference rejected: IS and WBIS aggregates differ by more than "
                  << wbis::reference_agreement_tolerance * 100 << "%\n";
        return 2;
    }
    return 0;
}

int cmd_report(const std::vector<std::string>& summaries)
{
    print_summary_header();
    for (const auto& path : summaries) {
        const json s = read_json_file(path);
        const auto config = wbis::parse_config(s.at("config").dump());
        const double reference = s.at("reference").get<double>();
        std::filesystem::path records_path = config.output_path;
        if (records_path.is_relative() && !std::filesystem::exists(records_path)) {
            records_path = std::filesystem::path(path).parent_path() / records_path.filename();
        }
        std::ifstream in(records_path);
        if (!in) {
            throw wbis::error("cannot open records " + records_path.string());
        }
        const auto records = wbis::read_records_csv(in);
        print_summary_row(config, wbis::summarize_records(records, reference, config.n));
    }
    return 0;
}

void add_experiment_flags(CLI::App* cmd, RunFlags& f)
{
    cmd->add_option("--config", f.config_path, "JSON experiment config");
    cmd->add_option("--problem", f.problem, "mixture | credit");
    cmd->add_option("--method", f.method, "MC | IS | DIS | WBIS");
    cmd->add_option("--n", f.n, "samples per estimate");
    cmd->add_option("--repeats", f.repeats, "number of independent estimates");
    cmd->add_option("--alpha", f.alpha, "defensive mixture weight (DIS)");
    cmd->add_option("--significance", f.significance, "normality test level, 0.01 or 0.05 (WBIS)");
    cmd->add_option("--c-constant", f.c_constant, "group count constant C (WBIS)");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--portfolio-seed", f.portfolio_seed, "credit portfolio seed");
    cmd->add_option("--reference", f.reference, "reference value for metrics");
    cmd->add_option("--out", f.out, "output path");
    cmd->add_option("--snapshot", f.snapshot, "credit portfolio/proposal snapshot file");
    cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Weight-bounded importance sampling experiments"};
    app.require_subcommand(1);

    RunFlags flags;
    flags.threads = std::max(1u, std::thread::hardware_concurrency());

    auto* run = app.add_subcommand("run", "run an experiment config and write per-run records");
    add_experiment_flags(run, flags);
    run->add_flag("--no-timing", flags.no_timing, "write elapsed_ms as 0 for byte-reproducible files");

    std::size_t ref_runs = 50;
    std::size_t ref_n = 100000;
    auto* reference = app.add_subcommand("reference", "compute the credit reference probability");
    add_experiment_flags(reference, flags);
    reference->add_option("--runs", ref_runs, "independent IS runs to aggregate");
    reference->add_option("--ref-n", ref_n, "samples per reference run");

    std::vector<std::string> summaries;
    auto* report = app.add_subcommand("report", "tabulate summary files written by `run`");
    report->add_option("summaries", summaries, "summary JSON files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(flags);
        if (*reference) return cmd_reference(flags, ref_runs, ref_n);
        if (*report) return cmd_report(summaries);
    } catch (const wbis::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
