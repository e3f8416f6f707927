#include "wbis/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wbis/anderson_darling.hpp"
#include "wbis/error.hpp"
#include "wbis/rng.hpp"
#include "wbis/threshold.hpp"

namespace wbis {

using nlohmann::json;

std::string_view to_string(Problem p)
{
    return p == Problem::mixture ? "mixture" : "credit";
}

Problem parse_problem(std::string_view name)
{
    if (name == "mixture") return Problem::mixture;
    if (name == "credit") return Problem::credit;
    throw config_error("unknown problem '" + std::string(name) + "' (expected mixture or credit)");
}

void ExperimentConfig::validate()
{
    if (n == 0) throw config_error("config field 'n' must be positive");
    if (repeats == 0) throw config_error("config field 'repeats' must be positive");

    if (method == Method::DIS) {
        if (!alpha) throw config_error("config field 'alpha' is required for DIS");
        if (!(*alpha > 0.0 && *alpha < 1.0)) throw config_error("config field 'alpha' must lie in (0, 1)");
    } else if (alpha) {
        throw config_error("config field 'alpha' is only valid for DIS");
    }

    if (method == Method::WBIS) {
        if (!significance) throw config_error("config field 'significance' is required for WBIS");
        try {
            anderson_darling_critical_value(*significance);
        } catch (const domain_error&) {
            throw config_error("config field 'significance' must be 0.01 or 0.05");
        }
        if (!c_constant) c_constant = default_c_constant;
        if (!(*c_constant > 0.0)) throw config_error("config field 'c_constant' must be positive");
        make_grouping(n, *c_constant);
    } else {
        if (significance) throw config_error("config field 'significance' is only valid for WBIS");
        if (c_constant) throw config_error("config field 'c_constant' is only valid for WBIS");
    }

    if (problem == Problem::mixture) {
        if (portfolio_seed) throw config_error("config field 'portfolio_seed' is only valid for credit");
        mixture.validate();
    } else {
        cross_entropy.validate();
    }
}

namespace {

template <class T>
T get_field(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(std::string("config field '") + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where)
{
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw config_error("unknown " + std::string(where) + " key '" + key + "'");
        }
    }
}

} // namespace

ExperimentConfig parse_config(std::string_view json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw config_error("config must be a JSON object");
    }
    reject_unknown(j,
                   {"problem", "method", "n", "repeats", "alpha", "significance", "c_constant", "master_seed",
                    "portfolio_seed", "reference_value", "output_path", "mixture", "cross_entropy",
                    "snapshot_path"},
                   "config");

    ExperimentConfig c;
    c.problem = parse_problem(get_field<std::string>(j, "problem"));
    c.method = parse_method(get_field<std::string>(j, "method"));
    c.n = get_field<std::size_t>(j, "n");
    c.repeats = get_field<std::size_t>(j, "repeats");
    if (j.contains("alpha")) c.alpha = get_field<double>(j, "alpha");
    if (j.contains("significance")) c.significance = get_field<double>(j, "significance");
    if (j.contains("c_constant")) c.c_constant = get_field<double>(j, "c_constant");
    if (j.contains("master_seed")) c.master_seed = get_field<std::uint64_t>(j, "master_seed");
    if (j.contains("portfolio_seed")) c.portfolio_seed = get_field<std::uint64_t>(j, "portfolio_seed");
    if (j.contains("reference_value")) c.reference_value = get_field<double>(j, "reference_value");
    if (j.contains("output_path")) c.output_path = get_field<std::string>(j, "output_path");
    if (j.contains("snapshot_path")) c.snapshot_path = get_field<std::string>(j, "snapshot_path");

    if (j.contains("mixture")) {
        const auto& m = j["mixture"];
        reject_unknown(m, {"dimension", "theta", "perturbation", "mix_weight_main", "mix_weight_perturbed"},
                       "mixture");
        if (m.contains("dimension")) c.mixture.dimension = get_field<std::size_t>(m, "dimension");
        if (m.contains("theta")) c.mixture.theta = get_field<double>(m, "theta");
        if (m.contains("perturbation")) c.mixture.perturbation = get_field<double>(m, "perturbation");
        if (m.contains("mix_weight_main")) c.mixture.mix_weight_main = get_field<double>(m, "mix_weight_main");
        if (m.contains("mix_weight_perturbed"))
            c.mixture.mix_weight_perturbed = get_field<double>(m, "mix_weight_perturbed");
    }
    if (j.contains("cross_entropy")) {
        const auto& ce = j["cross_entropy"];
        reject_unknown(ce, {"batch_size", "elite_fraction", "max_iterations", "smoothing", "min_variance"},
                       "cross_entropy");
        if (ce.contains("batch_size")) c.cross_entropy.batch_size = get_field<std::size_t>(ce, "batch_size");
        if (ce.contains("elite_fraction")) c.cross_entropy.elite_fraction = get_field<double>(ce, "elite_fraction");
        if (ce.contains("max_iterations"))
            c.cross_entropy.max_iterations = get_field<std::size_t>(ce, "max_iterations");
        if (ce.contains("smoothing")) c.cross_entropy.smoothing = get_field<double>(ce, "smoothing");
        if (ce.contains("min_variance")) c.cross_entropy.min_variance = get_field<double>(ce, "min_variance");
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw config_error("cannot open config file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& c)
{
    json j;
    j["problem"] = to_string(c.problem);
    j["method"] = to_string(c.method);
    j["n"] = c.n;
    j["repeats"] = c.repeats;
    if (c.alpha) j["alpha"] = *c.alpha;
    if (c.significance) j["significance"] = *c.significance;
    if (c.c_constant) j["c_constant"] = *c.c_constant;
    j["master_seed"] = c.master_seed;
    if (c.portfolio_seed) j["portfolio_seed"] = *c.portfolio_seed;
    if (c.reference_value) j["reference_value"] = *c.reference_value;
    j["output_path"] = c.output_path;
    if (c.problem == Problem::mixture) {
        j["mixture"] = {{"dimension", c.mixture.dimension},
                        {"theta", c.mixture.theta},
                        {"perturbation", c.mixture.perturbation},
                        {"mix_weight_main", c.mixture.mix_weight_main},
                        {"mix_weight_perturbed", c.mixture.mix_weight_perturbed}};
    } else {
        j["cross_entropy"] = {{"batch_size", c.cross_entropy.batch_size},
                              {"elite_fraction", c.cross_entropy.elite_fraction},
                              {"max_iterations", c.cross_entropy.max_iterations},
                              {"smoothing", c.cross_entropy.smoothing},
                              {"min_variance", c.cross_entropy.min_variance}};
        if (!c.snapshot_path.empty()) j["snapshot_path"] = c.snapshot_path;
    }
    return j.dump(2);
}

std::uint64_t repeat_stream_id(Method method, std::size_t repeat_index)
{
    const auto tag = static_cast<std::uint64_t>(method) + 1;
    return (tag << 48) | (static_cast<std::uint64_t>(repeat_index) & 0xFFFF'FFFF'FFFFULL);
}

namespace {

/// Runs body(i) for i in [0, count) on up to `threads` workers.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body)
{
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = count;
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

struct SingleRun
{
    double estimate;
    std::optional<double> threshold_r;
};

SingleRun run_mixture_once(const ExperimentConfig& c, const MixtureModel& model, Philox4x32& rng)
{
    switch (c.method) {
    case Method::MC:
        return {mc_estimate(model.nominal_f_values(c.n, rng)).estimate, std::nullopt};
    case Method::IS:
        return {is_estimate(model.proposal_batch(c.n, rng)).estimate, std::nullopt};
    case Method::DIS:
        return {dis_estimate(model.defensive_batch(c.n, *c.alpha, rng), *c.alpha).estimate, std::nullopt};
    case Method::WBIS: {
        const auto batch = model.proposal_batch(c.n, rng);
        const Eigen::ArrayXd w = weights_of(batch);
        const auto sel = select_threshold(w, make_grouping(c.n, *c.c_constant), *c.significance);
        return {wbis_estimate(batch, sel.r).estimate, sel.r};
    }
    }
    throw domain_error("run_experiment: unknown method");
}

std::vector<RunRecord> run_repeats(const ExperimentConfig& c, std::size_t threads,
                                   const std::function<SingleRun(Philox4x32&)>& once)
{
    std::vector<RunRecord> records(c.repeats);
    parallel_for(c.repeats, threads, [&](std::size_t i) {
        const std::uint64_t stream = repeat_stream_id(c.method, i);
        Philox4x32 rng(c.master_seed, stream);
        const auto start = std::chrono::steady_clock::now();
        const SingleRun run = once(rng);
        const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
        records[i] = RunRecord{i, stream, run.estimate, run.threshold_r, elapsed.count()};
    });
    return records;
}

} // namespace

CreditSetup prepare_credit(const ExperimentConfig& config)
{
    if (!config.snapshot_path.empty() && std::filesystem::exists(config.snapshot_path)) {
        auto snap = load_portfolio(config.snapshot_path);
        if (snap.portfolio.build_seed != config.effective_portfolio_seed()) {
            throw config_error("snapshot " + config.snapshot_path + " was built from portfolio seed " +
                               std::to_string(snap.portfolio.build_seed));
        }
        if (!snap.proposal) {
            throw config_error("snapshot " + config.snapshot_path + " has no fitted proposal");
        }
        return {std::move(snap.portfolio), std::move(*snap.proposal)};
    }
    const std::uint64_t seed = config.effective_portfolio_seed();
    CreditSetup setup{build_portfolio(seed), {}};
    Philox4x32 rng(seed, stream_ids::cross_entropy_fit);
    setup.proposal = cross_entropy_fit(setup.portfolio, config.cross_entropy, rng);
    if (!config.snapshot_path.empty()) {
        save_portfolio(config.snapshot_path, setup.portfolio, &setup.proposal);
    }
    return setup;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const CreditSetup& setup, std::size_t threads)
{
    ExperimentConfig c = config;
    c.validate();
    if (c.problem == Problem::mixture) {
        const MixtureModel model(c.mixture);
        return run_repeats(c, threads, [&](Philox4x32& rng) { return run_mixture_once(c, model, rng); });
    }
    DefaultProbParams params;
    if (c.alpha) params.alpha = *c.alpha;
    if (c.significance) params.significance = *c.significance;
    if (c.c_constant) params.c_constant = *c.c_constant;
    return run_repeats(c, threads, [&](Philox4x32& rng) {
        const auto res = estimate_default_prob(setup.portfolio, setup.proposal, c.method, c.n, params, rng);
        return SingleRun{res.output.estimate, res.threshold_r};
    });
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, std::size_t threads)
{
    ExperimentConfig c = config;
    c.validate();
    if (c.problem == Problem::mixture) {
        return run_experiment(c, CreditSetup{}, threads);
    }
    return run_experiment(c, prepare_credit(c), threads);
}

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records, bool with_timing)
{
    out << records_csv_header << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : records) {
        out << r.run_id << ',' << r.seed << ',' << r.estimate << ',';
        if (r.threshold_r) {
            out << *r.threshold_r;
        }
        out << ',';
        if (with_timing) {
            out << std::setprecision(6) << r.elapsed_ms << std::setprecision(std::numeric_limits<double>::max_digits10);
        } else {
            out << 0;
        }
        out << '\n';
    }
}

std::vector<RunRecord> read_records_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != records_csv_header) {
        throw error("records CSV: missing or unexpected header");
    }
    std::vector<RunRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cols.push_back(cell);
        }
        if (cols.size() == 4 && line.back() == ',') {
            cols.emplace_back();
        }
        if (cols.size() != 5) {
            throw error("records CSV line " + std::to_string(line_no) + ": expected 5 columns");
        }
        try {
            RunRecord r{std::stoull(cols[0]), std::stoull(cols[1]), std::stod(cols[2]), std::nullopt,
                        std::stod(cols[4])};
            if (!cols[3].empty()) {
                r.threshold_r = std::stod(cols[3]);
            }
            records.push_back(r);
        } catch (const std::logic_error&) {
            throw error("records CSV line " + std::to_string(line_no) + ": malformed number");
        }
    }
    return records;
}

MetricsSummary summarize_records(const std::vector<RunRecord>& records, double reference, std::size_t n)
{
    std::vector<double> estimates;
    std::vector<double> thresholds;
    estimates.reserve(records.size());
    for (const auto& r : records) {
        estimates.push_back(r.estimate);
        if (r.threshold_r) {
            thresholds.push_back(*r.threshold_r);
        }
    }
    return summarize_metrics(estimates, reference, n, thresholds);
}

std::string summary_json(const ExperimentConfig& config, const MetricsSummary& m, double reference)
{
    json j;
    j["config"] = json::parse(dump_config(config));
    j["reference"] = reference;
    j["metrics"] = {{"nmse", m.nmse},
                    {"rmse", m.rmse},
                    {"bias_squared", m.bias_squared},
                    {"variance", m.variance},
                    {"repeats", m.repeats},
                    {"n", m.n}};
    j["metrics"]["mean_threshold_r"] = m.mean_threshold_r ? json(*m.mean_threshold_r) : json(nullptr);
    return j.dump(2);
}

CreditReference compute_credit_reference(const CreditSetup& setup, std::uint64_t master_seed, std::size_t runs,
                                         std::size_t n, std::size_t threads)
{
    if (runs < 2 || n == 0) {
        throw config_error("compute_credit_reference: need at least two runs of positive size");
    }
    std::vector<double> is_est(runs), wbis_est(runs);
    const auto plan = make_grouping(n);
    parallel_for(runs, threads, [&](std::size_t i) {
        Philox4x32 rng(master_seed, stream_ids::reference + i);
        const auto batch = credit_batch(setup.portfolio, setup.proposal, n, std::nullopt, rng);
        is_est[i] = is_estimate(batch).estimate;
        const Eigen::ArrayXd w = weights_of(batch);
        wbis_est[i] = wbis_estimate(batch, select_threshold(w, plan, 0.01).r).estimate;
    });
    const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const double is_mean = mean(is_est);
    const double wbis_mean = mean(wbis_est);
    double ss = 0.0;
    for (double x : is_est) ss += (x - is_mean) * (x - is_mean);
    const double se = std::sqrt(ss / static_cast<double>(runs - 1) / static_cast<double>(runs));
    const double agreement = is_mean > 0.0 ? std::abs(wbis_mean - is_mean) / is_mean
                                           : std::numeric_limits<double>::infinity();
    return {setup.portfolio.build_seed, is_mean, se, wbis_mean, agreement, runs, n,
            agreement <= reference_agreement_tolerance};
}

std::string credit_reference_json(const CreditReference& r)
{
    json j{{"portfolio_seed", r.portfolio_seed},
           {"reference_value", r.value},
           {"standard_error", r.standard_error},
           {"wbis_value", r.wbis_value},
           {"relative_agreement", r.relative_agreement},
           {"runs", r.runs},
           {"n", r.n},
           {"accepted", r.accepted}};
    return j.dump(2);
}

double config_reference(const ExperimentConfig& config)
{
    if (config.reference_value) {
        return *config.reference_value;
    }
    if (config.problem == Problem::mixture) {
        return 1.0;
    }
    throw config_error("config field 'reference_value' is required for the credit problem (see `wbis reference`)");
}

} // namespace wbis
