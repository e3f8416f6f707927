#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "credit.hpp"
#include "estimators.hpp"
#include "metrics.hpp"
#include "mixture.hpp"

namespace wbis {

enum class Problem
{
    mixture,
    credit,
};

std::string_view to_string(Problem p);
Problem parse_problem(std::string_view name);

struct ExperimentConfig
{
    Problem problem = Problem::mixture;
    Method method = Method::IS;
    std::size_t n = 10000;
    std::size_t repeats = 1000;
    std::optional<double> alpha;         // DIS only
    std::optional<double> significance;  // WBIS only
    std::optional<double> c_constant;    // WBIS only, defaults to default_c_constant
    std::uint64_t master_seed = 0;
    std::optional<std::uint64_t> portfolio_seed;  // credit; defaults to master_seed
    std::optional<double> reference_value;
    std::string output_path;

    // problem parameters; the defaults are the benchmark values
    MixtureProblem mixture{};
    CrossEntropyConfig cross_entropy{};
    /// Portfolio + fitted proposal snapshot; loaded when it exists, written
    /// after building otherwise.
    std::string snapshot_path;

    /// Fills c_constant for WBIS and checks method-specific fields. Throws
    /// config_error naming the offending field.
    void validate();

    std::uint64_t effective_portfolio_seed() const { return portfolio_seed.value_or(master_seed); }
};

/// Parses the JSON config text; unknown keys are rejected.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& config);

struct RunRecord
{
    std::size_t run_id;
    std::uint64_t seed;  // stream id under master_seed
    double estimate;
    std::optional<double> threshold_r;
    double elapsed_ms;
};

/// Stream id of one repeat: method tag in the upper 16 bits, repeat index
/// below. Always below stream_ids::reserved_stream_base.
std::uint64_t repeat_stream_id(Method method, std::size_t repeat_index);

/// Portfolio and proposal used by credit experiments.
struct CreditSetup
{
    CreditPortfolio portfolio;
    GaussianProposal proposal;
};

/// Builds the portfolio from portfolio_seed and fits the cross-entropy
/// proposal on its reserved stream (or loads both from snapshot_path).
CreditSetup prepare_credit(const ExperimentConfig& config);

/// Runs config.repeats independent estimates. Records come back in repeat
/// order regardless of the thread count.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, std::size_t threads = 1);

/// Same, with an already prepared credit setup (skips the fit).
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const CreditSetup& setup,
                                      std::size_t threads = 1);

inline constexpr std::string_view records_csv_header = "run_id,seed,estimate,threshold_r,elapsed_ms";

/// with_timing = false writes elapsed_ms as 0 so files are byte-reproducible.
void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records, bool with_timing = true);
std::vector<RunRecord> read_records_csv(std::istream& in);

MetricsSummary summarize_records(const std::vector<RunRecord>& records, double reference, std::size_t n);

/// JSON summary of one experiment: config, reference and metrics.
std::string summary_json(const ExperimentConfig& config, const MetricsSummary& metrics, double reference);

struct CreditReference
{
    std::uint64_t portfolio_seed;
    double value;           // IS aggregate
    double standard_error;  // of the IS aggregate
    double wbis_value;      // WBIS aggregate on the same batches
    double relative_agreement;
    std::size_t runs;
    std::size_t n;
    bool accepted;
};

inline constexpr double reference_agreement_tolerance = 0.05;

/// Aggregates `runs` IS runs of n samples each with the fitted proposal and
/// cross-checks against WBIS (significance 1%, default C) on the same batches.
CreditReference compute_credit_reference(const CreditSetup& setup, std::uint64_t master_seed,
                                         std::size_t runs = 50, std::size_t n = 100000, std::size_t threads = 1);

std::string credit_reference_json(const CreditReference& ref);

/// Reference of a config: reference_value if set, 1 for the mixture problem.
/// Credit without a reference value throws config_error.
double config_reference(const ExperimentConfig& config);

} // namespace wbis
