#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ngt/channel.hpp"
#include "ngt/strategies.hpp"

namespace ngt {

enum class StrategyKind { hwang, approach1, approach2, approach3 };

std::string to_string(StrategyKind kind);
StrategyKind parse_strategy(const std::string& name);

struct StrategySpec {
    StrategyKind kind = StrategyKind::approach1;
    HwangParams hwang;
    Approach1Params approach1;
    // Partition count for approach1; the experiment's k when unset.
    std::optional<std::uint32_t> k_assumed;
    Approach2Params approach2;
    Approach3Params approach3;
};

struct ExperimentConfig {
    std::uint32_t n = 500;
    std::uint32_t k = 10;
    double rho = 0.05;
    StrategySpec strategy;
    std::uint64_t trials = 1000;
    std::uint64_t master_seed = 1;
    int threads = 1;
    // Materialize every pool in the ledger (slower; used by accounting checks).
    bool keep_pools = false;
    double hist_bin_width = 5.0;
    // Prefix for <prefix>_trials.csv and <prefix>_summary.json; nothing is
    // written when empty.
    std::string output_path;

    void validate() const;
};

struct TrialOutcome {
    std::uint64_t trial_index = 0;
    std::uint64_t tests_used = 0;
    bool exact_success = false;
    std::uint32_t false_positives = 0;
    std::uint32_t false_negatives = 0;
    double fraction_mistakes = 0;
    bool aborted = false;
};

struct Histogram {
    double bin_width = 1;
    double start = 0;  // left edge of bin 0
    std::vector<std::uint64_t> counts;

    std::uint64_t total() const;
};

struct AggregateSummary {
    std::uint64_t trials = 0;
    double mean_tests = 0;
    double std_tests = 0;
    double pe_hat = 0;
    double pe_ci_lo = 0;
    double pe_ci_hi = 0;
    double mean_fraction_mistakes = 0;
    double abort_rate = 0;
    double std_over_mean = 0;
    // mean fraction of mistakes divided by pe_hat / k; NaN when pe_hat = 0.
    double fraction_vs_pe_over_k = 0;
    Histogram histogram;
};

// Uniformly random k-subset of 1..n drawn from `rng` (Floyd's algorithm).
std::vector<Item> sample_defectives(std::uint32_t n, std::uint32_t k, NoiseSource& rng);

// Everything produced by one trial, for inspection in tests.
struct TrialRecord {
    TrialOutcome outcome;
    GroundTruth truth;
    RecoveryResult result;
    TestLedger ledger;
    std::size_t channel_calls = 0;
};

TrialRecord run_trial_detailed(const ExperimentConfig& config, std::uint64_t trial_index);
TrialOutcome run_trial(const ExperimentConfig& config, std::uint64_t trial_index);

// Reference implementation: trials one after another on the calling thread.
std::vector<TrialOutcome> run_trials_serial(const ExperimentConfig& config);
// OpenMP over trials; results are indexed by trial and identical to the serial run.
std::vector<TrialOutcome> run_trials_parallel(const ExperimentConfig& config, int threads);

Histogram histogram(const std::vector<TrialOutcome>& outcomes, double bin_width);
AggregateSummary summarize(const std::vector<TrialOutcome>& outcomes, std::uint32_t k,
                           double bin_width);

struct ExperimentResult {
    std::vector<TrialOutcome> outcomes;
    AggregateSummary summary;
};

// Runs the trials (parallel when config.threads > 1) and writes the trial
// CSV and summary JSON if an output path is configured.
ExperimentResult run_experiment(const ExperimentConfig& config);

// --- Persistence -----------------------------------------------------------

inline constexpr const char* kTrialsSchema = "ngt-trials/1";
inline constexpr const char* kSweepSchema = "ngt-sweep/1";
inline constexpr const char* kBoundsSchema = "ngt-bounds/1";

void write_trials_csv(std::ostream& os, const std::vector<TrialOutcome>& outcomes);
std::vector<TrialOutcome> read_trials_csv(std::istream& is);
std::string summary_to_json(const AggregateSummary& s, const ExperimentConfig& config);

// --- Sweeps ----------------------------------------------------------------

struct SweepSpec {
    ExperimentConfig base;
    // Empty means "use the base value".
    std::vector<std::uint32_t> r_values;
    std::vector<double> delta_values;
    bool with_bounds = false;
};

struct SweepRow {
    std::string strategy;
    std::optional<std::uint32_t> r;
    double delta = 0;
    std::uint32_t n = 0;
    std::uint32_t k = 0;
    double rho = 0;
    AggregateSummary summary;
    std::map<std::string, double> bounds;
};

std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec);
std::vector<SweepRow> sweep(const SweepSpec& spec);
// Adds the leading-order bound curves for each row's (n, k, rho).
void overlay_bounds(std::vector<SweepRow>& rows);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

// --- Config files ----------------------------------------------------------

ExperimentConfig parse_experiment_config(const std::string& json_text);
SweepSpec parse_sweep_config(const std::string& json_text);
std::string read_file(const std::string& path);

// --- Statistics helpers ----------------------------------------------------

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ngt
