#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ngt/channel.hpp"
#include "ngt/estimate_k.hpp"

namespace ngt {

struct OuterRound {
    double kbar = 0;
    std::uint32_t found = 0;
    bool fallback = false;
};

struct RecoveryResult {
    std::vector<Item> estimate;  // sorted
    std::size_t tests_used = 0;
    bool aborted = false;
    std::string abort_reason;
    std::vector<std::string> notes;
    // One entry per outer iteration (approaches 2 and 3 only).
    std::vector<OuterRound> rounds;
};

// Sizes of `parts` near-equal blocks of `n` items; the first n mod parts
// blocks get the extra item.
std::vector<std::size_t> block_sizes(std::size_t n, std::size_t parts);

// --- Noiseless generalized binary splitting -------------------------------

struct HwangParams {
    enum class Grouping {
        // Groups of 2^floor(log2(n/k)) items, as in generalized binary splitting.
        power_of_two,
        // k near-equal contiguous groups, matching Approach 1's partitioning.
        k_blocks,
    };
    // Known number of defectives; defaults to the true k.
    std::optional<std::uint32_t> k;
    Grouping grouping = Grouping::power_of_two;
    // Stop as soon as k defectives have been identified.
    bool stop_when_all_found = true;
};

// Requires truth.rho() == 0.
RecoveryResult hwang_baseline(const GroundTruth& truth, Channel& channel,
                              const HwangParams& params = {});

// --- Approach 1 ------------------------------------------------------------

struct Approach1Params {
    enum class NbsRule { delta_over_k, delta_over_3k };

    std::uint32_t k = 1;  // true k or an upper bound kbar
    double delta = 0.1;
    // Fixed odd repeat count for the emptiness test; confidence delta/k when unset.
    std::optional<std::uint32_t> fixed_r;
    bool early_stop = true;
    NbsRule nbs_rule = NbsRule::delta_over_k;
    // Let MNBS report "no defective" through the artificial extra item.
    bool allow_none = true;
    bool enforce_nbs_cap = true;

    double nbs_delta() const;
    void validate() const;
};

RecoveryResult approach1(Channel& channel, const Approach1Params& params);
// Runs Approach 1 restricted to `items` (kept in the given order).
RecoveryResult approach1_on(std::span<const Item> items, Channel& channel,
                            const Approach1Params& params);

// --- Approach 2 ------------------------------------------------------------

struct Approach2Params {
    double delta = 0.1;
    std::optional<double> delta_est;  // n^-3 when unset
    double c_stage = 8.0;
    double C = 4.0;
    // Confidence of the emptiness test and MNBS in the inner pass; 1/ln n when unset.
    std::optional<double> inner_confidence;
    bool allow_none = true;

    void validate() const;
};

RecoveryResult approach2(Channel& channel, NoiseSource& rng, const Approach2Params& params);

// --- Approach 3 ------------------------------------------------------------

struct Approach3Params {
    double delta = 0.1;
    std::optional<double> delta0;  // delta when unset
    std::optional<double> delta1;  // delta when unset
    std::optional<double> delta_est;
    double c_stage = 8.0;
    double epsilon = 0.1;
    double epsilon1 = 0.1;
    // Count threshold; grid-minimized when unset.
    std::optional<double> zeta;
    double C = 4.0;
    std::optional<std::uint32_t> t_indiv_override;
    std::optional<double> inner_confidence;
    bool allow_none = true;

    void validate(double rho) const;
};

struct IndividualTestingChoice {
    double zeta;
    std::uint32_t t_indiv;
};

// zeta (explicit or grid-minimized) and the per-candidate repeat count for
// an initial estimate kbar_init.
IndividualTestingChoice choose_individual_testing(const Approach3Params& params, double n,
                                                  double kbar_init, double rho);

RecoveryResult approach3(Channel& channel, NoiseSource& rng, const Approach3Params& params);

}  // namespace ngt
