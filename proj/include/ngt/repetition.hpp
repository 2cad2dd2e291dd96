#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ngt/channel.hpp"

namespace ngt {

// How many times a pool is retested before a majority decision.
class RepetitionPlan {
public:
    enum class Mode { confidence, fixed_odd };

    // Enough repeats for error probability at most `delta` (rounded up to odd).
    static RepetitionPlan confidence(double delta, double rho);
    // Exactly r repeats (r odd), optionally stopping once the majority is decided.
    static RepetitionPlan fixed_odd(std::uint32_t r, bool early_stop);

    Mode mode() const { return mode_; }
    std::uint32_t repeats() const { return repeats_; }
    bool early_stop() const { return early_stop_; }
    double delta() const { return delta_; }

private:
    RepetitionPlan(Mode mode, std::uint32_t repeats, bool early_stop, double delta)
        : mode_(mode), repeats_(repeats), early_stop_(early_stop), delta_(delta) {}

    Mode mode_;
    std::uint32_t repeats_;
    bool early_stop_;
    double delta_;
};

// ceil(ln(1/delta) / D2(1/2 || rho)), at least 1; 1 when rho = 0.
std::uint32_t repetition_repeats(double delta, double rho);

struct VoteResult {
    bool decision = false;
    std::uint32_t positives = 0;
    std::uint32_t tests = 0;
};

VoteResult majority_vote(std::span<const Item> pool, const RepetitionPlan& plan, Channel& channel);

struct CountRecord {
    Item item;
    std::uint32_t positives;
    std::uint32_t t_indiv;
};

// Tests every item alone t_indiv times and records its positive count.
std::vector<CountRecord> individual_counts(std::span<const Item> items, std::uint32_t t_indiv,
                                           Channel& channel);

struct RankSplit {
    std::vector<Item> kept;
    std::vector<Item> remainder;
};

// The `keep` items with the highest counts; ties broken by smaller item index.
RankSplit rank_and_threshold(std::span<const CountRecord> records, std::size_t keep);

// Repeats per item for the count-threshold rule with k0 non-defectives and
// slack eps1:
//   max{ ln(k0/delta0)/D2(zeta||rho), ln(1/(eps1 delta1))/D2(zeta||1-rho) }, rounded up.
std::uint32_t threshold_repeats(double k0, double delta0, double delta1, double eps1,
                                double zeta, double rho);

}  // namespace ngt
