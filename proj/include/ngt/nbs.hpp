#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ngt/channel.hpp"

namespace ngt {

// Posterior over the target position of a noisy binary search, positions
// 1..m. Updated multiplicatively: mass consistent with an answer is scaled by
// (1 - rho), inconsistent mass by rho, then renormalized.
class BeliefState {
public:
    BeliefState(std::size_t m, double rho);

    std::size_t size() const { return weights_.size(); }
    std::span<const double> weights() const { return weights_; }

    // Smallest position whose cumulative weight reaches 1/2.
    std::size_t median() const;
    // Query position for the next round: of the cuts just below and at the
    // median, the one whose left mass is nearer 1/2 (ties to the lower cut),
    // kept within 1..m-1 so every query can move the posterior.
    std::size_t split() const;
    // Smallest position carrying the maximum weight.
    std::size_t argmax() const;
    double max_weight() const;

    // Incorporate the answer to "is target <= position?".
    void update(std::size_t position, bool answer_yes);

private:
    std::vector<double> weights_;
    double rho_;
};

struct NbsOptions {
    double rho = 0.0;
    double delta = 0.01;
    bool enforce_cap = true;
};

struct NbsOutcome {
    std::size_t index = 0;  // 1-based
    std::size_t queries = 0;
    bool cap_exceeded = false;
};

// Query budget per search: 50 (ceil(log2 m) + ceil(log2(1/delta))) / I(rho).
std::size_t nbs_query_cap(std::size_t m, double delta, double rho);

// Locate i* in 1..m from noisy answers to "is i* <= i?". `answer_query(i)`
// must return the (possibly noisy) answer for position i.
NbsOutcome nbs_search(std::size_t m, const std::function<bool(std::size_t)>& answer_query,
                      const NbsOptions& options);

// Found position (1-based, within the partition) or nullopt for "no defective".
struct MnbsResult {
    std::optional<std::size_t> position;
    std::size_t tests = 0;
    bool cap_exceeded = false;

    bool found() const { return position.has_value(); }
};

struct MnbsOptions {
    double delta = 0.01;
    // Append the artificial defective at position m + 1 so an empty
    // partition can be reported. Without it the search always returns one of
    // the m items.
    bool allow_none = true;
    bool enforce_cap = true;
};

// Left-most defective of `partition` using prefix group tests.
MnbsResult mnbs(std::span<const Item> partition, Channel& channel, const MnbsOptions& options);

}  // namespace ngt
