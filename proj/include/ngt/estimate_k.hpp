#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "ngt/channel.hpp"

namespace ngt {

// Configuration of the adaptive defective-count estimator.
//
// Each stage tests the hypothesis k >= k0 against k <= k0 / g with random
// pools that include every candidate with probability nu0(k0) / k0, where g
// is the grid ratio (sqrt 2 for epsilon = 1/2, (1/(1-epsilon))^(1/2) in
// general). The stage declares "at least" when the positive fraction exceeds
// the midpoint between 1/2 and the channel-adjusted positive rate at k0 / g.
struct EstimatorConfig {
    double epsilon = 0.5;
    // Defaults to n^-3 for the candidate count n when unset.
    std::optional<double> delta_est;
    double c_stage = 8.0;

    void validate() const;
};

// nu0 = k0 (1 - 2^(-1/k0)): the inclusion rate making a test with exactly k0
// defectives positive with probability 1/2.
double bernoulli_nu0(double k0);

// Grid ratio between consecutive stage hypotheses.
double grid_ratio(double epsilon);

// Positive-fraction threshold for a stage with the given grid ratio and noise.
double stage_threshold(double ratio, double rho);

// Tests per stage for `n` candidates: ceil(c_stage ln(n / delta_est)) times
// the squared margin ratio relative to the epsilon = 1/2 stage.
std::uint32_t tests_per_stage(const EstimatorConfig& config, std::size_t n, double rho);

enum class StageDecision { at_least_k0, at_most_k0_over_ratio };

struct StageResult {
    StageDecision decision;
    std::uint32_t positives;
    std::uint32_t tests;
};

StageResult stage_decision(double k0, std::span<const Item> candidates, Channel& channel,
                           NoiseSource& rng, const EstimatorConfig& config);

struct KEstimate {
    double kbar = 0;
    std::uint32_t stages = 0;
    std::size_t tests = 0;
};

// Walks k0 = 2 g^i upward until a stage declares "at most", returning that
// k0; returns the candidate count once k0 exceeds it.
KEstimate estimate_k(std::span<const Item> candidates, Channel& channel, NoiseSource& rng,
                     const EstimatorConfig& config);

}  // namespace ngt
