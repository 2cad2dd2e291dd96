#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ngt/channel.hpp"

namespace ngt::testing {

// Owns everything a Channel points at.
struct Rig {
    GroundTruth truth;
    TestLedger ledger;
    NoiseSource noise;
    Channel channel;

    Rig(std::uint32_t n, std::vector<Item> defectives, double rho, std::uint64_t seed = 7,
        std::uint64_t stream = 0, bool keep_pools = true)
        : truth(n, std::move(defectives), rho),
          ledger(keep_pools),
          noise(seed, stream),
          channel(truth, ledger, noise) {}
};

inline std::vector<Item> iota_items(Item first, Item last) {
    std::vector<Item> v;
    for (Item i = first; i <= last; ++i) v.push_back(i);
    return v;
}

// Three-sigma envelope for an empirical rate of N Bernoulli(p) draws.
inline double three_sigma(double p, double trials) { return 3.0 * std::sqrt(p * (1 - p) / trials); }

}  // namespace ngt::testing
