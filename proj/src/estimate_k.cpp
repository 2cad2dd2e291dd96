#include "ngt/estimate_k.hpp"

#include <cmath>
#include <stdexcept>

namespace ngt {

void EstimatorConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("estimator epsilon must lie in (0, 1)");
    }
    if (delta_est && !(*delta_est > 0.0 && *delta_est < 1.0)) {
        throw std::invalid_argument("estimator delta_est must lie in (0, 1)");
    }
    if (!(c_stage > 0.0)) {
        throw std::invalid_argument("estimator c_stage must be positive");
    }
}

double bernoulli_nu0(double k0) {
    if (!(k0 >= 2.0)) {
        throw std::invalid_argument("bernoulli_nu0 requires k0 >= 2");
    }
    // k0 (1 - 2^(-1/k0)) = -k0 expm1(-ln2 / k0), stable for large k0.
    return -k0 * std::expm1(-std::log(2.0) / k0);
}

double grid_ratio(double epsilon) {
    return std::sqrt(1.0 / (1.0 - epsilon));
}

double stage_threshold(double ratio, double rho) {
    // Noiseless positive rate at k = k0 / ratio is 1 - 2^(-1/ratio),
    // independent of k0 by the choice of nu0.
    const double alt = 1.0 - std::exp2(-1.0 / ratio);
    const double alt_noisy = alt * (1.0 - 2.0 * rho) + rho;
    return 0.5 * (0.5 + alt_noisy);
}

std::uint32_t tests_per_stage(const EstimatorConfig& config, std::size_t n, double rho) {
    const double nn = static_cast<double>(std::max<std::size_t>(n, 2));
    const double delta = config.delta_est.value_or(std::pow(nn, -3.0));
    double base = config.c_stage * std::log(nn / delta);
    const double ref_margin = 0.5 - stage_threshold(std::sqrt(2.0), rho);
    const double margin = 0.5 - stage_threshold(grid_ratio(config.epsilon), rho);
    base *= (ref_margin / margin) * (ref_margin / margin);
    return static_cast<std::uint32_t>(std::ceil(base));
}

StageResult stage_decision(double k0, std::span<const Item> candidates, Channel& channel,
                           NoiseSource& rng, const EstimatorConfig& config) {
    const double q = bernoulli_nu0(k0) / k0;
    const std::uint32_t tests = tests_per_stage(config, candidates.size(), channel.rho());
    const double tau = stage_threshold(grid_ratio(config.epsilon), channel.rho());

    BernoulliPoolTester tester(channel, candidates, q, rng);
    StageResult out{StageDecision::at_most_k0_over_ratio, 0, tests};
    for (std::uint32_t t = 0; t < tests; ++t) {
        out.positives += tester.run() ? 1 : 0;
    }
    if (static_cast<double>(out.positives) > tau * tests) {
        out.decision = StageDecision::at_least_k0;
    }
    return out;
}

KEstimate estimate_k(std::span<const Item> candidates, Channel& channel, NoiseSource& rng,
                     const EstimatorConfig& config) {
    config.validate();
    if (candidates.empty()) {
        throw std::invalid_argument("estimate_k requires at least one item");
    }
    const double n = static_cast<double>(candidates.size());
    const double ratio = grid_ratio(config.epsilon);
    const std::size_t before = channel.tests();

    KEstimate out;
    for (int i = 0;; ++i) {
        const double k0 = 2.0 * std::pow(ratio, i);
        if (k0 > n) {
            out.kbar = n;
            break;
        }
        ++out.stages;
        const StageResult s = stage_decision(k0, candidates, channel, rng, config);
        if (s.decision == StageDecision::at_most_k0_over_ratio) {
            out.kbar = k0;
            break;
        }
    }
    out.tests = channel.tests() - before;
    return out;
}

}  // namespace ngt
