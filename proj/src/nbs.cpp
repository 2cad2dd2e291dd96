#include "ngt/nbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ngt/bounds.hpp"

namespace ngt {

namespace {

std::size_t ceil_log2(double x) {
    if (x <= 1.0) {
        return 0;
    }
    return static_cast<std::size_t>(std::ceil(std::log2(x) - 1e-12));
}

}  // namespace

BeliefState::BeliefState(std::size_t m, double rho)
    : weights_(m, m == 0 ? 0.0 : 1.0 / static_cast<double>(m)), rho_(rho) {}

std::size_t BeliefState::median() const {
    double cum = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        cum += weights_[j];
        // Slack absorbs the rounding of a uniform prior summing to 1/2.
        if (cum >= 0.5 - 1e-12) {
            return j + 1;
        }
    }
    return weights_.size();
}

std::size_t BeliefState::split() const {
    const std::size_t m = weights_.size();
    if (m < 2) {
        return m;
    }
    const std::size_t j = median();
    double below = 0.0;
    for (std::size_t i = 0; i + 1 < j; ++i) {
        below += weights_[i];
    }
    const double at = below + weights_[j - 1];
    std::size_t q = (j > 1 && 0.5 - below <= at - 0.5) ? j - 1 : j;
    return std::clamp<std::size_t>(q, 1, m - 1);
}

std::size_t BeliefState::argmax() const {
    return static_cast<std::size_t>(std::max_element(weights_.begin(), weights_.end()) -
                                    weights_.begin()) +
           1;
}

double BeliefState::max_weight() const {
    return *std::max_element(weights_.begin(), weights_.end());
}

void BeliefState::update(std::size_t position, bool answer_yes) {
    const double left = answer_yes ? 1.0 - rho_ : rho_;
    const double right = answer_yes ? rho_ : 1.0 - rho_;
    double total = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        weights_[j] *= (j < position) ? left : right;
        total += weights_[j];
    }
    for (double& w : weights_) {
        w /= total;
    }
}

std::size_t nbs_query_cap(std::size_t m, double delta, double rho) {
    const double bits = static_cast<double>(ceil_log2(static_cast<double>(m)) +
                                            ceil_log2(1.0 / delta));
    const double cap = 50.0 * bits / channel_capacity(rho);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cap)));
}

NbsOutcome nbs_search(std::size_t m, const std::function<bool(std::size_t)>& answer_query,
                      const NbsOptions& options) {
    if (m == 0) {
        throw std::invalid_argument("nbs_search requires m >= 1");
    }
    if (!(options.delta > 0.0 && options.delta < 1.0)) {
        throw std::invalid_argument("nbs_search requires delta in (0, 1)");
    }
    NbsOutcome out;
    if (m == 1) {
        out.index = 1;
        return out;
    }
    BeliefState belief(m, options.rho);
    const std::size_t cap = nbs_query_cap(m, options.delta, options.rho);
    const double stop_at = 1.0 - options.delta;
    while (belief.max_weight() < stop_at) {
        if (options.enforce_cap && out.queries >= cap) {
            out.cap_exceeded = true;
            break;
        }
        const std::size_t q = belief.split();
        const bool yes = answer_query(q);
        ++out.queries;
        belief.update(q, yes);
    }
    out.index = belief.argmax();
    return out;
}

MnbsResult mnbs(std::span<const Item> partition, Channel& channel, const MnbsOptions& options) {
    if (partition.empty()) {
        throw std::invalid_argument("mnbs requires a nonempty partition");
    }
    const std::size_t m = partition.size();
    const std::size_t positions = options.allow_none ? m + 1 : m;
    const std::size_t before = channel.tests();

    auto query = [&](std::size_t i) {
        if (i > m) {
            return channel.dummy_test();
        }
        return channel.test(partition.first(i));
    };
    const NbsOutcome r =
        nbs_search(positions, query, {channel.rho(), options.delta, options.enforce_cap});

    MnbsResult out;
    out.tests = channel.tests() - before;
    out.cap_exceeded = r.cap_exceeded;
    if (r.index <= m) {
        out.position = r.index;
    }
    return out;
}

}  // namespace ngt
