#include "ngt/repetition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ngt/bounds.hpp"

namespace ngt {

namespace {

std::uint32_t ceil_positive(double x) {
    if (!(x > 1.0)) {
        return 1;
    }
    return static_cast<std::uint32_t>(std::ceil(x - 1e-9));
}

}  // namespace

std::uint32_t repetition_repeats(double delta, double rho) {
    if (!(rho >= 0.0 && rho < 0.5)) {
        throw std::invalid_argument("repetition_repeats requires rho in [0, 1/2)");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("repetition_repeats requires delta in (0, 1)");
    }
    if (rho == 0.0) {
        return 1;
    }
    return ceil_positive(std::log(1.0 / delta) / binary_kl(0.5, rho));
}

RepetitionPlan RepetitionPlan::confidence(double delta, double rho) {
    std::uint32_t t = repetition_repeats(delta, rho);
    if (t % 2 == 0) {
        ++t;
    }
    return RepetitionPlan(Mode::confidence, t, false, delta);
}

RepetitionPlan RepetitionPlan::fixed_odd(std::uint32_t r, bool early_stop) {
    if (r == 0 || r % 2 == 0) {
        throw std::invalid_argument("fixed repetition count must be odd and positive");
    }
    return RepetitionPlan(Mode::fixed_odd, r, early_stop, 0.0);
}

VoteResult majority_vote(std::span<const Item> pool, const RepetitionPlan& plan, Channel& channel) {
    const std::uint32_t total = plan.repeats();
    const std::uint32_t needed = total / 2 + 1;
    VoteResult out;
    std::uint32_t negatives = 0;
    while (out.tests < total) {
        if (channel.test(pool)) {
            ++out.positives;
        } else {
            ++negatives;
        }
        ++out.tests;
        if (plan.early_stop() && (out.positives >= needed || negatives >= needed)) {
            break;
        }
    }
    out.decision = out.positives >= needed;
    return out;
}

std::vector<CountRecord> individual_counts(std::span<const Item> items, std::uint32_t t_indiv,
                                           Channel& channel) {
    if (t_indiv == 0) {
        throw std::invalid_argument("individual_counts requires t_indiv >= 1");
    }
    std::vector<CountRecord> out;
    out.reserve(items.size());
    for (Item item : items) {
        CountRecord rec{item, 0, t_indiv};
        for (std::uint32_t t = 0; t < t_indiv; ++t) {
            rec.positives += channel.test_one(item) ? 1 : 0;
        }
        out.push_back(rec);
    }
    return out;
}

RankSplit rank_and_threshold(std::span<const CountRecord> records, std::size_t keep) {
    if (keep > records.size()) {
        throw std::invalid_argument("rank_and_threshold: keep exceeds the number of records");
    }
    std::vector<CountRecord> sorted(records.begin(), records.end());
    std::sort(sorted.begin(), sorted.end(), [](const CountRecord& a, const CountRecord& b) {
        if (a.positives != b.positives) {
            return a.positives > b.positives;
        }
        return a.item < b.item;
    });
    RankSplit out;
    out.kept.reserve(keep);
    out.remainder.reserve(sorted.size() - keep);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        (i < keep ? out.kept : out.remainder).push_back(sorted[i].item);
    }
    return out;
}

std::uint32_t threshold_repeats(double k0, double delta0, double delta1, double eps1,
                                double zeta, double rho) {
    if (!(zeta > rho && zeta < 1.0 - rho)) {
        throw std::invalid_argument("threshold zeta must lie in (rho, 1 - rho)");
    }
    if (rho == 0.0) {
        return 1;
    }
    const double non_def = std::log(std::max(k0, 1.0) / delta0) / binary_kl(zeta, rho);
    const double def = std::log(1.0 / (eps1 * delta1)) / binary_kl(1.0 - zeta, rho);
    return ceil_positive(std::max(non_def, def));
}

}  // namespace ngt
