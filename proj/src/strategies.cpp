#include "ngt/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ngt/bounds.hpp"
#include "ngt/nbs.hpp"
#include "ngt/repetition.hpp"

namespace ngt {

namespace {

std::vector<Item> all_items(std::uint32_t n) {
    std::vector<Item> items(n);
    std::iota(items.begin(), items.end(), Item{1});
    return items;
}

std::vector<std::vector<Item>> split_blocks(std::span<const Item> items, std::size_t parts) {
    std::vector<std::vector<Item>> blocks;
    std::size_t offset = 0;
    for (std::size_t size : block_sizes(items.size(), parts)) {
        blocks.emplace_back(items.begin() + offset, items.begin() + offset + size);
        offset += size;
    }
    return blocks;
}

void shuffle(std::vector<Item>& items, NoiseSource& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[rng.below(i)]);
    }
}

void erase_items(std::vector<Item>& from, std::vector<Item> remove) {
    std::sort(remove.begin(), remove.end());
    std::erase_if(from, [&](Item i) { return std::binary_search(remove.begin(), remove.end(), i); });
}

double default_inner_confidence(std::uint32_t n) {
    const double ln_n = std::log(static_cast<double>(std::max<std::uint32_t>(n, 3)));
    return std::min(1.0 / ln_n, 0.5);
}

std::size_t outer_cap(std::uint32_t n) {
    return 4 * static_cast<std::size_t>(std::ceil(std::log2(std::max<double>(n, 2))));
}

void finish(RecoveryResult& r, const Channel& channel) {
    std::sort(r.estimate.begin(), r.estimate.end());
    r.tests_used = channel.tests();
}

void check_confidence(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in (0, 1)");
    }
}

// Random partition of the candidates into ceil(kbar) blocks, emptiness test
// and MNBS at `inner_conf` per block. Every returned item is handed to
// `on_found`, which decides what happens to it.
template <typename OnFound>
void inner_pass(std::span<const Item> candidates, double kbar, double inner_conf, bool allow_none,
                Channel& channel, NoiseSource& rng, OnFound&& on_found) {
    std::vector<Item> shuffled(candidates.begin(), candidates.end());
    shuffle(shuffled, rng);
    const auto parts = std::min<std::size_t>(static_cast<std::size_t>(std::ceil(kbar)),
                                             shuffled.size());
    const RepetitionPlan plan = RepetitionPlan::confidence(inner_conf, channel.rho());
    for (const auto& block : split_blocks(shuffled, parts)) {
        if (!majority_vote(block, plan, channel).decision) {
            continue;
        }
        const MnbsResult m = mnbs(block, channel, {inner_conf, allow_none, true});
        if (m.found()) {
            on_found(block[*m.position - 1]);
        }
    }
}

}  // namespace

std::vector<std::size_t> block_sizes(std::size_t n, std::size_t parts) {
    if (parts == 0) {
        throw std::invalid_argument("block_sizes requires at least one part");
    }
    parts = std::min(parts, std::max<std::size_t>(n, 1));
    std::vector<std::size_t> sizes(parts, n / parts);
    for (std::size_t i = 0; i < n % parts; ++i) {
        ++sizes[i];
    }
    return sizes;
}

// ---------------------------------------------------------------------------

RecoveryResult hwang_baseline(const GroundTruth& truth, Channel& channel, const HwangParams& params) {
    if (truth.rho() != 0.0) {
        throw std::invalid_argument("hwang_baseline requires a noiseless channel (rho = 0)");
    }
    const std::uint32_t n = truth.n();
    const std::uint32_t k = params.k.value_or(truth.k());

    std::vector<std::vector<Item>> groups;
    const std::vector<Item> items = all_items(n);
    if (k == 0 || n == 0) {
        groups.push_back(items);
    } else if (params.grouping == HwangParams::Grouping::k_blocks) {
        groups = split_blocks(items, k);
    } else {
        const double ratio = static_cast<double>(n) / k;
        const auto alpha = ratio < 1.0 ? 0 : static_cast<int>(std::floor(std::log2(ratio) + 1e-12));
        const std::size_t size = std::size_t{1} << alpha;
        for (std::size_t off = 0; off < n; off += size) {
            groups.emplace_back(items.begin() + off, items.begin() + std::min<std::size_t>(off + size, n));
        }
    }

    RecoveryResult out;
    auto done = [&] {
        return params.stop_when_all_found && k > 0 && out.estimate.size() >= k;
    };
    for (auto& group : groups) {
        while (!group.empty() && !done()) {
            if (!channel.test(group)) {
                break;
            }
            std::size_t lo = 0;
            std::size_t hi = group.size();
            while (hi - lo > 1) {
                const std::size_t mid = lo + (hi - lo + 1) / 2;
                if (channel.test(std::span<const Item>(group).subspan(lo, mid - lo))) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.estimate.push_back(group[lo]);
            group.erase(group.begin() + static_cast<std::ptrdiff_t>(lo));
        }
        if (done()) {
            break;
        }
    }
    finish(out, channel);
    return out;
}

// ---------------------------------------------------------------------------

double Approach1Params::nbs_delta() const {
    const double per = delta / static_cast<double>(k);
    return nbs_rule == NbsRule::delta_over_3k ? per / 3.0 : per;
}

void Approach1Params::validate() const {
    if (k < 1) {
        throw std::invalid_argument("approach1 requires k >= 1");
    }
    if (!(delta > 0.0)) {
        throw std::invalid_argument("approach1 requires delta > 0");
    }
    check_confidence(nbs_delta(), "approach1 NBS confidence");
    if (fixed_r) {
        RepetitionPlan::fixed_odd(*fixed_r, early_stop);
    } else {
        check_confidence(delta / k, "approach1 repetition confidence delta/k");
    }
}

RecoveryResult approach1_on(std::span<const Item> items, Channel& channel,
                            const Approach1Params& params) {
    params.validate();
    const RepetitionPlan plan =
        params.fixed_r ? RepetitionPlan::fixed_odd(*params.fixed_r, params.early_stop)
                       : RepetitionPlan::confidence(params.delta / params.k, channel.rho());
    const MnbsOptions nbs{params.nbs_delta(), params.allow_none, params.enforce_nbs_cap};

    RecoveryResult out;
    if (items.empty()) {
        finish(out, channel);
        return out;
    }
    for (auto& part : split_blocks(items, params.k)) {
        const std::size_t cap = 2 * part.size();
        std::size_t loops = 0;
        while (!part.empty()) {
            if (!majority_vote(part, plan, channel).decision) {
                break;
            }
            if (loops++ >= cap) {
                out.aborted = true;
                out.abort_reason = "approach1: find-loop cap reached in a partition";
                break;
            }
            const MnbsResult m = mnbs(part, channel, nbs);
            if (m.found()) {
                const std::size_t idx = *m.position - 1;
                out.estimate.push_back(part[idx]);
                part.erase(part.begin() + static_cast<std::ptrdiff_t>(idx));
            }
        }
    }
    finish(out, channel);
    return out;
}

RecoveryResult approach1(Channel& channel, const Approach1Params& params) {
    const std::vector<Item> items = all_items(channel.n());
    return approach1_on(items, channel, params);
}

// ---------------------------------------------------------------------------

void Approach2Params::validate() const {
    check_confidence(delta, "approach2 delta");
    if (delta_est) {
        check_confidence(*delta_est, "approach2 delta_est");
    }
    if (inner_confidence) {
        check_confidence(*inner_confidence, "approach2 inner confidence");
    }
    if (!(C > 0.0)) {
        throw std::invalid_argument("approach2 requires C > 0");
    }
}

RecoveryResult approach2(Channel& channel, NoiseSource& rng, const Approach2Params& params) {
    params.validate();
    const std::uint32_t n = channel.n();
    const double inner_conf = params.inner_confidence.value_or(default_inner_confidence(n));
    const double fallback_at = params.C * std::log(static_cast<double>(n));
    const EstimatorConfig est{0.5, params.delta_est, params.c_stage};

    RecoveryResult out;
    std::vector<Item> candidates = all_items(n);
    const std::size_t cap = outer_cap(n);
    bool finished = false;
    for (std::size_t iter = 0; iter < cap && !candidates.empty(); ++iter) {
        const double kbar = estimate_k(candidates, channel, rng, est).kbar;
        OuterRound round{kbar, 0, false};

        if (kbar <= fallback_at) {
            Approach1Params a1;
            a1.k = static_cast<std::uint32_t>(std::ceil(kbar));
            a1.delta = params.delta;
            a1.allow_none = params.allow_none;
            const RecoveryResult sub = approach1_on(candidates, channel, a1);
            out.estimate.insert(out.estimate.end(), sub.estimate.begin(), sub.estimate.end());
            if (sub.aborted) {
                out.aborted = true;
                out.abort_reason = sub.abort_reason;
            }
            round.found = static_cast<std::uint32_t>(sub.estimate.size());
            round.fallback = true;
            out.rounds.push_back(round);
            finished = true;
            break;
        }

        const RepetitionPlan certify =
            RepetitionPlan::confidence(params.delta / kbar, channel.rho());
        std::vector<Item> certified;
        inner_pass(candidates, kbar, inner_conf, params.allow_none, channel, rng, [&](Item item) {
            if (majority_vote(std::span<const Item>(&item, 1), certify, channel).decision) {
                certified.push_back(item);
            }
        });
        round.found = static_cast<std::uint32_t>(certified.size());
        out.rounds.push_back(round);
        out.estimate.insert(out.estimate.end(), certified.begin(), certified.end());
        erase_items(candidates, std::move(certified));
    }
    if (!finished && !candidates.empty()) {
        out.aborted = true;
        out.abort_reason = "approach2: outer-iteration cap reached";
    }
    finish(out, channel);
    return out;
}

// ---------------------------------------------------------------------------

void Approach3Params::validate(double rho) const {
    check_confidence(delta, "approach3 delta");
    check_confidence(delta0.value_or(delta), "approach3 delta0");
    check_confidence(delta1.value_or(delta), "approach3 delta1");
    if (delta_est) {
        check_confidence(*delta_est, "approach3 delta_est");
    }
    if (inner_confidence) {
        check_confidence(*inner_confidence, "approach3 inner confidence");
    }
    check_confidence(epsilon, "approach3 epsilon");
    check_confidence(epsilon1, "approach3 epsilon1");
    if (zeta && !(*zeta > rho && *zeta < 1.0 - rho)) {
        throw std::invalid_argument("approach3 zeta must lie in (rho, 1 - rho)");
    }
    if (!(C > 0.0)) {
        throw std::invalid_argument("approach3 requires C > 0");
    }
    if (t_indiv_override && *t_indiv_override == 0) {
        throw std::invalid_argument("approach3 t_indiv must be positive");
    }
}

IndividualTestingChoice choose_individual_testing(const Approach3Params& params, double n,
                                                  double kbar_init, double rho) {
    const double d0 = params.delta0.value_or(params.delta);
    const double d1 = params.delta1.value_or(params.delta);
    const double k = std::clamp(kbar_init, 1.0, n);
    IndividualTestingChoice out{params.zeta.value_or(0.5), 1};
    if (rho > 0.0 && !params.zeta) {
        out.zeta = minimize_zeta(n, k, rho, d0, d1).zeta;
    }
    out.t_indiv = params.t_indiv_override.value_or(
        threshold_repeats(k, d0, d1, params.epsilon1, out.zeta, rho));
    return out;
}

RecoveryResult approach3(Channel& channel, NoiseSource& rng, const Approach3Params& params) {
    params.validate(channel.rho());
    const std::uint32_t n = channel.n();
    const double inner_conf = params.inner_confidence.value_or(default_inner_confidence(n));
    const double fallback_at = params.C * std::log(static_cast<double>(n));

    RecoveryResult out;
    std::vector<Item> candidates = all_items(n);
    std::vector<CountRecord> list;
    std::optional<double> kbar_init;
    std::uint32_t t_indiv = 1;
    const std::size_t cap = outer_cap(n);
    bool finished = false;

    for (std::size_t iter = 0; iter < cap && !candidates.empty(); ++iter) {
        const EstimatorConfig est{kbar_init ? 0.5 : params.epsilon, params.delta_est,
                                  params.c_stage};
        const double kbar = estimate_k(candidates, channel, rng, est).kbar;
        if (!kbar_init) {
            kbar_init = kbar;
            t_indiv = choose_individual_testing(params, n, kbar, channel.rho()).t_indiv;
        }
        OuterRound round{kbar, 0, false};

        if (kbar <= fallback_at) {
            Approach1Params a1;
            a1.k = static_cast<std::uint32_t>(std::ceil(kbar));
            a1.delta = params.delta;
            a1.allow_none = params.allow_none;
            const RecoveryResult sub = approach1_on(candidates, channel, a1);
            out.estimate.insert(out.estimate.end(), sub.estimate.begin(), sub.estimate.end());
            if (sub.aborted) {
                out.aborted = true;
                out.abort_reason = sub.abort_reason;
            }
            round.found = static_cast<std::uint32_t>(sub.estimate.size());
            round.fallback = true;
            out.rounds.push_back(round);
            finished = true;
            break;
        }

        std::vector<Item> returned;
        inner_pass(candidates, kbar, inner_conf, params.allow_none, channel, rng,
                   [&](Item item) { returned.push_back(item); });
        const auto counts = individual_counts(returned, t_indiv, channel);
        list.insert(list.end(), counts.begin(), counts.end());
        round.found = static_cast<std::uint32_t>(returned.size());
        out.rounds.push_back(round);
        erase_items(candidates, std::move(returned));
    }
    if (!finished && !candidates.empty()) {
        out.aborted = true;
        out.abort_reason = "approach3: outer-iteration cap reached";
    }

    // Top-ranked counts are declared defective outright.
    const double init = kbar_init.value_or(0.0);
    auto keep = static_cast<std::size_t>(std::floor((1.0 - 2.0 * params.epsilon) * init + 1e-9));
    if (keep > list.size()) {
        out.notes.push_back("approach3: (1-2eps) kbar_init = " + std::to_string(keep) +
                            " exceeds |L| = " + std::to_string(list.size()) + "; keeping all of L");
        keep = list.size();
    }
    const RankSplit split = rank_and_threshold(list, keep);
    out.estimate.insert(out.estimate.end(), split.kept.begin(), split.kept.end());

    // The rest are re-tested individually at confidence delta / kbar_init.
    if (!split.remainder.empty()) {
        const RepetitionPlan plan = RepetitionPlan::confidence(
            std::min(params.delta / std::max(init, 1.0), 0.5), channel.rho());
        for (Item item : split.remainder) {
            if (majority_vote(std::span<const Item>(&item, 1), plan, channel).decision) {
                out.estimate.push_back(item);
            }
        }
    }
    finish(out, channel);
    return out;
}

}  // namespace ngt
