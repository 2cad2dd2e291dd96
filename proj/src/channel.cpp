#include "ngt/channel.hpp"

#include <algorithm>
#include <cmath>

namespace ngt {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

GroundTruth::GroundTruth(std::uint32_t n, std::vector<Item> defectives, double rho)
    : n_(n), defectives_(std::move(defectives)), mask_(std::size_t{n} + 1, 0), rho_(rho) {
    if (!(rho >= 0.0 && rho < 0.5)) {
        throw std::invalid_argument("rho must lie in [0, 1/2)");
    }
    std::sort(defectives_.begin(), defectives_.end());
    for (Item d : defectives_) {
        if (d < 1 || d > n_) {
            throw std::invalid_argument("defective index out of range: " + std::to_string(d));
        }
        if (mask_[d] != 0) {
            throw std::invalid_argument("duplicate defective index: " + std::to_string(d));
        }
        mask_[d] = 1;
    }
}

std::uint32_t GroundTruth::count_defective(std::span<const Item> items) const {
    std::uint32_t hits = 0;
    for (Item i : items) {
        if (i < 1 || i > n_) {
            throw InvalidPool("pool item " + std::to_string(i) + " outside 1.." +
                              std::to_string(n_));
        }
        hits += mask_[i];
    }
    return hits;
}

NoiseSource::NoiseSource(std::uint64_t seed, std::uint64_t stream, Lane lane)
    : seed_(seed), stream_(stream) {
    const std::uint64_t s = mix64(seed ^ 0x243f6a8885a308d3ULL);
    key_ = mix64(s + mix64(stream * 4 + static_cast<std::uint64_t>(lane) + kGolden));
}

std::uint64_t NoiseSource::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double NoiseSource::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool NoiseSource::bernoulli(double p) {
    if (p <= 0.0) {
        return false;
    }
    if (p >= 1.0) {
        return true;
    }
    return uniform() < p;
}

std::uint64_t NoiseSource::below(std::uint64_t bound) {
    // Lemire's multiply-and-reject.
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next_u64()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::span<const Item> TestLedger::pool(const TestRecord& r) const {
    if (r.pool_size == 0) {
        return {};
    }
    return std::span<const Item>(pool_storage_.data() + r.pool_offset, r.pool_size);
}

void TestLedger::append(TestKind kind, std::span<const Item> pool, bool outcome) {
    TestRecord rec{kind, outcome, pool_storage_.size(), 0};
    if (keep_pools_) {
        rec.pool_size = static_cast<std::uint32_t>(pool.size());
        pool_storage_.insert(pool_storage_.end(), pool.begin(), pool.end());
    }
    entries_.push_back(rec);
}

bool run_test(const GroundTruth& truth, TestLedger& ledger, NoiseSource& noise,
              std::span<const Item> pool) {
    const bool noiseless = truth.count_defective(pool) > 0;
    const bool flip = noise.bernoulli(truth.rho());
    const bool y = noiseless != flip;
    ledger.append(TestKind::pool, pool, y);
    return y;
}

bool run_dummy_test(NoiseSource& noise, TestLedger& ledger, double rho) {
    const bool y = !noise.bernoulli(rho);
    ledger.append(TestKind::dummy, {}, y);
    return y;
}

bool Channel::test(std::span<const Item> pool) {
    ++calls_;
    return run_test(*truth_, *ledger_, *noise_, pool);
}

bool Channel::dummy_test() {
    ++calls_;
    return run_dummy_test(*noise_, *ledger_, truth_->rho());
}

BernoulliPoolTester::BernoulliPoolTester(Channel& channel, std::span<const Item> candidates,
                                         double q, NoiseSource& rng)
    : channel_(&channel), candidates_(candidates), q_(std::clamp(q, 0.0, 1.0)), rng_(&rng) {
    const std::uint32_t d = channel.truth_->count_defective(candidates);
    p_any_defective_ = 1.0 - std::pow(1.0 - q_, static_cast<double>(d));
}

bool BernoulliPoolTester::run() {
    Channel& ch = *channel_;
    if (ch.ledger_->keeps_pools()) {
        scratch_.clear();
        if (q_ >= 1.0) {
            scratch_.assign(candidates_.begin(), candidates_.end());
        } else if (q_ > 0.0) {
            // Geometric skipping: O(pool size) draws instead of O(candidates).
            const double log1mq = std::log1p(-q_);
            std::size_t pos = 0;
            while (true) {
                const double u = 1.0 - rng_->uniform();
                const auto skip = static_cast<std::size_t>(std::floor(std::log(u) / log1mq));
                pos += skip;
                if (pos >= candidates_.size()) {
                    break;
                }
                scratch_.push_back(candidates_[pos]);
                ++pos;
            }
        }
        return ch.test(scratch_);
    }
    ++ch.calls_;
    const bool noiseless = rng_->bernoulli(p_any_defective_);
    const bool y = noiseless != ch.noise_->bernoulli(ch.rho());
    ch.ledger_->append(TestKind::random_pool, {}, y);
    return y;
}

}  // namespace ngt
