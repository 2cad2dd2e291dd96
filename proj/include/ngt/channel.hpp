#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ngt {

// Items are numbered 1..n throughout the library.
using Item = std::uint32_t;

class InvalidPool : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The hidden defective set S together with the channel flip probability.
// Immutable after construction.
class GroundTruth {
public:
    GroundTruth(std::uint32_t n, std::vector<Item> defectives, double rho);

    std::uint32_t n() const { return n_; }
    std::uint32_t k() const { return static_cast<std::uint32_t>(defectives_.size()); }
    double rho() const { return rho_; }

    // Sorted ascending.
    const std::vector<Item>& defectives() const { return defectives_; }
    bool is_defective(Item i) const { return i >= 1 && i <= n_ && mask_[i] != 0; }

    // Number of defectives among `items`. Throws InvalidPool on out-of-range entries.
    std::uint32_t count_defective(std::span<const Item> items) const;

private:
    std::uint32_t n_;
    std::vector<Item> defectives_;
    std::vector<std::uint8_t> mask_;
    double rho_;
};

// Counter-based random stream keyed by (seed, stream, lane). Draw j of a
// stream is a pure function of (seed, stream, lane, j), so a trial can be
// replayed on any thread without shared generator state.
class NoiseSource {
public:
    enum class Lane : std::uint32_t { channel = 0, algorithm = 1, placement = 2 };

    NoiseSource(std::uint64_t seed, std::uint64_t stream, Lane lane = Lane::channel);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t draws() const { return counter_; }

    std::uint64_t next_u64();
    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    bool bernoulli(double p);
    // Uniform on {0, ..., bound - 1}; bound > 0.
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

enum class TestKind : std::uint8_t { pool, dummy, random_pool };

struct TestRecord {
    TestKind kind;
    bool outcome;
    // Offset/length into the ledger's pool storage. Zero length for dummy
    // tests and for random pools that were not materialized.
    std::uint64_t pool_offset;
    std::uint32_t pool_size;
};

// Append-only record of every test performed in one trial.
class TestLedger {
public:
    explicit TestLedger(bool keep_pools = true) : keep_pools_(keep_pools) {}

    std::size_t count() const { return entries_.size(); }
    bool keeps_pools() const { return keep_pools_; }
    const std::vector<TestRecord>& entries() const { return entries_; }
    std::span<const Item> pool(const TestRecord& r) const;

    void append(TestKind kind, std::span<const Item> pool, bool outcome);

private:
    bool keep_pools_;
    std::vector<TestRecord> entries_;
    std::vector<Item> pool_storage_;
};

// Noisy OR test of `pool` against `truth`; the result is appended to `ledger`.
bool run_test(const GroundTruth& truth, TestLedger& ledger, NoiseSource& noise,
              std::span<const Item> pool);

// Test of the artificial always-defective item: 1 with probability 1 - rho.
bool run_dummy_test(NoiseSource& noise, TestLedger& ledger, double rho);

// Per-trial handle bundling the oracle, its noise stream and the ledger.
class Channel {
public:
    Channel(const GroundTruth& truth, TestLedger& ledger, NoiseSource& noise)
        : truth_(&truth), ledger_(&ledger), noise_(&noise) {}

    bool test(std::span<const Item> pool);
    bool test_one(Item item) { return test(std::span<const Item>(&item, 1)); }
    bool dummy_test();

    double rho() const { return truth_->rho(); }
    std::uint32_t n() const { return truth_->n(); }
    std::size_t tests() const { return ledger_->count(); }
    // Calls issued through this handle, tracked independently of the ledger.
    std::size_t calls() const { return calls_; }

    const TestLedger& ledger() const { return *ledger_; }

private:
    friend class BernoulliPoolTester;

    const GroundTruth* truth_;
    TestLedger* ledger_;
    NoiseSource* noise_;
    std::size_t calls_ = 0;
};

// Repeated tests whose pools contain each candidate independently with
// probability q. When the ledger keeps pools, every pool is drawn explicitly
// from `rng`; otherwise only the inclusion of the defective candidates is
// simulated, which gives the same outcome distribution at O(1) cost per test.
class BernoulliPoolTester {
public:
    BernoulliPoolTester(Channel& channel, std::span<const Item> candidates, double q,
                        NoiseSource& rng);

    bool run();

private:
    Channel* channel_;
    std::span<const Item> candidates_;
    double q_;
    NoiseSource* rng_;
    double p_any_defective_;
    std::vector<Item> scratch_;
};

}  // namespace ngt
