#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ngt/bounds.hpp"
#include "ngt/harness.hpp"

using namespace ngt;

namespace {

ExperimentConfig small_approach1(double rho = 0.05) {
    ExperimentConfig c;
    c.n = 200;
    c.k = 5;
    c.rho = rho;
    c.trials = 300;
    c.master_seed = 11;
    c.strategy.kind = StrategyKind::approach1;
    c.strategy.approach1.fixed_r = 5;
    c.strategy.approach1.delta = 0.2;
    c.strategy.approach1.nbs_rule = Approach1Params::NbsRule::delta_over_3k;
    return c;
}

std::string csv_of(const std::vector<TrialOutcome>& o) {
    std::ostringstream os;
    write_trials_csv(os, o);
    return os.str();
}

TrialOutcome outcome(std::uint64_t idx, std::uint64_t tests, std::uint32_t fp = 0,
                     std::uint32_t fn = 0, std::uint32_t k = 10) {
    TrialOutcome o;
    o.trial_index = idx;
    o.tests_used = tests;
    o.false_positives = fp;
    o.false_negatives = fn;
    o.exact_success = fp == 0 && fn == 0;
    o.fraction_mistakes = std::max(fp, fn) / double(k);
    return o;
}

}  // namespace

TEST(StrategyNames, RoundTrip) {
    for (auto k : {StrategyKind::hwang, StrategyKind::approach1, StrategyKind::approach2,
                   StrategyKind::approach3}) {
        EXPECT_EQ(parse_strategy(to_string(k)), k);
    }
    EXPECT_THROW(parse_strategy("approach4"), std::invalid_argument);
}

TEST(SampleDefectives, UniformSubsets) {
    NoiseSource rng(5, 5, NoiseSource::Lane::placement);
    std::vector<int> hits(21, 0);
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        const auto s = sample_defectives(20, 4, rng);
        ASSERT_EQ(s.size(), 4u);
        ASSERT_TRUE(std::is_sorted(s.begin(), s.end()));
        ASSERT_EQ(std::set<Item>(s.begin(), s.end()).size(), 4u);
        for (Item d : s) ++hits[d];
    }
    for (Item i = 1; i <= 20; ++i) {
        EXPECT_NEAR(hits[i] / double(draws), 0.2, 3 * std::sqrt(0.2 * 0.8 / draws)) << i;
    }
    EXPECT_EQ(sample_defectives(5, 5, rng), (std::vector<Item>{1, 2, 3, 4, 5}));
    EXPECT_TRUE(sample_defectives(5, 0, rng).empty());
    EXPECT_THROW(sample_defectives(5, 6, rng), std::invalid_argument);
}

TEST(ExperimentConfig, Validate) {
    ExperimentConfig c = small_approach1();
    EXPECT_NO_THROW(c.validate());
    c.k = 300;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_approach1();
    c.trials = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_approach1();
    c.strategy.kind = StrategyKind::hwang;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.rho = 0;
    EXPECT_NO_THROW(c.validate());
}

TEST(Trial, OutcomeInvariants) {
    const auto c = small_approach1();
    for (std::uint64_t t = 0; t < 100; ++t) {
        const auto rec = run_trial_detailed(c, t);
        const auto& o = rec.outcome;
        ASSERT_EQ(o.exact_success, o.false_positives == 0 && o.false_negatives == 0);
        ASSERT_DOUBLE_EQ(o.fraction_mistakes, std::max(o.false_positives, o.false_negatives) / 5.0);
        ASSERT_EQ(o.tests_used, rec.ledger.count());
        ASSERT_EQ(rec.truth.k(), 5u);
    }
}

TEST(Trial, NoiselessApproach1Perfect) {
    auto c = small_approach1(0.0);
    c.trials = 100;
    const auto s = summarize(run_trials_serial(c), c.k, 5);
    EXPECT_EQ(s.pe_hat, 0.0);
    EXPECT_EQ(s.abort_rate, 0.0);
    EXPECT_EQ(s.mean_fraction_mistakes, 0.0);
}

TEST(Determinism, SameSeedSameCsv) {
    const auto c = small_approach1();
    EXPECT_EQ(csv_of(run_trials_serial(c)), csv_of(run_trials_serial(c)));
    auto other = c;
    other.master_seed = 12;
    EXPECT_NE(csv_of(run_trials_serial(c)), csv_of(run_trials_serial(other)));
}

TEST(Determinism, ParallelMatchesSerial) {
    for (auto kind : {StrategyKind::approach1, StrategyKind::approach2}) {
        auto c = small_approach1();
        c.strategy.kind = kind;
        c.trials = 200;
        const auto serial = csv_of(run_trials_serial(c));
        for (int threads : {2, 3, 8}) {
            EXPECT_EQ(serial, csv_of(run_trials_parallel(c, threads))) << threads;
        }
    }
}

TEST(Determinism, TrialIndependentOfOrder) {
    const auto c = small_approach1();
    const auto all = run_trials_serial(c);
    for (std::uint64_t t : {299u, 0u, 150u, 7u}) {
        const auto o = run_trial(c, t);
        EXPECT_EQ(o.tests_used, all[t].tests_used);
        EXPECT_EQ(o.false_positives, all[t].false_positives);
        EXPECT_EQ(o.false_negatives, all[t].false_negatives);
    }
}

TEST(Summary, ShuffleInvariant) {
    auto outcomes = run_trials_serial(small_approach1());
    const auto a = summarize(outcomes, 5, 5);
    NoiseSource rng(1, 1);
    for (std::size_t i = outcomes.size(); i > 1; --i) std::swap(outcomes[i - 1], outcomes[rng.below(i)]);
    const auto b = summarize(outcomes, 5, 5);
    EXPECT_EQ(a.mean_tests, b.mean_tests);
    EXPECT_EQ(a.std_tests, b.std_tests);
    EXPECT_EQ(a.pe_hat, b.pe_hat);
    EXPECT_EQ(a.mean_fraction_mistakes, b.mean_fraction_mistakes);
    EXPECT_EQ(a.histogram.counts, b.histogram.counts);
}

TEST(Summary, KnownValues) {
    std::vector<TrialOutcome> o{outcome(0, 10), outcome(1, 20, 1, 0), outcome(2, 30),
                                outcome(3, 40, 0, 2)};
    const auto s = summarize(o, 10, 10);
    EXPECT_DOUBLE_EQ(s.mean_tests, 25.0);
    EXPECT_NEAR(s.std_tests, std::sqrt(500.0 / 3.0), 1e-12);
    EXPECT_DOUBLE_EQ(s.pe_hat, 0.5);
    const double half = 1.96 * std::sqrt(0.25 / 4);
    EXPECT_DOUBLE_EQ(s.pe_ci_lo, 0.5 - half);
    EXPECT_DOUBLE_EQ(s.pe_ci_hi, 0.5 + half);
    EXPECT_DOUBLE_EQ(s.mean_fraction_mistakes, 3.0 / 40);
    EXPECT_DOUBLE_EQ(s.fraction_vs_pe_over_k, (3.0 / 40) / (0.5 / 10));
    EXPECT_LE(s.pe_ci_lo, s.pe_hat);
    EXPECT_GE(s.pe_ci_hi, s.pe_hat);
}

TEST(Summary, NoFailuresGivesNanRatio) {
    const auto s = summarize({outcome(0, 5), outcome(1, 5)}, 3, 1);
    EXPECT_EQ(s.pe_hat, 0.0);
    EXPECT_EQ(s.std_tests, 0.0);
    EXPECT_TRUE(std::isnan(s.fraction_vs_pe_over_k));
}

TEST(Histogram, SingleBinWhenIdentical) {
    std::vector<TrialOutcome> o(17, outcome(0, 123));
    const auto h = histogram(o, 5);
    EXPECT_EQ(h.counts, std::vector<std::uint64_t>{17});
    EXPECT_DOUBLE_EQ(h.start, 120.0);
}

TEST(Histogram, TotalsAndPlacement) {
    std::vector<TrialOutcome> o{outcome(0, 10), outcome(1, 14), outcome(2, 15), outcome(3, 31)};
    const auto h = histogram(o, 5);
    EXPECT_DOUBLE_EQ(h.start, 10.0);
    EXPECT_EQ(h.counts, (std::vector<std::uint64_t>{2, 1, 0, 0, 1}));
    EXPECT_EQ(h.total(), 4u);
    EXPECT_THROW(histogram(o, 0), std::invalid_argument);
    const auto real = run_trials_serial(small_approach1());
    EXPECT_EQ(histogram(real, 3).total(), real.size());
}

TEST(TrialsCsv, RoundTrip) {
    const auto o = run_trials_serial(small_approach1());
    std::istringstream in(csv_of(o));
    const auto back = read_trials_csv(in);
    ASSERT_EQ(back.size(), o.size());
    for (std::size_t i = 0; i < o.size(); ++i) {
        EXPECT_EQ(back[i].trial_index, o[i].trial_index);
        EXPECT_EQ(back[i].tests_used, o[i].tests_used);
        EXPECT_EQ(back[i].exact_success, o[i].exact_success);
        EXPECT_EQ(back[i].false_positives, o[i].false_positives);
        EXPECT_EQ(back[i].false_negatives, o[i].false_negatives);
        EXPECT_NEAR(back[i].fraction_mistakes, o[i].fraction_mistakes, 5e-7);
        EXPECT_EQ(back[i].aborted, o[i].aborted);
    }
    EXPECT_EQ(csv_of(back), csv_of(o));
}

TEST(TrialsCsv, SchemaHeader) {
    const auto text = csv_of({outcome(0, 1)});
    EXPECT_EQ(text.rfind("# schema: ngt-trials/1\n", 0), 0u);
}

TEST(TrialsCsv, RejectsMalformed) {
    std::istringstream missing("1,2,3\n");
    EXPECT_THROW(read_trials_csv(missing), std::runtime_error);
    std::istringstream short_row(
        "trial_index,tests_used,exact_success,false_positives,false_negatives,fraction_mistakes,"
        "aborted\n1,2,3\n");
    EXPECT_THROW(read_trials_csv(short_row), std::runtime_error);
    std::istringstream bad_num(
        "trial_index,tests_used,exact_success,false_positives,false_negatives,fraction_mistakes,"
        "aborted\nx,2,1,0,0,0.0,0\n");
    EXPECT_THROW(read_trials_csv(bad_num), std::runtime_error);
}

TEST(SummaryJson, Fields) {
    const auto c = small_approach1();
    const auto s = summarize(run_trials_serial(c), c.k, c.hist_bin_width);
    const auto j = nlohmann::json::parse(summary_to_json(s, c));
    EXPECT_EQ(j.at("schema"), "ngt-summary/1");
    EXPECT_EQ(j.at("strategy"), "approach1");
    EXPECT_EQ(j.at("trials"), 300);
    EXPECT_DOUBLE_EQ(j.at("mean_tests").get<double>(), s.mean_tests);
    EXPECT_EQ(j.at("histogram").at("counts").size(), s.histogram.counts.size());
}

TEST(RunExperiment, WritesFiles) {
    auto c = small_approach1();
    const auto dir = std::filesystem::temp_directory_path() / "ngt_harness_test";
    std::filesystem::create_directories(dir);
    c.output_path = (dir / "run").string();
    const auto res = run_experiment(c);
    std::ifstream csv(c.output_path + "_trials.csv");
    ASSERT_TRUE(csv.good());
    EXPECT_EQ(read_trials_csv(csv).size(), c.trials);
    std::ifstream js(c.output_path + "_summary.json");
    const auto j = nlohmann::json::parse(js);
    EXPECT_DOUBLE_EQ(j.at("pe_hat").get<double>(), res.summary.pe_hat);
    std::filesystem::remove_all(dir);
}

TEST(RunExperiment, UnwritablePathThrows) {
    auto c = small_approach1();
    c.trials = 2;
    c.output_path = "/nonexistent-dir/sub/run";
    EXPECT_THROW(run_experiment(c), std::runtime_error);
}

TEST(Sweep, GridCardinalityAndColumns) {
    SweepSpec spec;
    spec.base = small_approach1();
    spec.base.trials = 50;
    spec.r_values = {3, 5};
    spec.delta_values = {1, 0.2};
    spec.with_bounds = true;
    const auto rows = sweep(spec);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(*rows[0].r, 3u);
    EXPECT_DOUBLE_EQ(rows[1].delta, 0.2);
    EXPECT_TRUE(rows[0].bounds.count("capacity_lb"));
    EXPECT_FALSE(rows[0].bounds.count("majority_cert_ub"));  // delta = 1 is not a confidence
    EXPECT_TRUE(rows[1].bounds.count("majority_cert_ub"));
    std::ostringstream os;
    write_sweep_csv(os, rows);
    std::istringstream is(os.str());
    std::string schema, header;
    std::getline(is, schema);
    std::getline(is, header);
    EXPECT_EQ(schema, "# schema: ngt-sweep/1");
    EXPECT_EQ(header.rfind("strategy,r,delta,mean_tests,pe_hat,pe_ci_lo,pe_ci_hi,"
                           "mean_fraction_mistakes,std_tests",
                           0),
              0u);
    int lines = 0;
    for (std::string l; std::getline(is, l);) ++lines;
    EXPECT_EQ(lines, 4);
}

TEST(Sweep, MeanTestsGrowAsDeltaShrinks) {
    SweepSpec spec;
    spec.base = small_approach1();
    spec.base.n = 500;
    spec.base.k = 10;
    spec.base.trials = 1000;
    spec.r_values = {5};
    spec.delta_values = {5, 1, 0.2, 0.04};
    const auto rows = sweep(spec);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_GT(rows[i].summary.mean_tests, rows[i - 1].summary.mean_tests);
    }
}

TEST(Sweep, OverlayJoinsByInstance) {
    std::vector<SweepRow> rows(2);
    rows[0].n = 500;
    rows[0].k = 10;
    rows[0].rho = 0.05;
    rows[0].delta = 0.1;
    rows[1] = rows[0];
    rows[1].rho = 0.0;
    overlay_bounds(rows);
    const auto direct = bound_curves({500, 10, 0.05, 0.1, std::nullopt, std::nullopt, std::nullopt});
    EXPECT_EQ(rows[0].bounds, direct);
    EXPECT_TRUE(rows[1].bounds.empty());
}

TEST(Spearman, Values) {
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
    // d = (0, 0, 1, -1, 0): 1 - 6 * 2 / (5 * 24)
    EXPECT_NEAR(spearman({1, 2, 3, 4, 5}, {1, 2, 4, 3, 5}), 0.9, 1e-15);
    // Ties take average ranks.
    EXPECT_NEAR(spearman({1, 2, 2, 3}, {1, 2, 3, 4}), 0.9486832980505138, 1e-12);
    EXPECT_THROW(spearman({1}, {1}), std::invalid_argument);
    EXPECT_THROW(spearman({1, 2}, {1}), std::invalid_argument);
}

TEST(ConfigParse, FullDocument) {
    const auto c = parse_experiment_config(R"({
        "n": 300, "k": 6, "rho": 0.1, "trials": 12, "seed": 9, "threads": 2,
        "strategy": {"name": "approach1", "r": 7, "delta": 0.3, "nbs_rule": "delta_over_3k",
                     "allow_none": false, "k_assumed": 8}
    })");
    EXPECT_EQ(c.n, 300u);
    EXPECT_EQ(c.trials, 12u);
    EXPECT_EQ(c.master_seed, 9u);
    EXPECT_EQ(c.threads, 2);
    EXPECT_EQ(*c.strategy.approach1.fixed_r, 7u);
    EXPECT_EQ(*c.strategy.k_assumed, 8u);
    EXPECT_FALSE(c.strategy.approach1.allow_none);
    EXPECT_EQ(c.strategy.approach1.nbs_rule, Approach1Params::NbsRule::delta_over_3k);
}

TEST(ConfigParse, Rejections) {
    EXPECT_THROW(parse_experiment_config(R"({"n": 10, "bogus": 1})"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_config(R"({"n": 10, "k": 11})"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_config(R"({"strategy": {"name": "approach1", "r": 4}})"),
                 std::invalid_argument);
    EXPECT_THROW(parse_experiment_config("{not json"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_config(R"({"n": "ten"})"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_config(R"({"strategy": {"name": "approach3", "zeta": "best"}})"),
                 std::invalid_argument);
}

TEST(ConfigParse, ShippedConfigsLoad) {
    for (const char* name : {"approach1_r5.json", "approach2.json", "approach3.json", "hwang.json"}) {
        const auto path = std::string(NGT_SOURCE_DIR) + "/configs/" + name;
        EXPECT_NO_THROW(parse_experiment_config(read_file(path))) << name;
    }
    const auto spec = parse_sweep_config(read_file(std::string(NGT_SOURCE_DIR) + "/configs/sweep_r_delta.json"));
    EXPECT_EQ(expand_sweep(spec).size(), 36u);
}
