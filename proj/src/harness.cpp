#include "ngt/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ngt/bounds.hpp"
#include "json.hpp"

namespace ngt {

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::hwang: return "hwang";
        case StrategyKind::approach1: return "approach1";
        case StrategyKind::approach2: return "approach2";
        case StrategyKind::approach3: return "approach3";
    }
    return "unknown";
}

StrategyKind parse_strategy(const std::string& name) {
    if (name == "hwang") return StrategyKind::hwang;
    if (name == "approach1") return StrategyKind::approach1;
    if (name == "approach2") return StrategyKind::approach2;
    if (name == "approach3") return StrategyKind::approach3;
    throw std::invalid_argument("unknown strategy: " + name);
}

void ExperimentConfig::validate() const {
    if (n < 1) {
        throw std::invalid_argument("config: n must be positive");
    }
    if (k > n) {
        throw std::invalid_argument("config: k must not exceed n");
    }
    if (!(rho >= 0.0 && rho < 0.5)) {
        throw std::invalid_argument("config: rho must lie in [0, 1/2)");
    }
    if (trials < 1) {
        throw std::invalid_argument("config: trials must be at least 1");
    }
    if (threads < 1) {
        throw std::invalid_argument("config: threads must be at least 1");
    }
    if (!(hist_bin_width > 0.0)) {
        throw std::invalid_argument("config: hist_bin_width must be positive");
    }
    switch (strategy.kind) {
        case StrategyKind::hwang:
            if (rho != 0.0) {
                throw std::invalid_argument("config: hwang requires rho = 0");
            }
            break;
        case StrategyKind::approach1: {
            Approach1Params p = strategy.approach1;
            p.k = strategy.k_assumed.value_or(std::max<std::uint32_t>(k, 1));
            p.validate();
            break;
        }
        case StrategyKind::approach2: strategy.approach2.validate(); break;
        case StrategyKind::approach3: strategy.approach3.validate(rho); break;
    }
}

// ---------------------------------------------------------------------------

std::vector<Item> sample_defectives(std::uint32_t n, std::uint32_t k, NoiseSource& rng) {
    if (k > n) {
        throw std::invalid_argument("sample_defectives: k exceeds n");
    }
    std::set<Item> chosen;
    for (std::uint32_t j = n - k + 1; j <= n; ++j) {
        const auto t = static_cast<Item>(rng.below(j) + 1);
        if (!chosen.insert(t).second) {
            chosen.insert(j);
        }
    }
    return {chosen.begin(), chosen.end()};
}

namespace {

RecoveryResult dispatch(const ExperimentConfig& config, const GroundTruth& truth,
                        Channel& channel, NoiseSource& algo_rng) {
    const StrategySpec& s = config.strategy;
    switch (s.kind) {
        case StrategyKind::hwang: return hwang_baseline(truth, channel, s.hwang);
        case StrategyKind::approach1: {
            Approach1Params p = s.approach1;
            p.k = s.k_assumed.value_or(std::max<std::uint32_t>(config.k, 1));
            return approach1(channel, p);
        }
        case StrategyKind::approach2: return approach2(channel, algo_rng, s.approach2);
        case StrategyKind::approach3: return approach3(channel, algo_rng, s.approach3);
    }
    throw std::logic_error("unhandled strategy");
}

TrialOutcome score(std::uint64_t index, const GroundTruth& truth, const RecoveryResult& r) {
    TrialOutcome out;
    out.trial_index = index;
    out.tests_used = r.tests_used;
    out.aborted = r.aborted;
    const auto& s = truth.defectives();
    std::vector<Item> common;
    std::set_intersection(s.begin(), s.end(), r.estimate.begin(), r.estimate.end(),
                          std::back_inserter(common));
    out.false_negatives = static_cast<std::uint32_t>(s.size() - common.size());
    out.false_positives = static_cast<std::uint32_t>(r.estimate.size() - common.size());
    out.exact_success = out.false_negatives == 0 && out.false_positives == 0;
    const double denom = std::max<std::uint32_t>(truth.k(), 1);
    out.fraction_mistakes = std::max(out.false_negatives, out.false_positives) / denom;
    return out;
}

}  // namespace

TrialRecord run_trial_detailed(const ExperimentConfig& config, std::uint64_t trial_index) {
    NoiseSource placement(config.master_seed, trial_index, NoiseSource::Lane::placement);
    NoiseSource noise(config.master_seed, trial_index, NoiseSource::Lane::channel);
    NoiseSource algo(config.master_seed, trial_index, NoiseSource::Lane::algorithm);

    TrialRecord rec{{},
                    GroundTruth(config.n, sample_defectives(config.n, config.k, placement),
                                config.rho),
                    {},
                    TestLedger(config.keep_pools),
                    0};
    Channel channel(rec.truth, rec.ledger, noise);
    rec.result = dispatch(config, rec.truth, channel, algo);
    rec.channel_calls = channel.calls();
    if (rec.result.tests_used != rec.ledger.count() || rec.channel_calls != rec.ledger.count()) {
        throw std::logic_error("test accounting mismatch in trial " + std::to_string(trial_index));
    }
    rec.outcome = score(trial_index, rec.truth, rec.result);
    return rec;
}

TrialOutcome run_trial(const ExperimentConfig& config, std::uint64_t trial_index) {
    return run_trial_detailed(config, trial_index).outcome;
}

std::vector<TrialOutcome> run_trials_serial(const ExperimentConfig& config) {
    config.validate();
    std::vector<TrialOutcome> out(config.trials);
    for (std::uint64_t t = 0; t < config.trials; ++t) {
        out[t] = run_trial(config, t);
    }
    return out;
}

std::vector<TrialOutcome> run_trials_parallel(const ExperimentConfig& config, int threads) {
    config.validate();
    std::vector<TrialOutcome> out(config.trials);
    std::exception_ptr error;
    const auto trials = static_cast<std::int64_t>(config.trials);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (std::int64_t t = 0; t < trials; ++t) {
        try {
            out[static_cast<std::size_t>(t)] = run_trial(config, static_cast<std::uint64_t>(t));
        } catch (...) {
#pragma omp critical(ngt_trial_error)
            if (!error) {
                error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::uint64_t Histogram::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

Histogram histogram(const std::vector<TrialOutcome>& outcomes, double bin_width) {
    if (!(bin_width > 0.0)) {
        throw std::invalid_argument("histogram: bin_width must be positive");
    }
    Histogram h;
    h.bin_width = bin_width;
    if (outcomes.empty()) {
        return h;
    }
    auto [lo, hi] = std::minmax_element(outcomes.begin(), outcomes.end(),
                                        [](const auto& a, const auto& b) {
                                            return a.tests_used < b.tests_used;
                                        });
    h.start = std::floor(static_cast<double>(lo->tests_used) / bin_width) * bin_width;
    auto bin_of = [&](std::uint64_t v) {
        return static_cast<std::size_t>(std::floor((static_cast<double>(v) - h.start) / bin_width));
    };
    h.counts.assign(bin_of(hi->tests_used) + 1, 0);
    for (const auto& o : outcomes) {
        ++h.counts[bin_of(o.tests_used)];
    }
    return h;
}

AggregateSummary summarize(const std::vector<TrialOutcome>& outcomes, std::uint32_t k,
                           double bin_width) {
    AggregateSummary s;
    s.trials = outcomes.size();
    if (outcomes.empty()) {
        return s;
    }
    // Integer accumulators keep the summary independent of trial order.
    unsigned __int128 sum = 0;
    unsigned __int128 sum_sq = 0;
    std::uint64_t failures = 0;
    std::uint64_t aborts = 0;
    std::uint64_t mistakes = 0;
    for (const auto& o : outcomes) {
        sum += o.tests_used;
        sum_sq += static_cast<unsigned __int128>(o.tests_used) * o.tests_used;
        failures += o.exact_success ? 0 : 1;
        aborts += o.aborted ? 1 : 0;
        mistakes += std::max(o.false_negatives, o.false_positives);
    }
    const double n = static_cast<double>(s.trials);
    s.mean_tests = static_cast<double>(sum) / n;
    if (s.trials > 1) {
        // (N sum_sq - sum^2) is exact in integers.
        const unsigned __int128 num = static_cast<unsigned __int128>(s.trials) * sum_sq - sum * sum;
        s.std_tests = std::sqrt(static_cast<double>(num) / (n * (n - 1.0)));
    }
    s.pe_hat = static_cast<double>(failures) / n;
    const double half = 1.96 * std::sqrt(s.pe_hat * (1.0 - s.pe_hat) / n);
    s.pe_ci_lo = std::max(0.0, s.pe_hat - half);
    s.pe_ci_hi = std::min(1.0, s.pe_hat + half);
    s.abort_rate = static_cast<double>(aborts) / n;
    const double kk = std::max<std::uint32_t>(k, 1);
    s.mean_fraction_mistakes = static_cast<double>(mistakes) / (kk * n);
    s.std_over_mean = s.mean_tests > 0 ? s.std_tests / s.mean_tests : 0.0;
    s.fraction_vs_pe_over_k = s.pe_hat > 0 ? s.mean_fraction_mistakes / (s.pe_hat / kk)
                                           : std::numeric_limits<double>::quiet_NaN();
    s.histogram = histogram(outcomes, bin_width);
    return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult res;
    res.outcomes = config.threads > 1 ? run_trials_parallel(config, config.threads)
                                      : run_trials_serial(config);
    res.summary = summarize(res.outcomes, config.k, config.hist_bin_width);
    if (!config.output_path.empty()) {
        const std::string trials_path = config.output_path + "_trials.csv";
        std::ofstream csv(trials_path, std::ios::binary);
        if (!csv) {
            throw std::runtime_error("cannot write " + trials_path);
        }
        write_trials_csv(csv, res.outcomes);
        const std::string summary_path = config.output_path + "_summary.json";
        std::ofstream js(summary_path, std::ios::binary);
        if (!js) {
            throw std::runtime_error("cannot write " + summary_path);
        }
        js << summary_to_json(res.summary, config) << '\n';
    }
    return res;
}

// ---------------------------------------------------------------------------

void write_trials_csv(std::ostream& os, const std::vector<TrialOutcome>& outcomes) {
    os << "# schema: " << kTrialsSchema << '\n';
    os << "trial_index,tests_used,exact_success,false_positives,false_negatives,"
          "fraction_mistakes,aborted\n";
    char frac[32];
    for (const auto& o : outcomes) {
        std::snprintf(frac, sizeof frac, "%.6f", o.fraction_mistakes);
        os << o.trial_index << ',' << o.tests_used << ',' << (o.exact_success ? 1 : 0) << ','
           << o.false_positives << ',' << o.false_negatives << ',' << frac << ','
           << (o.aborted ? 1 : 0) << '\n';
    }
}

std::vector<TrialOutcome> read_trials_csv(std::istream& is) {
    std::vector<TrialOutcome> out;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header_seen) {
            if (line.rfind("trial_index,", 0) != 0) {
                throw std::runtime_error("trials csv: missing header");
            }
            header_seen = true;
            continue;
        }
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ls, field, ',')) {
            f.push_back(field);
        }
        if (f.size() != 7) {
            throw std::runtime_error("trials csv: expected 7 fields on line " +
                                     std::to_string(line_no));
        }
        try {
            TrialOutcome o;
            o.trial_index = std::stoull(f[0]);
            o.tests_used = std::stoull(f[1]);
            o.exact_success = f[2] == "1";
            o.false_positives = static_cast<std::uint32_t>(std::stoul(f[3]));
            o.false_negatives = static_cast<std::uint32_t>(std::stoul(f[4]));
            o.fraction_mistakes = std::stod(f[5]);
            o.aborted = f[6] == "1";
            out.push_back(o);
        } catch (const std::logic_error&) {
            throw std::runtime_error("trials csv: malformed number on line " +
                                     std::to_string(line_no));
        }
    }
    if (!header_seen) {
        throw std::runtime_error("trials csv: missing header");
    }
    return out;
}

std::string summary_to_json(const AggregateSummary& s, const ExperimentConfig& config) {
    nlohmann::ordered_json j;
    j["schema"] = "ngt-summary/1";
    j["strategy"] = to_string(config.strategy.kind);
    j["n"] = config.n;
    j["k"] = config.k;
    j["rho"] = config.rho;
    j["master_seed"] = config.master_seed;
    j["trials"] = s.trials;
    j["mean_tests"] = s.mean_tests;
    j["std_tests"] = s.std_tests;
    j["std_over_mean"] = s.std_over_mean;
    j["pe_hat"] = s.pe_hat;
    j["pe_ci95"] = {s.pe_ci_lo, s.pe_ci_hi};
    j["mean_fraction_mistakes"] = s.mean_fraction_mistakes;
    if (std::isnan(s.fraction_vs_pe_over_k)) {
        j["fraction_vs_pe_over_k"] = nullptr;
    } else {
        j["fraction_vs_pe_over_k"] = s.fraction_vs_pe_over_k;
    }
    j["abort_rate"] = s.abort_rate;
    j["histogram"] = {{"bin_width", s.histogram.bin_width},
                      {"start", s.histogram.start},
                      {"counts", s.histogram.counts}};
    return j.dump(2);
}

// ---------------------------------------------------------------------------

std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec) {
    std::vector<std::optional<std::uint32_t>> rs;
    for (auto r : spec.r_values) rs.emplace_back(r);
    if (rs.empty()) rs.emplace_back(std::nullopt);
    std::vector<std::optional<double>> deltas;
    for (auto d : spec.delta_values) deltas.emplace_back(d);
    if (deltas.empty()) deltas.emplace_back(std::nullopt);

    std::vector<ExperimentConfig> out;
    for (const auto& r : rs) {
        for (const auto& d : deltas) {
            ExperimentConfig c = spec.base;
            c.output_path.clear();
            if (r) {
                c.strategy.approach1.fixed_r = *r;
            }
            if (d) {
                c.strategy.approach1.delta = *d;
                c.strategy.approach2.delta = *d;
                c.strategy.approach3.delta = *d;
            }
            out.push_back(c);
        }
    }
    return out;
}

namespace {

double strategy_delta(const StrategySpec& s) {
    switch (s.kind) {
        case StrategyKind::approach1: return s.approach1.delta;
        case StrategyKind::approach2: return s.approach2.delta;
        case StrategyKind::approach3: return s.approach3.delta;
        case StrategyKind::hwang: return 0.0;
    }
    return 0.0;
}

}  // namespace

std::vector<SweepRow> sweep(const SweepSpec& spec) {
    const auto configs = expand_sweep(spec);
    if (configs.empty()) {
        throw std::invalid_argument("sweep: empty grid");
    }
    std::vector<SweepRow> rows;
    for (const auto& c : configs) {
        SweepRow row;
        row.strategy = to_string(c.strategy.kind);
        if (c.strategy.kind == StrategyKind::approach1) {
            row.r = c.strategy.approach1.fixed_r;
        }
        row.delta = strategy_delta(c.strategy);
        row.n = c.n;
        row.k = c.k;
        row.rho = c.rho;
        row.summary = run_experiment(c).summary;
        rows.push_back(std::move(row));
    }
    if (spec.with_bounds) {
        overlay_bounds(rows);
    }
    return rows;
}

void overlay_bounds(std::vector<SweepRow>& rows) {
    for (auto& row : rows) {
        if (row.k < 1 || !(row.rho > 0.0)) {
            continue;
        }
        BoundInputs in;
        in.n = row.n;
        in.k = row.k;
        in.rho = row.rho;
        if (row.delta > 0.0 && row.delta < 1.0) {
            in.delta = row.delta;
        }
        row.bounds = bound_curves(in);
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    std::set<std::string> bound_names;
    for (const auto& row : rows) {
        for (const auto& [name, _] : row.bounds) bound_names.insert(name);
    }
    os << "# schema: " << kSweepSchema << '\n';
    os << "strategy,r,delta,mean_tests,pe_hat,pe_ci_lo,pe_ci_hi,mean_fraction_mistakes,std_tests,"
          "n,k,rho";
    for (const auto& name : bound_names) os << ',' << name;
    os << '\n';
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    for (const auto& row : rows) {
        const auto& s = row.summary;
        os << row.strategy << ',' << (row.r ? std::to_string(*row.r) : std::string()) << ','
           << num(row.delta) << ',' << num(s.mean_tests) << ',' << num(s.pe_hat) << ','
           << num(s.pe_ci_lo) << ',' << num(s.pe_ci_hi) << ',' << num(s.mean_fraction_mistakes)
           << ',' << num(s.std_tests) << ',' << row.n << ',' << row.k << ',' << num(row.rho);
        for (const auto& name : bound_names) {
            auto it = row.bounds.find(name);
            os << ',' << (it == row.bounds.end() ? std::string() : num(it->second));
        }
        os << '\n';
    }
}

// ---------------------------------------------------------------------------

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("spearman: need two equal-length samples of size >= 2");
    }
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) {
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace ngt
