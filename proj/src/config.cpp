#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ngt/harness.hpp"

namespace ngt {

namespace {

using nlohmann::json;

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& dst) {
    if (j.contains(key) && !j.at(key).is_null()) {
        dst = j.at(key).get<T>();
    }
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
    if (j.contains(key)) {
        dst = j.at(key).get<T>();
    }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) {
            throw std::invalid_argument(where + ": unknown key '" + key + "'");
        }
    }
}

StrategySpec parse_strategy_spec(const json& j) {
    StrategySpec s;
    if (j.is_string()) {
        s.kind = parse_strategy(j.get<std::string>());
        return s;
    }
    s.kind = parse_strategy(j.at("name").get<std::string>());
    switch (s.kind) {
        case StrategyKind::hwang: {
            reject_unknown(j, {"name", "k", "grouping", "stop_when_all_found"}, "strategy");
            read_opt(j, "k", s.hwang.k);
            if (j.contains("grouping")) {
                const auto g = j.at("grouping").get<std::string>();
                if (g == "power_of_two") {
                    s.hwang.grouping = HwangParams::Grouping::power_of_two;
                } else if (g == "k_blocks") {
                    s.hwang.grouping = HwangParams::Grouping::k_blocks;
                } else {
                    throw std::invalid_argument("strategy: unknown grouping '" + g + "'");
                }
            }
            read(j, "stop_when_all_found", s.hwang.stop_when_all_found);
            break;
        }
        case StrategyKind::approach1: {
            reject_unknown(j, {"name", "k_assumed", "delta", "r", "early_stop", "nbs_rule",
                               "allow_none", "enforce_nbs_cap"},
                           "strategy");
            auto& p = s.approach1;
            read_opt(j, "k_assumed", s.k_assumed);
            read(j, "delta", p.delta);
            read_opt(j, "r", p.fixed_r);
            read(j, "early_stop", p.early_stop);
            read(j, "allow_none", p.allow_none);
            read(j, "enforce_nbs_cap", p.enforce_nbs_cap);
            if (j.contains("nbs_rule")) {
                const auto rule = j.at("nbs_rule").get<std::string>();
                if (rule == "delta_over_k") {
                    p.nbs_rule = Approach1Params::NbsRule::delta_over_k;
                } else if (rule == "delta_over_3k") {
                    p.nbs_rule = Approach1Params::NbsRule::delta_over_3k;
                } else {
                    throw std::invalid_argument("strategy: unknown nbs_rule '" + rule + "'");
                }
            }
            break;
        }
        case StrategyKind::approach2: {
            reject_unknown(j, {"name", "delta", "delta_est", "c_stage", "C", "inner_confidence",
                               "allow_none"},
                           "strategy");
            auto& p = s.approach2;
            read(j, "delta", p.delta);
            read_opt(j, "delta_est", p.delta_est);
            read(j, "c_stage", p.c_stage);
            read(j, "C", p.C);
            read_opt(j, "inner_confidence", p.inner_confidence);
            read(j, "allow_none", p.allow_none);
            break;
        }
        case StrategyKind::approach3: {
            reject_unknown(j, {"name", "delta", "delta0", "delta1", "delta_est", "c_stage",
                               "epsilon", "epsilon1", "zeta", "C", "t_indiv", "inner_confidence",
                               "allow_none"},
                           "strategy");
            auto& p = s.approach3;
            read(j, "delta", p.delta);
            read_opt(j, "delta0", p.delta0);
            read_opt(j, "delta1", p.delta1);
            read_opt(j, "delta_est", p.delta_est);
            read(j, "c_stage", p.c_stage);
            read(j, "epsilon", p.epsilon);
            read(j, "epsilon1", p.epsilon1);
            if (j.contains("zeta") && j.at("zeta").is_string()) {
                if (j.at("zeta").get<std::string>() != "auto") {
                    throw std::invalid_argument("strategy: zeta must be a number or \"auto\"");
                }
            } else {
                read_opt(j, "zeta", p.zeta);
            }
            read(j, "C", p.C);
            read_opt(j, "t_indiv", p.t_indiv_override);
            read_opt(j, "inner_confidence", p.inner_confidence);
            read(j, "allow_none", p.allow_none);
            break;
        }
    }
    return s;
}

ExperimentConfig from_json(const json& j) {
    reject_unknown(j, {"n", "k", "rho", "strategy", "trials", "seed", "threads", "keep_pools",
                       "hist_bin_width", "output"},
                   "config");
    ExperimentConfig c;
    read(j, "n", c.n);
    read(j, "k", c.k);
    read(j, "rho", c.rho);
    if (j.contains("strategy")) {
        c.strategy = parse_strategy_spec(j.at("strategy"));
    }
    read(j, "trials", c.trials);
    read(j, "seed", c.master_seed);
    read(j, "threads", c.threads);
    read(j, "keep_pools", c.keep_pools);
    read(j, "hist_bin_width", c.hist_bin_width);
    read(j, "output", c.output_path);
    return c;
}

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    try {
        ExperimentConfig c = from_json(parse_text(json_text));
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

SweepSpec parse_sweep_config(const std::string& json_text) {
    try {
        const json j = parse_text(json_text);
        reject_unknown(j, {"base", "grid", "with_bounds", "output"}, "sweep");
        SweepSpec s;
        s.base = from_json(j.at("base"));
        if (j.contains("output")) {
            s.base.output_path = j.at("output").get<std::string>();
        }
        if (j.contains("grid")) {
            const json& g = j.at("grid");
            reject_unknown(g, {"r", "delta"}, "sweep grid");
            read(g, "r", s.r_values);
            read(g, "delta", s.delta_values);
        }
        read(j, "with_bounds", s.with_bounds);
        for (const auto& c : expand_sweep(s)) {
            c.validate();
        }
        return s;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("sweep config: ") + e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ngt
