// Command-line front end: run, sweep, bounds, hist.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ngt/bounds.hpp"
#include "ngt/harness.hpp"

namespace {

struct ErrorExit {
    std::string code;
    std::string message;
};

void fail_line(const std::string& code, const std::string& message) {
    nlohmann::json j{{"error", code}, {"message", message}};
    std::cerr << j.dump() << std::endl;
}

// Writes to `path`, or stdout when empty.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ErrorExit{"io", "cannot write " + path};
    }
    fn(out);
}

// "a:b:step" or a comma list.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    try {
        if (text.find(':') != std::string::npos) {
            std::vector<double> parts;
            std::stringstream ss(text);
            std::string tok;
            while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
            if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0]) {
                throw ErrorExit{"invalid-argument", "grid must be start:stop:step"};
            }
            const auto steps = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
            for (long i = 0; i <= steps; ++i) out.push_back(parts[0] + i * parts[2]);
        } else {
            std::stringstream ss(text);
            std::string tok;
            while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
        }
    } catch (const std::logic_error&) {
        throw ErrorExit{"invalid-argument", "cannot parse grid '" + text + "'"};
    }
    if (out.empty()) {
        throw ErrorExit{"invalid-argument", "empty grid"};
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void print_summary(const ngt::AggregateSummary& s) {
    std::cout << "trials=" << s.trials << " mean_tests=" << fmt(s.mean_tests)
              << " std_tests=" << fmt(s.std_tests) << " pe_hat=" << fmt(s.pe_hat) << " ci95=["
              << fmt(s.pe_ci_lo) << "," << fmt(s.pe_ci_hi) << "]"
              << " mean_fraction_mistakes=" << fmt(s.mean_fraction_mistakes)
              << " abort_rate=" << fmt(s.abort_rate) << " std/mean=" << fmt(s.std_over_mean)
              << '\n';
    if (s.std_over_mean > 0.5) {
        std::cout << "note: std/mean exceeds 0.5\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noisy adaptive group testing simulator"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out_path;

    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("--trials", trials, "Override the number of trials");
        cmd->add_option("--seed", seed, "Override the master seed");
        cmd->add_option("--threads", threads, "Worker threads");
        cmd->add_option("--out", out_path, "Output path (prefix for run, file for sweep)");
    };

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run one Monte Carlo experiment");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    add_run_flags(run);

    std::string grid_path;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of experiments");
    sweep_cmd->add_option("grid-config", grid_path, "Sweep config (JSON)")->required();
    add_run_flags(sweep_cmd);

    double bn = 0;
    std::string k_grid;
    double brho = 0;
    std::optional<double> bdelta, bdelta0, bdelta1, bzeta;
    std::string units = "nats";
    auto* bounds = app.add_subcommand("bounds", "Leading-order test-count curves over k = n^theta");
    bounds->add_option("--n", bn, "Number of items")->required();
    bounds->add_option("--k-grid", k_grid, "theta grid: start:stop:step or comma list")->required();
    bounds->add_option("--rho", brho, "Flip probability")->required();
    bounds->add_option("--delta", bdelta);
    bounds->add_option("--delta0", bdelta0);
    bounds->add_option("--delta1", bdelta1);
    bounds->add_option("--zeta", bzeta);
    bounds->add_option("--units", units, "Units for information measures")
        ->check(CLI::IsMember({"nats", "bits"}));
    bounds->add_option("--out", out_path, "CSV file (stdout when omitted)");

    std::string hist_path;
    double bin_width = 0;
    auto* hist = app.add_subcommand("hist", "Histogram of tests used from a trials CSV");
    hist->add_option("trials-csv", hist_path)->required();
    hist->add_option("--bin-width", bin_width)->required();
    hist->add_option("--out", out_path, "CSV file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        fail_line("usage", e.what());
        return 2;
    }

    try {
        if (*run) {
            auto config = ngt::parse_experiment_config(ngt::read_file(config_path));
            if (trials) config.trials = *trials;
            if (seed) config.master_seed = *seed;
            if (threads) config.threads = *threads;
            if (!out_path.empty()) config.output_path = out_path;
            const auto res = ngt::run_experiment(config);
            print_summary(res.summary);
        } else if (*sweep_cmd) {
            auto spec = ngt::parse_sweep_config(ngt::read_file(grid_path));
            if (trials) spec.base.trials = *trials;
            if (seed) spec.base.master_seed = *seed;
            if (threads) spec.base.threads = *threads;
            const std::string target = out_path.empty() ? spec.base.output_path : out_path;
            const auto rows = ngt::sweep(spec);
            emit(target, [&](std::ostream& os) { ngt::write_sweep_csv(os, rows); });
        } else if (*bounds) {
            const double scale = units == "bits" ? 1.0 / ngt::kNatsPerBit : 1.0;
            const auto thetas = parse_grid(k_grid);
            emit(out_path, [&](std::ostream& os) {
                os << "# schema: " << ngt::kBoundsSchema << " units=" << units
                   << " (test counts are leading order, unitless)\n";
                os << "theta,curve_name,value\n";
                for (double theta : thetas) {
                    ngt::BoundInputs in;
                    in.n = bn;
                    in.k = std::max(1.0, std::round(std::pow(bn, theta)));
                    in.rho = brho;
                    in.delta = bdelta;
                    in.delta0 = bdelta0;
                    in.delta1 = bdelta1;
                    in.zeta = bzeta;
                    const auto curves = ngt::bound_curves(in);
                    const std::string t = fmt(theta);
                    os << t << ",k," << fmt(in.k) << '\n';
                    for (const auto& [name, value] : curves) {
                        os << t << ',' << name << ',' << fmt(value) << '\n';
                    }
                    os << t << ",capacity," << fmt(ngt::channel_capacity(brho) * scale) << '\n';
                    os << t << ",kl_half_rho," << fmt(ngt::binary_kl(0.5, brho) * scale) << '\n';
                    os << t << ",kl_rho_1mrho," << fmt(ngt::binary_kl(brho, 1.0 - brho) * scale)
                       << '\n';
                }
            });
        } else if (*hist) {
            std::ifstream in(hist_path, std::ios::binary);
            if (!in) {
                throw ErrorExit{"io", "cannot open " + hist_path};
            }
            const auto outcomes = ngt::read_trials_csv(in);
            const auto h = ngt::histogram(outcomes, bin_width);
            const auto s = ngt::summarize(outcomes, 1, bin_width);
            emit(out_path, [&](std::ostream& os) {
                os << "# schema: ngt-hist/1 trials=" << outcomes.size()
                   << " mean=" << fmt(s.mean_tests) << " std=" << fmt(s.std_tests)
                   << " std_over_mean=" << fmt(s.std_over_mean) << '\n';
                os << "bin_lo,bin_hi,count\n";
                for (std::size_t i = 0; i < h.counts.size(); ++i) {
                    const double lo = h.start + static_cast<double>(i) * h.bin_width;
                    os << fmt(lo) << ',' << fmt(lo + h.bin_width) << ',' << h.counts[i] << '\n';
                }
            });
        }
    } catch (const ErrorExit& e) {
        fail_line(e.code, e.message);
        return 1;
    } catch (const std::invalid_argument& e) {
        fail_line("invalid-config", e.what());
        return 1;
    } catch (const std::exception& e) {
        fail_line("runtime", e.what());
        return 1;
    }
    return 0;
}
