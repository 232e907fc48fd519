// SPDX-License-Identifier: Apache-2.0
//
// nomabeam — sum-rate maximization for NOMA MISO downlinks via successive
// second-order cone programming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Command-line harness. Talks to the library exclusively through the C API
// in nomabeam.h. Exit codes: 0 success, 1 hard failure, 2 config error.

#include <nomabeam.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

namespace {

struct ConfigCloser {
    void operator()(nb_config* c) const { nb_config_close(c); }
};
using ConfigPtr = std::unique_ptr<nb_config, ConfigCloser>;

struct RunCloser {
    void operator()(nb_run* r) const { nb_run_close(r); }
};
using RunPtr = std::unique_ptr<nb_run, RunCloser>;

int exit_code_for(nb_status status) {
    if (status == NB_OK)
        return 0;
    return status == NB_ERR_CONFIG || status == NB_ERR_INVALID_ARGUMENT ? 2 : 1;
}

int report(nb_status status, const char* what) {
    if (status == NB_OK)
        return 0;
    std::fprintf(stderr, "error: %s: %s (%s)\n", what, nb_status_message(status),
                 nb_last_error());
    return exit_code_for(status);
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::string variant;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0;
    bool trials_set = false;
    bool svg = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_variant) {
    cmd->add_option("--config", opts.config_path, "scenario config file (key = value lines)");
    cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "master seed override")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--trials", opts.trials, "trial count override")
        ->each([&opts](const std::string&) { opts.trials_set = true; });
    cmd->add_flag("--svg", opts.svg, "also write SVG plots");
    if (with_variant)
        cmd->add_option("--variant", opts.variant, "restrict to one variant (cnoma|anoma|zf)");
}

// Build the config handle from the options; returns nonzero exit code on error.
int make_config(const CommonOpts& opts, ConfigPtr& out) {
    nb_config* raw = nullptr;
    nb_status st = opts.config_path.empty() ? nb_config_default(&raw)
                                            : nb_config_open(opts.config_path.c_str(), &raw);
    if (st != NB_OK)
        return report(st, "loading config");
    ConfigPtr cfg(raw);
    if (opts.seed_set) {
        st = nb_config_set(cfg.get(), "seed", std::to_string(opts.seed).c_str());
        if (st != NB_OK)
            return report(st, "applying --seed");
    }
    if (opts.trials_set) {
        st = nb_config_set(cfg.get(), "trials", std::to_string(opts.trials).c_str());
        if (st != NB_OK)
            return report(st, "applying --trials");
    }
    if (!opts.variant.empty()) {
        st = nb_config_set(cfg.get(), "variants", opts.variant.c_str());
        if (st != NB_OK)
            return report(st, "applying --variant");
    }
    out = std::move(cfg);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"NOMA MISO downlink sum-rate experiments"};
    app.require_subcommand(1);

    CommonOpts sweep_opts, conv_opts, prob_opts, complexity_opts, solve_opts;
    double solve_snr_db = 20.0;
    int complexity_max_users = 8;
    int complexity_antennas = 4;

    CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo sum-rate sweep over TX-SNR");
    add_common(sweep, sweep_opts, true);

    CLI::App* converge = app.add_subcommand("converge", "per-iteration convergence traces");
    add_common(converge, conv_opts, true);

    CLI::App* prob = app.add_subcommand("prob", "decoding-order probability curves");
    add_common(prob, prob_opts, false);

    CLI::App* complexity =
        app.add_subcommand("complexity", "per-iteration complexity estimates");
    add_common(complexity, complexity_opts, true);
    complexity->add_option("--max-users", complexity_max_users, "largest user count tabulated")
        ->capture_default_str();
    complexity->add_option("--antennas", complexity_antennas, "antenna count for the estimates")
        ->capture_default_str();

    CLI::App* solve_one = app.add_subcommand("solve-one", "solve a single channel instance");
    add_common(solve_one, solve_opts, true);
    solve_one->add_option("--snr", solve_snr_db, "TX-SNR in dB")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e); // prints help or the error message
        return rc == 0 ? 0 : 2;
    }

    if (sweep->parsed()) {
        ConfigPtr cfg;
        if (int rc = make_config(sweep_opts, cfg))
            return rc;
        return report(nb_run_sweep(cfg.get(), sweep_opts.out_dir.c_str(), sweep_opts.svg),
                      "sweep");
    }

    if (converge->parsed()) {
        ConfigPtr cfg;
        if (int rc = make_config(conv_opts, cfg))
            return rc;
        return report(
            nb_run_convergence(cfg.get(), conv_opts.out_dir.c_str(), conv_opts.svg), "converge");
    }

    if (prob->parsed()) {
        ConfigPtr cfg;
        if (int rc = make_config(prob_opts, cfg))
            return rc;
        return report(nb_run_probability(cfg.get(), prob_opts.out_dir.c_str(), prob_opts.svg),
                      "prob");
    }

    if (complexity->parsed()) {
        std::printf("variant,users,antennas,c,constraints,variables,soc_dimension,"
                    "iteration_bound\n");
        const char* variants[] = {"cnoma", "anoma"};
        for (const char* v : variants) {
            if (!complexity_opts.variant.empty() && complexity_opts.variant != v)
                continue;
            for (int n = 1; n <= complexity_max_users; ++n) {
                long cons = 0, vars = 0, soc = 0, iters = 0;
                const nb_status st =
                    nb_complexity(n, complexity_antennas, v, &cons, &vars, &soc, &iters);
                if (st != NB_OK)
                    return report(st, "complexity");
                std::printf("%s,%d,%d,%d,%ld,%ld,%ld,%ld\n", v, n, complexity_antennas,
                            nb_geomean_block_count(n), cons, vars, soc, iters);
            }
        }
        return 0;
    }

    if (solve_one->parsed()) {
        ConfigPtr cfg;
        if (int rc = make_config(solve_opts, cfg))
            return rc;
        const std::string variant = solve_opts.variant.empty() ? "cnoma" : solve_opts.variant;
        nb_run* raw = nullptr;
        const nb_status st = nb_solve_one(cfg.get(), solve_snr_db, variant.c_str(), &raw);
        if (st != NB_OK)
            return report(st, "solve-one");
        RunPtr run(raw);
        std::printf("variant %s  tx_snr %.2f dB  users %d  antennas %d\n", variant.c_str(),
                    solve_snr_db, nb_run_users(run.get()), nb_run_antennas(run.get()));
        std::printf("sum rate %.6f bits/s/Hz  iterations %d  converged %s\n",
                    nb_run_sum_rate(run.get()), nb_run_iterations(run.get()),
                    nb_run_converged(run.get()) ? "yes" : "no");
        double obj = 0.0, rate = 0.0;
        for (int it = 0; nb_run_trace(run.get(), it, &obj, &rate) == NB_OK; ++it)
            std::printf("  it %3d  objective %.6f  sum_rate %.6f\n", it, obj, rate);
        return 0;
    }

    return 1;
}
