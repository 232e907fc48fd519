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
// Experiment orchestration: seeded Monte Carlo sweeps over fading, per-SNR
// convergence traces, decoding-order probability curves, and CSV/SVG output.
// Everything emitted is a deterministic function of the configuration.

#ifndef nomabeam_harness_H
#define nomabeam_harness_H

#include "mma.hpp"
#include "model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace noma::harness {

enum class RunVariant { CNoma, ANoma, Zf };

const char* to_string(RunVariant v);
RunVariant parse_variant(const std::string& name); // throws ConfigError

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scenario descriptor. Flat `key = value` text format with `#` comments;
// unknown keys are rejected. TX-SNR is total transmit power over noise power
// in dB: P_th = sigma^2 10^(dB/10).
struct ExperimentConfig {
    std::string scenario = "scenario";
    int antennas = 3;
    int users = 3;
    double path_loss_exponent = 2.0;
    double max_distance = 50.0; // D0
    double noise_std = 1.0;
    std::vector<double> tx_snr_db = {0, 5, 10, 15, 20, 25, 30, 35};
    int trials = 1;
    std::uint64_t seed = 1;
    std::vector<RunVariant> variants = {RunVariant::CNoma, RunVariant::ANoma, RunVariant::Zf};
    double convergence_delta = 1e-2;
    int max_iterations = 100;

    // probability experiment
    std::vector<double> prob_distances = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    double prob_fixed_distance = 1.0;
    std::vector<double> prob_noise_powers = {1.0};
    long prob_trials = 100000;
    int prob_message_index = 1; // k, 1-based
    bool prob_sweep_j = true;   // sweep the j-user distance, i fixed

    model::SystemParams system_params(double snr_db) const;
    void validate() const; // throws ConfigError
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Apply one key = value pair (the file format's semantics); throws
// ConfigError on unknown keys or malformed values.
void apply_key_value(ExperimentConfig& config, const std::string& key, const std::string& value);

struct SweepCell {
    RunVariant variant = RunVariant::CNoma;
    double tx_snr_db = 0.0;
    double mean_sum_rate = 0.0;
    double std_err = 0.0;
    double mean_iterations = 0.0;
    int failures = 0;
};

struct SweepResult {
    ExperimentConfig config;
    std::vector<SweepCell> cells; // variant-major, then grid order
};

// Fixed distances, fresh channel draw per trial (shared across variants and
// grid points), per-trial rng streams derived from (seed, trial). Per-trial
// failures are recorded, never abort the sweep.
SweepResult run_sweep(const ExperimentConfig& config);

struct ConvergencePoint {
    RunVariant variant = RunVariant::CNoma;
    double tx_snr_db = 0.0;
    mma::MmaTrace trace;
};

struct ConvergenceResult {
    ExperimentConfig config;
    std::vector<ConvergencePoint> points;
};

// Single channel draw per SNR point, full iteration trace recorded.
ConvergenceResult run_convergence(const ExperimentConfig& config);

struct ProbabilityRow {
    double d_i = 1.0;
    double d_j = 1.0;
    double noise_power = 1.0;
    double exact = 0.0;
    double exact_raw = 0.0;
    double approx = 0.0;
    double mc_estimate = 0.0;
    double mc_std_err = 0.0;
};

struct ProbabilityResult {
    ExperimentConfig config;
    std::vector<ProbabilityRow> rows;
};

// Closed form, large-ratio approximation and Monte Carlo curves over the
// configured distance sweep and noise powers.
ProbabilityResult run_probability(const ExperimentConfig& config);

// CSV writers; stable column orders, no timestamps.
void write_sweep_csv(const SweepResult& result, std::ostream& out);
void write_convergence_csv(const ConvergenceResult& result, std::ostream& out);
void write_probability_csv(const ProbabilityResult& result, std::ostream& out);

// Write CSV (and optionally an SVG line plot) under `dir`; returns the paths
// written. Throws std::runtime_error on unwritable paths.
std::vector<std::filesystem::path> emit_outputs(const SweepResult& result,
                                                const std::filesystem::path& dir, bool svg);
std::vector<std::filesystem::path> emit_outputs(const ConvergenceResult& result,
                                                const std::filesystem::path& dir, bool svg);
std::vector<std::filesystem::path> emit_outputs(const ProbabilityResult& result,
                                                const std::filesystem::path& dir, bool svg);

} // namespace noma::harness

#endif
