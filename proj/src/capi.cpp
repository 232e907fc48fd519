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
// extern "C" surface over the C++ core. Exceptions never cross the boundary;
// they are mapped to status codes with the detail kept in a thread-local
// message retrievable via nb_last_error().

#include "nomabeam.h"

#include "analysis.hpp"
#include "baseline.hpp"
#include "conic.hpp"
#include "harness.hpp"
#include "mma.hpp"
#include "model.hpp"
#include "rng.hpp"

#include <cstring>
#include <memory>
#include <exception>
#include <string>

struct nb_config {
    noma::harness::ExperimentConfig cfg;
};

struct nb_run {
    int users = 0;
    int antennas = 0;
    double sum_rate = 0.0;
    int iterations = 0;
    bool converged = false;
    noma::model::PrecoderSet precoders;
    std::vector<std::pair<double, double>> trace; // (objective_rate, sum_rate)
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

nb_status fail(nb_status code, const std::string& message) {
    set_error(message);
    return code;
}

template <typename Fn>
nb_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const noma::harness::ConfigError& e) {
        return fail(NB_ERR_CONFIG, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(NB_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::out_of_range& e) {
        return fail(NB_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::runtime_error& e) {
        return fail(NB_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(NB_ERR_INTERNAL, e.what());
    }
}

} // namespace

extern "C" {

const char* nb_status_message(nb_status status) {
    switch (status) {
    case NB_OK: return "ok";
    case NB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case NB_ERR_CONFIG: return "configuration error";
    case NB_ERR_SOLVER: return "solver failure";
    case NB_ERR_IO: return "i/o error";
    case NB_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* nb_last_error(void) { return g_last_error.c_str(); }

const char* nb_version(void) { return "0.1.0"; }

nb_status nb_config_open(const char* path, nb_config** out) {
    if (path == nullptr || out == nullptr)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_config_open: null argument");
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<nb_config>();
        handle->cfg = noma::harness::load_config(path);
        *out = handle.release();
        return NB_OK;
    });
}

nb_status nb_config_parse(const char* text, nb_config** out) {
    if (text == nullptr || out == nullptr)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_config_parse: null argument");
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<nb_config>();
        handle->cfg = noma::harness::parse_config_text(text);
        *out = handle.release();
        return NB_OK;
    });
}

nb_status nb_config_default(nb_config** out) {
    if (out == nullptr)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_config_default: null argument");
    *out = new nb_config();
    return NB_OK;
}

void nb_config_close(nb_config* config) { delete config; }

nb_status nb_config_set(nb_config* config, const char* key, const char* value) {
    if (config == nullptr || key == nullptr || value == nullptr)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_config_set: null argument");
    return guarded([&] {
        noma::harness::apply_key_value(config->cfg, key, value);
        config->cfg.validate();
        return NB_OK;
    });
}

nb_status nb_run_sweep(const nb_config* config, const char* out_dir, int write_svg) {
    if (config == nullptr || out_dir == nullptr)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_run_sweep: null argument");
    return guarded([&] {
        const auto result = noma::harness::run_sweep(config->cfg);
        noma::harness::emit_outputs(result, out_dir, write_svg != 0);
        return NB_OK;
    });
}

nb_status nb_run_convergence(const nb_config* config, const char* out_dir, int write_svg) {
    if (config == nullptr || out_dir == nullptr)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_run_convergence: null argument");
    return guarded([&] {
        const auto result = noma::harness::run_convergence(config->cfg);
        noma::harness::emit_outputs(result, out_dir, write_svg != 0);
        return NB_OK;
    });
}

nb_status nb_run_probability(const nb_config* config, const char* out_dir, int write_svg) {
    if (config == nullptr || out_dir == nullptr)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_run_probability: null argument");
    return guarded([&] {
        const auto result = noma::harness::run_probability(config->cfg);
        noma::harness::emit_outputs(result, out_dir, write_svg != 0);
        return NB_OK;
    });
}

nb_status nb_solve_one(const nb_config* config, double tx_snr_db, const char* variant,
                       nb_run** out) {
    if (config == nullptr || variant == nullptr || out == nullptr)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_solve_one: null argument");
    *out = nullptr;
    return guarded([&]() -> nb_status {
        const auto& cfg = config->cfg;
        const auto rv = noma::harness::parse_variant(variant);
        const auto params = cfg.system_params(tx_snr_db);
        const auto distances = noma::model::user_distances(cfg.users, cfg.max_distance);
        const std::uint64_t channel_seed = noma::Rng::stream(cfg.seed, 0).next_u64();
        const auto channels = noma::model::sample_channels(params, distances, channel_seed);

        auto handle = std::make_unique<nb_run>();
        handle->users = cfg.users;
        handle->antennas = cfg.antennas;

        if (rv == noma::harness::RunVariant::Zf) {
            noma::baseline::ZfResult zf;
            try {
                zf = noma::baseline::zf_precoders(channels, params.power_budget, params.noise_std);
            } catch (const std::runtime_error& e) {
                return fail(NB_ERR_SOLVER, e.what());
            }
            handle->sum_rate = zf.sum_rate;
            handle->iterations = 1;
            handle->converged = true;
            handle->precoders = std::move(zf.precoders);
            handle->trace.emplace_back(zf.sum_rate, zf.sum_rate);
        } else {
            noma::mma::MmaConfig mc;
            mc.variant = rv == noma::harness::RunVariant::ANoma ? noma::mma::Variant::ANoma
                                                                : noma::mma::Variant::CNoma;
            mc.convergence_delta = cfg.convergence_delta;
            mc.max_iterations = cfg.max_iterations;
            const std::uint64_t init_seed =
                noma::Rng::stream(cfg.seed ^ 0x9E3779B97F4A7C15ULL, 0).next_u64();
            const auto res = noma::mma::run(channels, params, mc, init_seed);
            if (res.trace.failed)
                return fail(NB_ERR_SOLVER, "first subproblem unsolvable");
            handle->sum_rate = res.trace.best_sum_rate;
            handle->iterations = static_cast<int>(res.trace.iterations.size());
            handle->converged = res.trace.converged;
            handle->precoders = res.precoders;
            for (const auto& rec : res.trace.iterations)
                handle->trace.emplace_back(rec.objective_rate, rec.sum_rate);
        }
        *out = handle.release();
        return NB_OK;
    });
}

void nb_run_close(nb_run* run) { delete run; }

int nb_run_users(const nb_run* run) { return run ? run->users : 0; }

int nb_run_antennas(const nb_run* run) { return run ? run->antennas : 0; }

double nb_run_sum_rate(const nb_run* run) { return run ? run->sum_rate : 0.0; }

int nb_run_iterations(const nb_run* run) { return run ? run->iterations : 0; }

int nb_run_converged(const nb_run* run) { return run && run->converged ? 1 : 0; }

nb_status nb_run_precoder(const nb_run* run, int user, double* re, double* im, int capacity) {
    if (run == nullptr || re == nullptr || im == nullptr)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_run_precoder: null argument");
    if (user < 0 || user >= run->users)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_run_precoder: user out of range");
    if (capacity < run->antennas)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_run_precoder: capacity too small");
    const auto& w = run->precoders.w[static_cast<std::size_t>(user)];
    for (int a = 0; a < run->antennas; ++a) {
        re[a] = w(a).real();
        im[a] = w(a).imag();
    }
    return NB_OK;
}

nb_status nb_run_trace(const nb_run* run, int iteration, double* objective_rate,
                       double* sum_rate) {
    if (run == nullptr)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_run_trace: null run");
    if (iteration < 0 || iteration >= static_cast<int>(run->trace.size()))
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_run_trace: iteration out of range");
    const auto& [obj, rate] = run->trace[static_cast<std::size_t>(iteration)];
    if (objective_rate != nullptr)
        *objective_rate = obj;
    if (sum_rate != nullptr)
        *sum_rate = rate;
    return NB_OK;
}

nb_status nb_complexity(int users, int antennas, const char* variant, long* constraints,
                        long* variables, long* soc_dimension, long* iteration_bound) {
    if (variant == nullptr)
        return fail(NB_ERR_INVALID_ARGUMENT, "nb_complexity: null variant");
    return guarded([&]() -> nb_status {
        noma::mma::Variant v;
        if (std::strcmp(variant, "cnoma") == 0)
            v = noma::mma::Variant::CNoma;
        else if (std::strcmp(variant, "anoma") == 0)
            v = noma::mma::Variant::ANoma;
        else
            return fail(NB_ERR_INVALID_ARGUMENT, "nb_complexity: variant must be cnoma or anoma");
        const int c = noma::conic::geomean_block_count(users);
        const auto est = noma::analysis::complexity_estimate(users, antennas, c, v);
        if (constraints != nullptr)
            *constraints = est.constraint_count;
        if (variables != nullptr)
            *variables = est.variable_count;
        if (soc_dimension != nullptr)
            *soc_dimension = est.soc_dimension_total;
        if (iteration_bound != nullptr)
            *iteration_bound = est.iteration_bound;
        return NB_OK;
    });
}

int nb_geomean_block_count(int users) {
    if (users < 1)
        return -1;
    return noma::conic::geomean_block_count(users);
}

} // extern "C"
