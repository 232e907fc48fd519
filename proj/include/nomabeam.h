/* SPDX-License-Identifier: Apache-2.0
 *
 * nomabeam — sum-rate maximization for NOMA MISO downlinks via successive
 * second-order cone programming
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 * ------------------------------------------------------------------------
 *
 * C interface of the nomabeam shared library. All functionality is reached
 * through opaque handles and status codes; strings returned by the library
 * are owned by it and remain valid until the next call on the same thread.
 *
 * Configurations use a flat `key = value` text format (one pair per line,
 * `#` comments). Recognized keys:
 *
 *   scenario              name used in output files (default "scenario")
 *   antennas, users       base-station antennas T and user count N
 *   gamma                 path-loss exponent
 *   d0                    farthest user distance in meters (users are placed
 *                         equally spaced between 1 and d0, weakest first)
 *   sigma                 per-user noise standard deviation
 *   tx_snr_db             comma-separated TX-SNR grid in dB
 *   trials                Monte Carlo channel draws per sweep point
 *   seed                  master seed; all randomness derives from it
 *   variants              any of cnoma,anoma,zf (comma separated)
 *   delta                 convergence threshold on successive sum rates
 *   max_iterations        iteration cap per run
 *   prob_distances        swept distances for the probability experiment
 *   prob_fixed_distance   distance of the non-swept user
 *   prob_noise_powers     noise powers (sigma^2) for the probability curves
 *   prob_trials           Monte Carlo trials per probability point
 *   prob_message_index    message index k (1-based, k <= users-1)
 *   prob_sweep            which user's distance is swept: i or j
 */

#ifndef NOMABEAM_H
#define NOMABEAM_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nb_status {
    NB_OK = 0,
    NB_ERR_INVALID_ARGUMENT = 1,
    NB_ERR_CONFIG = 2,
    NB_ERR_SOLVER = 3,
    NB_ERR_IO = 4,
    NB_ERR_INTERNAL = 5
} nb_status;

/* Static description of a status code. */
const char* nb_status_message(nb_status status);

/* Detail message of the most recent failure on the calling thread. */
const char* nb_last_error(void);

const char* nb_version(void);

/* ---- configuration ---------------------------------------------------- */

typedef struct nb_config nb_config;

nb_status nb_config_open(const char* path, nb_config** out);
nb_status nb_config_parse(const char* text, nb_config** out);
nb_status nb_config_default(nb_config** out);
void nb_config_close(nb_config* config);

/* Override a single key with the same syntax as the file format. */
nb_status nb_config_set(nb_config* config, const char* key, const char* value);

/* ---- experiments -------------------------------------------------------
 * Each writes CSV files (plus SVG plots when write_svg is nonzero) under
 * out_dir, creating it if needed. Outputs are deterministic functions of
 * the configuration. */

nb_status nb_run_sweep(const nb_config* config, const char* out_dir, int write_svg);
nb_status nb_run_convergence(const nb_config* config, const char* out_dir, int write_svg);
nb_status nb_run_probability(const nb_config* config, const char* out_dir, int write_svg);

/* ---- single solve ------------------------------------------------------ */

typedef struct nb_run nb_run;

/* One channel draw from the configuration's seed, solved with the given
 * variant ("cnoma", "anoma" or "zf") at one TX-SNR point. */
nb_status nb_solve_one(const nb_config* config, double tx_snr_db, const char* variant,
                       nb_run** out);
void nb_run_close(nb_run* run);

int nb_run_users(const nb_run* run);
int nb_run_antennas(const nb_run* run);
double nb_run_sum_rate(const nb_run* run);
int nb_run_iterations(const nb_run* run);
int nb_run_converged(const nb_run* run);

/* Precoding vector of `user` (0-based); re/im must hold >= antennas values. */
nb_status nb_run_precoder(const nb_run* run, int user, double* re, double* im, int capacity);

/* Per-iteration trace; fails with NB_ERR_INVALID_ARGUMENT past the end. */
nb_status nb_run_trace(const nb_run* run, int iteration, double* objective_rate,
                       double* sum_rate);

/* ---- complexity estimates ---------------------------------------------- */

nb_status nb_complexity(int users, int antennas, const char* variant, long* constraints,
                        long* variables, long* soc_dimension, long* iteration_bound);

/* Cone blocks contributed by the geometric-mean expansion for N operands. */
int nb_geomean_block_count(int users);

#ifdef __cplusplus
}
#endif

#endif /* NOMABEAM_H */
