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

#ifndef nomabeam_mma_H
#define nomabeam_mma_H

#include "conic.hpp"
#include "model.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace noma::mma {

enum class Variant { CNoma, ANoma };

const char* to_string(Variant v);

// The linearization-point bundle carried between iterations, together with
// the precoders it was computed from. theta/phi entries always equal the
// corresponding h^H w inner products at `precoders` (within solver tolerance
// once iterates come out of the subproblem).
//
// Pair-indexed members use flat storage:
//   v, theta_jk : pairs (k, j) with j > k, ordered k-major
//   phi         : pairs (k, m), receiver k in [0, N), message m in [0, N-1)
struct MmaState {
    int users = 0;

    std::vector<double> wbar;                   // N-1: direct interference-plus-noise bounds
    std::vector<double> r;                      // N: 1 + protected SINR per message
    std::vector<double> v;                      // (N^2-N)/2: cross interference bounds
    std::vector<std::complex<double>> theta_kk; // N-1: h_k^H w_k
    std::vector<std::complex<double>> theta_jk; // (N^2-N)/2: h_j^H w_k
    std::complex<double> theta_nn;              // h_N^H w_N
    std::vector<std::complex<double>> phi;      // N(N-1): h_k^H w_m
    model::PrecoderSet precoders;

    // Precoders of the previously accepted iterate (empty at initialization).
    // Carried as direction history for the accelerated update.
    model::PrecoderSet prev_precoders;

    static int pair_index(int k, int j, int users); // j > k
    double& v_at(int k, int j) { return v[static_cast<std::size_t>(pair_index(k, j, users))]; }
    double v_at(int k, int j) const { return v[static_cast<std::size_t>(pair_index(k, j, users))]; }
    std::complex<double>& theta_jk_at(int k, int j) {
        return theta_jk[static_cast<std::size_t>(pair_index(k, j, users))];
    }
    std::complex<double> theta_jk_at(int k, int j) const {
        return theta_jk[static_cast<std::size_t>(pair_index(k, j, users))];
    }
    std::complex<double>& phi_at(int k, int m) {
        return phi[static_cast<std::size_t>(k * (users - 1) + m)];
    }
    std::complex<double> phi_at(int k, int m) const {
        return phi[static_cast<std::size_t>(k * (users - 1) + m)];
    }
};

struct MmaConfig {
    Variant variant = Variant::CNoma;
    double convergence_delta = 1e-2; // bits/s/Hz on successive sum rates
    int max_iterations = 100;
    // Subproblem tolerances. The gap tolerance sits two decades under the
    // 1e-6 ascent/feasibility margins; the solver's own default (1e-8) is
    // right at the dense double-precision floor for the larger subproblems.
    conic::SolverSettings solver{.eps_feas = 1e-8, .eps_gap = 1e-7, .max_iterations = 200};
};

struct IterationRecord {
    int iteration = 0;
    bool accepted = false;
    conic::SolveStatus solver_status = conic::SolveStatus::NumericalFailure;
    double geomean = 0.0;        // subproblem optimum t
    double objective_rate = 0.0; // N log2(t), comparable to the true rate
    double sum_rate = 0.0;       // true sum rate of the accepted precoders
    double wall_seconds = 0.0;
};

struct MmaTrace {
    std::vector<IterationRecord> iterations;
    bool converged = false;
    bool failed = false; // first subproblem unsolvable
    double best_sum_rate = 0.0;
    int best_iteration = -1;
};

// Affine minorant of the squared magnitude f(theta) = |theta|^2 around
// theta_t: g = |theta_t|^2 + 2 theta_t . (theta - theta_t). Dominated by f
// everywhere, touches at theta_t, and matches the gradient there.
double minorant_quadratic(std::complex<double> theta, std::complex<double> theta_t);

// Convex over-estimate of the bilinear product a*b for nonnegative scalars,
// exact at (a_t, b_t):
// 0.25 (a+b)^2 - 0.25 [ (a_t-b_t)^2 + 2 (a_t-b_t)(a - a_t - b + b_t) ].
double bilinear_convex_upper(double a, double b, double a_t, double b_t);

// Feasible starting bundle: common random unit direction with geometrically
// descending powers summing exactly to the budget; all auxiliaries tight.
MmaState init_state(const model::ChannelSet& channels, const model::SystemParams& params,
                    std::uint64_t seed);

// Variable layout of an assembled subproblem (real embedding).
struct VarLayout {
    int users = 0;
    int antennas = 0;
    int w_base = 0; // per user: antennas (re) then antennas (im)
    int r_base = 0;
    int wbar_base = 0;
    int v_base = -1; // CNoma only
    int t_var = 0;

    int w_re(int user, int antenna) const { return w_base + 2 * antennas * user + antenna; }
    int w_im(int user, int antenna) const {
        return w_base + 2 * antennas * user + antennas + antenna;
    }
};

struct Subproblem {
    conic::ConicProgram program;
    VarLayout layout;
    int geomean_blocks = 0; // the constant c
    int total_blocks = 0;
};

Subproblem build_subproblem(const MmaState& state, const model::ChannelSet& channels,
                            const model::SystemParams& params, Variant variant);

struct StepResult {
    MmaState state; // new state when accepted, previous state otherwise
    IterationRecord record;
};

StepResult step(const MmaState& state, const model::ChannelSet& channels,
                const model::SystemParams& params, const MmaConfig& config);

struct RunResult {
    model::PrecoderSet precoders; // best accepted iterate
    MmaTrace trace;
};

RunResult run(const model::ChannelSet& channels, const model::SystemParams& params,
              const MmaConfig& config, std::uint64_t seed);

} // namespace noma::mma

#endif
