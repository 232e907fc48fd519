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
// Closed-form decoding-order probabilities under random unitary precoding,
// the scaled-channel family on which the reduced objective is exact, and
// per-iteration complexity estimates for the two subproblem formulations.

#ifndef nomabeam_analysis_H
#define nomabeam_analysis_H

#include "mma.hpp"
#include "model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace noma::analysis {

// Exponential integral Ei(x) for x < 0 (the only range the probability
// expressions use). Power series near zero, modified Lentz continued
// fraction for large |x|; at least 12 significant digits across the range.
double exp_integral_ei(double x);

// psi(lambda, m) = (-1)^m lambda^(m-1) Ei(-lambda) / (m-1)!
//                  + e^-lambda sum_{l=0}^{m-2} (-1)^l lambda^l / ((m-1)...(m-1-l)),
// for lambda > 0, m >= 2. Equals e^-lambda Int_0^inf e^(-lambda z) (1+z)^-m dz.
double psi(double lambda, int m);

// Parameters of Pr(SINR_i^k > SINR_j^k) under a random unitary precoding
// matrix: lambda = d^gamma rate parameters of the two users' channel draws,
// the user count, the (1-based) message index k <= N-1, and the noise power.
struct ProbParams {
    double lambda_i = 1.0;
    double lambda_j = 1.0;
    int users = 2;         // N
    int message_index = 1; // k
    double noise_power = 1.0;
};

struct ProbResult {
    double raw = 0.0;     // the expression as evaluated
    double clamped = 0.0; // clipped to [0, 1] for reporting
};

// Exact closed form.
ProbResult prob_decoding_order(const ProbParams& params);

// Approximation for lambda_j >> lambda_i (not enforced).
ProbResult prob_decoding_order_approx(const ProbParams& params);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

// Monte Carlo estimate of the same probability: Gaussian channels with the
// given rate parameters, one Haar-random unitary precoding matrix per trial.
McEstimate mc_prob_decoding_order(const ProbParams& params, int antennas, long trials,
                                  std::uint64_t seed);

// Channel family h_{k+1} = c_{k+1} h_k with |c| > 1, on which the minimum in
// the full sum rate is always attained by the direct SINR, so the complete
// and reduced objectives coincide. Distances are reported as 1 (placeholder).
model::ChannelSet scaled_channel_family(const model::cvec& base, std::span<const double> magnitudes,
                                        std::span<const double> phases);

// SINR with a receiver-specific noise level, used to study when cross-user
// dominance survives unequal noise.
double sinr_per_user_noise(const model::ChannelSet& channels, const model::PrecoderSet& precoders,
                           int user, int message, double user_noise_std);

struct ComplexityEstimate {
    long constraint_count = 0;
    long variable_count = 0;
    long soc_dimension_total = 0;
    long iteration_bound = 0; // ceil(sqrt(constraints))
};

// Worst-case per-iteration interior-point cost model for the two subproblem
// formulations; c is the number of cone blocks the geometric-mean expansion
// contributes for the given user count.
ComplexityEstimate complexity_estimate(int users, int antennas, int geomean_blocks,
                                       mma::Variant variant);

// Flops proxy: variables^2 times total cone dimension.
double flop_proxy(const ComplexityEstimate& estimate);

} // namespace noma::analysis

#endif
