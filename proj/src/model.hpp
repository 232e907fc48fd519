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

#ifndef nomabeam_model_H
#define nomabeam_model_H

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace noma::model {

using cvec = Eigen::VectorXcd;

// Scenario parameters of the downlink: a base station with `antennas` transmit
// antennas serves `users` single-antenna receivers over flat-fading channels
// h_i = d_i^(-gamma/2) g_i, g_i ~ CN(0, I), under a total power budget.
struct SystemParams {
    int antennas = 1;                // T
    int users = 1;                   // N
    double path_loss_exponent = 2.0; // gamma
    double max_distance = 50.0;      // D0 [m], farthest user
    double noise_std = 1.0;          // sigma (amplitude)
    double power_budget = 1.0;       // P_th

    double noise_power() const { return noise_std * noise_std; }
    void validate() const; // throws std::invalid_argument
};

struct ChannelSet {
    std::vector<cvec> h;          // N vectors of length T
    std::vector<double> distance; // N distances [m]

    int users() const { return static_cast<int>(h.size()); }
    int antennas() const { return h.empty() ? 0 : static_cast<int>(h[0].size()); }
};

struct PrecoderSet {
    std::vector<cvec> w; // N vectors of length T

    int users() const { return static_cast<int>(w.size()); }
    double total_power() const;
};

// Users equally spaced between 1 m and max_distance; single user sits at 1 m.
std::vector<double> make_distances(int users, double max_distance);

// The same grid assigned to users weakest-first: user 1 is the farthest (its
// message must be decodable everywhere), user N the closest. Channel norms
// are then increasing in the user index, as the decoding order assumes.
std::vector<double> user_distances(int users, double max_distance);

// Deterministic draw of the fading channels for the given distances.
ChannelSet sample_channels(const SystemParams& params, const std::vector<double>& distances,
                           std::uint64_t seed);

// SINR at receiver `user` when decoding the message of `message`
// (0-based indices): |h_u^H w_m|^2 / (sum_{j>m} |h_u^H w_j|^2 + sigma^2).
double sinr(const ChannelSet& channels, const PrecoderSet& precoders, int user, int message,
            double noise_std);

// Sum rate with full decodability protection: each message-k term takes the
// minimum over the direct and all cross-user decoding SINRs. The last user
// decodes interference-free.
double sum_rate_cnoma(const ChannelSet& channels, const PrecoderSet& precoders, double noise_std);

// Reduced-objective sum rate: only the direct SINR per message is kept.
// Never smaller than sum_rate_cnoma on the same inputs.
double sum_rate_anoma(const ChannelSet& channels, const PrecoderSet& precoders, double noise_std);

// Feasibility report for the non-convex design constraints: per-receiver
// ordering |h_k^H w_1|^2 >= ... >= |h_k^H w_N|^2 and the total power budget.
// Violations are reported, not thrown.
struct FeasibilityReport {
    struct OrderingSlack {
        int receiver;     // k
        int position;     // adjacent pair (position, position+1)
        double slack;     // |h_k^H w_pos|^2 - |h_k^H w_pos+1|^2
    };
    std::vector<OrderingSlack> ordering;
    double worst_ordering_slack = 0.0; // most negative slack (0 if none negative)
    double power_slack = 0.0;          // P_th - total power
    bool ordering_ok = false;
    bool power_ok = false;

    bool feasible() const { return ordering_ok && power_ok; }
};

FeasibilityReport check_noma_feasible(const ChannelSet& channels, const PrecoderSet& precoders,
                                      const SystemParams& params, double tol);

// Default absolute tolerance on squared magnitudes for feasibility checks.
inline double default_feasibility_tol(const SystemParams& params) {
    return 1e-6 * params.power_budget;
}

} // namespace noma::model

#endif
