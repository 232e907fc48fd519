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

#ifndef nomabeam_baseline_H
#define nomabeam_baseline_H

#include "model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace noma::baseline {

struct ZfResult {
    model::PrecoderSet precoders;
    std::vector<double> per_user_rate;
    double sum_rate = 0.0;
};

// Zero-forcing directions from the pseudo-inverse of the stacked channel
// matrix, powers by water-filling on the effective gains. Requires N <= T
// and a full-rank channel matrix; throws std::runtime_error otherwise
// (callers may resample the channel).
ZfResult zf_precoders(const model::ChannelSet& channels, double power_budget, double noise_std);

// Water-filling allocation maximizing sum log2(1 + p_i g_i / noise_power)
// subject to sum p_i = budget. Gains must be positive.
std::vector<double> water_fill(std::span<const double> gains, double budget, double noise_power);

// Uniform random subset of `count` user indices without replacement,
// deterministic per seed, ascending order.
std::vector<int> select_users(const model::ChannelSet& channels, int count, std::uint64_t seed);

} // namespace noma::baseline

#endif
