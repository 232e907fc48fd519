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

#include "baseline.hpp"

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace noma::baseline {

std::vector<double> water_fill(std::span<const double> gains, double budget, double noise_power) {
    if (gains.empty())
        throw std::invalid_argument("water_fill: no gains");
    if (!(budget > 0.0) || !(noise_power > 0.0))
        throw std::invalid_argument("water_fill: budget and noise power must be > 0");
    const std::size_t n = gains.size();
    std::vector<double> inv(n); // noise_power / gain, the per-channel floor
    for (std::size_t i = 0; i < n; ++i) {
        if (!(gains[i] > 0.0))
            throw std::invalid_argument("water_fill: gains must be positive");
        inv[i] = noise_power / gains[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return inv[a] < inv[b];
    });

    // Raise the water level over the sorted floors until the budget is spent.
    double level = 0.0;
    std::size_t active = 0;
    double floor_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        floor_sum += inv[order[k]];
        const double candidate = (budget + floor_sum) / static_cast<double>(k + 1);
        if (k + 1 < n && candidate > inv[order[k + 1]])
            continue;
        level = candidate;
        active = k + 1;
        break;
    }
    std::vector<double> powers(n, 0.0);
    double spent = 0.0;
    for (std::size_t k = 0; k < active; ++k) {
        powers[order[k]] = level - inv[order[k]];
        spent += powers[order[k]];
    }
    // absorb the rounding remainder into the best channel
    powers[order[0]] += budget - spent;
    return powers;
}

ZfResult zf_precoders(const model::ChannelSet& channels, double power_budget, double noise_std) {
    const int n = channels.users();
    const int t = channels.antennas();
    if (n > t)
        throw std::runtime_error("zf_precoders: needs at least as many antennas as users");

    // Work with unit-norm rows; zero-forcing directions are invariant to row
    // scaling and the normalized gram is far better conditioned under large
    // distance spreads.
    Eigen::MatrixXcd H(n, t); // rows h_i^H / ||h_i||
    std::vector<double> row_norm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        row_norm[static_cast<std::size_t>(i)] = channels.h[static_cast<std::size_t>(i)].norm();
        if (!(row_norm[static_cast<std::size_t>(i)] > 0.0))
            throw std::runtime_error("zf_precoders: rank-deficient channel matrix");
        H.row(i) =
            channels.h[static_cast<std::size_t>(i)].adjoint() / row_norm[static_cast<std::size_t>(i)];
    }

    // P = H^H (H H^H)^-1, so that H P = I
    const Eigen::MatrixXcd gram = H * H.adjoint();
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("zf_precoders: rank-deficient channel matrix");
    const Eigen::MatrixXcd pinv = H.adjoint() * ldlt.solve(Eigen::MatrixXcd::Identity(n, n));
    const double residual = (H * pinv - Eigen::MatrixXcd::Identity(n, n)).norm();
    if (!std::isfinite(residual) || residual > 1e-8 * static_cast<double>(n))
        throw std::runtime_error("zf_precoders: rank-deficient channel matrix");

    std::vector<double> gains(static_cast<std::size_t>(n));
    std::vector<model::cvec> dirs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const model::cvec col = pinv.col(i);
        const double norm = col.norm();
        if (!(norm > 0.0))
            throw std::runtime_error("zf_precoders: rank-deficient channel matrix");
        dirs[static_cast<std::size_t>(i)] = col / norm;
        // normalized-row identity h_i^H dir_i = ||h_i|| / ||col||
        const double amp = row_norm[static_cast<std::size_t>(i)] / norm;
        gains[static_cast<std::size_t>(i)] = amp * amp;
    }

    const double noise_power = noise_std * noise_std;
    const std::vector<double> powers = water_fill(gains, power_budget, noise_power);

    ZfResult res;
    res.precoders.w.resize(static_cast<std::size_t>(n));
    res.per_user_rate.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        res.precoders.w[static_cast<std::size_t>(i)] =
            std::sqrt(powers[static_cast<std::size_t>(i)]) * dirs[static_cast<std::size_t>(i)];
        res.per_user_rate[static_cast<std::size_t>(i)] = std::log2(
            1.0 + powers[static_cast<std::size_t>(i)] * gains[static_cast<std::size_t>(i)] /
                      noise_power);
        res.sum_rate += res.per_user_rate[static_cast<std::size_t>(i)];
    }
    return res;
}

std::vector<int> select_users(const model::ChannelSet& channels, int count, std::uint64_t seed) {
    const int n = channels.users();
    if (count < 0 || count > n)
        throw std::invalid_argument("select_users: count out of range");
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    Rng rng(seed);
    // partial Fisher-Yates
    for (int i = 0; i < count; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace noma::baseline
