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

#include "model.hpp"

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace noma::model {

void SystemParams::validate() const {
    if (antennas < 1)
        throw std::invalid_argument("antennas must be >= 1");
    if (users < 1)
        throw std::invalid_argument("users must be >= 1");
    if (path_loss_exponent < 0.0)
        throw std::invalid_argument("path_loss_exponent must be >= 0");
    if (max_distance < 1.0)
        throw std::invalid_argument("max_distance must be >= 1");
    if (!(noise_std > 0.0))
        throw std::invalid_argument("noise_std must be > 0");
    if (!(power_budget > 0.0))
        throw std::invalid_argument("power_budget must be > 0");
}

double PrecoderSet::total_power() const {
    double p = 0.0;
    for (const auto& wi : w)
        p += wi.squaredNorm();
    return p;
}

std::vector<double> make_distances(int users, double max_distance) {
    if (users < 1)
        throw std::invalid_argument("make_distances: users must be >= 1");
    if (max_distance < 1.0)
        throw std::invalid_argument("make_distances: max_distance must be >= 1");
    std::vector<double> d(static_cast<std::size_t>(users));
    if (users == 1) {
        d[0] = 1.0;
        return d;
    }
    const double step = (max_distance - 1.0) / static_cast<double>(users - 1);
    for (int i = 0; i < users; ++i)
        d[static_cast<std::size_t>(i)] = 1.0 + step * static_cast<double>(i);
    d.back() = max_distance; // exact endpoint regardless of rounding
    return d;
}

std::vector<double> user_distances(int users, double max_distance) {
    std::vector<double> d = make_distances(users, max_distance);
    std::reverse(d.begin(), d.end());
    return d;
}

ChannelSet sample_channels(const SystemParams& params, const std::vector<double>& distances,
                           std::uint64_t seed) {
    params.validate();
    if (static_cast<int>(distances.size()) != params.users)
        throw std::invalid_argument("sample_channels: distances size must equal user count");
    Rng rng(seed);
    ChannelSet cs;
    cs.distance = distances;
    cs.h.resize(distances.size());
    for (std::size_t i = 0; i < distances.size(); ++i) {
        if (distances[i] < 1.0)
            throw std::invalid_argument("sample_channels: distances must be >= 1");
        const double scale = std::sqrt(std::pow(distances[i], -params.path_loss_exponent));
        cvec hi(params.antennas);
        for (int t = 0; t < params.antennas; ++t)
            hi(t) = scale * rng.cgaussian();
        cs.h[i] = std::move(hi);
    }
    return cs;
}

namespace {

double interference_plus_noise(const ChannelSet& channels, const PrecoderSet& precoders, int user,
                               int message, double noise_std) {
    double acc = noise_std * noise_std;
    const int n = channels.users();
    for (int m = message + 1; m < n; ++m)
        acc += std::norm(channels.h[static_cast<std::size_t>(user)].dot(
            precoders.w[static_cast<std::size_t>(m)]));
    return acc;
}

} // namespace

double sinr(const ChannelSet& channels, const PrecoderSet& precoders, int user, int message,
            double noise_std) {
    const int n = channels.users();
    if (user < 0 || user >= n || message < 0 || message >= n)
        throw std::out_of_range("sinr: user/message index out of range");
    if (precoders.users() != n)
        throw std::invalid_argument("sinr: precoder count must equal user count");
    // Eigen's dot conjugates the left operand, so h.dot(w) = h^H w
    const double signal = std::norm(channels.h[static_cast<std::size_t>(user)].dot(
        precoders.w[static_cast<std::size_t>(message)]));
    return signal / interference_plus_noise(channels, precoders, user, message, noise_std);
}

double sum_rate_cnoma(const ChannelSet& channels, const PrecoderSet& precoders, double noise_std) {
    const int n = channels.users();
    double rate = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
        double worst = std::numeric_limits<double>::infinity();
        for (int j = k; j < n; ++j)
            worst = std::min(worst, sinr(channels, precoders, j, k, noise_std));
        rate += std::log2(1.0 + worst);
    }
    rate += std::log2(1.0 + sinr(channels, precoders, n - 1, n - 1, noise_std));
    return rate;
}

double sum_rate_anoma(const ChannelSet& channels, const PrecoderSet& precoders, double noise_std) {
    const int n = channels.users();
    double rate = 0.0;
    for (int k = 0; k + 1 < n; ++k)
        rate += std::log2(1.0 + sinr(channels, precoders, k, k, noise_std));
    rate += std::log2(1.0 + sinr(channels, precoders, n - 1, n - 1, noise_std));
    return rate;
}

FeasibilityReport check_noma_feasible(const ChannelSet& channels, const PrecoderSet& precoders,
                                      const SystemParams& params, double tol) {
    if (tol < 0.0)
        throw std::invalid_argument("check_noma_feasible: tol must be >= 0");
    const int n = channels.users();
    FeasibilityReport rep;
    rep.ordering_ok = true;
    for (int k = 0; k < n; ++k) {
        std::vector<double> gains(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            gains[static_cast<std::size_t>(j)] = std::norm(
                channels.h[static_cast<std::size_t>(k)].dot(precoders.w[static_cast<std::size_t>(j)]));
        for (int j = 0; j + 1 < n; ++j) {
            const double slack =
                gains[static_cast<std::size_t>(j)] - gains[static_cast<std::size_t>(j + 1)];
            rep.ordering.push_back({k, j, slack});
            rep.worst_ordering_slack = std::min(rep.worst_ordering_slack, slack);
            if (slack < -tol)
                rep.ordering_ok = false;
        }
    }
    rep.power_slack = params.power_budget - precoders.total_power();
    rep.power_ok = rep.power_slack >= -tol;
    return rep;
}

} // namespace noma::model
