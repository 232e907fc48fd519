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

#include "analysis.hpp"

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace noma::analysis {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209;

// E1(z) continued fraction (modified Lentz), without the e^-z factor:
// e^z E1(z) = 1/(z+1-) 1^2/(z+3-) 2^2/(z+5-) ...
double expscaled_e1_cf(double z) {
    const double tiny = 1e-300;
    double b = z + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 400; ++i) {
        const double a = -static_cast<double>(i) * static_cast<double>(i);
        b += 2.0;
        d = a * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + a / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16)
            break;
    }
    return h;
}

// Ei(-z) via the power series, z in (0, ~6]
double ei_series_negative(double z) {
    // Ei(-z) = gamma + ln z + sum_k (-z)^k / (k k!)
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k <= 120; ++k) {
        term *= -z / static_cast<double>(k);
        const double add = term / static_cast<double>(k);
        sum += add;
        if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum)))
            break;
    }
    return kEulerGamma + std::log(z) + sum;
}

// e^z Ei(-z) for z > 0, stable for large z
double expscaled_ei_neg(double z) {
    if (z <= 5.0)
        return std::exp(z) * ei_series_negative(z);
    return -expscaled_e1_cf(z);
}

// e^lambda psi(lambda, m); keeping the exponential factored out avoids
// overflow in the probability expressions, which multiply by e^+lambda
double expscaled_psi(double lambda, int m) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("psi: lambda must be > 0");
    if (m < 2)
        throw std::invalid_argument("psi: m must be >= 2");
    double factorial = 1.0;
    for (int q = 2; q < m; ++q)
        factorial *= static_cast<double>(q);
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    double value = sign * std::pow(lambda, m - 1) * expscaled_ei_neg(lambda) / factorial;
    // sum_{l=0}^{m-2} (-1)^l lambda^l / ((m-1)(m-2)...(m-1-l))
    double term = 1.0 / static_cast<double>(m - 1);
    value += term;
    for (int l = 1; l <= m - 2; ++l) {
        term *= -lambda / static_cast<double>(m - 1 - l);
        value += term;
    }
    return value;
}

} // namespace

double exp_integral_ei(double x) {
    if (!(x < 0.0))
        throw std::invalid_argument("exp_integral_ei: only negative arguments are supported");
    const double z = -x;
    if (z <= 5.0)
        return ei_series_negative(z);
    return -std::exp(-z) * expscaled_e1_cf(z);
}

double psi(double lambda, int m) { return std::exp(-lambda) * expscaled_psi(lambda, m); }

namespace {

void check_prob_params(const ProbParams& p) {
    if (!(p.lambda_i > 0.0) || !(p.lambda_j > 0.0))
        throw std::invalid_argument("prob_decoding_order: lambdas must be > 0");
    if (p.message_index < 1 || p.message_index > p.users - 1)
        throw std::invalid_argument("prob_decoding_order: need 1 <= k <= N-1");
    if (!(p.noise_power > 0.0))
        throw std::invalid_argument("prob_decoding_order: noise power must be > 0");
}

ProbResult finish_prob(double raw) {
    return {raw, std::clamp(raw, 0.0, 1.0)};
}

} // namespace

ProbResult prob_decoding_order(const ProbParams& p) {
    check_prob_params(p);
    const int n = p.users - p.message_index; // N - k
    const double arg = (p.lambda_i + p.lambda_j) * p.noise_power;
    const double raw = 1.0 - p.lambda_i * p.noise_power * expscaled_psi(arg, 2 * n) -
                       static_cast<double>(n) * expscaled_psi(arg, 2 * n + 1);
    return finish_prob(raw);
}

ProbResult prob_decoding_order_approx(const ProbParams& p) {
    check_prob_params(p);
    const int n = p.users - p.message_index;
    const double arg = p.lambda_j * p.noise_power;
    const double raw = 1.0 - p.lambda_i * p.noise_power * expscaled_psi(arg, 2 * n) -
                       static_cast<double>(n) * expscaled_psi(arg, 2 * n + 1);
    return finish_prob(raw);
}

McEstimate mc_prob_decoding_order(const ProbParams& p, int antennas, long trials,
                                  std::uint64_t seed) {
    check_prob_params(p);
    if (trials < 1)
        throw std::invalid_argument("mc_prob_decoding_order: trials must be >= 1");
    if (antennas < p.users)
        throw std::invalid_argument("mc_prob_decoding_order: needs N <= T for a unitary precoder");

    Rng rng(seed);
    const double scale_i = std::sqrt(1.0 / p.lambda_i);
    const double scale_j = std::sqrt(1.0 / p.lambda_j);
    const int n = p.users;
    const int k0 = p.message_index - 1;

    Eigen::MatrixXcd g(antennas, n);
    Eigen::VectorXcd hi(antennas), hj(antennas);
    long hits = 0;
    for (long trial = 0; trial < trials; ++trial) {
        for (int a = 0; a < antennas; ++a) {
            hi(a) = scale_i * rng.cgaussian();
            hj(a) = scale_j * rng.cgaussian();
        }
        for (int c = 0; c < n; ++c)
            for (int a = 0; a < antennas; ++a)
                g(a, c) = rng.cgaussian();
        // Haar unitary columns: QR with the R diagonal phases fixed
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
        Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(antennas, n);
        const Eigen::MatrixXcd r = qr.matrixQR().topRows(n);
        for (int c = 0; c < n; ++c) {
            const std::complex<double> rcc = r(c, c);
            const double mag = std::abs(rcc);
            if (mag > 0.0)
                q.col(c) *= std::conj(rcc / mag);
        }

        auto sinr_of = [&](const Eigen::VectorXcd& h) {
            const double x = std::norm(h.dot(q.col(k0)));
            double y = p.noise_power;
            for (int m = k0 + 1; m < n; ++m)
                y += std::norm(h.dot(q.col(m)));
            return x / y;
        };
        if (sinr_of(hi) > sinr_of(hj))
            ++hits;
    }
    const double est = static_cast<double>(hits) / static_cast<double>(trials);
    const double se = std::sqrt(std::max(est * (1.0 - est), 1e-300) / static_cast<double>(trials));
    return {est, se};
}

model::ChannelSet scaled_channel_family(const model::cvec& base, std::span<const double> magnitudes,
                                        std::span<const double> phases) {
    if (base.size() == 0)
        throw std::invalid_argument("scaled_channel_family: empty base channel");
    if (!phases.empty() && phases.size() != magnitudes.size())
        throw std::invalid_argument("scaled_channel_family: phases must match magnitudes");
    model::ChannelSet cs;
    cs.h.resize(magnitudes.size() + 1);
    cs.distance.assign(magnitudes.size() + 1, 1.0);
    cs.h[0] = base;
    for (std::size_t k = 0; k < magnitudes.size(); ++k) {
        if (!(magnitudes[k] > 1.0))
            throw std::invalid_argument("scaled_channel_family: magnitudes must exceed 1");
        const double phase = phases.empty() ? 0.0 : phases[k];
        const std::complex<double> c = std::polar(magnitudes[k], phase);
        cs.h[k + 1] = c * cs.h[k];
    }
    return cs;
}

double sinr_per_user_noise(const model::ChannelSet& channels, const model::PrecoderSet& precoders,
                           int user, int message, double user_noise_std) {
    const int n = channels.users();
    if (user < 0 || user >= n || message < 0 || message >= n)
        throw std::out_of_range("sinr_per_user_noise: index out of range");
    const auto& h = channels.h[static_cast<std::size_t>(user)];
    const double signal = std::norm(h.dot(precoders.w[static_cast<std::size_t>(message)]));
    double denom = user_noise_std * user_noise_std;
    for (int m = message + 1; m < n; ++m)
        denom += std::norm(h.dot(precoders.w[static_cast<std::size_t>(m)]));
    return signal / denom;
}

ComplexityEstimate complexity_estimate(int users, int antennas, int geomean_blocks,
                                       mma::Variant variant) {
    if (users < 1 || antennas < 1 || geomean_blocks < 0)
        throw std::invalid_argument("complexity_estimate: bad arguments");
    const double n = users;
    const double t = antennas;
    const double c = geomean_blocks;
    ComplexityEstimate e;
    if (variant == mma::Variant::CNoma) {
        e.constraint_count = std::llround(0.5 * n * n * n + 0.5 * n * n + 2.0 * n + c);
        e.variable_count = std::llround(3.5 * n * n + 1.5 * n + 2.0 * n * t + c - 1.0);
        e.soc_dimension_total = static_cast<long>(std::ceil(
            1.833 * n * n * n + 3.0 * n * n + 8.0 * n + n * t + 3.0 * c - 5.83333));
    } else {
        e.constraint_count = std::llround(0.5 * n * n * n - 0.5 * n * n + 3.0 * n + c);
        e.variable_count = std::llround(2.0 * n * n + 3.0 * n + 2.0 * n * t + c - 1.0);
        e.soc_dimension_total = std::llround(
            1.5 * n * n * n - n * n + 10.5 * n + n * t + 3.0 * c - 4.0);
    }
    e.iteration_bound =
        static_cast<long>(std::ceil(std::sqrt(static_cast<double>(e.constraint_count))));
    return e;
}

double flop_proxy(const ComplexityEstimate& estimate) {
    const double v = static_cast<double>(estimate.variable_count);
    return v * v * static_cast<double>(estimate.soc_dimension_total);
}

} // namespace noma::analysis
