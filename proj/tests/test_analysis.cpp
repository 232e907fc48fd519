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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "analysis.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

using namespace noma;
using doctest::Approx;

namespace {

// adaptive Simpson quadrature, the independent oracle for Ei and psi
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fb,
               double fm, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, fm, flm, eps / 2.0, depth - 1) +
           simpson(f, m, b, fm, fb, frm, eps / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double eps) {
    const double m = 0.5 * (a + b);
    return simpson(f, a, b, f(a), f(b), f(m), eps, 48);
}

// Ei(x) for x < 0 via quadrature: Ei(-t) = -e^-t Int_0^inf e^-s / (t + s) ds
double ei_quadrature(double x) {
    const double t = -x;
    const auto f = [t](double s) { return std::exp(-s) / (t + s); };
    return -std::exp(-t) * integrate(f, 0.0, 80.0, 1e-15);
}

// psi(lambda, m) = e^-lambda Int_0^inf e^(-lambda z) (1+z)^-m dz
double psi_quadrature(double lambda, int m) {
    const auto f = [lambda, m](double z) {
        return std::exp(-lambda * z) * std::pow(1.0 + z, -m);
    };
    // split into log-spaced panels so the adaptivity handles slow tails
    double total = 0.0;
    double lo = 0.0;
    const double zmax = std::max(60.0 / lambda, 60.0);
    for (double hi = 1.0; lo < zmax; hi *= 4.0) {
        const double end = std::min(hi, zmax);
        total += integrate(f, lo, end, 1e-15);
        lo = end;
    }
    return std::exp(-lambda) * total;
}

} // namespace

TEST_CASE("exponential integral against quadrature") {
    CHECK(analysis::exp_integral_ei(-1.0) == Approx(-0.219383934).epsilon(0).scale(1.0).epsilon(1e-8));
    CHECK(analysis::exp_integral_ei(-1.0) == Approx(ei_quadrature(-1.0)).epsilon(1e-12));
    CHECK(analysis::exp_integral_ei(-0.1) == Approx(-1.8229240).scale(1.0).epsilon(1e-6));
    CHECK(analysis::exp_integral_ei(-0.1) == Approx(ei_quadrature(-0.1)).epsilon(1e-12));
    // both evaluation branches against the oracle
    for (double x : {-0.01, -0.5, -2.0, -4.9, -5.1, -8.0, -15.0, -30.0})
        CHECK(analysis::exp_integral_ei(x) == Approx(ei_quadrature(x)).epsilon(1e-12));
    // asymptotic sign and decay
    const double tail = analysis::exp_integral_ei(-50.0);
    CHECK(tail < 0.0);
    CHECK(tail > -1e-23);
    CHECK_THROWS_AS(analysis::exp_integral_ei(0.0), std::invalid_argument);
    CHECK_THROWS_AS(analysis::exp_integral_ei(1.0), std::invalid_argument);
}

TEST_CASE("psi closed form against quadrature") {
    CHECK(analysis::psi(1.0, 2) == Approx(0.148495).scale(1.0).epsilon(1e-5));
    CHECK(analysis::psi(2.0, 5) == Approx(psi_quadrature(2.0, 5)).epsilon(1e-10));
    // lambda -> 0+ with m = 2 tends to the plain integral of (1+z)^-2
    CHECK(analysis::psi(1e-8, 2) == Approx(1.0).epsilon(1e-6));
    for (double lambda : {0.01, 0.1, 0.5, 1.0, 3.0, 7.5, 20.0})
        for (int m : {2, 3, 5, 8, 12})
            CHECK(analysis::psi(lambda, m) ==
                  Approx(psi_quadrature(lambda, m)).epsilon(1e-8).scale(1.0));
    CHECK_THROWS_AS(analysis::psi(0.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(analysis::psi(1.0, 1), std::invalid_argument);
}

TEST_CASE("decoding-order probability closed form") {
    SUBCASE("identical rate parameters give one half") {
        for (double lambda : {0.5, 1.0, 3.0}) {
            analysis::ProbParams p;
            p.lambda_i = p.lambda_j = lambda;
            p.users = 4;
            p.message_index = 1;
            p.noise_power = 1.0;
            CHECK(analysis::prob_decoding_order(p).raw == Approx(0.5).epsilon(1e-8));
        }
    }
    SUBCASE("monotone nonincreasing in lambda_i, bounded in [0,1]") {
        analysis::ProbParams p;
        p.users = 4;
        p.message_index = 1;
        for (double s2 : {0.5, 1.0, 2.0}) {
            p.noise_power = s2;
            for (double lj : {0.5, 1.0, 4.0}) {
                p.lambda_j = lj;
                double prev = 2.0;
                for (double li : {0.05, 0.2, 0.8, 2.0, 8.0, 20.0}) {
                    p.lambda_i = li;
                    const auto r = analysis::prob_decoding_order(p);
                    CHECK(r.raw <= prev + 1e-12);
                    CHECK(r.raw >= -1e-9);
                    CHECK(r.raw <= 1.0 + 1e-9);
                    prev = r.raw;
                }
            }
        }
    }
    SUBCASE("stronger own channel raises the probability toward its limit") {
        // Signal and interference of user i share the channel draw, so the
        // lambda_i -> 0 limit is interference-limited rather than one.
        analysis::ProbParams p;
        p.users = 4;
        p.message_index = 1;
        p.noise_power = 1.0;
        p.lambda_j = 1.0;
        const int n = p.users - p.message_index;
        const double limit =
            1.0 - n * std::exp(p.lambda_j) * analysis::psi(p.lambda_j, 2 * n + 1);
        double prev = 0.0;
        for (double li : {1.0, 0.1, 0.01, 1e-3, 1e-5}) {
            p.lambda_i = li;
            const double v = analysis::prob_decoding_order(p).raw;
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
        CHECK(prev == Approx(limit).epsilon(1e-4));
    }
    SUBCASE("a dying competitor pushes the probability to one") {
        analysis::ProbParams p;
        p.users = 4;
        p.message_index = 1;
        p.noise_power = 1.0;
        p.lambda_i = 1.0;
        double prev = 0.0;
        for (double lj : {1.0, 4.0, 16.0, 64.0, 512.0}) {
            p.lambda_j = lj;
            const double v = analysis::prob_decoding_order(p).raw;
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
        CHECK(prev > 0.99);
    }
}

TEST_CASE("large-ratio approximation") {
    analysis::ProbParams p;
    p.users = 4;
    p.message_index = 2;
    p.noise_power = 1.0;
    SUBCASE("vanishing lambda_i removes its term") {
        p.lambda_i = 1e-300;
        p.lambda_j = 2.0;
        const int n = p.users - p.message_index;
        const double expected =
            1.0 - n * std::exp(p.lambda_j) * analysis::psi(p.lambda_j, 2 * n + 1);
        CHECK(analysis::prob_decoding_order_approx(p).raw == Approx(expected).epsilon(1e-12));
    }
    SUBCASE("agrees with the exact form when lambda_j dominates") {
        p.lambda_i = 1e-3;
        p.lambda_j = 1.0;
        const double far = std::abs(analysis::prob_decoding_order_approx(p).raw -
                                    analysis::prob_decoding_order(p).raw);
        CHECK(far < 1e-2);
        p.lambda_i = 1.0;
        const double near = std::abs(analysis::prob_decoding_order_approx(p).raw -
                                     analysis::prob_decoding_order(p).raw);
        CHECK(near > far);
    }
}

TEST_CASE("Monte Carlo bracket of the closed form") {
    analysis::ProbParams p;
    p.users = 4;
    p.message_index = 1;
    p.noise_power = 1.0;
    SUBCASE("symmetric case") {
        p.lambda_i = p.lambda_j = 1.0;
        const auto mc = analysis::mc_prob_decoding_order(p, 6, 20000, 3);
        CHECK(std::abs(mc.estimate - 0.5) <= 3.0 * mc.std_error);
    }
    SUBCASE("one operating point of the distance sweep") {
        p.lambda_i = 1.0;  // d_i = 1
        p.lambda_j = 16.0; // d_j = 4, gamma = 2
        const auto exact = analysis::prob_decoding_order(p);
        const auto mc = analysis::mc_prob_decoding_order(p, 6, 20000, 4);
        CHECK(std::abs(mc.estimate - exact.clamped) <= 3.0 * mc.std_error);
    }
    SUBCASE("vanishing noise leaves identically distributed ratios") {
        // the rate parameters cancel from x/y, so the probability tends to 1/2
        p.lambda_i = 9.0;
        p.lambda_j = 1.0;
        p.noise_power = 1e-6;
        const double analytic = analysis::prob_decoding_order(p).clamped;
        CHECK(analytic == Approx(0.5).epsilon(1e-3));
        const auto mc = analysis::mc_prob_decoding_order(p, 6, 20000, 5);
        CHECK(std::abs(mc.estimate - analytic) <= 3.0 * mc.std_error);
    }
    SUBCASE("needs enough antennas for a unitary precoder") {
        p.noise_power = 1.0;
        CHECK_THROWS_AS(analysis::mc_prob_decoding_order(p, 3, 10, 1), std::invalid_argument);
    }
}

TEST_CASE("empirical SINR distribution matches the derived CDF") {
    // F(z) = 1 - e^(-lambda sigma^2 z) / (1+z)^(N-k)
    const int users = 4, antennas = 6;
    const double lambda = 4.0, s2 = 1.0;
    const int k0 = 0; // message 1
    const long trials = 100000;
    Rng rng(88);
    std::vector<double> samples;
    samples.reserve(trials);
    Eigen::MatrixXcd g(antennas, users);
    Eigen::VectorXcd h(antennas);
    const double scale = std::sqrt(1.0 / lambda);
    for (long t = 0; t < trials; ++t) {
        for (int a = 0; a < antennas; ++a)
            h(a) = scale * rng.cgaussian();
        for (int c = 0; c < users; ++c)
            for (int a = 0; a < antennas; ++a)
                g(a, c) = rng.cgaussian();
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
        Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(antennas, users);
        const double x = std::norm(h.dot(q.col(k0)));
        double y = s2;
        for (int m = k0 + 1; m < users; ++m)
            y += std::norm(h.dot(q.col(m)));
        samples.push_back(x / y);
    }
    std::sort(samples.begin(), samples.end());
    const int nk = users - 1 - k0; // N - k
    double ks = 0.0;
    for (long i = 0; i < trials; ++i) {
        const double z = samples[static_cast<std::size_t>(i)];
        const double cdf = 1.0 - std::exp(-lambda * s2 * z) / std::pow(1.0 + z, nk);
        const double emp_hi = static_cast<double>(i + 1) / trials;
        const double emp_lo = static_cast<double>(i) / trials;
        ks = std::max({ks, std::abs(emp_hi - cdf), std::abs(emp_lo - cdf)});
    }
    const double critical = 1.6276 / std::sqrt(static_cast<double>(trials)); // 1% level
    CHECK(ks < critical);
}

TEST_CASE("scaled channel family") {
    model::cvec base(3);
    base << std::complex<double>(0.6, 0.0), std::complex<double>(0.0, 0.8),
        std::complex<double>(0.0, 0.0);
    SUBCASE("norms multiply") {
        const std::vector<double> mags{2.0, 2.0};
        const auto cs = analysis::scaled_channel_family(base, mags, {});
        CHECK(cs.h[0].norm() == Approx(1.0).epsilon(1e-12));
        CHECK(cs.h[1].norm() == Approx(2.0).epsilon(1e-12));
        CHECK(cs.h[2].norm() == Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("complete and reduced sum rates coincide exactly") {
        const std::vector<double> mags{1.5, 2.0};
        const std::vector<double> phases{0.4, -1.2};
        const auto cs = analysis::scaled_channel_family(base, mags, phases);
        Rng rng(17);
        for (int trial = 0; trial < 100; ++trial) {
            model::PrecoderSet pc;
            for (int i = 0; i < 3; ++i) {
                model::cvec w(3);
                for (int a = 0; a < 3; ++a)
                    w(a) = rng.cgaussian();
                pc.w.push_back(w);
            }
            const double full = model::sum_rate_cnoma(cs, pc, 1.0);
            const double reduced = model::sum_rate_anoma(cs, pc, 1.0);
            CHECK(std::abs(full - reduced) < 1e-12);
        }
    }
    SUBCASE("per-user noise flips dominance exactly at the noise ratio") {
        const double sigma_k = 1.0, sigma_n = 2.5; // threshold |c| = 2.5
        Rng rng(18);
        model::PrecoderSet pc;
        for (int i = 0; i < 2; ++i) {
            model::cvec w(3);
            for (int a = 0; a < 3; ++a)
                w(a) = rng.cgaussian();
            pc.w.push_back(w);
        }
        double flip = 0.0;
        for (double mag = 2.4; mag <= 2.6 + 1e-12; mag += 1e-3) {
            const auto cs = analysis::scaled_channel_family(base, {{mag}}, {});
            const double direct = analysis::sinr_per_user_noise(cs, pc, 0, 0, sigma_k);
            const double cross = analysis::sinr_per_user_noise(cs, pc, 1, 0, sigma_n);
            if (cross >= direct) {
                flip = mag;
                break;
            }
        }
        CHECK(flip == Approx(sigma_n / sigma_k).epsilon(0).scale(1.0).epsilon(2e-3));
    }
    SUBCASE("magnitudes at or below one are rejected") {
        CHECK_THROWS_AS(analysis::scaled_channel_family(base, {{1.0}}, {}),
                        std::invalid_argument);
    }
}

TEST_CASE("complexity estimates") {
    SUBCASE("closed-form counts at N = 3, c = 0") {
        const auto c3 = analysis::complexity_estimate(3, 4, 0, mma::Variant::CNoma);
        CHECK(c3.constraint_count == 24);
        const auto a3 = analysis::complexity_estimate(3, 4, 0, mma::Variant::ANoma);
        CHECK(a3.constraint_count == 18);
        CHECK(c3.iteration_bound == static_cast<long>(std::ceil(std::sqrt(24.0))));
    }
    SUBCASE("complete formulation always costs at least the reduced one") {
        for (int n = 2; n <= 8; ++n) {
            for (int t : {4, 8}) {
                const auto c = analysis::complexity_estimate(n, t, 10, mma::Variant::CNoma);
                const auto a = analysis::complexity_estimate(n, t, 10, mma::Variant::ANoma);
                CHECK(analysis::flop_proxy(c) >= analysis::flop_proxy(a));
                CHECK(c.constraint_count >= a.constraint_count);
            }
        }
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(analysis::complexity_estimate(0, 4, 0, mma::Variant::CNoma),
                        std::invalid_argument);
    }
}
