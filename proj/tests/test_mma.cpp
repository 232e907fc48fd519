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

#include "mma.hpp"
#include "rng.hpp"

#include <cmath>
#include <complex>

using namespace noma;
using doctest::Approx;

namespace {

model::SystemParams params_at(int antennas, int users, double sigma, double d0, double snr_db) {
    model::SystemParams p;
    p.antennas = antennas;
    p.users = users;
    p.path_loss_exponent = 2.0;
    p.max_distance = d0;
    p.noise_std = sigma;
    p.power_budget = sigma * sigma * std::pow(10.0, snr_db / 10.0);
    return p;
}

model::ChannelSet channels_for(const model::SystemParams& p, std::uint64_t seed) {
    return model::sample_channels(p, model::user_distances(p.users, p.max_distance), seed);
}

} // namespace

TEST_CASE("quadratic minorant: dominance, touching and gradient match") {
    using mma::minorant_quadratic;
    SUBCASE("touches the function at the expansion point") {
        const std::complex<double> t{1.0, 0.0};
        CHECK(minorant_quadratic(t, t) == Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("worked example") {
        CHECK(minorant_quadratic({2.0, 0.0}, {1.0, 1.0}) == Approx(2.0).epsilon(1e-15));
        CHECK(minorant_quadratic({2.0, 0.0}, {1.0, 1.0}) <= std::norm(std::complex<double>(2.0, 0.0)));
    }
    SUBCASE("random points") {
        Rng rng(11);
        const double fd_step = 1e-5;
        for (int i = 0; i < 10000; ++i) {
            const std::complex<double> theta{4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0};
            const std::complex<double> theta_t{4.0 * rng.uniform() - 2.0,
                                               4.0 * rng.uniform() - 2.0};
            const double g = minorant_quadratic(theta, theta_t);
            CHECK(g <= std::norm(theta) + 1e-12);
            CHECK(minorant_quadratic(theta_t, theta_t) == Approx(std::norm(theta_t)).epsilon(1e-13));
            // central finite differences of both f and g at theta_t agree
            auto g_at = [&](std::complex<double> x) { return minorant_quadratic(x, theta_t); };
            auto f_at = [&](std::complex<double> x) { return std::norm(x); };
            const std::complex<double> dre{fd_step, 0.0}, dim{0.0, fd_step};
            const double gf_re = (f_at(theta_t + dre) - f_at(theta_t - dre)) / (2 * fd_step);
            const double gf_im = (f_at(theta_t + dim) - f_at(theta_t - dim)) / (2 * fd_step);
            const double gg_re = (g_at(theta_t + dre) - g_at(theta_t - dre)) / (2 * fd_step);
            const double gg_im = (g_at(theta_t + dim) - g_at(theta_t - dim)) / (2 * fd_step);
            CHECK(std::abs(gf_re - gg_re) < 1e-6);
            CHECK(std::abs(gf_im - gg_im) < 1e-6);
        }
    }
}

TEST_CASE("bilinear convex upper bound") {
    using mma::bilinear_convex_upper;
    SUBCASE("touches at the expansion point") {
        CHECK(bilinear_convex_upper(1.0, 1.0, 1.0, 1.0) == Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("worked example") {
        CHECK(bilinear_convex_upper(2.0, 1.0, 1.0, 1.0) == Approx(2.25).epsilon(1e-15));
    }
    SUBCASE("always an over-estimate; tight exactly on the a-b diagonal") {
        Rng rng(12);
        for (int i = 0; i < 10000; ++i) {
            const double a = 5.0 * rng.uniform();
            const double b = 5.0 * rng.uniform();
            const double at = 5.0 * rng.uniform();
            const double bt = 5.0 * rng.uniform();
            const double upper = bilinear_convex_upper(a, b, at, bt);
            CHECK(upper >= a * b - 1e-10);
            // the gap is exactly 0.25 ((a-b) - (at-bt))^2
            const double gap = upper - a * b;
            const double diff = (a - b) - (at - bt);
            CHECK(gap == Approx(0.25 * diff * diff).epsilon(1e-9).scale(1.0));
        }
    }
    SUBCASE("negative expansion points are rejected") {
        CHECK_THROWS_AS(bilinear_convex_upper(1.0, 1.0, -0.1, 1.0), std::invalid_argument);
    }
}

TEST_CASE("init_state produces a tight feasible bundle") {
    const auto p = params_at(3, 3, 2.0, 50.0, 20.0);
    const auto ch = channels_for(p, 0);
    const auto st = mma::init_state(ch, p, 0);

    SUBCASE("feasible at tight tolerance") {
        const auto rep = model::check_noma_feasible(ch, st.precoders, p, 1e-9);
        CHECK(rep.feasible());
    }
    SUBCASE("powers sum exactly to the budget") {
        CHECK(st.precoders.total_power() == Approx(p.power_budget).epsilon(1e-12));
    }
    SUBCASE("r sits at one plus the protected SINR levels") {
        for (int k = 0; k < 3; ++k) {
            double level;
            if (k < 2) {
                level = model::sinr(ch, st.precoders, k, k, p.noise_std);
                for (int j = k + 1; j < 3; ++j)
                    level = std::min(level, model::sinr(ch, st.precoders, j, k, p.noise_std));
            } else {
                level = model::sinr(ch, st.precoders, 2, 2, p.noise_std);
            }
            CHECK(st.r[k] - 1.0 == Approx(level).epsilon(1e-12));
        }
    }
    SUBCASE("linearization points equal the actual inner products") {
        for (int k = 0; k < 2; ++k) {
            const auto ip = std::complex<double>(ch.h[k].dot(st.precoders.w[k]));
            CHECK(std::abs(st.theta_kk[k] - ip) < 1e-14);
        }
        for (int k = 0; k < 3; ++k)
            for (int m = 0; m < 2; ++m)
                CHECK(std::abs(st.phi_at(k, m) -
                               std::complex<double>(ch.h[k].dot(st.precoders.w[m]))) < 1e-14);
    }
}

TEST_CASE("subproblem block counts match the closed-form totals") {
    for (int n = 1; n <= 6; ++n) {
        const auto p = params_at(4, n, 1.0, 50.0, 15.0);
        const auto ch = channels_for(p, 17);
        const auto st = mma::init_state(ch, p, 18);
        const auto spc = mma::build_subproblem(st, ch, p, mma::Variant::CNoma);
        const auto spa = mma::build_subproblem(st, ch, p, mma::Variant::ANoma);
        const double c = spc.geomean_blocks;
        CHECK(spc.geomean_blocks == spa.geomean_blocks);
        CHECK(spc.total_blocks ==
              static_cast<int>(0.5 * n * n * n + 0.5 * n * n + 2 * n + c));
        CHECK(spa.total_blocks ==
              static_cast<int>(0.5 * n * n * n - 0.5 * n * n + 3 * n + c));
        CHECK(spc.total_blocks == static_cast<int>(spc.program.blocks.size()));
        CHECK(spa.total_blocks == static_cast<int>(spa.program.blocks.size()));
    }
}

TEST_CASE("single-user subproblem is variant-independent") {
    const auto p = params_at(3, 1, 1.0, 50.0, 10.0);
    const auto ch = channels_for(p, 5);
    const auto st = mma::init_state(ch, p, 6);
    const auto spc = mma::build_subproblem(st, ch, p, mma::Variant::CNoma);
    const auto spa = mma::build_subproblem(st, ch, p, mma::Variant::ANoma);
    CHECK(spc.program.dump() == spa.program.dump());
}

TEST_CASE("build_subproblem rejects inconsistent dimensions") {
    const auto p = params_at(3, 3, 1.0, 50.0, 10.0);
    const auto ch = channels_for(p, 5);
    auto st = mma::init_state(ch, p, 6);
    auto wrong = params_at(3, 4, 1.0, 50.0, 10.0);
    CHECK_THROWS_AS(mma::build_subproblem(st, ch, wrong, mma::Variant::CNoma),
                    std::invalid_argument);
}

TEST_CASE("subproblem solutions satisfy the original non-convex constraints") {
    // conservativeness: the convexified feasible set is inside the true one
    const auto p = params_at(3, 3, 2.0, 50.0, 20.0);
    const auto ch = channels_for(p, 21);
    const auto st = mma::init_state(ch, p, 22);
    const auto sp = mma::build_subproblem(st, ch, p, mma::Variant::CNoma);
    const auto sol = conic::solve(sp.program);
    REQUIRE(sol.status == conic::SolveStatus::Optimal);

    model::PrecoderSet pc;
    pc.w.resize(3);
    for (int i = 0; i < 3; ++i) {
        model::cvec w(3);
        for (int a = 0; a < 3; ++a)
            w(a) = std::complex<double>(sol.x(sp.layout.w_re(i, a)), sol.x(sp.layout.w_im(i, a)));
        pc.w[i] = w;
    }
    const double s2 = p.noise_std * p.noise_std;
    const double tol = 1e-6 * (1.0 + p.power_budget);

    // ordering and power
    const auto rep = model::check_noma_feasible(ch, pc, p, tol);
    CHECK(rep.feasible());

    auto gain = [&](int rx, int msg) { return std::norm(ch.h[rx].dot(pc.w[msg])); };
    auto tail = [&](int rx, int msg) {
        double acc = s2;
        for (int m = msg + 1; m < 3; ++m)
            acc += gain(rx, m);
        return acc;
    };
    for (int k = 0; k < 2; ++k) {
        const double wbar = sol.x(sp.layout.wbar_base + k);
        const double rk = sol.x(sp.layout.r_base + k);
        CHECK(tail(k, k) <= wbar + tol);              // interference bound holds
        CHECK(wbar * rk - wbar <= gain(k, k) + tol);  // original bilinear inequality
        for (int j = k + 1; j < 3; ++j) {
            const double v = sol.x(sp.layout.v_base + mma::MmaState::pair_index(k, j, 3));
            CHECK(tail(j, k) <= v + tol);
            CHECK(rk * v - v <= gain(j, k) + tol);
        }
        // and therefore r_k - 1 cannot exceed the true protected SINR
        double level = model::sinr(ch, pc, k, k, p.noise_std);
        for (int j = k + 1; j < 3; ++j)
            level = std::min(level, model::sinr(ch, pc, j, k, p.noise_std));
        CHECK(rk - 1.0 <= level + 1e-6 * (1.0 + level));
    }
    const double rn = sol.x(sp.layout.r_base + 2);
    CHECK(s2 * (rn - 1.0) <= gain(2, 2) + tol);
}

TEST_CASE("one step ascends and stays feasible") {
    const auto p = params_at(3, 3, 2.0, 50.0, 20.0);
    const auto ch = channels_for(p, 31);
    const auto st = mma::init_state(ch, p, 32);
    const double before = model::sum_rate_cnoma(ch, st.precoders, p.noise_std);

    mma::MmaConfig cfg;
    const auto sr = mma::step(st, ch, p, cfg);
    REQUIRE(sr.record.accepted);
    CHECK(sr.record.sum_rate >= before - 1e-6);
    CHECK(model::sum_rate_cnoma(ch, sr.state.precoders, p.noise_std) >= before - 1e-6);
    const auto rep = model::check_noma_feasible(ch, sr.state.precoders, p, 1e-6);
    CHECK(rep.feasible());
}

TEST_CASE("objective trace is nondecreasing across 30 steps") {
    const auto p = params_at(3, 3, 2.0, 50.0, 20.0);
    const auto ch = channels_for(p, 1);
    mma::MmaConfig cfg;
    auto st = mma::init_state(ch, p, 1);
    double prev = -1.0;
    int accepted = 0;
    for (int it = 0; it < 30; ++it) {
        const auto sr = mma::step(st, ch, p, cfg);
        if (!sr.record.accepted)
            break;
        ++accepted;
        CHECK(sr.record.objective_rate >= prev - 1e-6);
        prev = sr.record.objective_rate;
        st = sr.state;
        const auto rep =
            model::check_noma_feasible(ch, st.precoders, p, model::default_feasibility_tol(p));
        CHECK(rep.feasible());
    }
    CHECK(accepted >= 10);
}

TEST_CASE("single user converges to full-power matched beamforming") {
    const auto p = params_at(4, 1, 1.0, 50.0, 15.0);
    const auto ch = channels_for(p, 8);
    mma::MmaConfig cfg;
    const auto res = mma::run(ch, p, cfg, 9);
    CHECK(res.trace.converged);
    CHECK(res.trace.iterations.size() <= 2);
    const double optimal =
        std::log2(1.0 + p.power_budget * ch.h[0].squaredNorm() / p.noise_power());
    CHECK(res.trace.best_sum_rate == Approx(optimal).epsilon(1e-4));
}

TEST_CASE("complete and reduced variants agree below the crossover power") {
    const auto p = params_at(3, 3, 2.0, 50.0, 20.0);
    const auto ch = channels_for(p, 77);
    mma::MmaConfig cc;
    cc.variant = mma::Variant::CNoma;
    mma::MmaConfig ca;
    ca.variant = mma::Variant::ANoma;
    const auto rc = mma::run(ch, p, cc, 78);
    const auto ra = mma::run(ch, p, ca, 78);
    REQUIRE(rc.trace.converged);
    REQUIRE(ra.trace.converged);
    CHECK(std::abs(rc.trace.best_sum_rate - ra.trace.best_sum_rate) <=
          0.01 * rc.trace.best_sum_rate);
}

TEST_CASE("reduced objective dominates the complete one on identical precoders") {
    const auto p = params_at(3, 3, 2.0, 50.0, 25.0);
    const auto ch = channels_for(p, 55);
    mma::MmaConfig cfg;
    const auto res = mma::run(ch, p, cfg, 56);
    CHECK(model::sum_rate_anoma(ch, res.precoders, p.noise_std) >=
          model::sum_rate_cnoma(ch, res.precoders, p.noise_std) - 1e-12);
}

TEST_CASE("converged subproblems are fixed points of the linearization map") {
    const auto p = params_at(2, 2, 1.0, 10.0, 10.0);
    const auto ch = channels_for(p, 61);
    mma::MmaConfig cfg;
    cfg.convergence_delta = 1e-7;
    cfg.max_iterations = 300;
    const auto res = mma::run(ch, p, cfg, 62);
    REQUIRE(res.trace.converged);

    // rebuild the state at the converged precoders and solve once more:
    // the optimizer must reproduce its own linearization point
    auto st = mma::init_state(ch, p, 62);
    // drive the state to the converged iterate by re-running the loop
    for (int it = 0; it < cfg.max_iterations; ++it) {
        const auto sr = mma::step(st, ch, p, cfg);
        if (!sr.record.accepted)
            break;
        const double delta = std::abs(sr.record.sum_rate -
                                      model::sum_rate_cnoma(ch, st.precoders, p.noise_std));
        st = sr.state;
        if (delta <= cfg.convergence_delta)
            break;
    }
    const auto sp = mma::build_subproblem(st, ch, p, mma::Variant::CNoma);
    const auto sol = conic::solve(sp.program, cfg.solver);
    REQUIRE(sol.status == conic::SolveStatus::Optimal);
    for (int k = 0; k < 2; ++k) {
        const double rk = sol.x(sp.layout.r_base + k);
        CHECK(std::abs(rk - st.r[k]) <= 1e-4 * (1.0 + std::abs(st.r[k])));
    }
    for (int i = 0; i < 2; ++i) {
        for (int a = 0; a < 2; ++a) {
            const std::complex<double> w(sol.x(sp.layout.w_re(i, a)),
                                         sol.x(sp.layout.w_im(i, a)));
            const std::complex<double> wt = st.precoders.w[i](a);
            CHECK(std::abs(w - wt) <= 1e-4 * (1.0 + std::abs(wt)));
        }
    }
}
