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
// Minorization-maximization driver. Each iteration assembles one
// second-order cone program whose feasible set inner-approximates the
// original non-convex design set around the current linearization bundle,
// solves it, and re-linearizes around the optimizer. The surrogate objective
// values form a nondecreasing sequence and every iterate stays feasible for
// the original problem.

#include "mma.hpp"

#include "rng.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace noma::mma {

using conic::CLinExpr;
using conic::LinExpr;

const char* to_string(Variant v) { return v == Variant::CNoma ? "cnoma" : "anoma"; }

int MmaState::pair_index(int k, int j, int users) {
    // pairs (k, j), j > k, k-major
    return k * users - k * (k + 1) / 2 + (j - k - 1);
}

double minorant_quadratic(std::complex<double> theta, std::complex<double> theta_t) {
    return 2.0 * (theta_t.real() * theta.real() + theta_t.imag() * theta.imag()) -
           std::norm(theta_t);
}

double bilinear_convex_upper(double a, double b, double a_t, double b_t) {
    if (a_t < 0.0 || b_t < 0.0)
        throw std::invalid_argument("bilinear_convex_upper: expansion point must be nonnegative");
    const double d = a_t - b_t;
    return 0.25 * (a + b) * (a + b) - 0.25 * (d * d + 2.0 * d * (a - a_t - b + b_t));
}

namespace {

double inner_norm2(const model::cvec& h, const model::cvec& w) { return std::norm(h.dot(w)); }

// interference-plus-noise seen at receiver `rx` for message `msg`
double tail_power(const model::ChannelSet& ch, const model::PrecoderSet& pc, int rx, int msg,
                  double sigma) {
    double acc = sigma * sigma;
    for (int m = msg + 1; m < ch.users(); ++m)
        acc += inner_norm2(ch.h[static_cast<std::size_t>(rx)], pc.w[static_cast<std::size_t>(m)]);
    return acc;
}

} // namespace

namespace {

// Bundle with every auxiliary recomputed exactly from the precoders: bounds
// tight, linearization points equal to the actual inner products, r at the
// protected SINR levels of the given variant. Such a bundle is feasible for
// the original problem whenever the precoders satisfy ordering and power.
MmaState tighten_state(const model::ChannelSet& channels, const model::SystemParams& params,
                       model::PrecoderSet precoders, Variant variant) {
    const int n = params.users;
    const double sigma = params.noise_std;
    MmaState st;
    st.users = n;
    st.precoders = std::move(precoders);

    st.wbar.resize(static_cast<std::size_t>(std::max(0, n - 1)));
    for (int k = 0; k + 1 < n; ++k)
        st.wbar[static_cast<std::size_t>(k)] = tail_power(channels, st.precoders, k, k, sigma);

    st.v.resize(static_cast<std::size_t>(n * (n - 1) / 2));
    st.theta_jk.resize(st.v.size());
    for (int k = 0; k + 1 < n; ++k) {
        for (int j = k + 1; j < n; ++j) {
            st.v_at(k, j) = tail_power(channels, st.precoders, j, k, sigma);
            st.theta_jk_at(k, j) = channels.h[static_cast<std::size_t>(j)].dot(
                st.precoders.w[static_cast<std::size_t>(k)]);
        }
    }

    st.theta_kk.resize(static_cast<std::size_t>(std::max(0, n - 1)));
    for (int k = 0; k + 1 < n; ++k)
        st.theta_kk[static_cast<std::size_t>(k)] =
            channels.h[static_cast<std::size_t>(k)].dot(st.precoders.w[static_cast<std::size_t>(k)]);
    st.theta_nn = channels.h[static_cast<std::size_t>(n - 1)].dot(
        st.precoders.w[static_cast<std::size_t>(n - 1)]);

    st.phi.resize(static_cast<std::size_t>(n * (n - 1)));
    for (int k = 0; k < n; ++k)
        for (int m = 0; m + 1 < n; ++m)
            st.phi_at(k, m) = channels.h[static_cast<std::size_t>(k)].dot(
                st.precoders.w[static_cast<std::size_t>(m)]);

    st.r.resize(static_cast<std::size_t>(n));
    for (int k = 0; k + 1 < n; ++k) {
        double level;
        if (variant == Variant::CNoma) {
            level = std::numeric_limits<double>::infinity();
            for (int j = k; j < n; ++j)
                level = std::min(level, model::sinr(channels, st.precoders, j, k, sigma));
        } else {
            level = model::sinr(channels, st.precoders, k, k, sigma);
        }
        st.r[static_cast<std::size_t>(k)] = 1.0 + level;
    }
    st.r[static_cast<std::size_t>(n - 1)] =
        1.0 + std::norm(channels.h[static_cast<std::size_t>(n - 1)].dot(
                  st.precoders.w[static_cast<std::size_t>(n - 1)])) /
                  (sigma * sigma);
    return st;
}

// Restores the gain ordering exactly by shrinking later beams by the
// cumulative worst adjacent gain ratio. Interior-point outputs leave ppm-size
// violations on binding ordering constraints; the rescaling costs a
// comparable ppm of rate and keeps the power budget intact. Violations
// beyond the clamp are left for validation to reject.
void polish_ordering(const model::ChannelSet& channels, model::PrecoderSet& pc) {
    const int n = channels.users();
    if (n < 2)
        return;
    Eigen::MatrixXd gains(n, n); // receiver k, message j
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            gains(k, j) = std::norm(channels.h[static_cast<std::size_t>(k)].dot(
                pc.w[static_cast<std::size_t>(j)]));
    double factor = 1.0;
    for (int j = 0; j + 1 < n; ++j) {
        double ratio = 1.0;
        for (int k = 0; k < n; ++k) {
            const double hi = gains(k, j);
            const double lo = gains(k, j + 1);
            if (lo > 0.0)
                ratio = std::min(ratio, hi / lo);
        }
        factor *= std::sqrt(std::clamp(ratio, 1.0 - 1e-3, 1.0));
        if (factor < 1.0)
            pc.w[static_cast<std::size_t>(j + 1)] *= factor;
    }
}

double geomean_of(const std::vector<double>& r) {
    double acc = 0.0;
    for (double rk : r)
        acc += std::log(std::max(rk, 1e-300));
    return std::exp(acc / static_cast<double>(r.size()));
}

} // namespace

MmaState init_state(const model::ChannelSet& channels, const model::SystemParams& params,
                    std::uint64_t seed) {
    params.validate();
    const int n = params.users;
    const int t = params.antennas;
    Rng rng(seed);

    // Common random unit direction, geometrically descending powers summing
    // exactly to the budget. Ordering |h_k^H w_1|^2 >= ... >= |h_k^H w_N|^2
    // then holds for every channel draw.
    model::cvec direction(t);
    for (int a = 0; a < t; ++a)
        direction(a) = rng.cgaussian();
    direction /= direction.norm();

    constexpr double rho = 0.5;
    std::vector<double> power(static_cast<std::size_t>(n));
    const double norm = (1.0 - rho) / (1.0 - std::pow(rho, n));
    double acc = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        power[static_cast<std::size_t>(i)] = params.power_budget * norm * std::pow(rho, i);
        acc += power[static_cast<std::size_t>(i)];
    }
    power[static_cast<std::size_t>(n - 1)] = params.power_budget - acc;

    model::PrecoderSet pc;
    pc.w.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        pc.w[static_cast<std::size_t>(i)] =
            std::sqrt(power[static_cast<std::size_t>(i)]) * direction;
    return tighten_state(channels, params, std::move(pc), Variant::CNoma);
}

namespace {

struct ExprHelper {
    const model::ChannelSet& ch;
    const VarLayout& lay;

    // h_rx^H w_msg as a complex affine form over the real embedding of w
    CLinExpr inner(int rx, int msg) const {
        CLinExpr e;
        const model::cvec& h = ch.h[static_cast<std::size_t>(rx)];
        for (int a = 0; a < lay.antennas; ++a) {
            const double hr = h(a).real();
            const double hi = h(a).imag();
            // conj(h_a) * (wr + i wi) = (hr wr + hi wi) + i (hr wi - hi wr)
            e.re.terms.emplace_back(lay.w_re(msg, a), hr);
            e.re.terms.emplace_back(lay.w_im(msg, a), hi);
            e.im.terms.emplace_back(lay.w_im(msg, a), hr);
            e.im.terms.emplace_back(lay.w_re(msg, a), -hi);
        }
        return e;
    }

    // affine minorant of |h_rx^H w_msg|^2 linearized at theta_t
    LinExpr minorant(int rx, int msg, std::complex<double> theta_t) const {
        const CLinExpr ip = inner(rx, msg);
        return 2.0 * theta_t.real() * ip.re + 2.0 * theta_t.imag() * ip.im +
               LinExpr(-std::norm(theta_t));
    }
};

// 0.25 [ (a_t-b_t)^2 + 2 (a_t-b_t)(a - a_t - b + b_t) ] as an affine form
LinExpr bilinear_linearized_part(const LinExpr& a, const LinExpr& b, double a_t, double b_t) {
    const double d = a_t - b_t;
    return LinExpr(0.25 * d * d) + (0.5 * d) * (a - b - LinExpr(d));
}

} // namespace

Subproblem build_subproblem(const MmaState& state, const model::ChannelSet& channels,
                            const model::SystemParams& params, Variant variant) {
    params.validate();
    const int n = params.users;
    const int t = params.antennas;
    if (state.users != n || channels.users() != n || channels.antennas() != t)
        throw std::invalid_argument("build_subproblem: inconsistent state dimensions");
    const double sigma = params.noise_std;
    const bool cross = variant == Variant::CNoma;

    conic::ProgramBuilder pb;
    VarLayout lay;
    lay.users = n;
    lay.antennas = t;
    lay.w_base = pb.add_variables(2 * n * t).front();
    lay.r_base = pb.add_variables(n).front();
    lay.wbar_base = n > 1 ? pb.add_variables(n - 1).front() : -1;
    lay.v_base = cross && n > 1 ? pb.add_variables(n * (n - 1) / 2).front() : -1;
    lay.t_var = pb.add_variable();

    const ExprHelper ex{channels, lay};
    auto r_var = [&](int k) { return LinExpr::variable(lay.r_base + k); };
    auto wbar_var = [&](int k) { return LinExpr::variable(lay.wbar_base + k); };
    auto v_var = [&](int k, int j) {
        return LinExpr::variable(lay.v_base + MmaState::pair_index(k, j, n));
    };

    // objective: the geometric-mean epigraph variable
    pb.maximize(LinExpr::variable(lay.t_var));
    std::vector<int> r_ids(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        r_ids[static_cast<std::size_t>(k)] = lay.r_base + k;
    const int c_blocks =
        static_cast<int>(pb.add_geometric_mean_epigraph(r_ids, lay.t_var).size());

    for (int k = 0; k < n; ++k)
        pb.add_nonnegative(r_var(k));

    // direct-decoding interference bounds and convexified SINR constraints
    for (int k = 0; k + 1 < n; ++k) {
        std::vector<CLinExpr> forms;
        for (int j = k + 1; j < n; ++j)
            forms.push_back(ex.inner(k, j));
        pb.add_quadratic_upper_bound(forms, sigma, wbar_var(k));

        const LinExpr bound =
            ex.minorant(k, k, state.theta_kk[static_cast<std::size_t>(k)]) + wbar_var(k) +
            bilinear_linearized_part(wbar_var(k), r_var(k), state.wbar[static_cast<std::size_t>(k)],
                                     state.r[static_cast<std::size_t>(k)]);
        std::vector<CLinExpr> half{CLinExpr{0.5 * (wbar_var(k) + r_var(k)),
                                            LinExpr(0.0)}};
        pb.add_quadratic_upper_bound(half, 0.0, bound);
    }

    // cross-decoding constraints (complete formulation only)
    if (cross) {
        for (int k = 0; k + 1 < n; ++k) {
            for (int j = k + 1; j < n; ++j) {
                std::vector<CLinExpr> forms;
                for (int m = k + 1; m < n; ++m)
                    forms.push_back(ex.inner(j, m));
                pb.add_quadratic_upper_bound(forms, sigma, v_var(k, j));

                const LinExpr bound =
                    ex.minorant(j, k, state.theta_jk_at(k, j)) + v_var(k, j) +
                    bilinear_linearized_part(r_var(k), v_var(k, j),
                                             state.r[static_cast<std::size_t>(k)],
                                             state.v_at(k, j));
                std::vector<CLinExpr> half{CLinExpr{0.5 * (r_var(k) + v_var(k, j)),
                                                    LinExpr(0.0)}};
                pb.add_quadratic_upper_bound(half, 0.0, bound);
            }
        }
    }

    // last user decodes interference-free: sigma^2 (r_N - 1) <= minorant
    pb.add_nonnegative(ex.minorant(n - 1, n - 1, state.theta_nn) -
                       (sigma * sigma) * r_var(n - 1) + LinExpr(sigma * sigma));

    // linearized ordering chains: |h_k^H w_i|^2 <= minorant of |h_k^H w_m|^2
    for (int k = 0; k < n; ++k) {
        for (int i = 1; i < n; ++i) {
            for (int m = 0; m < i; ++m) {
                std::vector<CLinExpr> forms{ex.inner(k, i)};
                pb.add_quadratic_upper_bound(forms, 0.0,
                                             ex.minorant(k, m, state.phi_at(k, m)));
            }
        }
    }

    // total power
    {
        std::vector<LinExpr> rows;
        rows.reserve(static_cast<std::size_t>(2 * n * t + 1));
        rows.push_back(LinExpr(std::sqrt(params.power_budget)));
        for (int i = 0; i < 2 * n * t; ++i)
            rows.push_back(LinExpr::variable(lay.w_base + i));
        pb.add_second_order(std::move(rows));
    }

    Subproblem sp;
    sp.layout = lay;
    sp.geomean_blocks = c_blocks;
    sp.total_blocks = pb.num_blocks();
    sp.program = pb.build();
    return sp;
}

namespace {

double variant_rate(Variant variant, const model::ChannelSet& channels,
                    const model::PrecoderSet& precoders, double sigma) {
    return variant == Variant::CNoma ? model::sum_rate_cnoma(channels, precoders, sigma)
                                     : model::sum_rate_anoma(channels, precoders, sigma);
}

} // namespace

namespace {

// One surrogate iteration: the subproblem is assembled around `anchor`; the
// candidate update is validated and measured against `baseline` (the current
// accepted iterate). Plain steps use anchor == baseline; the inertial path
// in run() anchors ahead of the iterate.
StepResult step_anchored(const MmaState& anchor, const MmaState& baseline,
                         const model::ChannelSet& channels, const model::SystemParams& params,
                         const MmaConfig& config) {
    const MmaState& state = baseline;
    const auto t0 = std::chrono::steady_clock::now();
    const Subproblem sp = build_subproblem(anchor, channels, params, config.variant);
    const conic::Solution sol = conic::solve(sp.program, config.solver);

    StepResult res;
    res.record.solver_status = sol.status;

    // Trust but verify: a candidate is accepted only if, after re-tightening
    // every auxiliary from its precoders, the iterate is feasible for the
    // original constraints and keeps the objective from decreasing. This
    // keeps the feasibility and ascent guarantees independent of subproblem
    // solve accuracy. Candidates are taken along the solve direction: over-
    // relaxed steps (projected back onto the power ball) accelerate the
    // geometric tail of the surrogate iteration, damped steps rescue
    // marginal solves. Infeasibility certificates are never usable iterates.
    const bool usable = sol.x.size() == sp.program.n && sol.x.allFinite() &&
                        sol.status != conic::SolveStatus::PrimalInfeasible &&
                        sol.status != conic::SolveStatus::DualInfeasible;
    if (usable) {
        model::PrecoderSet full;
        full.w.resize(static_cast<std::size_t>(params.users));
        for (int i = 0; i < params.users; ++i) {
            model::cvec wi(params.antennas);
            for (int a = 0; a < params.antennas; ++a)
                wi(a) = std::complex<double>(sol.x(sp.layout.w_re(i, a)),
                                             sol.x(sp.layout.w_im(i, a)));
            full.w[static_cast<std::size_t>(i)] = std::move(wi);
        }
        const double prev_geo = geomean_of(state.r);
        MmaState best_next;
        double best_geo = -1.0;

        // Candidates must clear a strict ordering tolerance after the polish.
        // Solver steps satisfy it up to solver noise; blended or extrapolated
        // points carry no guarantee on the non-convex ordering set and are
        // dropped when they graze it.
        const double feas_tol = std::min(1e-7, model::default_feasibility_tol(params));
        auto consider = [&](const model::PrecoderSet& pc_in) {
            model::PrecoderSet pc = pc_in;
            const double power = pc.total_power();
            if (power > params.power_budget) {
                const double shrink = std::sqrt(params.power_budget / power);
                for (auto& wi : pc.w)
                    wi *= shrink;
            }
            polish_ordering(channels, pc);
            MmaState next = tighten_state(channels, params, std::move(pc), config.variant);
            const auto feas = model::check_noma_feasible(channels, next.precoders, params,
                                                         feas_tol);
            const double next_geo = geomean_of(next.r);
            if (!feas.feasible() || next_geo < prev_geo - 1e-9 * (1.0 + std::abs(prev_geo)))
                return false;
            if (next_geo > best_geo) {
                best_geo = next_geo;
                best_next = std::move(next);
            }
            return true;
        };

        const std::size_t nu = full.w.size();
        model::PrecoderSet cand;
        cand.w.resize(nu);
        for (double relax : {32.0, 16.0, 8.0, 4.0, 2.0, 1.0, 0.5, 0.25, 0.1}) {
            for (std::size_t i = 0; i < nu; ++i)
                cand.w[i] = relax * full.w[i] + (1.0 - relax) * state.precoders.w[i];
            consider(cand);
            if (relax <= 1.0 && best_geo >= 0.0)
                break; // have a valid plain or damped step; stop searching
        }
        // momentum rays through the previous accepted direction cut through
        // the zigzag caused by which cross-SINR is currently the minimum
        if (!state.prev_precoders.w.empty()) {
            for (double gain : {2.0, 4.0, 8.0, 16.0}) {
                for (std::size_t i = 0; i < nu; ++i)
                    cand.w[i] = full.w[i] +
                                gain * (state.precoders.w[i] - state.prev_precoders.w[i]);
                consider(cand);
            }
        }
        if (best_geo >= 0.0) {
            best_next.prev_precoders = state.precoders;
            res.state = std::move(best_next);
            res.record.accepted = true;
            res.record.geomean = best_geo;
            res.record.objective_rate = params.users * std::log2(std::max(best_geo, 1e-300));
            res.record.sum_rate =
                variant_rate(config.variant, channels, res.state.precoders, params.noise_std);
            res.record.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return res;
        }
    }

    res.state = state; // previous state retained
    res.record.accepted = false;
    res.record.geomean = geomean_of(state.r);
    res.record.objective_rate = params.users * std::log2(std::max(res.record.geomean, 1e-300));
    res.record.sum_rate = variant_rate(config.variant, channels, state.precoders,
                                       params.noise_std);
    res.record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace

StepResult step(const MmaState& state, const model::ChannelSet& channels,
                const model::SystemParams& params, const MmaConfig& config) {
    return step_anchored(state, state, channels, params, config);
}

RunResult run(const model::ChannelSet& channels, const model::SystemParams& params,
              const MmaConfig& config, std::uint64_t seed) {
    if (config.convergence_delta <= 0.0)
        throw std::invalid_argument("run: convergence_delta must be > 0");
    MmaState state = init_state(channels, params, seed);

    RunResult out;
    out.precoders = state.precoders;
    double prev_rate = variant_rate(config.variant, channels, state.precoders, params.noise_std);
    out.trace.best_sum_rate = prev_rate;
    out.trace.best_iteration = -1; // the initial point

    // Inertial anchoring: after a successful step, the next subproblem is
    // linearized ahead of the iterate along the last accepted direction. The
    // minorants bound their functions globally, so any anchor yields a valid
    // inner approximation; acceptance is still validated against the current
    // iterate, with a plain-anchored solve as fallback.
    double inertia = 1.0;
    for (int it = 0; it < config.max_iterations; ++it) {
        StepResult sr;
        bool stepped = false;
        if (!state.prev_precoders.w.empty() && inertia >= 1.0) {
            MmaState anchor = state;
            model::PrecoderSet ahead;
            ahead.w.resize(state.precoders.w.size());
            for (std::size_t i = 0; i < ahead.w.size(); ++i)
                ahead.w[i] = state.precoders.w[i] +
                             inertia * (state.precoders.w[i] - state.prev_precoders.w[i]);
            const double power = ahead.total_power();
            if (power > params.power_budget) {
                const double shrink = std::sqrt(params.power_budget / power);
                for (auto& wi : ahead.w)
                    wi *= shrink;
            }
            anchor = tighten_state(channels, params, std::move(ahead), config.variant);
            sr = step_anchored(anchor, state, channels, params, config);
            if (sr.record.accepted) {
                stepped = true;
                inertia = std::min(2.0 * inertia, 16.0);
            } else {
                inertia = 1.0;
            }
        }
        if (!stepped)
            sr = step(state, channels, params, config);
        sr.record.iteration = it;
        out.trace.iterations.push_back(sr.record);
        if (!sr.record.accepted) {
            if (it == 0)
                out.trace.failed = true;
            break;
        }
        state = std::move(sr.state);
        if (sr.record.sum_rate > out.trace.best_sum_rate) {
            out.trace.best_sum_rate = sr.record.sum_rate;
            out.trace.best_iteration = it;
            out.precoders = state.precoders;
        }
        if (std::abs(sr.record.sum_rate - prev_rate) <= config.convergence_delta) {
            // a small inertial increment may just be a short jump; unless the
            // iterate has actually settled, confirm with a plain-anchored
            // step before declaring convergence
            double moved = 0.0;
            for (std::size_t i = 0; i < state.precoders.w.size(); ++i)
                moved += (state.precoders.w[i] - state.prev_precoders.w[i]).squaredNorm();
            const bool settled = moved <= 1e-8 * (1.0 + state.precoders.total_power());
            if (!stepped || settled) {
                out.trace.converged = true;
                break;
            }
            inertia = 0.0;
        } else if (inertia < 1.0) {
            inertia = 1.0;
        }
        prev_rate = sr.record.sum_rate;
    }
    return out;
}

} // namespace noma::mma
