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
// Dense primal-dual interior-point solver for the product of zero,
// nonnegative and second-order cones. The algorithm is the homogeneous
// self-dual embedding with Nesterov-Todd scaling and Mehrotra
// predictor-corrector steps:
//
//   minimize    c'x
//   subject to  A x = b,   G x + s = h,   s in K,
//
// embedded with the auxiliary scalars (tau, kappa). Each iteration factors
// the scaled KKT system once; the search directions are obtained by block
// elimination through the normal equations
//
//   (G' W^-2 G + delta I) dx + A' dy = bx + G' W^-2 bz,
//
// followed by iterative refinement against the unregularized KKT residual.
// A full LU factorization of the augmented system is kept as a fallback for
// ill-conditioned scalings. Problems here are small (hundreds of variables),
// so dense factorizations are the right trade.

#include "conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace noma::conic {

namespace {

constexpr double kGamma = 0.99;       // step damping
constexpr double kStepMin = 1e-7;
constexpr double kStepMax = 0.9999;
constexpr double kSigmaMin = 1e-4;
constexpr double kSigmaMax = 1.0;
constexpr double kDeltaStat = 7e-8;   // static regularization
constexpr double kLinSysAcc = 1e-13;  // refinement target
constexpr int kNitRef = 10;
constexpr double kSafeguard = 500.0;  // residual blow-up guard
constexpr int kStallLimit = 60;       // iterations without barrier progress
constexpr double kFeasTolInacc = 1e-4;
constexpr double kGapTolInacc = 5e-5;

struct ConeSpec {
    int n_lp = 0;
    std::vector<int> soc_dims;
    int rows() const {
        int m = n_lp;
        for (int d : soc_dims)
            m += d;
        return m;
    }
    int degree() const { return n_lp + static_cast<int>(soc_dims.size()); }
};

// Nesterov-Todd scaling state. For the LP cone W = diag(w_lp); for each
// second-order cone W = eta * (2 wbar wbar' - J)^(1/2) with wbar = (a, q),
// a^2 - |q|^2 = 1 and J = diag(1, -I).
struct Scaling {
    Eigen::VectorXd w_lp; // sqrt(s/z) on LP rows
    struct Soc {
        double eta = 1.0;
        double a = 1.0;
        Eigen::VectorXd q;
    };
    std::vector<Soc> socs;
    bool identity = true;
};

class HsdSolver {
  public:
    HsdSolver(const ConicProgram& prog, const SolverSettings& settings);
    Solution run();

  private:
    void convert(const ConicProgram& prog);
    void apply_w(const Eigen::VectorXd& u, Eigen::VectorXd& out) const;
    void apply_w_inv(const Eigen::VectorXd& u, Eigen::VectorXd& out) const;
    bool update_scaling();
    void bring_to_cone(const Eigen::VectorXd& r, Eigen::VectorXd& out) const;
    void conic_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                       Eigen::VectorXd& out) const;
    void conic_division(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                        Eigen::VectorXd& out) const;
    double line_search(const Eigen::VectorXd& lambda, const Eigen::VectorXd& ds,
                       const Eigen::VectorXd& dz, double tau, double dtau, double kap,
                       double dkap) const;
    bool factor_kkt();
    void solve_kkt(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                   const Eigen::VectorXd& bz, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                   Eigen::VectorXd& dz) const;
    void solve_kkt_once(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                        const Eigen::VectorXd& bz, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                        Eigen::VectorXd& dz) const;
    void compute_residuals();
    void update_statistics();
    enum class Exit { None, Optimal, PrimalInfeasible, DualInfeasible };
    Exit check_exit(double feastol, double gaptol) const;
    Solution finish(SolveStatus status);

    const SolverSettings& settings_;
    const ConicProgram& prog_;

    int n_ = 0, p_ = 0, m_ = 0;
    Eigen::VectorXd c_, b_, h_;
    Eigen::MatrixXd A_, G_;
    ConeSpec cones_;

    Scaling scal_;
    Eigen::VectorXd lambda_;
    int stall_ = 0;
    double mu_min_ = std::numeric_limits<double>::max();

    // iterates
    Eigen::VectorXd x_, y_, z_, s_;
    double tau_ = 1.0, kap_ = 1.0;

    // residuals and statistics
    Eigen::VectorXd rx_, ry_, rz_;
    double rt_ = 0.0;
    double hresx_ = 0.0, hresy_ = 0.0, hresz_ = 0.0;
    double cx_ = 0.0, by_ = 0.0, hz_ = 0.0;
    double nx_ = 0.0, ny_ = 0.0, nz_ = 0.0, ns_ = 0.0;
    double resx0_ = 1.0, resy0_ = 1.0, resz0_ = 1.0;
    double pres_ = 0.0, dres_ = 0.0, gap_ = 0.0, relgap_ = 0.0, mu_ = 0.0;
    double pcost_ = 0.0, dcost_ = 0.0;
    std::optional<double> pinfres_, dinfres_;
    int iter_ = 0;

    // KKT factorization
    Eigen::MatrixXd Wi_G_; // W^-1 G
    Eigen::LLT<Eigen::MatrixXd> llt_H_;
    Eigen::MatrixXd Hinv_At_;
    Eigen::LLT<Eigen::MatrixXd> llt_S_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_full_;
    bool use_lu_ = false;

    // best iterate by worst tolerance ratio, used as fallback
    struct Best {
        Eigen::VectorXd x, y, z, s;
        double tau = 1.0, kap = 1.0;
        double score = std::numeric_limits<double>::max();
        bool set = false;
    } best_;
    double tolerance_score() const {
        return std::max({pres_ / settings_.eps_feas, dres_ / settings_.eps_feas,
                         relgap_ / settings_.eps_gap});
    }
};

HsdSolver::HsdSolver(const ConicProgram& prog, const SolverSettings& settings)
    : settings_(settings), prog_(prog) {
    convert(prog);
}

void HsdSolver::convert(const ConicProgram& prog) {
    n_ = prog.n;
    int p = 0, n_lp = 0;
    std::vector<int> soc_dims;
    for (const auto& blk : prog.blocks) {
        switch (blk.tag) {
        case ConeTag::Zero: p += blk.rows; break;
        case ConeTag::Nonnegative: n_lp += blk.rows; break;
        case ConeTag::SecondOrder: soc_dims.push_back(blk.rows); break;
        }
    }
    cones_.n_lp = n_lp;
    cones_.soc_dims = std::move(soc_dims);
    p_ = p;
    m_ = cones_.rows();
    if (m_ == 0)
        throw std::invalid_argument("solve: program has no inequality blocks");

    A_.setZero(p_, n_);
    b_.setZero(p_);
    G_.setZero(m_, n_);
    h_.setZero(m_);
    c_ = -prog.objective; // internal minimize convention

    // Per-block equilibration: a uniform positive factor per block preserves
    // cone membership and leaves x unchanged.
    auto block_factor = [&prog](const ConicProgram::Block& blk) {
        double mx = 0.0;
        for (int r = 0; r < blk.rows; ++r) {
            mx = std::max(mx, prog.coeff.row(blk.first_row + r).lpNorm<Eigen::Infinity>());
            mx = std::max(mx, std::abs(prog.offset(blk.first_row + r)));
        }
        if (mx <= 0.0)
            return 1.0;
        return 1.0 / std::clamp(mx, 1e-6, 1e10);
    };

    int eq_row = 0, lp_row = 0, soc_row = n_lp;
    for (const auto& blk : prog.blocks) {
        const double f = block_factor(blk);
        if (blk.tag == ConeTag::Zero) {
            // C x + d = 0  ->  A x = b with A = f C, b = -f d
            A_.middleRows(eq_row, blk.rows) = f * prog.coeff.middleRows(blk.first_row, blk.rows);
            b_.segment(eq_row, blk.rows) = -f * prog.offset.segment(blk.first_row, blk.rows);
            eq_row += blk.rows;
        } else {
            // C x + d in K  ->  h - G x in K with G = -f C, h = f d
            int& row = (blk.tag == ConeTag::Nonnegative) ? lp_row : soc_row;
            G_.middleRows(row, blk.rows) = -f * prog.coeff.middleRows(blk.first_row, blk.rows);
            h_.segment(row, blk.rows) = f * prog.offset.segment(blk.first_row, blk.rows);
            row += blk.rows;
        }
    }
}

void HsdSolver::apply_w(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
    out.resize(m_);
    if (scal_.identity) {
        out = u;
        return;
    }
    out.head(cones_.n_lp) = scal_.w_lp.cwiseProduct(u.head(cones_.n_lp));
    int row = cones_.n_lp;
    for (std::size_t k = 0; k < cones_.soc_dims.size(); ++k) {
        const int dim = cones_.soc_dims[k];
        const auto& sc = scal_.socs[k];
        const auto u1 = u.segment(row + 1, dim - 1);
        const double zeta = sc.q.dot(u1);
        const double factor = u(row) + zeta / (1.0 + sc.a);
        out(row) = sc.eta * (sc.a * u(row) + zeta);
        out.segment(row + 1, dim - 1) = sc.eta * (u1 + factor * sc.q);
        row += dim;
    }
}

void HsdSolver::apply_w_inv(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
    out.resize(m_);
    if (scal_.identity) {
        out = u;
        return;
    }
    out.head(cones_.n_lp) = u.head(cones_.n_lp).cwiseQuotient(scal_.w_lp);
    int row = cones_.n_lp;
    for (std::size_t k = 0; k < cones_.soc_dims.size(); ++k) {
        const int dim = cones_.soc_dims[k];
        const auto& sc = scal_.socs[k];
        const auto u1 = u.segment(row + 1, dim - 1);
        const double zeta = sc.q.dot(u1);
        const double factor = -u(row) + zeta / (1.0 + sc.a);
        out(row) = (sc.a * u(row) - zeta) / sc.eta;
        out.segment(row + 1, dim - 1) = (u1 + factor * sc.q) / sc.eta;
        row += dim;
    }
}

bool HsdSolver::update_scaling() {
    scal_.identity = false;
    scal_.w_lp = s_.head(cones_.n_lp).cwiseQuotient(z_.head(cones_.n_lp)).cwiseSqrt();
    if (!scal_.w_lp.allFinite())
        return false;

    scal_.socs.resize(cones_.soc_dims.size());
    int row = cones_.n_lp;
    for (std::size_t k = 0; k < cones_.soc_dims.size(); ++k) {
        const int dim = cones_.soc_dims[k];
        auto& sc = scal_.socs[k];
        const auto sk = s_.segment(row, dim);
        const auto zk = z_.segment(row, dim);
        const double sres = sk(0) * sk(0) - sk.tail(dim - 1).squaredNorm();
        const double zres = zk(0) * zk(0) - zk.tail(dim - 1).squaredNorm();
        if (sres <= 0.0 || zres <= 0.0)
            return false;
        const double snorm = std::sqrt(sres);
        const double znorm = std::sqrt(zres);
        Eigen::VectorXd sbar = sk / snorm;
        Eigen::VectorXd zbar = zk / znorm;
        sc.eta = std::sqrt(snorm / znorm);
        const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
        sc.a = (0.5 / gamma) * (sbar(0) + zbar(0));
        sc.q = (0.5 / gamma) * (sbar.tail(dim - 1) - zbar.tail(dim - 1));
        row += dim;
    }
    apply_w(z_, lambda_);
    return lambda_.allFinite();
}

void HsdSolver::bring_to_cone(const Eigen::VectorXd& r, Eigen::VectorXd& out) const {
    double alpha = -1.0;
    if (cones_.n_lp > 0)
        alpha = std::max(alpha, -r.head(cones_.n_lp).minCoeff());
    int row = cones_.n_lp;
    for (int dim : cones_.soc_dims) {
        alpha = std::max(alpha, r.segment(row + 1, dim - 1).norm() - r(row));
        row += dim;
    }
    out = r;
    if (alpha >= 0.0) {
        out.head(cones_.n_lp).array() += 1.0 + alpha;
        row = cones_.n_lp;
        for (int dim : cones_.soc_dims) {
            out(row) += 1.0 + alpha;
            row += dim;
        }
    }
}

void HsdSolver::conic_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                              Eigen::VectorXd& out) const {
    out.resize(m_);
    out.head(cones_.n_lp) = u.head(cones_.n_lp).cwiseProduct(v.head(cones_.n_lp));
    int row = cones_.n_lp;
    for (int dim : cones_.soc_dims) {
        const auto uk = u.segment(row, dim);
        const auto vk = v.segment(row, dim);
        out(row) = uk.dot(vk);
        out.segment(row + 1, dim - 1) = uk(0) * vk.tail(dim - 1) + vk(0) * uk.tail(dim - 1);
        row += dim;
    }
}

void HsdSolver::conic_division(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                               Eigen::VectorXd& out) const {
    out.resize(m_);
    out.head(cones_.n_lp) = v.head(cones_.n_lp).cwiseQuotient(u.head(cones_.n_lp));
    int row = cones_.n_lp;
    for (int dim : cones_.soc_dims) {
        const auto uk = u.segment(row, dim);
        const auto vk = v.segment(row, dim);
        const double rho = uk(0) * uk(0) - uk.tail(dim - 1).squaredNorm();
        const double zeta = uk.tail(dim - 1).dot(vk.tail(dim - 1));
        const double factor = (zeta / uk(0) - vk(0)) / rho;
        out(row) = (uk(0) * vk(0) - zeta) / rho;
        out.segment(row + 1, dim - 1) = factor * uk.tail(dim - 1) + vk.tail(dim - 1) / uk(0);
        row += dim;
    }
}

double HsdSolver::line_search(const Eigen::VectorXd& lambda, const Eigen::VectorXd& ds,
                              const Eigen::VectorXd& dz, double tau, double dtau, double kap,
                              double dkap) const {
    double alpha = 2.0;
    if (cones_.n_lp > 0) {
        const double rhomin =
            ds.head(cones_.n_lp).cwiseQuotient(lambda.head(cones_.n_lp)).minCoeff();
        const double sigmin =
            dz.head(cones_.n_lp).cwiseQuotient(lambda.head(cones_.n_lp)).minCoeff();
        const double worst = std::min(rhomin, sigmin);
        if (worst < 0.0)
            alpha = std::min(alpha, -1.0 / worst);
    }
    if (dtau < 0.0)
        alpha = std::min(alpha, -tau / dtau);
    if (dkap < 0.0)
        alpha = std::min(alpha, -kap / dkap);

    int row = cones_.n_lp;
    for (int dim : cones_.soc_dims) {
        const auto lk = lambda.segment(row, dim);
        const double lknorm2 = lk(0) * lk(0) - lk.tail(dim - 1).squaredNorm();
        if (lknorm2 > 0.0) {
            const double lknorm = std::sqrt(lknorm2);
            const Eigen::VectorXd lkbar = lk / lknorm;
            const auto step_bound = [&](const Eigen::VectorXd& d) {
                const auto d1 = d.segment(row + 1, dim - 1);
                const double lkbar_d = lkbar(0) * d(row) - lkbar.tail(dim - 1).dot(d1);
                const double f = (lkbar_d + d(row)) / (lkbar(0) + 1.0);
                const double rho0 = lkbar_d / lknorm;
                const double rho1 = (d1 - f * lkbar.tail(dim - 1)).norm() / lknorm;
                return rho1 - rho0;
            };
            const double bound = std::max(step_bound(ds), step_bound(dz));
            if (bound > 0.0)
                alpha = std::min(alpha, 1.0 / bound);
        }
        row += dim;
    }
    return std::clamp(alpha, kStepMin, kStepMax);
}

bool HsdSolver::factor_kkt() {
    use_lu_ = false;
    {
        // M = W^-1 G, H = M'M + delta I
        Wi_G_.resize(m_, n_);
        if (scal_.identity) {
            Wi_G_ = G_;
        } else {
            Eigen::VectorXd col(m_), out(m_);
            for (int j = 0; j < n_; ++j) {
                col = G_.col(j);
                apply_w_inv(col, out);
                Wi_G_.col(j) = out;
            }
        }
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n_, n_);
        H.selfadjointView<Eigen::Lower>().rankUpdate(Wi_G_.transpose());
        H.diagonal().array() += kDeltaStat;
        llt_H_.compute(H.selfadjointView<Eigen::Lower>());
        bool ok = llt_H_.info() == Eigen::Success;
        if (ok && p_ > 0) {
            Hinv_At_ = llt_H_.solve(A_.transpose());
            Eigen::MatrixXd S = A_ * Hinv_At_;
            S.diagonal().array() += kDeltaStat;
            llt_S_.compute(S);
            ok = llt_S_.info() == Eigen::Success;
        }
        if (ok)
            return true;
    }

    // LU of the full augmented system.
    use_lu_ = true;
    const int dim = n_ + p_ + m_;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dim, dim);
    if (p_ > 0) {
        K.block(0, n_, n_, p_) = A_.transpose();
        K.block(n_, 0, p_, n_) = A_;
    }
    K.block(0, n_ + p_, n_, m_) = G_.transpose();
    K.block(n_ + p_, 0, m_, n_) = G_;
    // -W'W block
    auto WW = K.block(n_ + p_, n_ + p_, m_, m_);
    if (scal_.identity) {
        WW.diagonal().array() = -1.0;
    } else {
        WW.topLeftCorner(cones_.n_lp, cones_.n_lp).diagonal() =
            -scal_.w_lp.array().square();
        int row = cones_.n_lp;
        for (std::size_t k = 0; k < cones_.soc_dims.size(); ++k) {
            const int d = cones_.soc_dims[k];
            const auto& sc = scal_.socs[k];
            Eigen::VectorXd wbar(d);
            wbar(0) = sc.a;
            wbar.tail(d - 1) = sc.q;
            // W^2 = eta^2 (2 wbar wbar' - J)
            Eigen::MatrixXd blockW = 2.0 * (wbar * wbar.transpose());
            blockW(0, 0) -= 1.0;
            blockW.bottomRightCorner(d - 1, d - 1).diagonal().array() += 1.0;
            WW.block(row, row, d, d) = -(sc.eta * sc.eta) * blockW;
            row += d;
        }
    }
    lu_full_.compute(K);
    return true;
}

void HsdSolver::solve_kkt_once(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                               const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
                               Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
    if (use_lu_) {
        Eigen::VectorXd rhs(n_ + p_ + m_);
        rhs.head(n_) = bx;
        if (p_ > 0)
            rhs.segment(n_, p_) = by;
        rhs.tail(m_) = bz;
        const Eigen::VectorXd sol = lu_full_.solve(rhs);
        dx = sol.head(n_);
        dy = p_ > 0 ? sol.segment(n_, p_) : Eigen::VectorXd(0);
        dz = sol.tail(m_);
        return;
    }
    // dz = W^-2 (G dx - bz); (H)(dx) + A'dy = bx + G'W^-2 bz; A dx = by
    Eigen::VectorXd t1(m_), t2(m_);
    apply_w_inv(bz, t1);
    apply_w_inv(t1, t2); // t2 = W^-2 bz  (W symmetric)
    const Eigen::VectorXd rhs_x = bx + G_.transpose() * t2;
    if (p_ > 0) {
        const Eigen::VectorXd Hinv_rhs = llt_H_.solve(rhs_x);
        dy = llt_S_.solve(A_ * Hinv_rhs - by);
        dx = Hinv_rhs - Hinv_At_ * dy;
    } else {
        dy.resize(0);
        dx = llt_H_.solve(rhs_x);
    }
    Eigen::VectorXd gz = G_ * dx - bz;
    apply_w_inv(gz, t1);
    apply_w_inv(t1, dz);
}

void HsdSolver::solve_kkt(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                          const Eigen::VectorXd& bz, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                          Eigen::VectorXd& dz) const {
    solve_kkt_once(bx, by, bz, dx, dy, dz);
    double rhs_norm = std::max(bx.lpNorm<Eigen::Infinity>(), bz.lpNorm<Eigen::Infinity>());
    if (p_ > 0)
        rhs_norm = std::max(rhs_norm, by.lpNorm<Eigen::Infinity>());
    // relative target: late-stage right-hand sides shrink with the residuals,
    // and the directions must stay accurate relative to them
    const double target = rhs_norm * kLinSysAcc;

    Eigen::VectorXd ex(n_), ey(p_), ez(m_), t1(m_), w2dz(m_), ddx, ddy, ddz;
    double prev_err = std::numeric_limits<double>::max();
    for (int it = 0; it < kNitRef; ++it) {
        // true (unregularized) KKT residual
        ex = bx - G_.transpose() * dz;
        if (p_ > 0) {
            ex -= A_.transpose() * dy;
            ey = by - A_ * dx;
        }
        apply_w(dz, t1);
        apply_w(t1, w2dz);
        ez = bz - G_ * dx + w2dz;
        double err = std::max(ex.lpNorm<Eigen::Infinity>(), ez.lpNorm<Eigen::Infinity>());
        if (p_ > 0)
            err = std::max(err, ey.lpNorm<Eigen::Infinity>());
        if (err >= prev_err && it > 0) {
            // the last correction made things worse; undo it
            dx -= ddx;
            if (p_ > 0)
                dy -= ddy;
            dz -= ddz;
            break;
        }
        if (err <= target)
            break;
        prev_err = err;
        solve_kkt_once(ex, ey, ez, ddx, ddy, ddz);
        dx += ddx;
        if (p_ > 0)
            dy += ddy;
        dz += ddz;
    }
}

void HsdSolver::compute_residuals() {
    // rx = -A'y - G'z - tau c ; ry = A x - tau b ; rz = s + G x - tau h
    rx_ = -G_.transpose() * z_;
    if (p_ > 0)
        rx_ -= A_.transpose() * y_;
    hresx_ = rx_.norm();
    rx_ -= tau_ * c_;

    if (p_ > 0) {
        ry_ = A_ * x_;
        hresy_ = ry_.norm();
        ry_ -= tau_ * b_;
    } else {
        ry_.resize(0);
        hresy_ = 0.0;
    }

    rz_ = s_ + G_ * x_;
    hresz_ = rz_.norm();
    rz_ -= tau_ * h_;

    cx_ = c_.dot(x_);
    by_ = p_ > 0 ? b_.dot(y_) : 0.0;
    hz_ = h_.dot(z_);
    rt_ = kap_ + cx_ + by_ + hz_;

    nx_ = x_.norm();
    ny_ = p_ > 0 ? y_.norm() : 0.0;
    nz_ = z_.norm();
    ns_ = s_.norm();
}

void HsdSolver::update_statistics() {
    gap_ = s_.dot(z_);
    mu_ = (gap_ + kap_ * tau_) / static_cast<double>(cones_.degree() + 1);
    pcost_ = cx_ / tau_;
    dcost_ = -(hz_ + by_) / tau_;
    relgap_ = std::abs(gap_ / (tau_ * tau_)) / std::max({1.0, std::abs(pcost_), std::abs(dcost_)});

    const double nry = p_ > 0 ? ry_.norm() / std::max(resy0_ + nx_, 1.0) : 0.0;
    const double nrz = rz_.norm() / std::max(resz0_ + nx_ + ns_, 1.0);
    pres_ = std::max(nry, nrz) / tau_;
    dres_ = rx_.norm() / std::max(resx0_ + ny_ + nz_, 1.0) / tau_;

    pinfres_.reset();
    dinfres_.reset();
    if ((hz_ + by_) / std::max(ny_ + nz_, 1.0) < -settings_.eps_gap)
        pinfres_ = hresx_ / std::max(ny_ + nz_, 1.0);
    if (cx_ / std::max(nx_, 1.0) < -settings_.eps_gap)
        dinfres_ = std::max(hresy_ / std::max(nx_, 1.0), hresz_ / std::max(nx_ + ns_, 1.0));

    if (settings_.verbose)
        std::printf("it %2d  pcost % .6e dcost % .6e  pres %.2e dres %.2e relgap %.2e "
                    "k/t %.2e mu %.2e\n",
                    iter_, pcost_, dcost_, pres_, dres_, relgap_, kap_ / tau_, mu_);
}

HsdSolver::Exit HsdSolver::check_exit(double feastol, double gaptol) const {
    if (pres_ < feastol && dres_ < feastol && relgap_ < gaptol)
        return Exit::Optimal;
    if (dinfres_ && *dinfres_ < feastol && tau_ < kap_)
        return Exit::DualInfeasible;
    if ((pinfres_ && *pinfres_ < feastol && tau_ < kap_) ||
        (tau_ < feastol && kap_ < feastol && pinfres_ && *pinfres_ < feastol))
        return Exit::PrimalInfeasible;
    return Exit::None;
}

Solution HsdSolver::finish(SolveStatus status) {
    Solution sol;
    sol.status = status;
    sol.iterations = iter_;
    if (tau_ > 0.0 && std::isfinite(tau_))
        sol.x = x_ / tau_; // certificate direction when infeasible
    else
        sol.x = x_;
    // maximize convention (the internal objective is -objective)
    sol.objective_value = std::isfinite(pcost_) ? -pcost_ + prog_.objective_offset : 0.0;
    sol.dual_objective = std::isfinite(dcost_) ? -dcost_ + prog_.objective_offset : 0.0;
    sol.primal_residual = pres_;
    sol.dual_residual = dres_;
    sol.duality_gap = relgap_;
    return sol;
}

Solution HsdSolver::run() {
    // Initialization solves use the identity scaling.
    scal_.identity = true;
    factor_kkt();

    x_.setZero(n_);
    y_.setZero(p_);
    z_.setZero(m_);
    s_.setZero(m_);

    Eigen::VectorXd dx1(n_), dy1(p_), dz1(m_), dx2(n_), dy2(p_), dz2(m_);

    // primal start: argmin ||Gx - h|| s.t. Ax = b, s brought into the cone
    solve_kkt(Eigen::VectorXd::Zero(n_), b_, h_, dx1, dy1, dz1);
    x_ = dx1;
    bring_to_cone(-dz1, s_);

    // dual start
    solve_kkt(-c_, Eigen::VectorXd::Zero(p_), Eigen::VectorXd::Zero(m_), dx2, dy2, dz2);
    y_ = dy2;
    bring_to_cone(dz2, z_);

    tau_ = 1.0;
    kap_ = 1.0;

    resx0_ = std::max(1.0, c_.norm());
    resy0_ = std::max(1.0, b_.norm());
    resz0_ = std::max(1.0, h_.norm());

    double pres_prev = std::numeric_limits<double>::max();
    SolveStatus status = SolveStatus::NumericalFailure;

    Eigen::VectorXd rhs_z(m_), ds1(m_), ds2(m_), ds_by_w(m_), w_dz(m_), ds_final(m_);

    const int max_iter = std::max(1, settings_.max_iterations);
    for (iter_ = 0; iter_ <= max_iter; ++iter_) {
        compute_residuals();
        update_statistics();

        const Exit e = check_exit(settings_.eps_feas, settings_.eps_gap);
        if (e == Exit::Optimal)
            return finish(SolveStatus::Optimal);
        if (e == Exit::PrimalInfeasible)
            return finish(SolveStatus::PrimalInfeasible);
        if (e == Exit::DualInfeasible)
            return finish(SolveStatus::DualInfeasible);

        // recover the best iterate when the update went bad
        if (iter_ > 0 &&
            (pres_ > kSafeguard * std::max(pres_prev, settings_.eps_feas * 1e-3) || gap_ < 0.0)) {
            if (best_.set) {
                x_ = best_.x; y_ = best_.y; z_ = best_.z; s_ = best_.s;
                tau_ = best_.tau; kap_ = best_.kap;
                compute_residuals();
                update_statistics();
            }
            if (check_exit(settings_.eps_feas, settings_.eps_gap) == Exit::Optimal)
                return finish(SolveStatus::Optimal);
            return finish(SolveStatus::NumericalFailure);
        }
        pres_prev = pres_;

        if (iter_ == max_iter) {
            const Exit r = check_exit(kFeasTolInacc, kGapTolInacc);
            status = SolveStatus::MaxIterations;
            if (r == Exit::PrimalInfeasible)
                status = SolveStatus::PrimalInfeasible;
            else if (r == Exit::DualInfeasible)
                status = SolveStatus::DualInfeasible;
            return finish(status);
        }
        if (!std::isfinite(pcost_) || !std::isfinite(mu_)) {
            if (best_.set) {
                x_ = best_.x; y_ = best_.y; z_ = best_.z; s_ = best_.s;
                tau_ = best_.tau; kap_ = best_.kap;
                compute_residuals();
                update_statistics();
            }
            return finish(check_exit(settings_.eps_feas, settings_.eps_gap) == Exit::Optimal
                              ? SolveStatus::Optimal
                              : SolveStatus::NumericalFailure);
        }

        // keep the best iterate seen so far
        if (std::isfinite(tolerance_score()) && (!best_.set || tolerance_score() < best_.score)) {
            best_.set = true;
            best_.x = x_; best_.y = y_; best_.z = z_; best_.s = s_;
            best_.tau = tau_; best_.kap = kap_;
            best_.score = tolerance_score();
        }
        // no barrier progress for a while: the linear algebra is exhausted
        if (mu_ < 0.98 * mu_min_) {
            mu_min_ = mu_;
            stall_ = 0;
        } else if (++stall_ > kStallLimit) {
            x_ = best_.x; y_ = best_.y; z_ = best_.z; s_ = best_.s;
            tau_ = best_.tau; kap_ = best_.kap;
            compute_residuals();
            update_statistics();
            return finish(check_exit(settings_.eps_feas, settings_.eps_gap) == Exit::Optimal
                              ? SolveStatus::Optimal
                              : SolveStatus::NumericalFailure);
        }

        if (!update_scaling()) {
            if (best_.set) {
                x_ = best_.x; y_ = best_.y; z_ = best_.z; s_ = best_.s;
                tau_ = best_.tau; kap_ = best_.kap;
                compute_residuals();
                update_statistics();
            }
            return finish(check_exit(settings_.eps_feas, settings_.eps_gap) == Exit::Optimal
                              ? SolveStatus::Optimal
                              : SolveStatus::NumericalFailure);
        }
        factor_kkt();

        // first direction, reused for the tau updates
        solve_kkt(-c_, b_, h_, dx1, dy1, dz1);

        // affine (predictor) direction
        rhs_z = s_ - rz_;
        solve_kkt(rx_, -ry_, rhs_z, dx2, dy2, dz2);

        const double dtau_denom =
            kap_ / tau_ - c_.dot(dx1) - (p_ > 0 ? b_.dot(dy1) : 0.0) - h_.dot(dz1);
        const double dtauaff =
            (rt_ - kap_ + c_.dot(dx2) + (p_ > 0 ? b_.dot(dy2) : 0.0) + h_.dot(dz2)) / dtau_denom;

        dz2 += dtauaff * dz1;
        apply_w(dz2, w_dz);
        ds_by_w = -w_dz - lambda_;
        const double dkapaff = -kap_ - kap_ / tau_ * dtauaff;

        const double step_aff = line_search(lambda_, ds_by_w, w_dz, tau_, dtauaff, kap_, dkapaff);
        const double sigma =
            std::clamp((1.0 - step_aff) * (1.0 - step_aff) * (1.0 - step_aff), kSigmaMin,
                       kSigmaMax);

        // combined (corrector) direction
        conic_product(lambda_, lambda_, ds1);
        conic_product(ds_by_w, w_dz, ds2);
        const double sigmamu = sigma * mu_;
        ds1 += ds2;
        ds1.head(cones_.n_lp).array() -= sigmamu;
        {
            int row = cones_.n_lp;
            for (int dim : cones_.soc_dims) {
                ds1(row) -= sigmamu;
                row += dim;
            }
        }
        conic_division(lambda_, ds1, ds_by_w); // lambda \ ds
        apply_w(ds_by_w, ds1);                 // W (lambda \ ds)
        const double one_minus_sigma = 1.0 - sigma;
        rhs_z = -one_minus_sigma * rz_ + ds1;
        solve_kkt(one_minus_sigma * rx_, -one_minus_sigma * ry_, rhs_z, dx2, dy2, dz2);

        const double bkap = kap_ * tau_ + dkapaff * dtauaff - sigmamu;
        const double dtau = (one_minus_sigma * rt_ - bkap / tau_ + c_.dot(dx2) +
                             (p_ > 0 ? b_.dot(dy2) : 0.0) + h_.dot(dz2)) /
                            dtau_denom;
        dx2 += dtau * dx1;
        if (p_ > 0)
            dy2 += dtau * dy1;
        dz2 += dtau * dz1;

        apply_w(dz2, w_dz);
        ds_by_w = -(ds_by_w + w_dz);
        const double dkap = -(bkap + kap_ * dtau) / tau_;

        const double step =
            kGamma * line_search(lambda_, ds_by_w, w_dz, tau_, dtau, kap_, dkap);
        if (settings_.verbose)
            std::printf("      step_aff %.3e sigma %.3e step %.3e dtau %.3e dtau_denom %.3e\n",
                        step_aff, sigma, step, dtau, dtau_denom);
        apply_w(ds_by_w, ds_final);

        x_ += step * dx2;
        if (p_ > 0)
            y_ += step * dy2;
        z_ += step * dz2;
        s_ += step * ds_final;
        kap_ += step * dkap;
        tau_ += step * dtau;

        // The embedding is homogeneous; renormalizing to tau + kappa = 1
        // keeps tau from drifting small and inflating the backscaled gap.
        const double rho = 1.0 / (tau_ + kap_);
        if (std::isfinite(rho) && rho > 0.0) {
            x_ *= rho;
            if (p_ > 0)
                y_ *= rho;
            z_ *= rho;
            s_ *= rho;
            kap_ *= rho;
            tau_ *= rho;
        }
    }
    return finish(status);
}

} // namespace

Solution solve(const ConicProgram& program, const SolverSettings& settings) {
    HsdSolver solver(program, settings);
    return solver.run();
}

} // namespace noma::conic
