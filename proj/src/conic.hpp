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

#ifndef nomabeam_conic_H
#define nomabeam_conic_H

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace noma::conic {

enum class ConeTag { Zero, Nonnegative, SecondOrder };

// Sparse affine form sum_i coeff_i * x_i + offset. Duplicate variable indices
// are allowed and accumulate.
struct LinExpr {
    std::vector<std::pair<int, double>> terms;
    double offset = 0.0;

    LinExpr() = default;
    LinExpr(double constant) : offset(constant) {} // NOLINT(google-explicit-constructor)

    static LinExpr variable(int index, double coeff = 1.0) {
        LinExpr e;
        e.terms.emplace_back(index, coeff);
        return e;
    }

    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(double s);
    double evaluate(const Eigen::VectorXd& x) const;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr a);

// Complex affine form as a (real, imaginary) pair of real forms.
struct CLinExpr {
    LinExpr re;
    LinExpr im;
    std::complex<double> evaluate(const Eigen::VectorXd& x) const {
        return {re.evaluate(x), im.evaluate(x)};
    }
};

// Standard-form cone program: maximize objective . x subject to, for every
// block, (coeff * x + offset)[block rows] lying in the block's cone.
struct ConicProgram {
    struct Block {
        ConeTag tag;
        int first_row;
        int rows;
    };

    int n = 0;
    Eigen::VectorXd objective; // maximize convention
    double objective_offset = 0.0;
    std::vector<Block> blocks;
    Eigen::MatrixXd coeff;  // total rows x n
    Eigen::VectorXd offset; // total rows

    int total_rows() const { return static_cast<int>(coeff.rows()); }
    Eigen::VectorXd block_values(int block_id, const Eigen::VectorXd& x) const;

    // Debug listing, one constraint block per line: `SOC m | ...`.
    // Not a stability contract.
    std::string dump() const;
};

// True when `values` lies in the cone within an absolute tolerance scaled by
// the block magnitude.
bool in_cone(ConeTag tag, const Eigen::VectorXd& values, double tol);

// Single-owner mutable builder for ConicProgram.
class ProgramBuilder {
  public:
    int add_variable();
    std::vector<int> add_variables(int count);
    int num_variables() const { return num_vars_; }
    int num_blocks() const { return static_cast<int>(rows_per_block_.size()); }

    void maximize(const LinExpr& objective) { objective_ = objective; }

    // Raw blocks; each returns the block id.
    int add_zero(const LinExpr& e);
    int add_nonnegative(const LinExpr& e);
    int add_second_order(std::vector<LinExpr> rows); // rows[0] >= ||rows[1:]||

    // Encodes sum_j |forms_j|^2 + constant^2 <= bound through the rotated
    // second-order pattern ||(forms..., constant, (bound-1)/2)|| <= (bound+1)/2.
    // Satisfiable iff the quadratic inequality holds with bound >= 0.
    // A zero constant contributes no row. Negative constants are rejected.
    int add_quadratic_upper_bound(std::span<const CLinExpr> forms, double constant,
                                  const LinExpr& bound);

    // Encodes t <= (prod_k r_k)^(1/N) together with r_k >= 0 via a binary tree
    // of hyperbolic constraints u^2 <= x*y, each as ||(2u, x-y)|| <= x+y. For
    // N not a power of two the tree is padded with copies of t itself, which
    // preserves the epigraph exactly. Returns the ids of all blocks added.
    std::vector<int> add_geometric_mean_epigraph(std::span<const int> r_vars, int t_var);

    ConicProgram build() const;

  private:
    int add_block(ConeTag tag, std::vector<LinExpr> rows);
    void check_expr(const LinExpr& e) const;

    int num_vars_ = 0;
    LinExpr objective_;
    std::vector<ConeTag> tags_;
    std::vector<std::vector<LinExpr>> rows_per_block_;
};

// Number of blocks add_geometric_mean_epigraph produces for a given operand
// count (the constant `c` in the complexity estimates).
int geomean_block_count(int operands);

enum class SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    NumericalFailure,
};

const char* to_string(SolveStatus status);

struct SolverSettings {
    double eps_feas = 1e-8;
    double eps_gap = 1e-8;
    int max_iterations = 200;
    bool verbose = false;
};

struct Solution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;
    double objective_value = 0.0; // maximize convention, includes offset
    double dual_objective = 0.0;  // maximize convention, includes offset
    double primal_residual = 0.0; // relative measure tested against eps_feas
    double dual_residual = 0.0;
    double duality_gap = 0.0; // absolute s'z after unscaling
    int iterations = 0;
};

// Primal-dual interior-point solve over the product cone (homogeneous
// self-dual embedding, Nesterov-Todd scaling, predictor-corrector steps,
// dense KKT factorization). Deterministic: identical program and settings
// give an identical Solution.
Solution solve(const ConicProgram& program, const SolverSettings& settings = {});

} // namespace noma::conic

#endif
