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

#include "conic.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace noma::conic {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    offset += o.offset;
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
    for (const auto& [idx, coeff] : o.terms)
        terms.emplace_back(idx, -coeff);
    offset -= o.offset;
    return *this;
}

LinExpr& LinExpr::operator*=(double s) {
    for (auto& [idx, coeff] : terms)
        coeff *= s;
    offset *= s;
    return *this;
}

double LinExpr::evaluate(const Eigen::VectorXd& x) const {
    double acc = offset;
    for (const auto& [idx, coeff] : terms)
        acc += coeff * x(idx);
    return acc;
}

LinExpr operator+(LinExpr a, const LinExpr& b) {
    a += b;
    return a;
}

LinExpr operator-(LinExpr a, const LinExpr& b) {
    a -= b;
    return a;
}

LinExpr operator*(double s, LinExpr a) {
    a *= s;
    return a;
}

Eigen::VectorXd ConicProgram::block_values(int block_id, const Eigen::VectorXd& x) const {
    const Block& blk = blocks.at(static_cast<std::size_t>(block_id));
    return coeff.middleRows(blk.first_row, blk.rows) * x + offset.segment(blk.first_row, blk.rows);
}

std::string ConicProgram::dump() const {
    std::ostringstream os;
    os << "vars " << n << " blocks " << blocks.size() << "\n";
    for (const Block& blk : blocks) {
        switch (blk.tag) {
        case ConeTag::Zero: os << "ZERO " << blk.rows; break;
        case ConeTag::Nonnegative: os << "NONNEG " << blk.rows; break;
        case ConeTag::SecondOrder: os << "SOC " << blk.rows; break;
        }
        os << " |";
        for (int r = 0; r < blk.rows; ++r) {
            for (int j = 0; j < n; ++j) {
                const double cij = coeff(blk.first_row + r, j);
                if (cij != 0.0)
                    os << " " << j << ":" << cij;
            }
            os << " +" << offset(blk.first_row + r);
            if (r + 1 < blk.rows)
                os << " ;";
        }
        os << "\n";
    }
    return os.str();
}

bool in_cone(ConeTag tag, const Eigen::VectorXd& values, double tol) {
    const double scale = 1.0 + values.lpNorm<Eigen::Infinity>();
    const double slack = tol * scale;
    switch (tag) {
    case ConeTag::Zero:
        return values.lpNorm<Eigen::Infinity>() <= slack;
    case ConeTag::Nonnegative:
        return values.minCoeff() >= -slack;
    case ConeTag::SecondOrder:
        return values(0) + slack >= values.tail(values.size() - 1).norm();
    }
    return false;
}

int ProgramBuilder::add_variable() { return num_vars_++; }

std::vector<int> ProgramBuilder::add_variables(int count) {
    std::vector<int> ids(static_cast<std::size_t>(count));
    for (auto& id : ids)
        id = add_variable();
    return ids;
}

void ProgramBuilder::check_expr(const LinExpr& e) const {
    for (const auto& [idx, coeff] : e.terms) {
        (void)coeff;
        if (idx < 0 || idx >= num_vars_)
            throw std::invalid_argument("ProgramBuilder: expression references unknown variable");
    }
}

int ProgramBuilder::add_block(ConeTag tag, std::vector<LinExpr> rows) {
    if (rows.empty())
        throw std::invalid_argument("ProgramBuilder: empty block");
    if (tag == ConeTag::SecondOrder && rows.size() < 2)
        throw std::invalid_argument("ProgramBuilder: second-order block needs dimension >= 2");
    for (const LinExpr& e : rows)
        check_expr(e);
    tags_.push_back(tag);
    rows_per_block_.push_back(std::move(rows));
    return static_cast<int>(rows_per_block_.size()) - 1;
}

int ProgramBuilder::add_zero(const LinExpr& e) { return add_block(ConeTag::Zero, {e}); }

int ProgramBuilder::add_nonnegative(const LinExpr& e) {
    return add_block(ConeTag::Nonnegative, {e});
}

int ProgramBuilder::add_second_order(std::vector<LinExpr> rows) {
    return add_block(ConeTag::SecondOrder, std::move(rows));
}

int ProgramBuilder::add_quadratic_upper_bound(std::span<const CLinExpr> forms, double constant,
                                              const LinExpr& bound) {
    if (constant < 0.0)
        throw std::invalid_argument("add_quadratic_upper_bound: constant must be >= 0");
    std::vector<LinExpr> rows;
    rows.reserve(forms.size() * 2 + 3);
    rows.push_back(0.5 * (bound + LinExpr(1.0))); // (bound+1)/2 bounds the norm
    for (const CLinExpr& f : forms) {
        rows.push_back(f.re);
        rows.push_back(f.im);
    }
    if (constant > 0.0)
        rows.push_back(LinExpr(constant));
    rows.push_back(0.5 * (bound - LinExpr(1.0)));
    return add_block(ConeTag::SecondOrder, std::move(rows));
}

namespace {

// Hyperbolic constraint u^2 <= x*y (x, y >= 0) as ||(2u, x-y)|| <= x+y.
std::vector<LinExpr> hyperbolic_rows(const LinExpr& u, const LinExpr& x, const LinExpr& y) {
    return {x + y, 2.0 * u, x - y};
}

} // namespace

std::vector<int> ProgramBuilder::add_geometric_mean_epigraph(std::span<const int> r_vars,
                                                             int t_var) {
    if (r_vars.empty())
        throw std::invalid_argument("add_geometric_mean_epigraph: need at least one operand");
    std::vector<int> block_ids;
    const LinExpr t = LinExpr::variable(t_var);
    if (r_vars.size() == 1) {
        block_ids.push_back(add_nonnegative(LinExpr::variable(r_vars[0]) - t));
        block_ids.push_back(add_nonnegative(LinExpr::variable(r_vars[0])));
        return block_ids;
    }

    std::size_t padded = 1;
    while (padded < r_vars.size())
        padded *= 2;

    // Leaves: the operands followed by copies of t. A pure-t pair collapses to
    // t, so padding adds no spurious blocks.
    struct Node {
        LinExpr expr;
        bool is_t;
    };
    std::vector<Node> level;
    level.reserve(padded);
    for (int rv : r_vars)
        level.push_back({LinExpr::variable(rv), false});
    for (std::size_t i = r_vars.size(); i < padded; ++i)
        level.push_back({t, true});

    while (level.size() > 2) {
        std::vector<Node> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) {
            if (level[i].is_t && level[i + 1].is_t) {
                next.push_back({t, true});
                continue;
            }
            const LinExpr u = LinExpr::variable(add_variable());
            block_ids.push_back(
                add_second_order(hyperbolic_rows(u, level[i].expr, level[i + 1].expr)));
            next.push_back({u, false});
        }
        level = std::move(next);
    }
    // Root: t itself is the geometric-mean bound.
    block_ids.push_back(add_second_order(hyperbolic_rows(t, level[0].expr, level[1].expr)));
    return block_ids;
}

ConicProgram ProgramBuilder::build() const {
    ConicProgram p;
    p.n = num_vars_;
    p.objective = Eigen::VectorXd::Zero(num_vars_);
    for (const auto& [idx, coeff] : objective_.terms)
        p.objective(idx) += coeff;
    p.objective_offset = objective_.offset;

    int total = 0;
    for (const auto& rows : rows_per_block_)
        total += static_cast<int>(rows.size());
    p.coeff = Eigen::MatrixXd::Zero(total, num_vars_);
    p.offset = Eigen::VectorXd::Zero(total);
    int row = 0;
    for (std::size_t b = 0; b < rows_per_block_.size(); ++b) {
        p.blocks.push_back(
            {tags_[b], row, static_cast<int>(rows_per_block_[b].size())});
        for (const LinExpr& e : rows_per_block_[b]) {
            for (const auto& [idx, coeff] : e.terms)
                p.coeff(row, idx) += coeff;
            p.offset(row) = e.offset;
            ++row;
        }
    }
    return p;
}

int geomean_block_count(int operands) {
    ProgramBuilder scratch;
    const std::vector<int> r = scratch.add_variables(operands);
    const int t = scratch.add_variable();
    return static_cast<int>(scratch.add_geometric_mean_epigraph(r, t).size());
}

const char* to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal_infeasible";
    case SolveStatus::DualInfeasible: return "dual_infeasible";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

} // namespace noma::conic
