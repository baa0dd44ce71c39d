#pragma once

#include <Eigen/Dense>
#include <vector>

namespace treecast::lp {

// Minimize c.x subject to row-wise constraints A x <= b or A x == b and
// x >= 0. Desk-scale dense solver; every pivot rule is deterministic
// (Bland's rule), so identical inputs give identical solutions.
struct Problem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    std::vector<bool> equality;  // per row; false = "<="
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
    Status status = Status::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
    // Row duals in the original row orientation: objective == b.y at the
    // optimum and c - A^T y >= 0 componentwise ("<=" rows get y <= 0 for a
    // minimization).
    Eigen::VectorXd y;
};

Solution solve(const Problem& p);

}  // namespace treecast::lp
