#include "treecast/lp.hpp"

#include <algorithm>
#include <stdexcept>

namespace treecast::lp {

namespace {

constexpr double kEnterTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr long kMaxIters = 200000;

struct Tableau {
    Eigen::MatrixXd t;          // m x (cols + 1), last column is b
    std::vector<int> basis;     // basic column per row
    int cols = 0;

    void pivot(int row, int col) {
        t.row(row) /= t(row, col);
        for (int i = 0; i < t.rows(); ++i) {
            if (i == row) continue;
            double f = t(i, col);
            if (f != 0.0) t.row(i) -= f * t.row(row);
        }
        basis[static_cast<size_t>(row)] = col;
    }
};

// Bland's rule simplex on the tableau for costs `cost` (indexed by column),
// entering restricted to columns with allow[j]. Returns false on
// unboundedness.
bool run_simplex(Tableau& tab, const Eigen::VectorXd& cost, const std::vector<bool>& allow) {
    const int m = static_cast<int>(tab.t.rows());
    for (long iter = 0; iter < kMaxIters; ++iter) {
        // reduced costs r_j = c_j - c_B . column_j (on the current tableau
        // the basic columns are unit vectors, so c_B . column_j is a short sum)
        int enter = -1;
        for (int j = 0; j < tab.cols; ++j) {
            if (!allow[static_cast<size_t>(j)]) continue;
            double r = cost[j];
            for (int i = 0; i < m; ++i) {
                double cb = cost[tab.basis[static_cast<size_t>(i)]];
                if (cb != 0.0) r -= cb * tab.t(i, j);
            }
            if (r < -kEnterTol) {
                enter = j;
                break;  // Bland: smallest eligible index
            }
        }
        if (enter < 0) return true;  // optimal
        int leave = -1;
        double best_ratio = 0.0;
        for (int i = 0; i < m; ++i) {
            double a = tab.t(i, enter);
            if (a <= kPivotTol) continue;
            double ratio = tab.t(i, tab.cols) / a;
            if (leave < 0 || ratio < best_ratio - 1e-15 ||
                (std::abs(ratio - best_ratio) <= 1e-15 &&
                 tab.basis[static_cast<size_t>(i)] < tab.basis[static_cast<size_t>(leave)])) {
                leave = i;
                best_ratio = ratio;
            }
        }
        if (leave < 0) return false;  // unbounded in this direction
        tab.pivot(leave, enter);
    }
    throw std::runtime_error("simplex: iteration limit hit");
}

}  // namespace

Solution solve(const Problem& p) {
    const int m = static_cast<int>(p.A.rows());
    const int n = static_cast<int>(p.A.cols());
    int num_slack = 0;
    for (bool eq : p.equality) num_slack += eq ? 0 : 1;

    const int slack0 = n;
    const int art0 = n + num_slack;
    const int cols = n + num_slack + m;

    Tableau tab;
    tab.cols = cols;
    tab.t = Eigen::MatrixXd::Zero(m, cols + 1);
    tab.basis.assign(static_cast<size_t>(m), -1);
    std::vector<int> slack_of_row(static_cast<size_t>(m), -1);
    std::vector<double> row_sign(static_cast<size_t>(m), 1.0);

    int next_slack = slack0;
    for (int i = 0; i < m; ++i) {
        double sign = p.b[i] < 0.0 ? -1.0 : 1.0;
        row_sign[static_cast<size_t>(i)] = sign;
        tab.t.block(i, 0, 1, n) = sign * p.A.row(i);
        tab.t(i, cols) = sign * p.b[i];
        if (!p.equality[static_cast<size_t>(i)]) {
            slack_of_row[static_cast<size_t>(i)] = next_slack;
            tab.t(i, next_slack) = sign;
            ++next_slack;
        }
        tab.t(i, art0 + i) = 1.0;
        tab.basis[static_cast<size_t>(i)] = art0 + i;
    }

    Solution sol;

    // Phase 1: drive the artificial variables to zero.
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
    for (int i = 0; i < m; ++i) phase1[art0 + i] = 1.0;
    std::vector<bool> allow_all(static_cast<size_t>(cols), true);
    if (!run_simplex(tab, phase1, allow_all))
        throw std::runtime_error("simplex: phase 1 unbounded");
    double infeas = 0.0;
    for (int i = 0; i < m; ++i)
        if (tab.basis[static_cast<size_t>(i)] >= art0) infeas += tab.t(i, cols);
    if (infeas > 1e-7 * std::max(1.0, p.b.cwiseAbs().maxCoeff())) {
        sol.status = Status::Infeasible;
        return sol;
    }
    // Pivot out any artificial still basic at zero; an all-zero row is a
    // redundant constraint and is dropped.
    for (int i = 0; i < m; ++i) {
        if (tab.basis[static_cast<size_t>(i)] < art0) continue;
        int col = -1;
        for (int j = 0; j < art0; ++j)
            if (std::abs(tab.t(i, j)) > kPivotTol) {
                col = j;
                break;
            }
        if (col >= 0) tab.pivot(i, col);
    }
    std::vector<int> live_rows;  // original row index per kept tableau row
    for (int i = 0; i < m; ++i)
        if (tab.basis[static_cast<size_t>(i)] < art0) live_rows.push_back(i);
    if (static_cast<int>(live_rows.size()) < m) {
        Eigen::MatrixXd t2(live_rows.size(), cols + 1);
        std::vector<int> b2;
        for (size_t k = 0; k < live_rows.size(); ++k) {
            t2.row(static_cast<int>(k)) = tab.t.row(live_rows[k]);
            b2.push_back(tab.basis[static_cast<size_t>(live_rows[k])]);
        }
        tab.t = std::move(t2);
        tab.basis = std::move(b2);
    }

    // Phase 2: the real objective, artificials barred from re-entering.
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
    phase2.head(n) = p.c;
    std::vector<bool> allow(static_cast<size_t>(cols), true);
    for (int j = art0; j < cols; ++j) allow[static_cast<size_t>(j)] = false;
    if (!run_simplex(tab, phase2, allow)) {
        sol.status = Status::Unbounded;
        return sol;
    }

    sol.status = Status::Optimal;
    sol.x = Eigen::VectorXd::Zero(n);
    const int rows_left = static_cast<int>(tab.t.rows());
    for (int i = 0; i < rows_left; ++i)
        if (tab.basis[static_cast<size_t>(i)] < n) sol.x[tab.basis[static_cast<size_t>(i)]] = tab.t(i, tab.cols);
    sol.objective = p.c.dot(sol.x);

    // Duals from the basis of the original (sign-normalized) system:
    // solve B^T y = c_B, then undo the row flips. Redundant rows that were
    // dropped get a padding unit column, pinning their multiplier to zero.
    Eigen::MatrixXd basis_mat = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd cb = Eigen::VectorXd::Zero(m);
    int slot = 0;
    for (int i = 0; i < rows_left; ++i, ++slot) {
        int j = tab.basis[static_cast<size_t>(i)];
        if (j < n) {
            for (int r = 0; r < m; ++r) basis_mat(r, slot) = row_sign[static_cast<size_t>(r)] * p.A(r, j);
            cb[slot] = p.c[j];
        } else if (j < art0) {
            for (int r = 0; r < m; ++r)
                if (slack_of_row[static_cast<size_t>(r)] == j) basis_mat(r, slot) = row_sign[static_cast<size_t>(r)];
        }
    }
    std::vector<bool> kept(static_cast<size_t>(m), false);
    for (int r : live_rows) kept[static_cast<size_t>(r)] = true;
    for (int r = 0; r < m; ++r)
        if (!kept[static_cast<size_t>(r)]) basis_mat(r, slot++) = 1.0;
    Eigen::VectorXd y = basis_mat.transpose().fullPivLu().solve(cb);
    sol.y = Eigen::VectorXd(m);
    for (int r = 0; r < m; ++r) sol.y[r] = row_sign[static_cast<size_t>(r)] * y[r];
    return sol;
}

}  // namespace treecast::lp
