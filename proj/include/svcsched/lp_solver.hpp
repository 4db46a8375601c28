#pragma once

#include <string>
#include <utility>
#include <vector>

namespace svcsched {

/// Linear program in standard equality form: maximize objective . x subject
/// to A x = rhs, x >= 0. Columns are stored compressed (CSC) since every
/// builder in this toolkit works column by column.
struct LpProblem {
    int num_vars = 0;
    int num_constraints = 0;
    std::vector<double> objective;
    std::vector<int> col_ptr{0};
    std::vector<int> row_idx;
    std::vector<double> values;
    std::vector<double> rhs;

    /// Provenance of a column for RB/MUSMDP problems: (group, state, action).
    /// Empty for generic problems.
    struct VarKey {
        int group = -1;
        int state = -1;
        int action = -1;
    };
    std::vector<VarKey> var_keys;
    std::string kind = "generic";

    /// Appends one column; duplicate row entries are merged.
    void add_column(double objective_coefficient, std::vector<std::pair<int, double>> entries);
    void check_consistent() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(SolveStatus status);

struct SolverOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    long max_iterations = 1000000;
    // Consecutive degenerate pivots before falling back to Bland's rule.
    int bland_after_degenerate = 50;
    // Basis refactorization cadence (eta-file length cap).
    int refactor_interval = 100;
};

struct LpSolution {
    SolveStatus status = SolveStatus::Optimal;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<double> duals;
    /// gamma_j = duals . A_j - objective_j: the rate of objective decrease per
    /// unit increase of x_j, nonnegative for every variable at an optimum.
    std::vector<double> reduced_costs;
    long iterations = 0;
    /// Farkas duals when infeasible; an improving ray (in x space) when
    /// unbounded; empty otherwise.
    std::vector<double> certificate;
    std::string message;

    bool optimal() const { return status == SolveStatus::Optimal; }
};

/// Revised simplex (Phase I / Phase II) with a sparse-LU-factorized basis,
/// product-form updates, Dantzig pricing and a Bland anti-cycling fallback.
LpSolution solve(const LpProblem& problem, const SolverOptions& options = {});

}  // namespace svcsched
