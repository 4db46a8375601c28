#include "svcsched/lp_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace svcsched {

void LpProblem::add_column(double objective_coefficient, std::vector<std::pair<int, double>> entries) {
    std::map<int, double> merged;
    for (const auto& [row, value] : entries) {
        if (row < 0 || row >= num_constraints)
            throw std::invalid_argument("LpProblem::add_column: row index out of range");
        merged[row] += value;
    }
    for (const auto& [row, value] : merged) {
        if (value == 0.0) continue;
        row_idx.push_back(row);
        values.push_back(value);
    }
    col_ptr.push_back(static_cast<int>(row_idx.size()));
    objective.push_back(objective_coefficient);
    ++num_vars;
}

void LpProblem::check_consistent() const {
    if (static_cast<int>(objective.size()) != num_vars ||
        static_cast<int>(col_ptr.size()) != num_vars + 1 ||
        static_cast<int>(rhs.size()) != num_constraints ||
        row_idx.size() != values.size())
        throw std::invalid_argument("LpProblem: inconsistent dimensions");
    if (!var_keys.empty() && static_cast<int>(var_keys.size()) != num_vars)
        throw std::invalid_argument("LpProblem: var_keys must name every variable or none");
}

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration_limit";
    }
    return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-9;
// Pivots below this are recomputed on fresh factors before being trusted:
// product-form noise on a long eta file can dress up a structurally zero
// entry as a small pivot.
constexpr double kPivotAccept = 1e-6;
constexpr double kDegenerateTol = 1e-11;

using SpMat = Eigen::SparseMatrix<double>;

/// Simplex working state over the column set [structural | artificial].
/// Artificial column i is the i-th identity column; rows are pre-flipped so
/// the right-hand side is nonnegative.
class Simplex {
  public:
    Simplex(const LpProblem& problem, const SolverOptions& options)
        : lp_(problem), opts_(options), m_(problem.num_constraints), n_(problem.num_vars) {
        row_sign_.assign(m_, 1.0);
        b_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            if (lp_.rhs[i] < 0.0) row_sign_[i] = -1.0;
            b_[i] = lp_.rhs[i] * row_sign_[i];
        }
        basis_.resize(m_);
        for (int i = 0; i < m_; ++i) basis_[i] = n_ + i;
        in_basis_.assign(n_ + m_, false);
        for (int j : basis_) in_basis_[j] = true;
        x_basic_ = b_;
        costs_.assign(n_ + m_, 0.0);
        refactorize();
    }

    // Phase I: maximize -(sum of artificials).
    bool run_phase_one(long& iterations) {
        std::fill(costs_.begin(), costs_.end(), 0.0);
        for (int j = n_; j < n_ + m_; ++j) costs_[j] = -1.0;
        phase_one_ = true;
        return run(iterations);
    }

    bool run_phase_two(long& iterations) {
        for (int j = 0; j < n_; ++j) costs_[j] = lp_.objective[j];
        for (int j = n_; j < n_ + m_; ++j) costs_[j] = 0.0;
        phase_one_ = false;
        return run(iterations);
    }

    double phase_objective() const {
        double total = 0.0;
        for (int i = 0; i < m_; ++i) total += costs_[basis_[i]] * x_basic_[i];
        return total;
    }

    std::vector<double> structural_solution() const {
        std::vector<double> x(n_, 0.0);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) x[basis_[i]] = std::max(0.0, x_basic_[i]);
        return x;
    }

    /// Duals in terms of the original (unflipped) rows.
    std::vector<double> duals() const {
        std::vector<double> y = btran(basic_costs());
        for (int i = 0; i < m_; ++i) y[i] *= row_sign_[i];
        return y;
    }

    std::vector<double> reduced_costs(const std::vector<double>& original_duals) const {
        std::vector<double> gamma(n_, 0.0);
        for (int j = 0; j < n_; ++j) {
            double dot = 0.0;
            for (int k = lp_.col_ptr[j]; k < lp_.col_ptr[j + 1]; ++k)
                dot += original_duals[lp_.row_idx[k]] * lp_.values[k];
            gamma[j] = dot - lp_.objective[j];
        }
        return gamma;
    }

    bool artificial_mass_positive(double tol) const {
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= n_ && x_basic_[i] > tol) return true;
        return false;
    }

    /// Recomputes the basic values from a fresh factorization, discarding
    /// accumulated product-form drift before the solution is read out.
    void refresh() { refactorize(); }

    std::vector<double> unbounded_ray() const { return ray_; }

    bool hit_iteration_limit() const { return hit_limit_; }

  private:
    std::vector<double> basic_costs() const {
        std::vector<double> cb(m_);
        for (int i = 0; i < m_; ++i) cb[i] = costs_[basis_[i]];
        return cb;
    }

    // Column entries of the working matrix (row-flipped structural or
    // artificial identity column).
    void column_entries(int j, std::vector<std::pair<int, double>>& out) const {
        out.clear();
        if (j < n_) {
            for (int k = lp_.col_ptr[j]; k < lp_.col_ptr[j + 1]; ++k)
                out.emplace_back(lp_.row_idx[k], lp_.values[k] * row_sign_[lp_.row_idx[k]]);
        } else {
            out.emplace_back(j - n_, 1.0);
        }
    }

    void refactorize() {
        std::vector<Eigen::Triplet<double>> triplets;
        std::vector<std::pair<int, double>> entries;
        for (int i = 0; i < m_; ++i) {
            column_entries(basis_[i], entries);
            for (const auto& [row, value] : entries) triplets.emplace_back(row, i, value);
        }
        SpMat basis_matrix(m_, m_);
        basis_matrix.setFromTriplets(triplets.begin(), triplets.end());
        lu_.compute(basis_matrix);
        if (lu_.info() != Eigen::Success)
            throw std::runtime_error("lp_solver: basis factorization failed");
        etas_.clear();
        // Fresh basic values from the factorization.
        x_basic_ = ftran_dense(b_);
    }

    std::vector<double> ftran_dense(const std::vector<double>& rhs) const {
        Eigen::Map<const Eigen::VectorXd> v(rhs.data(), m_);
        Eigen::VectorXd solved = lu_.solve(v);
        std::vector<double> out(solved.data(), solved.data() + m_);
        for (const auto& eta : etas_) {
            double pivot_value = out[eta.row] / eta.column[eta.row];
            out[eta.row] = pivot_value;
            if (pivot_value != 0.0) {
                for (int i = 0; i < m_; ++i)
                    if (i != eta.row) out[i] -= eta.column[i] * pivot_value;
            }
        }
        return out;
    }

    std::vector<double> ftran_column(int j) const {
        std::vector<double> dense(m_, 0.0);
        std::vector<std::pair<int, double>> entries;
        column_entries(j, entries);
        for (const auto& [row, value] : entries) dense[row] = value;
        return ftran_dense(dense);
    }

    std::vector<double> btran(const std::vector<double>& costs_in) const {
        std::vector<double> z = costs_in;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double acc = z[it->row];
            for (int i = 0; i < m_; ++i)
                if (i != it->row) acc -= it->column[i] * z[i];
            z[it->row] = acc / it->column[it->row];
        }
        Eigen::Map<const Eigen::VectorXd> v(z.data(), m_);
        Eigen::VectorXd solved = lu_.adjoint().solve(v);
        return std::vector<double>(solved.data(), solved.data() + m_);
    }

    // Entering column choice. Dantzig by default, Bland under degeneracy.
    int price(const std::vector<double>& y, bool bland) const {
        int chosen = -1;
        double best = opts_.optimality_tol;
        std::vector<std::pair<int, double>> entries;
        int candidates = phase_one_ ? n_ + m_ : n_;
        for (int j = 0; j < candidates; ++j) {
            if (in_basis_[j]) continue;
            double dot = 0.0;
            if (j < n_) {
                for (int k = lp_.col_ptr[j]; k < lp_.col_ptr[j + 1]; ++k)
                    dot += y[lp_.row_idx[k]] * lp_.values[k] * row_sign_[lp_.row_idx[k]];
            } else {
                dot = y[j - n_];
            }
            double improvement = costs_[j] - dot;
            if (improvement > best) {
                chosen = j;
                if (bland) return chosen;
                best = improvement;
            }
        }
        return chosen;
    }

    // Leaving row: standard min-ratio over decreasing basics. Artificials
    // sitting at zero must not drift, so any movement in their row makes
    // them leave immediately. Near-ties prefer the largest pivot magnitude
    // (or the lowest basic column index when Bland's rule is active); the
    // applied step is the chosen row's exact ratio so it leaves at zero.
    int ratio_test(const std::vector<double>& w, bool bland, double& theta) const {
        auto ratio_of = [&](int i, double& out) {
            double wi = w[i];
            if (wi > kPivotTol) {
                out = std::max(0.0, x_basic_[i]) / wi;
                return true;
            }
            if (!phase_one_ && basis_[i] >= n_ && wi < -kPivotTol) {
                out = std::max(0.0, x_basic_[i]) / -wi;
                return true;
            }
            return false;
        };
        double theta_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i) {
            double r;
            if (ratio_of(i, r)) theta_min = std::min(theta_min, r);
        }
        if (!std::isfinite(theta_min)) return -1;
        double band = 1e-9 * (1.0 + theta_min);
        int leave = -1;
        for (int i = 0; i < m_; ++i) {
            double r;
            if (!ratio_of(i, r) || r > theta_min + band) continue;
            if (leave < 0) {
                leave = i;
                continue;
            }
            bool better = bland ? basis_[i] < basis_[leave]
                                : std::abs(w[i]) > std::abs(w[leave]) + 1e-12 ||
                                      (std::abs(w[i]) >= std::abs(w[leave]) - 1e-12 &&
                                       basis_[i] < basis_[leave]);
            if (better) leave = i;
        }
        double chosen = 0.0;
        ratio_of(leave, chosen);
        theta = std::max(0.0, chosen);
        return leave;
    }

    bool run(long& iterations) {
        int consecutive_degenerate = 0;
        hit_limit_ = false;
        ray_.clear();
        while (true) {
            if (iterations >= opts_.max_iterations) {
                hit_limit_ = true;
                return false;
            }
            std::vector<double> y = btran(basic_costs());
            bool bland = consecutive_degenerate >= opts_.bland_after_degenerate;
            int entering = price(y, bland);
            if (entering < 0) return true;  // optimal for this phase
            std::vector<double> w = ftran_column(entering);
            double theta = 0.0;
            int leaving = ratio_test(w, bland, theta);
            if (leaving < 0) {
                // Unbounded direction: x_entering grows, basics move by -w.
                ray_.assign(n_, 0.0);
                if (entering < n_) ray_[entering] = 1.0;
                for (int i = 0; i < m_; ++i)
                    if (basis_[i] < n_) ray_[basis_[i]] = -w[i];
                return false;
            }
            if (std::abs(w[leaving]) < kPivotAccept && !etas_.empty()) {
                // Suspiciously small pivot through stale eta factors: refresh
                // and redo this iteration against exact factors.
                refactorize();
                continue;
            }
            ++iterations;
            for (int i = 0; i < m_; ++i) x_basic_[i] -= theta * w[i];
            x_basic_[leaving] = theta;
            in_basis_[basis_[leaving]] = false;
            in_basis_[entering] = true;
            basis_[leaving] = entering;
            etas_.push_back({leaving, std::move(w)});
            if (static_cast<int>(etas_.size()) >= opts_.refactor_interval) refactorize();
            consecutive_degenerate = theta <= kDegenerateTol ? consecutive_degenerate + 1 : 0;
        }
    }

    struct Eta {
        int row;
        std::vector<double> column;
    };

    const LpProblem& lp_;
    const SolverOptions& opts_;
    int m_, n_;
    std::vector<double> row_sign_;
    std::vector<double> b_;
    std::vector<int> basis_;
    std::vector<bool> in_basis_;
    std::vector<double> x_basic_;
    std::vector<double> costs_;
    std::vector<double> ray_;
    bool phase_one_ = false;
    bool hit_limit_ = false;
    // mutable: SparseLU::adjoint() is a non-const accessor even for solves.
    mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;
};

}  // namespace

LpSolution solve(const LpProblem& problem, const SolverOptions& options) {
    problem.check_consistent();
    LpSolution solution;
    if (problem.num_constraints == 0) {
        // Degenerate but legal: optimum is zero unless some objective
        // coefficient is positive, in which case the problem is unbounded.
        for (int j = 0; j < problem.num_vars; ++j) {
            if (problem.objective[j] > options.optimality_tol) {
                solution.status = SolveStatus::Unbounded;
                solution.certificate.assign(problem.num_vars, 0.0);
                solution.certificate[j] = 1.0;
                solution.message = "no constraints and a positive objective coefficient";
                return solution;
            }
        }
        solution.x.assign(problem.num_vars, 0.0);
        solution.reduced_costs.assign(problem.num_vars, 0.0);
        for (int j = 0; j < problem.num_vars; ++j) solution.reduced_costs[j] = -problem.objective[j];
        return solution;
    }

    Simplex simplex(problem, options);
    long iterations = 0;

    bool phase_one_done = simplex.run_phase_one(iterations);
    if (!phase_one_done && simplex.hit_iteration_limit()) {
        solution.status = SolveStatus::IterationLimit;
        solution.iterations = iterations;
        solution.message = "iteration limit reached in phase one";
        return solution;
    }
    double infeasibility = -simplex.phase_objective();
    double rhs_scale = 1.0;
    for (double v : problem.rhs) rhs_scale = std::max(rhs_scale, std::abs(v));
    if (infeasibility > options.feasibility_tol * rhs_scale ||
        simplex.artificial_mass_positive(options.feasibility_tol * rhs_scale)) {
        solution.status = SolveStatus::Infeasible;
        solution.iterations = iterations;
        // Phase-one duals certify infeasibility: y.A_j >= 0 for every column
        // while y.rhs < 0, so no nonnegative x can satisfy A x = rhs.
        solution.certificate = simplex.duals();
        solution.message = "phase one ended with residual infeasibility " + std::to_string(infeasibility);
        return solution;
    }

    bool phase_two_done = simplex.run_phase_two(iterations);
    solution.iterations = iterations;
    if (!phase_two_done) {
        if (simplex.hit_iteration_limit()) {
            solution.status = SolveStatus::IterationLimit;
            solution.message = "iteration limit reached in phase two";
            solution.x = simplex.structural_solution();
            return solution;
        }
        solution.status = SolveStatus::Unbounded;
        solution.certificate = simplex.unbounded_ray();
        solution.message = "improving ray detected";
        return solution;
    }

    solution.status = SolveStatus::Optimal;
    simplex.refresh();
    solution.x = simplex.structural_solution();
    solution.duals = simplex.duals();
    solution.reduced_costs = simplex.reduced_costs(solution.duals);
    double objective = 0.0;
    for (int j = 0; j < problem.num_vars; ++j) objective += problem.objective[j] * solution.x[j];
    solution.objective = objective;
    return solution;
}

}  // namespace svcsched
