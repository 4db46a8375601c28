#pragma once

#include <vector>

#include "svcsched/lp_solver.hpp"
#include "svcsched/rb_lp.hpp"

namespace svcsched {

/// Per-state slices of a solved RB problem for one group.
struct GroupSolution {
    std::vector<double> x0, x1;          // occupancy measures per state
    std::vector<double> gamma0, gamma1;  // reduced costs per state
};

GroupSolution extract_group_solution(const LpSolution& solution, const RbSolutionView& view);

/// States whose occupancy measure is zero are exactly the states the optimal
/// policy can never visit. Returns the retained (visited) set as a mask.
std::vector<char> prune_unreachable(const GroupSolution& solution, double tol = 1e-9);

/// Independent reachability oracle: breadth-first closure from supp(alpha)
/// following edges (l -> s) with h^a_{l,s} > 0 and x_l^a > tol. Used by tests
/// to verify prune_unreachable state by state.
std::vector<char> reachable_states(const GroupSolution& solution, const SparseMatrix& h0,
                                   const SparseMatrix& h1, const std::vector<double>& alpha,
                                   double tol = 1e-9);

/// Priority list over the retained states of one group: activation-support
/// states first (descending passive reduced cost), then passive-support
/// states (ascending active reduced cost). position is 1-based; 0 marks a
/// pruned state. normalized_index is position / retained-count, so the head
/// of the list scores 1/|Q| and pruned states score 1.
struct PriorityRanking {
    std::vector<int> order;
    std::vector<int> position;

    int retained() const { return static_cast<int>(order.size()); }
    bool pruned(int state) const { return position[state] == 0; }
    double normalized_index(int state) const {
        if (pruned(state)) return 1.0;
        return static_cast<double>(position[state]) / retained();
    }
};

PriorityRanking qaa_rank(const GroupSolution& solution, const RbStateSpace& space,
                         double tol = 1e-9);

/// Current full state of one user for scheduling decisions.
struct UserState {
    int group = 0;
    int full_state = 0;
};

/// Schedules the M users whose states rank highest (per-group rankings are
/// compared through the normalized index). Users in pruned states come last,
/// ordered by buffer then channel like the in-list tie-break; equal keys fall
/// back to the user index.
std::vector<int> qaa_schedule(const std::vector<PriorityRanking>& rankings,
                              const std::vector<RbStateSpace>& spaces,
                              const std::vector<UserState>& users, int subchannels);

/// Defaults calibrated by trial and error on the standard 20-user fixture
/// (see the README calibration note); all four are config knobs.
struct BeasParams {
    double epsilon = 0.3;
    double b_thresh = 0.0;
    double h_alpha = 0.3;  // h(x) = h_alpha * x + h_beta, seconds of content
    double h_beta = 0.0;
    double initial_level = 0.0;
};

/// One BEAS slot: decay every level, pick users under the threshold by best
/// channel (filling up with the lowest base-layer occupancy), then refresh
/// the scheduled users' levels from what they downloaded.
/// deliveries_if_scheduled[i] is the total sub-segment count user i would
/// receive this slot when scheduled.
struct BeasOutcome {
    std::vector<int> scheduled;
    std::vector<double> next_levels;
};

BeasOutcome beas_step(const BeasParams& params, const std::vector<double>& levels,
                      const std::vector<double>& channel_rates,
                      const std::vector<int>& base_layer_occupancy,
                      const std::vector<int>& deliveries_if_scheduled, int subchannels,
                      double tau_slot, double tau_seg);

enum class BaselineKind { Pf, Bcf, Lbf };

/// PF: top channel-to-average-throughput ratios; BCF: top channels;
/// LBF: lowest base-layer occupancies. Ties break toward lower user index.
std::vector<int> baseline_schedule(BaselineKind kind, const std::vector<double>& channel_rates,
                                   const std::vector<double>& throughput_averages,
                                   const std::vector<int>& base_layer_occupancy, int subchannels);

/// Proportional-fairness EMA: T <- (1 - 1/t_c) T + (1/t_c) * served rate.
void pf_update(std::vector<double>& throughput_averages, const std::vector<int>& scheduled,
               const std::vector<double>& channel_rates, double time_constant);

}  // namespace svcsched
