#pragma once

#include <vector>

#include "svcsched/channel.hpp"
#include "svcsched/core_model.hpp"
#include "svcsched/lp_solver.hpp"
#include "svcsched/qa_policy.hpp"
#include "svcsched/sparse_matrix.hpp"

namespace svcsched {

/// A set of homogeneous users: same QA, channel, video, buffer limit. The
/// initial distribution is over full states; empty means the default of an
/// empty buffer with the channel drawn from its stationary distribution.
struct UserGroup {
    int count = 1;
    QaSpec qa;
    ChannelModel channel;
    VideoConfig video;
    std::vector<double> initial_distribution;
};

/// Full-state indexing for one user: channel-major,
/// state = channel_index * buffer_space + buffer_index.
struct RbStateSpace {
    int num_channel_states = 0;
    int buffer_space = 0;

    int size() const { return num_channel_states * buffer_space; }
    int encode(int channel_index, int buffer_index) const {
        return channel_index * buffer_space + buffer_index;
    }
    int channel_of(int state) const { return state / buffer_space; }
    int buffer_of(int state) const { return state % buffer_space; }
};

RbStateSpace make_state_space(const ChannelModel& channel, const VideoConfig& video);

/// Passive transition matrix H0 = C (x) P0 (Kronecker product); row-stochastic.
SparseMatrix build_h0(const ChannelModel& channel, const PolicyMatrix& passive);

/// Active transition matrix H1: block (i,j) = C_ij * P(c_i); row-stochastic.
/// Requires one QA policy matrix per channel state, in state order.
SparseMatrix build_h1(const ChannelModel& channel, const std::vector<PolicyMatrix>& per_state);

/// Reward per full state: the playback reward of the buffer component (the
/// channel component never affects the immediate reward).
std::vector<double> state_reward_vector(const VideoConfig& video, const ChannelModel& channel);

/// Empty buffer, channel state from the stationary distribution.
std::vector<double> default_initial_distribution(const ChannelModel& channel,
                                                 const VideoConfig& video);

/// Everything the LP builders need for one group, derived from a UserGroup.
struct CompiledGroup {
    int count = 1;
    VideoConfig video;
    RbStateSpace space;
    SparseMatrix h0;
    SparseMatrix h1;
    std::vector<double> rewards;
    std::vector<double> alpha;
};

CompiledGroup compile_group(const UserGroup& group);

/// Multi-group restless-bandit LP: one representative per group, objective
/// sum_g N_g sum_s sum_a R_s x_s^a, per-group occupancy polytopes, and the
/// shared resource constraint sum_g N_g sum_s x_s^1 = M / (1 - beta).
/// Column order: group-major, then state, then action in {0,1}.
LpProblem build_rb_lp(const std::vector<CompiledGroup>& groups, int subchannels, double discount);

/// Single-representative form for a homogeneous system of num_users users:
/// objective sum_s sum_a R_s x_s^a with resource constraint
/// sum_s x_s^1 = M / (N (1 - beta)). Identical argmax to build_rb_lp on the
/// one-group system; the objective is per user instead of network-wide.
LpProblem build_rb_lp_representative(const CompiledGroup& group, int num_users, int subchannels,
                                     double discount);

/// Mechanical dual of an equality-form max LP, re-expressed in equality form
/// so the same solver can run it: variables [lambda+ (m), lambda- (m),
/// surplus (n)], maximize -rhs.(lambda+ - lambda-) subject to
/// A^T (lambda+ - lambda-) - surplus = objective. The returned optimum is
/// the negative of the dual minimum.
LpProblem build_rb_dual(const LpProblem& primal);

/// Per-group view into the solution vector of a problem built by build_rb_lp.
struct RbSolutionView {
    int group_offset = 0;  // first column of this group
    int num_states = 0;

    int column(int state, int action) const { return group_offset + 2 * state + action; }
};

std::vector<RbSolutionView> solution_views(const std::vector<CompiledGroup>& groups);

}  // namespace svcsched
