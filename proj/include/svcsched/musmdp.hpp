#pragma once

#include <vector>

#include "svcsched/channel.hpp"
#include "svcsched/core_model.hpp"
#include "svcsched/lp_solver.hpp"
#include "svcsched/rb_lp.hpp"
#include "svcsched/sparse_matrix.hpp"

namespace svcsched {

/// Extended state space for the joint QA + scheduling benchmark:
/// (channel, buffer, playback offset u). The slot is the duration of the
/// fastest possible download, tau_slot = min_l q_l / max(C), and u counts
/// slots since the segment at the playback head started playing.
struct SmdpStateSpace {
    int num_channel_states = 0;
    int buffer_space = 0;
    int offsets_per_segment = 0;  // tau_seg / tau_slot
    double tau_slot = 0.0;

    int size() const { return num_channel_states * buffer_space * offsets_per_segment; }
    int encode(int channel_index, int buffer_index, int offset) const {
        return (channel_index * buffer_space + buffer_index) * offsets_per_segment + offset;
    }
    int channel_of(int state) const { return state / (buffer_space * offsets_per_segment); }
    int buffer_of(int state) const { return (state / offsets_per_segment) % buffer_space; }
    int offset_of(int state) const { return state % offsets_per_segment; }
};

/// Throws unless tau_seg is an integer multiple of tau_slot.
SmdpStateSpace make_smdp_space(const ChannelModel& channel, const VideoConfig& video);

struct FirstPassageEntry {
    int duration = 0;       // slots until the download completes
    int final_channel = 0;  // channel state at the first slot after completion
    double prob = 0.0;
};

/// Joint distribution of (download duration, post-download channel state) for
/// one layer size and one initial channel state. Computed by forward dynamic
/// programming over (bits accumulated, channel state); any probability mass
/// beyond the adaptive horizon (< tail_tol) is folded into the final slot so
/// the distribution stays proper.
std::vector<FirstPassageEntry> first_passage(double layer_bits, const ChannelModel& channel,
                                             double tau_slot, int initial_channel,
                                             double tail_tol = 1e-9);

/// first_passage for every (layer, initial channel) pair: table[layer][c].
using FirstPassageTable = std::vector<std::vector<std::vector<FirstPassageEntry>>>;

FirstPassageTable build_first_passage_table(const VideoConfig& video, const ChannelModel& channel,
                                            double tau_slot, double tail_tol = 1e-9);

/// Discounted transition matrix for action a over the extended space.
/// a = 0 is the one-slot passive action (row sums equal the discount);
/// a in 1..L downloads one layer-a sub-segment, with block (i,j) equal to
/// sum_k discount^k f^a_i(k,j) P^a(k,i). Rows are sub-stochastic.
SparseMatrix build_hl(const VideoConfig& video, const ChannelModel& channel,
                      const SmdpStateSpace& space, const FirstPassageTable& table, int action,
                      double slot_discount);

/// Expected discounted reward and duration of an action from each state:
/// rbar_s = E[sum_{k=0..t-1} discount^k R_s^k], tbar_s = E[sum_{k=0..t-1}
/// discount^k], with R_s^k the per-slot playback reward along the
/// deterministic buffer/offset trajectory (downloads land at action end).
struct ActionExpectation {
    std::vector<double> reward;    // rbar per state
    std::vector<double> duration;  // tbar per state
};

ActionExpectation expected_reward_and_duration(const VideoConfig& video,
                                               const SmdpStateSpace& space,
                                               const FirstPassageTable& table, int action,
                                               double slot_discount);

struct CompiledSmdpGroup {
    int count = 1;
    SmdpStateSpace space;
    std::vector<SparseMatrix> h;             // h[a], a = 0..L
    std::vector<ActionExpectation> actions;  // actions[a], a = 0..L
    std::vector<double> alpha;
    double slot_discount = 0.0;
};

/// Compiles a group for the MUSMDP. slot_discount is e^{-s} per tau_slot;
/// pass rb_discount_per_second^tau_slot to make values comparable with the RB.
CompiledSmdpGroup compile_smdp_group(const UserGroup& group, double slot_discount,
                                     double tail_tol = 1e-9);

/// Joint LP of the MUSMDP: maximize sum_g N_g sum_s sum_a rbar y, per-group
/// occupancy polytopes (discounting lives inside the h matrices), resource
/// constraint sum_g N_g sum_s sum_{a>=1} tbar y = M / (1 - discount).
/// Columns: group-major, then state, then action in {0..L}.
LpProblem build_musmdp_lp(const std::vector<CompiledSmdpGroup>& groups, int subchannels);

/// Per-representative form mirroring build_rb_lp_representative: objective
/// unscaled, resource RHS M / (N (1 - discount)).
LpProblem build_musmdp_lp_representative(const CompiledSmdpGroup& group, int num_users,
                                         int subchannels);

/// Rescales a MUSMDP objective (per tau_slot reward units) into RB units
/// (per tau_seg-slot reward units): a constant-quality stream then scores
/// identically in both formulations.
double musmdp_value_in_rb_units(double musmdp_objective, double slot_discount, double rb_discount);

/// Warning text when a MUSMDP slot discount is not the RB per-second discount
/// compounded over tau_slot (objectives are then not comparable); empty when
/// aligned.
std::string check_discount_alignment(double slot_discount, double rb_discount_per_second,
                                     double tau_slot);

}  // namespace svcsched
