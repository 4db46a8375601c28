#pragma once

#include <vector>

#include "svcsched/rb_lp.hpp"
#include "svcsched/schedulers.hpp"

namespace svcsched {

/// Average per-user fill rate at load rho = N/M under channel-blind sharing.
double lambda_avg(const ChannelModel& channel, double rho);

/// Average playback (drain) rate implied by a solved RB: the occupancy mass
/// is split into playback classes S_l (exactly l leading layers buffered,
/// nothing above) and weighted by the cumulative layer rates; the
/// re-buffering class plays at rate zero.
double mu_avg(const GroupSolution& solution, const VideoConfig& video, const RbStateSpace& space);

/// Discounted time fraction per playback class l = 0..L, summing to one.
std::vector<double> playback_class_fractions(const GroupSolution& solution,
                                             const VideoConfig& video, const RbStateSpace& space);

struct SweepPoint {
    double rho = 0.0;
    int subchannels = 0;
    double lambda = 0.0;
    double mu = 0.0;
    double lp_objective_per_user = 0.0;
};

struct LoadSweep {
    int num_users = 0;
    std::vector<SweepPoint> points;  // ascending rho
};

/// Solves the representative RB at every subchannel count and tabulates
/// lambda_avg / mu_avg / objective per user over rho = N/M. Sweep points are
/// independent solves and fan out over `threads` workers.
LoadSweep run_load_sweep(const UserGroup& group, int num_users,
                         const std::vector<int>& subchannel_counts, double discount,
                         const SolverOptions& solver_options = {}, int threads = 1);

struct CriticalLoad {
    double rho_star = 0.0;
    SweepPoint below;  // bracketing points (equal when an exact hit exists)
    SweepPoint above;
};

/// Interpolated load where lambda_avg - mu_avg changes sign. Throws when the
/// sweep never brackets a crossing.
CriticalLoad critical_load(const LoadSweep& sweep);

struct HeatmapRow {
    int channel_index = 0;
    std::vector<int> buffer;
    double priority_index = 1.0;  // normalized rank; pruned states sit at 1
    bool pruned = true;
};

/// Priority table behind the scheduling heatmaps: one row per full state.
std::vector<HeatmapRow> heatmap_table(const PriorityRanking& ranking, const RbStateSpace& space,
                                      const VideoConfig& video);

/// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace svcsched
