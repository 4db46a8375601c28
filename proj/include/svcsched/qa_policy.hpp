#pragma once

#include <vector>

#include "svcsched/channel.hpp"
#include "svcsched/core_model.hpp"

namespace svcsched {

enum class QaKind { Dbp, Cbp, Bpp };

/// Per-channel-state request rule for CBP. When full_quality is set the
/// budget is spent evening out all layers (complete segments); otherwise
/// floor(base_fraction * budget) sub-segments go to the base layer and the
/// remainder to enhancement layers, base first.
struct CbpStateRule {
    double base_fraction = 1.0;
    bool full_quality = false;
};

/// Client-side quality adaptation spec. The three families follow the usual
/// buffer-based playbook: DBP keeps a fixed occupancy staircase between
/// neighboring layers, CBP keys its aggressiveness on the channel state, and
/// BPP hoards base layers until a fill threshold and then requests complete
/// segments.
struct QaSpec {
    QaKind kind = QaKind::Dbp;

    // DBP: pre-fetch thresholds in seconds, one per neighboring layer pair.
    // A single entry is shared by every pair (the "DBP-x" convention).
    std::vector<double> dbp_thresholds_seconds = {10.0};

    // BPP: request base only while b1 < switch_fraction * buffer_limit.
    double bpp_switch_fraction = 0.5;

    // CBP: one rule per channel state; empty means use default_cbp_rules().
    std::vector<CbpStateRule> cbp_rules;

    void validate(const VideoConfig& video, int num_channel_states) const;
};

/// The CBP ladder used throughout: bottom half of the states request base
/// only, the top state requests full-quality segments, and intermediate
/// states spend two thirds of the budget on base layers.
std::vector<CbpStateRule> default_cbp_rules(int num_channel_states);

/// Deterministic binary QA transition matrix for one channel state: row i
/// (pre-slot buffer index) maps to exactly one column (post-slot index).
struct PolicyMatrix {
    int dim = 0;
    std::vector<int> next;  // next[row] = column
};

/// Fills in defaulted parts of a spec (the CBP rule table) and validates it.
QaSpec resolve_qa(QaSpec qa, const VideoConfig& video, int num_channel_states);

/// Downloads requested by the QA given the pre-slot buffer, the channel
/// state, and a sub-segment budget. Guarantees sum(d) <= budget, per-layer
/// caps at buffer_limit, and that prefix-monotone buffers stay prefix-
/// monotone through the end-of-slot playback decrement.
std::vector<int> qa_decide(const QaSpec& qa, const VideoConfig& video, const BufferState& b,
                           int channel_state_index, int budget);

/// QA policy matrix for channel state index c: downloads chosen by qa_decide
/// with the slot budget for that rate, then the playback decrement.
PolicyMatrix build_policy_matrix(const QaSpec& qa, const VideoConfig& video,
                                 const ChannelModel& channel, int channel_state_index);

/// Passive matrix P0: pure playback, rows with an empty base layer self-loop.
PolicyMatrix build_passive_matrix(const VideoConfig& video);

}  // namespace svcsched
