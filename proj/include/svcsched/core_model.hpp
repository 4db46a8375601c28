#pragma once

#include <string>
#include <vector>

namespace svcsched {

/// Scalable-video parameters shared by every model in the toolkit.
///
/// Layer rates are expressed in Mbit per segment, which coincides with Mbps
/// while segment_duration is one second. buffer_limit counts sub-segments
/// per layer, so a buffer state lives in {0..buffer_limit}^num_layers.
struct VideoConfig {
    int num_layers = 0;
    std::vector<double> layer_rates;
    double segment_duration = 1.0;
    int buffer_limit = 0;
    double qoe_phi = 0.16;
    double qoe_theta = 0.66;
    double rebuffer_penalty = 0.0;

    double max_rate() const;  // sum of all layer rates

    /// Throws std::invalid_argument on a malformed config. Returns a list of
    /// non-fatal warnings (e.g. a rebuffer penalty that fails to penalize).
    std::vector<std::string> validate() const;
};

/// Per-layer sub-segment counts. Supported QA policies keep this
/// prefix-monotone (b[0] >= b[1] >= ...); states outside that lattice are
/// handled mechanically but are unreachable under the shipped policies.
using BufferState = std::vector<int>;

bool is_prefix_monotone(const BufferState& b);

/// Number of leading layers with at least one sub-segment buffered. This is
/// the quality at which the segment at the playback head can be decoded;
/// zero means a stall.
int decodable_prefix(const BufferState& b);

/// QoE reward of playing back rate played_rate, in [min(r_pen,0), 1].
/// Equals 1 exactly at full quality and rebuffer_penalty when stalled.
double playback_reward(double played_rate, const VideoConfig& video, bool rebuffering);

struct SlotOutcome {
    BufferState next;
    double reward = 0.0;
    bool rebuffered = false;
    int played_layers = 0;  // prefix length played back this slot, 0 on stall
};

/// One slot of buffer dynamics: downloads land first but cannot be played in
/// the same slot, so the playback decrement is determined by the pre-download
/// buffer. An empty base layer stalls playback and leaves the (download-
/// augmented) buffer otherwise untouched.
SlotOutcome slot_transition(const BufferState& b, const std::vector<int>& downloads,
                            const VideoConfig& video);

/// Pure playback (no downloads).
SlotOutcome playback_step(const BufferState& b, const VideoConfig& video);

/// Mixed-radix encoding with layer 1 most significant:
/// index = sum_l b[l] * (b_max+1)^(L-1-l). Bijective on {0..b_max}^L.
int index_buffer(const BufferState& b, const VideoConfig& video);
BufferState unindex_buffer(int index, const VideoConfig& video);

/// (buffer_limit + 1)^num_layers, the row count of a policy matrix.
int buffer_space_size(const VideoConfig& video);

}  // namespace svcsched
