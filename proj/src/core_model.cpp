#include "svcsched/core_model.hpp"

#include <cmath>
#include <stdexcept>

namespace svcsched {

double VideoConfig::max_rate() const {
    double total = 0.0;
    for (double q : layer_rates) total += q;
    return total;
}

std::vector<std::string> VideoConfig::validate() const {
    if (num_layers < 1) throw std::invalid_argument("video: num_layers must be >= 1");
    if (static_cast<int>(layer_rates.size()) != num_layers)
        throw std::invalid_argument("video: layer_rates size must equal num_layers");
    for (double q : layer_rates)
        if (!(q > 0.0)) throw std::invalid_argument("video: all layer rates must be positive");
    if (!(segment_duration > 0.0))
        throw std::invalid_argument("video: segment_duration must be positive");
    if (buffer_limit < 1) throw std::invalid_argument("video: buffer_limit must be >= 1");
    if (!(qoe_phi > 0.0) || !(qoe_theta > 0.0))
        throw std::invalid_argument("video: qoe_phi and qoe_theta must be positive");

    std::vector<std::string> warnings;
    double base_only = std::exp(-qoe_phi * std::pow(layer_rates[0] / max_rate(), -qoe_theta) + qoe_phi);
    if (rebuffer_penalty >= base_only && num_layers > 0) {
        warnings.push_back("rebuffer_penalty " + std::to_string(rebuffer_penalty) +
                           " is not below the base-layer-only reward " + std::to_string(base_only) +
                           "; stalls are not penalized relative to minimum quality");
    }
    return warnings;
}

bool is_prefix_monotone(const BufferState& b) {
    for (size_t l = 1; l < b.size(); ++l)
        if (b[l] > b[l - 1]) return false;
    return true;
}

int decodable_prefix(const BufferState& b) {
    int l = 0;
    while (l < static_cast<int>(b.size()) && b[l] > 0) ++l;
    return l;
}

double playback_reward(double played_rate, const VideoConfig& video, bool rebuffering) {
    if (rebuffering) return video.rebuffer_penalty;
    if (!(played_rate > 0.0))
        throw std::invalid_argument("playback_reward: played_rate must be positive unless rebuffering");
    double ratio = played_rate / video.max_rate();
    if (ratio >= 1.0) return 1.0;  // exponent is exactly zero at full quality
    return std::exp(-video.qoe_phi * std::pow(ratio, -video.qoe_theta) + video.qoe_phi);
}

SlotOutcome slot_transition(const BufferState& b, const std::vector<int>& downloads,
                            const VideoConfig& video) {
    SlotOutcome out;
    out.next = b;
    for (size_t l = 0; l < downloads.size() && l < out.next.size(); ++l)
        out.next[l] += downloads[l];

    // Playback consumes from the pre-download buffer: sub-segments received
    // this slot are not decodable until the next one.
    int prefix = decodable_prefix(b);
    out.played_layers = prefix;
    if (prefix == 0) {
        out.rebuffered = true;
        out.reward = video.rebuffer_penalty;
        return out;
    }
    double played_rate = 0.0;
    for (int l = 0; l < prefix; ++l) {
        out.next[l] -= 1;
        played_rate += video.layer_rates[l];
    }
    out.reward = playback_reward(played_rate, video, false);
    return out;
}

SlotOutcome playback_step(const BufferState& b, const VideoConfig& video) {
    return slot_transition(b, {}, video);
}

int buffer_space_size(const VideoConfig& video) {
    int size = 1;
    for (int l = 0; l < video.num_layers; ++l) size *= video.buffer_limit + 1;
    return size;
}

int index_buffer(const BufferState& b, const VideoConfig& video) {
    if (static_cast<int>(b.size()) != video.num_layers)
        throw std::invalid_argument("index_buffer: wrong number of layers");
    int index = 0;
    for (int l = 0; l < video.num_layers; ++l) {
        if (b[l] < 0 || b[l] > video.buffer_limit)
            throw std::invalid_argument("index_buffer: component out of range");
        index = index * (video.buffer_limit + 1) + b[l];
    }
    return index;
}

BufferState unindex_buffer(int index, const VideoConfig& video) {
    if (index < 0 || index >= buffer_space_size(video))
        throw std::invalid_argument("unindex_buffer: index out of range");
    BufferState b(video.num_layers, 0);
    for (int l = video.num_layers - 1; l >= 0; --l) {
        b[l] = index % (video.buffer_limit + 1);
        index /= video.buffer_limit + 1;
    }
    return b;
}

}  // namespace svcsched
