#include "svcsched/qa_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svcsched {

void QaSpec::validate(const VideoConfig& video, int num_channel_states) const {
    switch (kind) {
        case QaKind::Dbp: {
            if (dbp_thresholds_seconds.empty())
                throw std::invalid_argument("DBP requires at least one pre-fetch threshold");
            if (dbp_thresholds_seconds.size() != 1 &&
                static_cast<int>(dbp_thresholds_seconds.size()) != video.num_layers - 1)
                throw std::invalid_argument("DBP thresholds: give one shared value or one per layer pair");
            for (double t : dbp_thresholds_seconds)
                if (t < 0.0) throw std::invalid_argument("DBP thresholds must be >= 0");
            break;
        }
        case QaKind::Bpp:
            if (!(bpp_switch_fraction > 0.0) || bpp_switch_fraction > 1.0)
                throw std::invalid_argument("BPP switch fraction must be in (0,1]");
            break;
        case QaKind::Cbp: {
            const auto& rules = cbp_rules.empty() ? default_cbp_rules(num_channel_states) : cbp_rules;
            if (static_cast<int>(rules.size()) != num_channel_states)
                throw std::invalid_argument("CBP rule table must cover every channel state");
            for (const auto& r : rules)
                if (r.base_fraction < 0.0 || r.base_fraction > 1.0)
                    throw std::invalid_argument("CBP base fractions must be in [0,1]");
            break;
        }
    }
}

std::vector<CbpStateRule> default_cbp_rules(int num_channel_states) {
    if (num_channel_states < 1) throw std::invalid_argument("CBP rules need >= 1 channel state");
    std::vector<CbpStateRule> rules(num_channel_states);
    for (int c = 0; c < num_channel_states; ++c) {
        if (c == num_channel_states - 1) {
            rules[c] = {0.0, true};
        } else if (c < num_channel_states / 2) {
            rules[c] = {1.0, false};  // low-rate states: base layers only
        } else {
            rules[c] = {2.0 / 3.0, false};
        }
    }
    return rules;
}

namespace {

// Greedy per-sub-segment chooser shared by the three QA families. All
// decisions are made against the running buffer v (pre-slot buffer plus
// downloads so far); the playback decrement at slot end removes one
// sub-segment from layers [0, prefix) of the pre-slot buffer, so candidate
// downloads are screened against that final state as well.
class DownloadPlanner {
  public:
    DownloadPlanner(const VideoConfig& video, const BufferState& b)
        : video_(video),
          v_(b),
          prefix_(decodable_prefix(b)),
          keep_monotone_(is_prefix_monotone(b)),
          downloads_(video.num_layers, 0) {}

    bool accepts(int layer) const {
        if (v_[layer] + 1 > video_.buffer_limit) return false;
        if (!keep_monotone_) return true;
        BufferState j = v_;
        j[layer] += 1;
        for (int k = 0; k < prefix_; ++k) j[k] -= 1;
        return is_prefix_monotone(j);
    }

    void take(int layer) {
        v_[layer] += 1;
        downloads_[layer] += 1;
    }

    // Lowest-occupancy layer in [first, last], ties to the lowest index.
    // Returns -1 when no layer in the range can accept a sub-segment.
    int pick_even(int first, int last) const {
        int best = -1;
        for (int l = first; l <= last; ++l) {
            if (!accepts(l)) continue;
            if (best < 0 || v_[l] < v_[best]) best = l;
        }
        return best;
    }

    const BufferState& buffer() const { return v_; }
    const std::vector<int>& downloads() const { return downloads_; }

  private:
    const VideoConfig& video_;
    BufferState v_;
    int prefix_;
    bool keep_monotone_;
    std::vector<int> downloads_;
};

void decide_dbp(const QaSpec& qa, const VideoConfig& video, DownloadPlanner& plan, int budget) {
    auto threshold_subsegments = [&](int pair) {
        size_t idx = std::min(qa.dbp_thresholds_seconds.size() - 1, static_cast<size_t>(pair));
        return qa.dbp_thresholds_seconds[idx] / video.segment_duration;
    };
    for (int unit = 0; unit < budget; ++unit) {
        int chosen = -1;
        for (int l = 0; l < video.num_layers; ++l) {
            // A layer below the top is satisfied once its occupancy leads the
            // layer above by the pre-fetch threshold; the staircase then
            // advances to the next layer. Full layers fall through on their
            // own via the accept check.
            if (l + 1 < video.num_layers) {
                double gap = static_cast<double>(plan.buffer()[l] - plan.buffer()[l + 1]);
                if (gap >= threshold_subsegments(l) - 1e-9) continue;
            }
            if (plan.accepts(l)) {
                chosen = l;
                break;
            }
        }
        if (chosen < 0) break;
        plan.take(chosen);
    }
}

void decide_bpp(const QaSpec& qa, const VideoConfig& video, DownloadPlanner& plan, int budget) {
    double switch_level = qa.bpp_switch_fraction * video.buffer_limit;
    for (int unit = 0; unit < budget; ++unit) {
        int chosen = -1;
        if (static_cast<double>(plan.buffer()[0]) + 1e-9 < switch_level && plan.accepts(0)) {
            chosen = 0;
        } else {
            chosen = plan.pick_even(0, video.num_layers - 1);
        }
        if (chosen < 0) break;
        plan.take(chosen);
    }
}

void decide_cbp(const QaSpec& qa, const VideoConfig& video, DownloadPlanner& plan,
                int channel_state_index, int budget) {
    if (qa.cbp_rules.empty())
        throw std::invalid_argument("qa_decide: CBP spec has no rule table; resolve it against the "
                                    "channel first (see default_cbp_rules)");
    const auto& rule = qa.cbp_rules.at(channel_state_index);
    int base_quota = rule.full_quality
                         ? 0
                         : static_cast<int>(std::floor(rule.base_fraction * budget + 1e-9));
    for (int unit = 0; unit < budget; ++unit) {
        int chosen = -1;
        if (rule.full_quality) {
            chosen = plan.pick_even(0, video.num_layers - 1);
        } else if (unit < base_quota) {
            chosen = plan.accepts(0) ? 0 : plan.pick_even(1, video.num_layers - 1);
        } else {
            chosen = plan.pick_even(1, video.num_layers - 1);
            if (chosen < 0 && plan.accepts(0)) chosen = 0;
        }
        if (chosen < 0) break;
        plan.take(chosen);
    }
}

}  // namespace

std::vector<int> qa_decide(const QaSpec& qa, const VideoConfig& video, const BufferState& b,
                           int channel_state_index, int budget) {
    if (static_cast<int>(b.size()) != video.num_layers)
        throw std::invalid_argument("qa_decide: buffer has wrong number of layers");
    if (budget < 0) throw std::invalid_argument("qa_decide: negative budget");
    DownloadPlanner plan(video, b);
    switch (qa.kind) {
        case QaKind::Dbp:
            decide_dbp(qa, video, plan, budget);
            break;
        case QaKind::Bpp:
            decide_bpp(qa, video, plan, budget);
            break;
        case QaKind::Cbp:
            decide_cbp(qa, video, plan, channel_state_index, budget);
            break;
    }
    return plan.downloads();
}

QaSpec resolve_qa(QaSpec qa, const VideoConfig& video, int num_channel_states) {
    if (qa.kind == QaKind::Cbp && qa.cbp_rules.empty())
        qa.cbp_rules = default_cbp_rules(num_channel_states);
    qa.validate(video, num_channel_states);
    return qa;
}

PolicyMatrix build_policy_matrix(const QaSpec& qa, const VideoConfig& video,
                                 const ChannelModel& channel, int channel_state_index) {
    if (channel_state_index < 0 || channel_state_index >= channel.num_states())
        throw std::invalid_argument("build_policy_matrix: channel state out of range");
    QaSpec resolved = resolve_qa(qa, video, channel.num_states());
    double reference_rate = *std::max_element(video.layer_rates.begin(), video.layer_rates.end());
    int budget = sub_segments_deliverable(channel.states[channel_state_index],
                                          video.segment_duration, reference_rate);
    PolicyMatrix matrix;
    matrix.dim = buffer_space_size(video);
    matrix.next.resize(matrix.dim);
    for (int row = 0; row < matrix.dim; ++row) {
        BufferState b = unindex_buffer(row, video);
        auto downloads = qa_decide(resolved, video, b, channel_state_index, budget);
        auto outcome = slot_transition(b, downloads, video);
        matrix.next[row] = index_buffer(outcome.next, video);
    }
    return matrix;
}

PolicyMatrix build_passive_matrix(const VideoConfig& video) {
    PolicyMatrix matrix;
    matrix.dim = buffer_space_size(video);
    matrix.next.resize(matrix.dim);
    for (int row = 0; row < matrix.dim; ++row) {
        BufferState b = unindex_buffer(row, video);
        matrix.next[row] = index_buffer(playback_step(b, video).next, video);
    }
    return matrix;
}

}  // namespace svcsched
