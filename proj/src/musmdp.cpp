#include "svcsched/musmdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace svcsched {

SmdpStateSpace make_smdp_space(const ChannelModel& channel, const VideoConfig& video) {
    validate_or_throw(channel);
    video.validate();
    double max_rate = channel.states.back();
    if (!(max_rate > 0.0))
        throw std::invalid_argument("smdp: the channel must have a positive top rate");
    double min_layer = *std::min_element(video.layer_rates.begin(), video.layer_rates.end());
    double tau_slot = min_layer / max_rate;
    double ratio = video.segment_duration / tau_slot;
    int offsets = static_cast<int>(std::llround(ratio));
    if (offsets < 1 || std::abs(ratio - offsets) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument(
            "smdp: segment duration must be an integer multiple of the slot duration (tau_seg/tau_slot = " +
            std::to_string(ratio) + ")");
    SmdpStateSpace space;
    space.num_channel_states = channel.num_states();
    space.buffer_space = buffer_space_size(video);
    space.offsets_per_segment = offsets;
    space.tau_slot = tau_slot;
    return space;
}

std::vector<FirstPassageEntry> first_passage(double layer_bits, const ChannelModel& channel,
                                             double tau_slot, int initial_channel,
                                             double tail_tol) {
    if (!(layer_bits > 0.0)) throw std::invalid_argument("first_passage: layer size must be positive");
    if (!(tail_tol > 0.0)) throw std::invalid_argument("first_passage: tail_tol must be positive");
    if (initial_channel < 0 || initial_channel >= channel.num_states())
        throw std::invalid_argument("first_passage: channel state out of range");
    if (!(channel.states.back() > 0.0))
        throw std::invalid_argument("first_passage: all channel rates are zero, download never completes");

    int nc = channel.num_states();
    // Alive DP states keyed by quantized accumulated bits; values hold the
    // representative accumulation and per-channel probability mass. The grid
    // only merges numerically identical sums reached along different orders.
    double grid = layer_bits * 1e-12;
    double absorb_at = layer_bits - layer_bits * 1e-9;
    struct Cell {
        double accum;
        std::vector<double> prob;
    };
    std::map<long long, Cell> alive;
    alive[0] = {0.0, std::vector<double>(nc, 0.0)};
    alive[0].prob[initial_channel] = 1.0;

    std::vector<FirstPassageEntry> entries;
    auto absorb = [&](int duration, int channel_at_completion, double mass) {
        for (int j = 0; j < nc; ++j) {
            double p = mass * channel.transition[channel_at_completion][j];
            if (p > 0.0) entries.push_back({duration, j, p});
        }
    };

    double min_positive = 0.0;
    for (double s : channel.states)
        if (s > 0.0 && (min_positive == 0.0 || s < min_positive)) min_positive = s;
    long long certain_bound =
        static_cast<long long>(std::ceil(layer_bits / (min_positive * tau_slot))) + 2;
    long long hard_cap = std::max<long long>(certain_bound * nc * 4, 100000);

    int t = 0;
    while (!alive.empty()) {
        ++t;
        double alive_mass = 0.0;
        for (const auto& [key, cell] : alive)
            for (double p : cell.prob) alive_mass += p;
        if (alive_mass < tail_tol || t > hard_cap) {
            // Fold the residual tail into this slot to keep the distribution proper.
            for (const auto& [key, cell] : alive)
                for (int c = 0; c < nc; ++c)
                    if (cell.prob[c] > 0.0) absorb(t, c, cell.prob[c]);
            break;
        }
        std::map<long long, Cell> next_alive;
        for (const auto& [key, cell] : alive) {
            for (int c = 0; c < nc; ++c) {
                double mass = cell.prob[c];
                if (mass <= 0.0) continue;
                double accum = cell.accum + channel.states[c] * tau_slot;
                if (accum >= absorb_at) {
                    absorb(t, c, mass);
                    continue;
                }
                long long next_key = std::llround(accum / grid);
                auto [it, inserted] = next_alive.try_emplace(next_key);
                if (inserted) {
                    it->second.accum = accum;
                    it->second.prob.assign(nc, 0.0);
                }
                for (int c2 = 0; c2 < nc; ++c2) {
                    double p = channel.transition[c][c2];
                    if (p > 0.0) it->second.prob[c2] += mass * p;
                }
            }
        }
        alive = std::move(next_alive);
    }

    // Merge duplicate (duration, final channel) pairs for compactness.
    std::map<std::pair<int, int>, double> merged;
    for (const auto& e : entries) merged[{e.duration, e.final_channel}] += e.prob;
    std::vector<FirstPassageEntry> out;
    out.reserve(merged.size());
    for (const auto& [key, p] : merged) out.push_back({key.first, key.second, p});
    return out;
}

FirstPassageTable build_first_passage_table(const VideoConfig& video, const ChannelModel& channel,
                                            double tau_slot, double tail_tol) {
    FirstPassageTable table(video.num_layers);
    for (int l = 0; l < video.num_layers; ++l) {
        table[l].resize(channel.num_states());
        for (int c = 0; c < channel.num_states(); ++c)
            table[l][c] = first_passage(video.layer_rates[l], channel, tau_slot, c, tail_tol);
    }
    return table;
}

namespace {

// One slot of playback bookkeeping on the extended (buffer, offset) state.
// No base layer at the playback head means a stall: nothing moves.
void advance_playback(BufferState& b, int& u, int offsets_per_segment) {
    if (b[0] == 0) return;
    ++u;
    if (u == offsets_per_segment) {
        u = 0;
        int prefix = decodable_prefix(b);
        for (int l = 0; l < prefix; ++l) b[l] -= 1;
    }
}

double slot_reward(const BufferState& b, const VideoConfig& video) {
    int prefix = decodable_prefix(b);
    if (prefix == 0) return video.rebuffer_penalty;
    double rate = 0.0;
    for (int l = 0; l < prefix; ++l) rate += video.layer_rates[l];
    return playback_reward(rate, video, false);
}

struct Trajectory {
    // After k slots of pure playback from the start state: buffer/offset and
    // the discounted reward/time accumulated over slots 0..k-1.
    std::vector<BufferState> buffer;
    std::vector<int> offset;
    std::vector<double> cumulative_reward;
    std::vector<double> cumulative_time;
};

Trajectory playback_trajectory(const VideoConfig& video, const SmdpStateSpace& space,
                               const BufferState& start, int start_offset, int horizon,
                               double slot_discount) {
    Trajectory tr;
    tr.buffer.reserve(horizon + 1);
    tr.offset.reserve(horizon + 1);
    tr.cumulative_reward.assign(horizon + 1, 0.0);
    tr.cumulative_time.assign(horizon + 1, 0.0);
    BufferState b = start;
    int u = start_offset;
    double weight = 1.0;
    tr.buffer.push_back(b);
    tr.offset.push_back(u);
    for (int k = 0; k < horizon; ++k) {
        tr.cumulative_reward[k + 1] = tr.cumulative_reward[k] + weight * slot_reward(b, video);
        tr.cumulative_time[k + 1] = tr.cumulative_time[k] + weight;
        weight *= slot_discount;
        advance_playback(b, u, space.offsets_per_segment);
        tr.buffer.push_back(b);
        tr.offset.push_back(u);
    }
    return tr;
}

int max_duration(const std::vector<FirstPassageEntry>& entries) {
    int horizon = 0;
    for (const auto& e : entries) horizon = std::max(horizon, e.duration);
    return horizon;
}

void check_action(const SmdpStateSpace& space, const FirstPassageTable& table, int action,
                  int num_layers) {
    if (action < 0 || action > num_layers)
        throw std::invalid_argument("smdp: action must be in 0..num_layers");
    if (action >= 1 && static_cast<int>(table.size()) < num_layers)
        throw std::invalid_argument("smdp: first-passage table is missing layers");
    if (action >= 1 && static_cast<int>(table[action - 1].size()) != space.num_channel_states)
        throw std::invalid_argument("smdp: first-passage table is missing channel states");
}

}  // namespace

SparseMatrix build_hl(const VideoConfig& video, const ChannelModel& channel,
                      const SmdpStateSpace& space, const FirstPassageTable& table, int action,
                      double slot_discount) {
    check_action(space, table, action, video.num_layers);
    if (!(slot_discount > 0.0) || !(slot_discount < 1.0))
        throw std::invalid_argument("smdp: slot discount must lie strictly in (0,1)");
    SparseMatrix h;
    h.start(space.size(), space.size());
    std::map<int, double> row;  // deterministic column order per row
    for (int c = 0; c < space.num_channel_states; ++c) {
        for (int bi = 0; bi < space.buffer_space; ++bi) {
            BufferState start = unindex_buffer(bi, video);
            for (int u = 0; u < space.offsets_per_segment; ++u) {
                row.clear();
                if (action == 0) {
                    BufferState b = start;
                    int offset = u;
                    advance_playback(b, offset, space.offsets_per_segment);
                    int target_buffer = index_buffer(b, video);
                    for (int c2 = 0; c2 < space.num_channel_states; ++c2) {
                        double p = channel.transition[c][c2];
                        if (p > 0.0) row[space.encode(c2, target_buffer, offset)] += slot_discount * p;
                    }
                } else {
                    const auto& entries = table[action - 1][c];
                    Trajectory tr = playback_trajectory(video, space, start, u,
                                                        max_duration(entries), slot_discount);
                    for (const auto& e : entries) {
                        BufferState b = tr.buffer[e.duration];
                        // The sub-segment lands as the action completes; a full
                        // layer swallows it with no effect.
                        if (b[action - 1] < video.buffer_limit) b[action - 1] += 1;
                        int target = space.encode(e.final_channel, index_buffer(b, video),
                                                  tr.offset[e.duration]);
                        row[target] += std::pow(slot_discount, e.duration) * e.prob;
                    }
                }
                for (const auto& [col, value] : row) h.push_entry(col, value);
                h.finish_row();
            }
        }
    }
    return h;
}

ActionExpectation expected_reward_and_duration(const VideoConfig& video,
                                               const SmdpStateSpace& space,
                                               const FirstPassageTable& table, int action,
                                               double slot_discount) {
    check_action(space, table, action, video.num_layers);
    ActionExpectation out;
    out.reward.assign(space.size(), 0.0);
    out.duration.assign(space.size(), 0.0);
    for (int c = 0; c < space.num_channel_states; ++c) {
        for (int bi = 0; bi < space.buffer_space; ++bi) {
            BufferState start = unindex_buffer(bi, video);
            for (int u = 0; u < space.offsets_per_segment; ++u) {
                int s = space.encode(c, bi, u);
                if (action == 0) {
                    out.reward[s] = slot_reward(start, video);
                    out.duration[s] = 1.0;
                    continue;
                }
                const auto& entries = table[action - 1][c];
                Trajectory tr = playback_trajectory(video, space, start, u, max_duration(entries),
                                                    slot_discount);
                double rbar = 0.0, tbar = 0.0;
                for (const auto& e : entries) {
                    rbar += e.prob * tr.cumulative_reward[e.duration];
                    tbar += e.prob * tr.cumulative_time[e.duration];
                }
                out.reward[s] = rbar;
                out.duration[s] = tbar;
            }
        }
    }
    return out;
}

CompiledSmdpGroup compile_smdp_group(const UserGroup& group, double slot_discount,
                                     double tail_tol) {
    CompiledSmdpGroup compiled;
    compiled.count = group.count;
    compiled.space = make_smdp_space(group.channel, group.video);
    compiled.slot_discount = slot_discount;
    FirstPassageTable table =
        build_first_passage_table(group.video, group.channel, compiled.space.tau_slot, tail_tol);
    compiled.h.reserve(group.video.num_layers + 1);
    compiled.actions.reserve(group.video.num_layers + 1);
    for (int a = 0; a <= group.video.num_layers; ++a) {
        compiled.h.push_back(
            build_hl(group.video, group.channel, compiled.space, table, a, slot_discount));
        compiled.actions.push_back(
            expected_reward_and_duration(group.video, compiled.space, table, a, slot_discount));
    }
    if (group.initial_distribution.empty()) {
        auto pi = stationary_distribution(group.channel);
        compiled.alpha.assign(compiled.space.size(), 0.0);
        for (int c = 0; c < compiled.space.num_channel_states; ++c)
            compiled.alpha[compiled.space.encode(c, 0, 0)] = pi[c];
    } else {
        if (static_cast<int>(group.initial_distribution.size()) != compiled.space.size())
            throw std::invalid_argument("smdp: initial distribution has wrong dimension");
        compiled.alpha = group.initial_distribution;
    }
    return compiled;
}

namespace {

void add_smdp_group_columns(LpProblem& lp, const CompiledSmdpGroup& group, int group_index,
                            int row_base, int resource_row, double scale) {
    int num_actions = static_cast<int>(group.h.size());
    for (int s = 0; s < group.space.size(); ++s) {
        for (int a = 0; a < num_actions; ++a) {
            std::vector<std::pair<int, double>> entries;
            entries.emplace_back(row_base + s, 1.0);
            const SparseMatrix& m = group.h[a];
            for (int k = m.row_ptr[s]; k < m.row_ptr[s + 1]; ++k)
                entries.emplace_back(row_base + m.col_idx[k], -m.val[k]);
            if (a >= 1)
                entries.emplace_back(resource_row, scale * group.actions[a].duration[s]);
            lp.add_column(scale * group.actions[a].reward[s], std::move(entries));
            lp.var_keys.push_back({group_index, s, a});
        }
    }
}

}  // namespace

LpProblem build_musmdp_lp(const std::vector<CompiledSmdpGroup>& groups, int subchannels) {
    if (groups.empty()) throw std::invalid_argument("build_musmdp_lp: no groups");
    double discount = groups.front().slot_discount;
    for (const auto& g : groups) {
        if (std::abs(g.slot_discount - discount) > 1e-12)
            throw std::invalid_argument("build_musmdp_lp: groups use different slot discounts");
        // The resource pool counts discounted slots, so every group must tick
        // at the same slot duration.
        if (std::abs(g.space.tau_slot - groups.front().space.tau_slot) >
            1e-12 * std::max(1.0, groups.front().space.tau_slot))
            throw std::invalid_argument("build_musmdp_lp: groups use different slot durations");
    }
    int total_users = 0;
    for (const auto& g : groups) total_users += g.count;
    if (subchannels < 1 || subchannels > total_users)
        throw std::invalid_argument("build_musmdp_lp: need 1 <= subchannels <= total users");

    LpProblem lp;
    lp.kind = "musmdp";
    int rows = 0;
    for (const auto& g : groups) rows += g.space.size();
    int resource_row = rows;
    lp.num_constraints = rows + 1;
    lp.rhs.resize(lp.num_constraints);
    int row_base = 0;
    for (size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& g = groups[gi];
        for (int s = 0; s < g.space.size(); ++s) lp.rhs[row_base + s] = g.alpha[s];
        add_smdp_group_columns(lp, g, static_cast<int>(gi), row_base, resource_row,
                               static_cast<double>(g.count));
        row_base += g.space.size();
    }
    lp.rhs[resource_row] = subchannels / (1.0 - discount);
    lp.check_consistent();
    return lp;
}

LpProblem build_musmdp_lp_representative(const CompiledSmdpGroup& group, int num_users,
                                         int subchannels) {
    if (num_users < 1 || subchannels < 1 || subchannels > num_users)
        throw std::invalid_argument("build_musmdp_lp_representative: need 1 <= subchannels <= users");
    LpProblem lp;
    lp.kind = "musmdp-representative";
    lp.num_constraints = group.space.size() + 1;
    lp.rhs.resize(lp.num_constraints);
    for (int s = 0; s < group.space.size(); ++s) lp.rhs[s] = group.alpha[s];
    add_smdp_group_columns(lp, group, 0, 0, group.space.size(), 1.0);
    lp.rhs[group.space.size()] = subchannels / (num_users * (1.0 - group.slot_discount));
    lp.check_consistent();
    return lp;
}

double musmdp_value_in_rb_units(double musmdp_objective, double slot_discount, double rb_discount) {
    return musmdp_objective * (1.0 - slot_discount) / (1.0 - rb_discount);
}

std::string check_discount_alignment(double slot_discount, double rb_discount_per_second,
                                     double tau_slot) {
    double aligned = std::pow(rb_discount_per_second, tau_slot);
    if (std::abs(slot_discount - aligned) <= 1e-12 * std::max(1.0, aligned)) return {};
    return "slot discount " + std::to_string(slot_discount) + " is not " +
           std::to_string(rb_discount_per_second) + "^tau_slot = " + std::to_string(aligned) +
           "; objectives are not comparable with the restless-bandit run";
}

}  // namespace svcsched
