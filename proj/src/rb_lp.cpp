#include "svcsched/rb_lp.hpp"

#include <cmath>
#include <stdexcept>

namespace svcsched {

RbStateSpace make_state_space(const ChannelModel& channel, const VideoConfig& video) {
    RbStateSpace space;
    space.num_channel_states = channel.num_states();
    space.buffer_space = buffer_space_size(video);
    return space;
}

SparseMatrix build_h0(const ChannelModel& channel, const PolicyMatrix& passive) {
    int nc = channel.num_states();
    if (nc == 0) throw std::invalid_argument("build_h0: empty channel model");
    int dim = nc * passive.dim;
    SparseMatrix h;
    h.start(dim, dim);
    for (int c = 0; c < nc; ++c) {
        for (int b = 0; b < passive.dim; ++b) {
            int target = passive.next[b];
            for (int c2 = 0; c2 < nc; ++c2) {
                double p = channel.transition[c][c2];
                if (p > 0.0) h.push_entry(c2 * passive.dim + target, p);
            }
            h.finish_row();
        }
    }
    return h;
}

SparseMatrix build_h1(const ChannelModel& channel, const std::vector<PolicyMatrix>& per_state) {
    int nc = channel.num_states();
    if (static_cast<int>(per_state.size()) != nc)
        throw std::invalid_argument("build_h1: need one policy matrix per channel state");
    int bdim = per_state.front().dim;
    for (const auto& p : per_state)
        if (p.dim != bdim) throw std::invalid_argument("build_h1: policy matrix dimensions differ");
    int dim = nc * bdim;
    SparseMatrix h;
    h.start(dim, dim);
    for (int c = 0; c < nc; ++c) {
        const PolicyMatrix& policy = per_state[c];
        for (int b = 0; b < bdim; ++b) {
            int target = policy.next[b];
            for (int c2 = 0; c2 < nc; ++c2) {
                double p = channel.transition[c][c2];
                if (p > 0.0) h.push_entry(c2 * bdim + target, p);
            }
            h.finish_row();
        }
    }
    return h;
}

std::vector<double> state_reward_vector(const VideoConfig& video, const ChannelModel& channel) {
    int bdim = buffer_space_size(video);
    std::vector<double> buffer_rewards(bdim);
    for (int b = 0; b < bdim; ++b)
        buffer_rewards[b] = playback_step(unindex_buffer(b, video), video).reward;
    std::vector<double> rewards(channel.num_states() * bdim);
    for (int c = 0; c < channel.num_states(); ++c)
        for (int b = 0; b < bdim; ++b) rewards[c * bdim + b] = buffer_rewards[b];
    return rewards;
}

std::vector<double> default_initial_distribution(const ChannelModel& channel,
                                                 const VideoConfig& video) {
    auto pi = stationary_distribution(channel);
    int bdim = buffer_space_size(video);
    std::vector<double> alpha(channel.num_states() * bdim, 0.0);
    for (int c = 0; c < channel.num_states(); ++c) alpha[c * bdim + 0] = pi[c];
    return alpha;
}

CompiledGroup compile_group(const UserGroup& group) {
    if (group.count < 1) throw std::invalid_argument("user group must contain at least one user");
    group.video.validate();
    validate_or_throw(group.channel);
    CompiledGroup compiled;
    compiled.count = group.count;
    compiled.video = group.video;
    compiled.space = make_state_space(group.channel, group.video);
    std::vector<PolicyMatrix> per_state;
    per_state.reserve(group.channel.num_states());
    for (int c = 0; c < group.channel.num_states(); ++c)
        per_state.push_back(build_policy_matrix(group.qa, group.video, group.channel, c));
    compiled.h0 = build_h0(group.channel, build_passive_matrix(group.video));
    compiled.h1 = build_h1(group.channel, per_state);
    compiled.rewards = state_reward_vector(group.video, group.channel);
    if (group.initial_distribution.empty()) {
        compiled.alpha = default_initial_distribution(group.channel, group.video);
    } else {
        if (static_cast<int>(group.initial_distribution.size()) != compiled.space.size())
            throw std::invalid_argument("initial distribution has wrong dimension");
        double total = 0.0;
        for (double a : group.initial_distribution) {
            if (a < 0.0) throw std::invalid_argument("initial distribution has a negative entry");
            total += a;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("initial distribution does not sum to one");
        compiled.alpha = group.initial_distribution;
    }
    return compiled;
}

namespace {

void check_discount(double discount) {
    if (!(discount > 0.0) || !(discount < 1.0))
        throw std::invalid_argument("discount must lie strictly between 0 and 1");
}

// Polytope block for one group: for column (s, a) the occupancy-balance
// constraint contributes +1 in row s and -beta * h^a_{s,j} in every row j
// the state can move to. row_base offsets this group's constraint block.
void add_group_columns(LpProblem& lp, const CompiledGroup& group, int group_index, int row_base,
                       int resource_row, double beta, double objective_scale,
                       double resource_scale) {
    const SparseMatrix* h[2] = {&group.h0, &group.h1};
    for (int s = 0; s < group.space.size(); ++s) {
        for (int a = 0; a < 2; ++a) {
            std::vector<std::pair<int, double>> entries;
            entries.emplace_back(row_base + s, 1.0);
            const SparseMatrix& m = *h[a];
            for (int k = m.row_ptr[s]; k < m.row_ptr[s + 1]; ++k)
                entries.emplace_back(row_base + m.col_idx[k], -beta * m.val[k]);
            if (a == 1) entries.emplace_back(resource_row, resource_scale);
            lp.add_column(objective_scale * group.rewards[s], std::move(entries));
            lp.var_keys.push_back({group_index, s, a});
        }
    }
}

}  // namespace

LpProblem build_rb_lp(const std::vector<CompiledGroup>& groups, int subchannels, double discount) {
    check_discount(discount);
    if (groups.empty()) throw std::invalid_argument("build_rb_lp: no groups");
    int total_users = 0;
    for (const auto& g : groups) total_users += g.count;
    if (subchannels < 1 || subchannels > total_users)
        throw std::invalid_argument("build_rb_lp: need 1 <= subchannels <= total users");

    LpProblem lp;
    lp.kind = "rb";
    int rows = 0;
    for (const auto& g : groups) rows += g.space.size();
    int resource_row = rows;
    lp.num_constraints = rows + 1;
    lp.rhs.resize(lp.num_constraints);

    int row_base = 0;
    for (size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& g = groups[gi];
        for (int s = 0; s < g.space.size(); ++s) lp.rhs[row_base + s] = g.alpha[s];
        add_group_columns(lp, g, static_cast<int>(gi), row_base, resource_row, discount,
                          static_cast<double>(g.count), static_cast<double>(g.count));
        row_base += g.space.size();
    }
    lp.rhs[resource_row] = subchannels / (1.0 - discount);
    lp.check_consistent();
    return lp;
}

LpProblem build_rb_lp_representative(const CompiledGroup& group, int num_users, int subchannels,
                                     double discount) {
    check_discount(discount);
    if (num_users < 1 || subchannels < 1 || subchannels > num_users)
        throw std::invalid_argument("build_rb_lp_representative: need 1 <= subchannels <= users");
    LpProblem lp;
    lp.kind = "rb-representative";
    lp.num_constraints = group.space.size() + 1;
    lp.rhs.resize(lp.num_constraints);
    for (int s = 0; s < group.space.size(); ++s) lp.rhs[s] = group.alpha[s];
    add_group_columns(lp, group, 0, 0, group.space.size(), discount, 1.0, 1.0);
    lp.rhs[group.space.size()] = subchannels / (num_users * (1.0 - discount));
    lp.check_consistent();
    return lp;
}

LpProblem build_rb_dual(const LpProblem& primal) {
    primal.check_consistent();
    int m = primal.num_constraints;
    int n = primal.num_vars;
    LpProblem dual;
    dual.kind = "dual";
    dual.num_constraints = n;
    dual.rhs = primal.objective;

    // Transpose the primal columns once.
    std::vector<std::vector<std::pair<int, double>>> rows_of(m);
    for (int j = 0; j < n; ++j)
        for (int k = primal.col_ptr[j]; k < primal.col_ptr[j + 1]; ++k)
            rows_of[primal.row_idx[k]].emplace_back(j, primal.values[k]);

    for (int i = 0; i < m; ++i) dual.add_column(-primal.rhs[i], rows_of[i]);
    for (int i = 0; i < m; ++i) {
        std::vector<std::pair<int, double>> negated;
        negated.reserve(rows_of[i].size());
        for (auto [row, value] : rows_of[i]) negated.emplace_back(row, -value);
        dual.add_column(primal.rhs[i], std::move(negated));
    }
    for (int j = 0; j < n; ++j) dual.add_column(0.0, {{j, -1.0}});
    dual.check_consistent();
    return dual;
}

std::vector<RbSolutionView> solution_views(const std::vector<CompiledGroup>& groups) {
    std::vector<RbSolutionView> views;
    int offset = 0;
    for (const auto& g : groups) {
        views.push_back({offset, g.space.size()});
        offset += 2 * g.space.size();
    }
    return views;
}

}  // namespace svcsched
