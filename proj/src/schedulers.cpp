#include "svcsched/schedulers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace svcsched {

GroupSolution extract_group_solution(const LpSolution& solution, const RbSolutionView& view) {
    if (!solution.optimal()) throw std::invalid_argument("extract_group_solution: solution not optimal");
    GroupSolution g;
    g.x0.resize(view.num_states);
    g.x1.resize(view.num_states);
    g.gamma0.resize(view.num_states);
    g.gamma1.resize(view.num_states);
    for (int s = 0; s < view.num_states; ++s) {
        g.x0[s] = solution.x[view.column(s, 0)];
        g.x1[s] = solution.x[view.column(s, 1)];
        g.gamma0[s] = solution.reduced_costs[view.column(s, 0)];
        g.gamma1[s] = solution.reduced_costs[view.column(s, 1)];
    }
    return g;
}

std::vector<char> prune_unreachable(const GroupSolution& solution, double tol) {
    int n = static_cast<int>(solution.x0.size());
    std::vector<char> retained(n, 0);
    for (int s = 0; s < n; ++s) retained[s] = solution.x0[s] > tol || solution.x1[s] > tol;
    return retained;
}

std::vector<char> reachable_states(const GroupSolution& solution, const SparseMatrix& h0,
                                   const SparseMatrix& h1, const std::vector<double>& alpha,
                                   double tol) {
    int n = static_cast<int>(alpha.size());
    std::vector<char> seen(n, 0);
    std::vector<int> queue;
    for (int s = 0; s < n; ++s) {
        if (alpha[s] > 0.0) {
            seen[s] = 1;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        int l = queue.back();
        queue.pop_back();
        auto expand = [&](const SparseMatrix& h, double mass) {
            if (mass <= tol) return;
            for (int k = h.row_ptr[l]; k < h.row_ptr[l + 1]; ++k) {
                if (h.val[k] > 0.0 && !seen[h.col_idx[k]]) {
                    seen[h.col_idx[k]] = 1;
                    queue.push_back(h.col_idx[k]);
                }
            }
        };
        expand(h0, solution.x0[l]);
        expand(h1, solution.x1[l]);
    }
    return seen;
}

PriorityRanking qaa_rank(const GroupSolution& solution, const RbStateSpace& space, double tol) {
    int n = static_cast<int>(solution.x0.size());
    if (n != space.size()) throw std::invalid_argument("qaa_rank: state space mismatch");
    std::vector<int> q1, q0;
    for (int s = 0; s < n; ++s) {
        if (solution.x1[s] > tol) {
            q1.push_back(s);
        } else if (solution.x0[s] > tol) {
            q0.push_back(s);
        }
    }
    auto tie_less = [&](int a, int b) {
        int ba = space.buffer_of(a), bb = space.buffer_of(b);
        if (ba != bb) return ba < bb;  // lower buffer first
        return space.channel_of(a) > space.channel_of(b);  // then higher channel
    };
    std::stable_sort(q1.begin(), q1.end(), [&](int a, int b) {
        if (solution.gamma0[a] != solution.gamma0[b]) return solution.gamma0[a] > solution.gamma0[b];
        return tie_less(a, b);
    });
    std::stable_sort(q0.begin(), q0.end(), [&](int a, int b) {
        if (solution.gamma1[a] != solution.gamma1[b]) return solution.gamma1[a] < solution.gamma1[b];
        return tie_less(a, b);
    });
    PriorityRanking ranking;
    ranking.order = std::move(q1);
    ranking.order.insert(ranking.order.end(), q0.begin(), q0.end());
    ranking.position.assign(n, 0);
    for (size_t p = 0; p < ranking.order.size(); ++p)
        ranking.position[ranking.order[p]] = static_cast<int>(p) + 1;
    return ranking;
}

std::vector<int> qaa_schedule(const std::vector<PriorityRanking>& rankings,
                              const std::vector<RbStateSpace>& spaces,
                              const std::vector<UserState>& users, int subchannels) {
    if (rankings.size() != spaces.size())
        throw std::invalid_argument("qaa_schedule: rankings/spaces size mismatch");
    int n = static_cast<int>(users.size());
    int m = std::min(subchannels, n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto key_less = [&](int ua, int ub) {
        const auto& a = users[ua];
        const auto& b = users[ub];
        bool pa = rankings[a.group].pruned(a.full_state);
        bool pb = rankings[b.group].pruned(b.full_state);
        if (pa != pb) return !pa;  // ranked states before pruned ones
        if (!pa) {
            double ia = rankings[a.group].normalized_index(a.full_state);
            double ib = rankings[b.group].normalized_index(b.full_state);
            if (ia != ib) return ia < ib;
        } else {
            int ba = spaces[a.group].buffer_of(a.full_state);
            int bb = spaces[b.group].buffer_of(b.full_state);
            if (ba != bb) return ba < bb;
            int ca = spaces[a.group].channel_of(a.full_state);
            int cb = spaces[b.group].channel_of(b.full_state);
            if (ca != cb) return ca > cb;
        }
        return ua < ub;
    };
    std::stable_sort(order.begin(), order.end(), key_less);
    order.resize(m);
    std::sort(order.begin(), order.end());
    return order;
}

BeasOutcome beas_step(const BeasParams& params, const std::vector<double>& levels,
                      const std::vector<double>& channel_rates,
                      const std::vector<int>& base_layer_occupancy,
                      const std::vector<int>& deliveries_if_scheduled, int subchannels,
                      double tau_slot, double tau_seg) {
    if (params.epsilon < 0.0 || params.epsilon >= 1.0)
        throw std::invalid_argument("beas: epsilon must be in [0,1)");
    int n = static_cast<int>(levels.size());
    int m = std::min(subchannels, n);
    BeasOutcome out;
    out.next_levels.resize(n);
    for (int i = 0; i < n; ++i)
        out.next_levels[i] = (1.0 - params.epsilon) * levels[i] - params.epsilon * tau_slot;

    std::vector<int> urgent, rest;
    for (int i = 0; i < n; ++i)
        (out.next_levels[i] < params.b_thresh ? urgent : rest).push_back(i);

    auto by_channel = [&](int a, int b) {
        if (channel_rates[a] != channel_rates[b]) return channel_rates[a] > channel_rates[b];
        return a < b;
    };
    auto by_base = [&](int a, int b) {
        if (base_layer_occupancy[a] != base_layer_occupancy[b])
            return base_layer_occupancy[a] < base_layer_occupancy[b];
        return a < b;
    };
    if (static_cast<int>(urgent.size()) >= m) {
        std::stable_sort(urgent.begin(), urgent.end(), by_channel);
        urgent.resize(m);
        out.scheduled = std::move(urgent);
    } else {
        std::stable_sort(rest.begin(), rest.end(), by_base);
        rest.resize(m - static_cast<int>(urgent.size()));
        out.scheduled = std::move(urgent);
        out.scheduled.insert(out.scheduled.end(), rest.begin(), rest.end());
    }
    std::sort(out.scheduled.begin(), out.scheduled.end());

    for (int j : out.scheduled) {
        double h = params.h_alpha * deliveries_if_scheduled[j] + params.h_beta;
        out.next_levels[j] = (1.0 - params.epsilon) * levels[j] + params.epsilon * tau_seg * h;
    }
    return out;
}

std::vector<int> baseline_schedule(BaselineKind kind, const std::vector<double>& channel_rates,
                                   const std::vector<double>& throughput_averages,
                                   const std::vector<int>& base_layer_occupancy, int subchannels) {
    int n = static_cast<int>(channel_rates.size());
    int m = std::min(subchannels, n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    switch (kind) {
        case BaselineKind::Pf:
            if (static_cast<int>(throughput_averages.size()) != n)
                throw std::invalid_argument("PF needs a throughput average per user");
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                double sa = channel_rates[a] / std::max(throughput_averages[a], 1e-12);
                double sb = channel_rates[b] / std::max(throughput_averages[b], 1e-12);
                if (sa != sb) return sa > sb;
                return a < b;
            });
            break;
        case BaselineKind::Bcf:
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                if (channel_rates[a] != channel_rates[b]) return channel_rates[a] > channel_rates[b];
                return a < b;
            });
            break;
        case BaselineKind::Lbf:
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                if (base_layer_occupancy[a] != base_layer_occupancy[b])
                    return base_layer_occupancy[a] < base_layer_occupancy[b];
                return a < b;
            });
            break;
    }
    order.resize(m);
    std::sort(order.begin(), order.end());
    return order;
}

void pf_update(std::vector<double>& throughput_averages, const std::vector<int>& scheduled,
               const std::vector<double>& channel_rates, double time_constant) {
    if (!(time_constant >= 1.0)) throw std::invalid_argument("PF time constant must be >= 1");
    std::vector<char> is_scheduled(throughput_averages.size(), 0);
    for (int j : scheduled) is_scheduled[j] = 1;
    for (size_t i = 0; i < throughput_averages.size(); ++i) {
        double served = is_scheduled[i] ? channel_rates[i] : 0.0;
        throughput_averages[i] =
            (1.0 - 1.0 / time_constant) * throughput_averages[i] + served / time_constant;
    }
}

}  // namespace svcsched
