#include "svcsched/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace svcsched {

double lambda_avg(const ChannelModel& channel, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("lambda_avg: rho must be positive");
    return avg_rate(channel) / rho;
}

std::vector<double> playback_class_fractions(const GroupSolution& solution,
                                             const VideoConfig& video, const RbStateSpace& space) {
    std::vector<double> mass(video.num_layers + 1, 0.0);
    double total = 0.0;
    for (int s = 0; s < space.size(); ++s) {
        double x = solution.x0[s] + solution.x1[s];
        total += x;
        BufferState b = unindex_buffer(space.buffer_of(s), video);
        // Class l holds states with exactly l leading layers buffered and
        // nothing above; other states carry no optimal mass.
        int prefix = decodable_prefix(b);
        bool empty_above = true;
        for (int l = prefix; l < video.num_layers; ++l) empty_above &= b[l] == 0;
        if (empty_above) mass[prefix] += x;
    }
    if (!(total > 0.0)) throw std::invalid_argument("playback_class_fractions: zero occupancy mass");
    for (double& m : mass) m /= total;
    return mass;
}

double mu_avg(const GroupSolution& solution, const VideoConfig& video, const RbStateSpace& space) {
    auto fractions = playback_class_fractions(solution, video, space);
    double mu = 0.0;
    double cumulative_rate = 0.0;
    for (int l = 1; l <= video.num_layers; ++l) {
        cumulative_rate += video.layer_rates[l - 1];
        mu += cumulative_rate * fractions[l];
    }
    return mu;
}

LoadSweep run_load_sweep(const UserGroup& group, int num_users,
                         const std::vector<int>& subchannel_counts, double discount,
                         const SolverOptions& solver_options, int threads) {
    if (subchannel_counts.empty()) throw std::invalid_argument("load sweep: no subchannel counts");
    CompiledGroup compiled = compile_group(group);
    LoadSweep sweep;
    sweep.num_users = num_users;
    sweep.points.resize(subchannel_counts.size());
    std::string first_error;
    std::mutex error_mutex;
    auto solve_point = [&](size_t index) {
        int m = subchannel_counts[index];
        try {
            LpProblem lp = build_rb_lp_representative(compiled, num_users, m, discount);
            LpSolution solution = solve(lp, solver_options);
            if (!solution.optimal())
                throw std::runtime_error("load sweep: solve ended " + to_string(solution.status));
            RbSolutionView view{0, compiled.space.size()};
            GroupSolution gs = extract_group_solution(solution, view);
            SweepPoint point;
            point.subchannels = m;
            point.rho = static_cast<double>(num_users) / m;
            point.lambda = lambda_avg(group.channel, point.rho);
            point.mu = mu_avg(gs, group.video, compiled.space);
            point.lp_objective_per_user = solution.objective;
            sweep.points[index] = point;
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (first_error.empty()) first_error = e.what();
        }
    };
    int workers = std::max(1, std::min<int>(threads, static_cast<int>(subchannel_counts.size())));
    if (workers == 1) {
        for (size_t i = 0; i < subchannel_counts.size(); ++i) solve_point(i);
    } else {
        std::atomic<size_t> cursor{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                while (true) {
                    size_t i = cursor.fetch_add(1);
                    if (i >= subchannel_counts.size()) return;
                    solve_point(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    if (!first_error.empty()) throw std::runtime_error(first_error);
    std::sort(sweep.points.begin(), sweep.points.end(),
              [](const SweepPoint& a, const SweepPoint& b) { return a.rho < b.rho; });
    return sweep;
}

CriticalLoad critical_load(const LoadSweep& sweep) {
    if (sweep.points.size() < 1) throw std::invalid_argument("critical_load: empty sweep");
    auto gap = [](const SweepPoint& p) { return p.lambda - p.mu; };
    for (const auto& p : sweep.points) {
        if (gap(p) == 0.0) return {p.rho, p, p};
    }
    for (size_t i = 0; i + 1 < sweep.points.size(); ++i) {
        const auto& a = sweep.points[i];
        const auto& b = sweep.points[i + 1];
        double ga = gap(a), gb = gap(b);
        if ((ga > 0.0) != (gb > 0.0)) {
            double rho = a.rho + (b.rho - a.rho) * ga / (ga - gb);
            return {rho, a, b};
        }
    }
    throw std::runtime_error("critical_load: lambda_avg - mu_avg never changes sign over the sweep");
}

std::vector<HeatmapRow> heatmap_table(const PriorityRanking& ranking, const RbStateSpace& space,
                                      const VideoConfig& video) {
    std::vector<HeatmapRow> rows;
    rows.reserve(space.size());
    for (int s = 0; s < space.size(); ++s) {
        HeatmapRow row;
        row.channel_index = space.channel_of(s);
        row.buffer = unindex_buffer(space.buffer_of(s), video);
        row.pruned = ranking.pruned(s);
        row.priority_index = ranking.normalized_index(s);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::vector<double> ranks_with_ties(const std::vector<double>& values) {
    int n = static_cast<int>(values.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double average_rank = (i + j) / 2.0 + 1.0;
        for (int k = i; k <= j; ++k) ranks[order[k]] = average_rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman: need two equally sized samples");
    auto ra = ranks_with_ties(a);
    auto rb = ranks_with_ties(b);
    double mean = (a.size() + 1) / 2.0;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - mean) * (rb[i] - mean);
        va += (ra[i] - mean) * (ra[i] - mean);
        vb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (va == 0.0 || vb == 0.0)
        throw std::invalid_argument("spearman: a sample is constant");
    return cov / std::sqrt(va * vb);
}

}  // namespace svcsched
