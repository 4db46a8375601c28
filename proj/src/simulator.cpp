#include "svcsched/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "svcsched/rng.hpp"

namespace svcsched {

std::string to_string(SchedulerKind kind) {
    switch (kind) {
        case SchedulerKind::Qaa: return "qaa";
        case SchedulerKind::Beas: return "beas";
        case SchedulerKind::Pf: return "pf";
        case SchedulerKind::Bcf: return "bcf";
        case SchedulerKind::Lbf: return "lbf";
    }
    return "unknown";
}

int SimConfig::total_users() const {
    int n = 0;
    for (const auto& g : groups) n += g.count;
    return n;
}

void SimConfig::validate() const {
    if (groups.empty()) throw std::invalid_argument("sim: no user groups");
    if (horizon_slots < 1) throw std::invalid_argument("sim: horizon must be >= 1");
    if (subchannels < 0) throw std::invalid_argument("sim: negative subchannel count");
    if (!(discount_per_second > 0.0) || !(discount_per_second < 1.0))
        throw std::invalid_argument("sim: discount must lie in (0,1)");
    if (warmup_slots < 0 || warmup_slots >= horizon_slots)
        throw std::invalid_argument("sim: warmup must lie in [0, horizon)");
    for (const auto& g : groups) {
        if (std::abs(g.video.segment_duration - groups.front().video.segment_duration) > 1e-12)
            throw std::invalid_argument("sim: groups must share one segment duration (the slot)");
    }
}

SimModel build_sim_model(const SimConfig& config, const SolverOptions& solver_options) {
    config.validate();
    SimModel model;
    model.raw_groups = config.groups;
    for (const auto& g : config.groups) {
        model.groups.push_back(compile_group(g));
        model.resolved_qas.push_back(resolve_qa(g.qa, g.video, g.channel.num_states()));
    }
    if (config.scheduler.kind == SchedulerKind::Qaa) {
        if (config.subchannels < 1)
            throw std::invalid_argument("sim: QAA needs at least one subchannel");
        LpProblem lp = build_rb_lp(model.groups, config.subchannels, config.discount_per_second);
        LpSolution solution = solve(lp, solver_options);
        if (!solution.optimal())
            throw std::runtime_error("sim: RB solve for QAA ended " + to_string(solution.status));
        model.rb_objective = solution.objective;
        auto views = solution_views(model.groups);
        for (size_t gi = 0; gi < model.groups.size(); ++gi) {
            GroupSolution gs = extract_group_solution(solution, views[gi]);
            model.rankings.push_back(qaa_rank(gs, model.groups[gi].space));
        }
    }
    return model;
}

SimModel build_sim_model(const SimConfig& config, std::vector<PriorityRanking> rankings,
                         double rb_objective) {
    config.validate();
    if (rankings.size() != config.groups.size())
        throw std::invalid_argument("sim: need one ranking per group");
    SimModel model;
    model.raw_groups = config.groups;
    for (const auto& g : config.groups) {
        model.groups.push_back(compile_group(g));
        model.resolved_qas.push_back(resolve_qa(g.qa, g.video, g.channel.num_states()));
    }
    model.rankings = std::move(rankings);
    model.rb_objective = rb_objective;
    return model;
}

namespace {

struct UserRuntime {
    int group = 0;
    BufferState buffer;
    int channel = 0;
    double pf_average = 0.0;
    // accumulators
    double discounted_reward = 0.0;
    long stall_slots = 0;
    long counted_slots = 0;
    long segments_played = 0;
    long base_only_segments = 0;
    std::vector<long> layer_downloads;
};

int sample_from(const std::vector<double>& distribution, Rng& rng) {
    double u = rng.next_double();
    double cum = 0.0;
    for (size_t i = 0; i < distribution.size(); ++i) {
        cum += distribution[i];
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(distribution.size()) - 1;
}

}  // namespace

SimResult run(const SimModel& model, const SimConfig& config, uint64_t seed, bool record_trace) {
    config.validate();
    if (config.scheduler.kind == SchedulerKind::Qaa && model.rankings.empty())
        throw std::invalid_argument("sim: QAA scheduler requires rankings in the model");

    Rng rng(seed);
    int num_users = config.total_users();
    std::vector<UserRuntime> users;
    users.reserve(num_users);
    std::vector<std::vector<double>> stationary;
    std::vector<RbStateSpace> spaces;
    std::vector<double> reference_rates;
    for (size_t gi = 0; gi < model.raw_groups.size(); ++gi) {
        const auto& g = model.raw_groups[gi];
        stationary.push_back(stationary_distribution(g.channel));
        spaces.push_back(model.groups[gi].space);
        reference_rates.push_back(
            *std::max_element(g.video.layer_rates.begin(), g.video.layer_rates.end()));
        for (int i = 0; i < g.count; ++i) {
            UserRuntime u;
            u.group = static_cast<int>(gi);
            u.buffer.assign(g.video.num_layers, 0);
            u.pf_average = config.scheduler.pf_initial_average;
            u.layer_downloads.assign(g.video.num_layers, 0);
            users.push_back(std::move(u));
        }
    }
    // Initial channel states from the stationary distribution, matching the
    // LP's default initial distribution.
    for (auto& u : users) u.channel = sample_from(stationary[u.group], rng);

    std::vector<double> beas_levels(num_users, config.scheduler.beas.initial_level);
    double slot_seconds = config.groups.front().video.segment_duration;
    double slot_discount = std::pow(config.discount_per_second, slot_seconds);

    SimResult result;
    if (record_trace) result.trace.reserve(static_cast<size_t>(config.horizon_slots) * num_users);

    std::vector<double> rates(num_users);
    std::vector<int> base_occupancy(num_users);
    std::vector<int> budgets(num_users);
    double discount_weight = 1.0;

    for (int slot = 0; slot < config.horizon_slots; ++slot) {
        if (slot > 0) {
            for (auto& u : users)
                u.channel = sample_next(model.raw_groups[u.group].channel, u.channel, rng);
        }
        for (int i = 0; i < num_users; ++i) {
            const auto& g = model.raw_groups[users[i].group];
            rates[i] = g.channel.states[users[i].channel];
            base_occupancy[i] = users[i].buffer[0];
            budgets[i] = sub_segments_deliverable(rates[i], g.video.segment_duration,
                                                  reference_rates[users[i].group]);
        }

        std::vector<int> scheduled;
        switch (config.scheduler.kind) {
            case SchedulerKind::Qaa: {
                std::vector<UserState> states(num_users);
                for (int i = 0; i < num_users; ++i) {
                    const auto& space = spaces[users[i].group];
                    int buffer_index =
                        index_buffer(users[i].buffer, model.raw_groups[users[i].group].video);
                    states[i] = {users[i].group, space.encode(users[i].channel, buffer_index)};
                }
                scheduled = qaa_schedule(model.rankings, spaces, states, config.subchannels);
                break;
            }
            case SchedulerKind::Beas: {
                std::vector<int> deliveries(num_users, 0);
                for (int i = 0; i < num_users; ++i) {
                    const auto& g = model.raw_groups[users[i].group];
                    auto d = qa_decide(model.resolved_qas[users[i].group], g.video,
                                       users[i].buffer, users[i].channel, budgets[i]);
                    for (int v : d) deliveries[i] += v;
                }
                // In the segment-granular simulation the slot is the segment,
                // so the decay and refresh horizons coincide.
                auto outcome = beas_step(config.scheduler.beas, beas_levels, rates, base_occupancy,
                                         deliveries, config.subchannels, slot_seconds,
                                         slot_seconds);
                scheduled = std::move(outcome.scheduled);
                beas_levels = std::move(outcome.next_levels);
                break;
            }
            case SchedulerKind::Pf: {
                std::vector<double> averages(num_users);
                for (int i = 0; i < num_users; ++i) averages[i] = users[i].pf_average;
                scheduled = baseline_schedule(BaselineKind::Pf, rates, averages, base_occupancy,
                                              config.subchannels);
                break;
            }
            case SchedulerKind::Bcf:
                scheduled = baseline_schedule(BaselineKind::Bcf, rates, {}, base_occupancy,
                                              config.subchannels);
                break;
            case SchedulerKind::Lbf:
                scheduled = baseline_schedule(BaselineKind::Lbf, rates, {}, base_occupancy,
                                              config.subchannels);
                break;
        }

        std::vector<char> is_scheduled(num_users, 0);
        for (int j : scheduled) is_scheduled[j] = 1;
        if (config.scheduler.kind == SchedulerKind::Pf) {
            std::vector<double> averages(num_users);
            for (int i = 0; i < num_users; ++i) averages[i] = users[i].pf_average;
            pf_update(averages, scheduled, rates, config.scheduler.pf_time_constant);
            for (int i = 0; i < num_users; ++i) users[i].pf_average = averages[i];
        }

        for (int i = 0; i < num_users; ++i) {
            auto& u = users[i];
            const auto& g = model.raw_groups[u.group];
            std::vector<int> downloads(g.video.num_layers, 0);
            if (is_scheduled[i]) {
                downloads =
                    qa_decide(model.resolved_qas[u.group], g.video, u.buffer, u.channel, budgets[i]);
            }
            auto outcome = slot_transition(u.buffer, downloads, g.video);

            u.discounted_reward += outcome.reward * discount_weight;
            if (slot >= config.warmup_slots) {
                u.counted_slots += 1;
                if (outcome.rebuffered) u.stall_slots += 1;
                if (outcome.played_layers >= 1) {
                    u.segments_played += 1;
                    if (outcome.played_layers == 1) u.base_only_segments += 1;
                }
                for (int l = 0; l < g.video.num_layers; ++l) u.layer_downloads[l] += downloads[l];
            }
            if (record_trace) {
                TraceRow row;
                row.slot = slot;
                row.user = i;
                row.channel_state = u.channel;
                row.scheduled = is_scheduled[i];
                row.downloads = downloads;
                row.rebuffered = outcome.rebuffered;
                row.reward = outcome.reward;
                row.buffer = outcome.next;
                result.trace.push_back(std::move(row));
            }
            u.buffer = std::move(outcome.next);
        }
        discount_weight *= slot_discount;
    }

    result.metrics.per_user.resize(num_users);
    double sum_reward = 0.0, sum_rebuffer = 0.0, sum_base_only = 0.0;
    for (int i = 0; i < num_users; ++i) {
        const auto& u = users[i];
        UserMetrics m;
        m.discounted_reward = u.discounted_reward;
        m.slots_counted = u.counted_slots;
        m.segments_played = u.segments_played;
        m.rebuffer_fraction =
            u.counted_slots > 0 ? static_cast<double>(u.stall_slots) / u.counted_slots : 0.0;
        m.base_only_fraction = u.segments_played > 0
                                   ? static_cast<double>(u.base_only_segments) / u.segments_played
                                   : 0.0;
        long total_downloads = 0;
        for (long d : u.layer_downloads) total_downloads += d;
        m.layer_download_fractions.assign(u.layer_downloads.size(), 0.0);
        if (total_downloads > 0)
            for (size_t l = 0; l < u.layer_downloads.size(); ++l)
                m.layer_download_fractions[l] =
                    static_cast<double>(u.layer_downloads[l]) / total_downloads;
        sum_reward += m.discounted_reward;
        sum_rebuffer += m.rebuffer_fraction;
        sum_base_only += m.base_only_fraction;
        result.metrics.per_user[i] = std::move(m);
    }
    result.metrics.mean_discounted_reward = sum_reward / num_users;
    result.metrics.mean_rebuffer_fraction = sum_rebuffer / num_users;
    result.metrics.mean_base_only_fraction = sum_base_only / num_users;
    return result;
}

namespace {

BatchStat summarize(const std::vector<double>& values) {
    BatchStat stat;
    double sum = 0.0;
    for (double v : values) sum += v;
    stat.mean = sum / values.size();
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - stat.mean) * (v - stat.mean);
        double variance = ss / (values.size() - 1);
        stat.stderr_mean = std::sqrt(variance / values.size());
    }
    return stat;
}

}  // namespace

BatchMetrics run_batch(const SimModel& model, const SimConfig& config,
                       const std::vector<uint64_t>& seeds, int threads) {
    if (seeds.empty()) throw std::invalid_argument("run_batch: need at least one seed");
    BatchMetrics batch;
    batch.seeds = seeds;
    batch.per_seed.resize(seeds.size());
    int worker_count = std::max(1, std::min<int>(threads, static_cast<int>(seeds.size())));
    if (worker_count == 1) {
        for (size_t i = 0; i < seeds.size(); ++i)
            batch.per_seed[i] = run(model, config, seeds[i], false).metrics;
    } else {
        std::vector<std::thread> workers;
        std::atomic<size_t> cursor{0};
        for (int w = 0; w < worker_count; ++w) {
            workers.emplace_back([&]() {
                while (true) {
                    size_t i = cursor.fetch_add(1);
                    if (i >= seeds.size()) return;
                    batch.per_seed[i] = run(model, config, seeds[i], false).metrics;
                }
            });
        }
        for (auto& t : workers) t.join();
    }
    std::vector<double> rewards, rebuffers, base_only;
    for (const auto& m : batch.per_seed) {
        rewards.push_back(m.mean_discounted_reward);
        rebuffers.push_back(m.mean_rebuffer_fraction);
        base_only.push_back(m.mean_base_only_fraction);
    }
    batch.discounted_reward = summarize(rewards);
    batch.rebuffer_fraction = summarize(rebuffers);
    batch.base_only_fraction = summarize(base_only);
    return batch;
}

}  // namespace svcsched
