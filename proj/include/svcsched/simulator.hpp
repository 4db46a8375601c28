#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svcsched/rb_lp.hpp"
#include "svcsched/schedulers.hpp"

namespace svcsched {

enum class SchedulerKind { Qaa, Beas, Pf, Bcf, Lbf };

std::string to_string(SchedulerKind kind);

struct SchedulerSpec {
    SchedulerKind kind = SchedulerKind::Pf;
    BeasParams beas;
    double pf_time_constant = 50.0;
    double pf_initial_average = 1.0;  // Mbps
};

struct SimConfig {
    std::vector<UserGroup> groups;
    int subchannels = 1;
    SchedulerSpec scheduler;
    int horizon_slots = 600;
    double discount_per_second = 0.99;
    int warmup_slots = 0;  // excluded from the fraction metrics only

    int total_users() const;
    void validate() const;
};

/// Immutable per-run inputs shared across seeds: compiled groups plus, for
/// QAA, the solved-LP priority rankings.
struct SimModel {
    std::vector<UserGroup> raw_groups;
    std::vector<CompiledGroup> groups;
    std::vector<QaSpec> resolved_qas;
    std::vector<PriorityRanking> rankings;  // per group, QAA only
    double rb_objective = 0.0;              // network-wide RB optimum, QAA only
};

/// Compiles the groups; for the QAA scheduler this also builds and solves the
/// group-scaled RB LP and derives the rankings.
SimModel build_sim_model(const SimConfig& config, const SolverOptions& solver_options = {});

/// Variant for pre-solved rankings (e.g. loaded from a ranking artifact).
SimModel build_sim_model(const SimConfig& config, std::vector<PriorityRanking> rankings,
                         double rb_objective);

struct TraceRow {
    int slot = 0;
    int user = 0;
    int channel_state = 0;  // index into the group's channel model
    bool scheduled = false;
    std::vector<int> downloads;
    std::vector<int> buffer;
    bool rebuffered = false;
    double reward = 0.0;
};

struct UserMetrics {
    double discounted_reward = 0.0;
    double rebuffer_fraction = 0.0;
    double base_only_fraction = 0.0;  // of segments actually played
    std::vector<double> layer_download_fractions;
    long slots_counted = 0;
    long segments_played = 0;
};

struct Metrics {
    std::vector<UserMetrics> per_user;
    double mean_discounted_reward = 0.0;
    double mean_rebuffer_fraction = 0.0;
    double mean_base_only_fraction = 0.0;
};

struct SimResult {
    std::vector<TraceRow> trace;
    Metrics metrics;
};

/// One seeded run. Deterministic: identical (model, config, seed) inputs give
/// identical results. Set record_trace = false to skip per-slot rows.
SimResult run(const SimModel& model, const SimConfig& config, uint64_t seed,
              bool record_trace = true);

struct BatchStat {
    double mean = 0.0;
    std::optional<double> stderr_mean;  // empty with a single seed
};

struct BatchMetrics {
    std::vector<uint64_t> seeds;
    std::vector<Metrics> per_seed;
    BatchStat discounted_reward;
    BatchStat rebuffer_fraction;
    BatchStat base_only_fraction;
};

/// Runs every seed (in parallel up to `threads`) and aggregates the per-seed
/// user means. Results are independent of the thread count.
BatchMetrics run_batch(const SimModel& model, const SimConfig& config,
                       const std::vector<uint64_t>& seeds, int threads = 1);

}  // namespace svcsched
