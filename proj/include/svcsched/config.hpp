#pragma once

#include <map>
#include <string>
#include <vector>

#include "svcsched/artifacts.hpp"
#include "svcsched/simulator.hpp"

namespace svcsched {

/// Parsed and defaulted experiment description. Everything a run needs lives
/// here (no environment dependence), so the emitted resolved-config snapshot
/// reproduces the run exactly.
struct ExperimentConfig {
    VideoConfig video;
    std::map<std::string, ChannelModel> channels;
    std::map<std::string, QaSpec> qas;

    struct GroupRef {
        int count = 1;
        std::string qa;
        std::string channel;
    };
    std::vector<GroupRef> groups;

    int subchannels = 0;                 // used when subchannel_sweep is empty
    std::vector<int> subchannel_sweep;   // for the sweep subcommand
    double discount_per_second = 0.99;
    SchedulerSpec scheduler;
    std::vector<uint64_t> seeds{1};
    int horizon_slots = 600;
    int warmup_slots = 0;
    SolverOptions solver;
    std::string output_dir = "out";
    double smdp_tail_tol = 1e-9;

    std::vector<UserGroup> build_groups() const;
    SimConfig to_sim_config() const;
};

/// Parses a config document; error messages carry the JSON path of the
/// offending field. Unknown keys are rejected to catch typos.
ExperimentConfig load_experiment_config(const json& document);

/// The fully defaulted config echoed back for reproducibility.
json resolved_config_json(const ExperimentConfig& config);

}  // namespace svcsched
