#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "svcsched/analysis.hpp"
#include "svcsched/lp_solver.hpp"
#include "svcsched/schedulers.hpp"
#include "svcsched/simulator.hpp"

namespace svcsched {

using json = nlohmann::ordered_json;

/// Artifact schema tags look like "svcsched/<name>/<major>". Readers accept
/// any artifact whose name matches and whose major version is known.
std::string schema_tag(const std::string& name);
void check_schema(const json& document, const std::string& name);

json lp_problem_to_json(const LpProblem& problem);
LpProblem lp_problem_from_json(const json& document);

json lp_solution_to_json(const LpSolution& solution);
LpSolution lp_solution_from_json(const json& document);

struct RankingArtifact {
    struct Group {
        int num_channel_states = 0;
        int buffer_space = 0;
        std::vector<int> order;
    };
    std::vector<Group> groups;
    double rb_objective = 0.0;
};

json ranking_to_json(const RankingArtifact& artifact);
RankingArtifact ranking_from_json(const json& document);
RankingArtifact make_ranking_artifact(const std::vector<PriorityRanking>& rankings,
                                      const std::vector<CompiledGroup>& groups,
                                      double rb_objective);
std::vector<PriorityRanking> rankings_from_artifact(const RankingArtifact& artifact);

json metrics_to_json(const BatchMetrics& batch);
json single_run_metrics_to_json(const Metrics& metrics, uint64_t seed);

std::string trace_to_csv(const std::vector<TraceRow>& trace);
std::string sweep_to_csv(const LoadSweep& sweep);
std::string heatmap_to_csv(const std::vector<HeatmapRow>& rows);

/// Deterministic shortest round-trip formatting, shared by every CSV writer.
std::string format_double(double value);

/// Writes through a temp file in the same directory and renames into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

json read_json_file(const std::filesystem::path& path);

}  // namespace svcsched
