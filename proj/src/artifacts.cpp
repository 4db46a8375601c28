#include "svcsched/artifacts.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace svcsched {

namespace {

constexpr int kSchemaMajor = 1;

}  // namespace

std::string schema_tag(const std::string& name) {
    return "svcsched/" + name + "/" + std::to_string(kSchemaMajor);
}

void check_schema(const json& document, const std::string& name) {
    if (!document.is_object() || !document.contains("schema") || !document["schema"].is_string())
        throw std::runtime_error("artifact is missing its schema tag (expected " + schema_tag(name) + ")");
    std::string tag = document["schema"].get<std::string>();
    std::string prefix = "svcsched/" + name + "/";
    if (tag.rfind(prefix, 0) != 0)
        throw std::runtime_error("artifact schema " + tag + " does not match " + schema_tag(name));
    int major = 0;
    auto digits = tag.substr(prefix.size());
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), major);
    if (ec != std::errc() || major != kSchemaMajor)
        throw std::runtime_error("artifact schema " + tag + " has an unsupported major version");
}

json lp_problem_to_json(const LpProblem& problem) {
    problem.check_consistent();
    json doc;
    doc["schema"] = schema_tag("lp-problem");
    doc["kind"] = problem.kind;
    doc["num_vars"] = problem.num_vars;
    doc["num_constraints"] = problem.num_constraints;
    doc["objective"] = problem.objective;
    doc["rhs"] = problem.rhs;
    json triplets = json::array();
    for (int j = 0; j < problem.num_vars; ++j)
        for (int k = problem.col_ptr[j]; k < problem.col_ptr[j + 1]; ++k)
            triplets.push_back(json::array({problem.row_idx[k], j, problem.values[k]}));
    doc["constraints"] = std::move(triplets);
    if (!problem.var_keys.empty()) {
        json keys = json::array();
        for (const auto& key : problem.var_keys)
            keys.push_back(json::array({key.group, key.state, key.action}));
        doc["variables"] = std::move(keys);
    }
    return doc;
}

LpProblem lp_problem_from_json(const json& document) {
    check_schema(document, "lp-problem");
    LpProblem problem;
    problem.kind = document.value("kind", "generic");
    problem.num_constraints = document.at("num_constraints").get<int>();
    problem.rhs = document.at("rhs").get<std::vector<double>>();
    auto objective = document.at("objective").get<std::vector<double>>();
    int num_vars = document.at("num_vars").get<int>();
    if (static_cast<int>(objective.size()) != num_vars)
        throw std::runtime_error("lp-problem artifact: objective length mismatch");
    std::vector<std::vector<std::pair<int, double>>> columns(num_vars);
    for (const auto& t : document.at("constraints")) {
        int row = t.at(0).get<int>();
        int col = t.at(1).get<int>();
        if (col < 0 || col >= num_vars)
            throw std::runtime_error("lp-problem artifact: column index out of range");
        columns[col].emplace_back(row, t.at(2).get<double>());
    }
    for (int j = 0; j < num_vars; ++j) problem.add_column(objective[j], std::move(columns[j]));
    if (document.contains("variables")) {
        for (const auto& key : document.at("variables"))
            problem.var_keys.push_back({key.at(0).get<int>(), key.at(1).get<int>(), key.at(2).get<int>()});
    }
    problem.check_consistent();
    return problem;
}

json lp_solution_to_json(const LpSolution& solution) {
    json doc;
    doc["schema"] = schema_tag("lp-solution");
    doc["status"] = to_string(solution.status);
    doc["objective"] = solution.objective;
    doc["iterations"] = solution.iterations;
    doc["x"] = solution.x;
    doc["duals"] = solution.duals;
    doc["reduced_costs"] = solution.reduced_costs;
    if (!solution.certificate.empty()) doc["certificate"] = solution.certificate;
    if (!solution.message.empty()) doc["message"] = solution.message;
    return doc;
}

LpSolution lp_solution_from_json(const json& document) {
    check_schema(document, "lp-solution");
    LpSolution solution;
    std::string status = document.at("status").get<std::string>();
    if (status == "optimal") solution.status = SolveStatus::Optimal;
    else if (status == "infeasible") solution.status = SolveStatus::Infeasible;
    else if (status == "unbounded") solution.status = SolveStatus::Unbounded;
    else if (status == "iteration_limit") solution.status = SolveStatus::IterationLimit;
    else throw std::runtime_error("lp-solution artifact: unknown status " + status);
    solution.objective = document.at("objective").get<double>();
    solution.iterations = document.value("iterations", 0L);
    solution.x = document.value("x", std::vector<double>{});
    solution.duals = document.value("duals", std::vector<double>{});
    solution.reduced_costs = document.value("reduced_costs", std::vector<double>{});
    solution.certificate = document.value("certificate", std::vector<double>{});
    solution.message = document.value("message", std::string{});
    return solution;
}

json ranking_to_json(const RankingArtifact& artifact) {
    json doc;
    doc["schema"] = schema_tag("ranking");
    doc["rb_objective"] = artifact.rb_objective;
    json groups = json::array();
    for (const auto& g : artifact.groups) {
        json group;
        group["num_channel_states"] = g.num_channel_states;
        group["buffer_space"] = g.buffer_space;
        group["order"] = g.order;
        groups.push_back(std::move(group));
    }
    doc["groups"] = std::move(groups);
    return doc;
}

RankingArtifact ranking_from_json(const json& document) {
    check_schema(document, "ranking");
    RankingArtifact artifact;
    artifact.rb_objective = document.value("rb_objective", 0.0);
    for (const auto& g : document.at("groups")) {
        RankingArtifact::Group group;
        group.num_channel_states = g.at("num_channel_states").get<int>();
        group.buffer_space = g.at("buffer_space").get<int>();
        group.order = g.at("order").get<std::vector<int>>();
        artifact.groups.push_back(std::move(group));
    }
    return artifact;
}

RankingArtifact make_ranking_artifact(const std::vector<PriorityRanking>& rankings,
                                      const std::vector<CompiledGroup>& groups,
                                      double rb_objective) {
    if (rankings.size() != groups.size())
        throw std::invalid_argument("ranking artifact: one ranking per group required");
    RankingArtifact artifact;
    artifact.rb_objective = rb_objective;
    for (size_t i = 0; i < rankings.size(); ++i) {
        RankingArtifact::Group group;
        group.num_channel_states = groups[i].space.num_channel_states;
        group.buffer_space = groups[i].space.buffer_space;
        group.order = rankings[i].order;
        artifact.groups.push_back(std::move(group));
    }
    return artifact;
}

std::vector<PriorityRanking> rankings_from_artifact(const RankingArtifact& artifact) {
    std::vector<PriorityRanking> rankings;
    for (const auto& g : artifact.groups) {
        PriorityRanking ranking;
        ranking.order = g.order;
        ranking.position.assign(g.num_channel_states * g.buffer_space, 0);
        for (size_t p = 0; p < g.order.size(); ++p) {
            int state = g.order[p];
            if (state < 0 || state >= static_cast<int>(ranking.position.size()))
                throw std::runtime_error("ranking artifact: state index out of range");
            ranking.position[state] = static_cast<int>(p) + 1;
        }
        rankings.push_back(std::move(ranking));
    }
    return rankings;
}

namespace {

json user_metrics_to_json(const UserMetrics& m) {
    json doc;
    doc["discounted_reward"] = m.discounted_reward;
    doc["rebuffer_fraction"] = m.rebuffer_fraction;
    doc["base_only_fraction"] = m.base_only_fraction;
    doc["layer_download_fractions"] = m.layer_download_fractions;
    doc["slots_counted"] = m.slots_counted;
    doc["segments_played"] = m.segments_played;
    return doc;
}

json metrics_summary_to_json(const Metrics& m) {
    json doc;
    doc["mean_discounted_reward"] = m.mean_discounted_reward;
    doc["mean_rebuffer_fraction"] = m.mean_rebuffer_fraction;
    doc["mean_base_only_fraction"] = m.mean_base_only_fraction;
    json users = json::array();
    for (const auto& u : m.per_user) users.push_back(user_metrics_to_json(u));
    doc["per_user"] = std::move(users);
    return doc;
}

json stat_to_json(const BatchStat& stat) {
    json doc;
    doc["mean"] = stat.mean;
    if (stat.stderr_mean.has_value()) doc["stderr"] = *stat.stderr_mean;
    else doc["stderr"] = nullptr;  // single seed: no spread estimate
    return doc;
}

}  // namespace

json metrics_to_json(const BatchMetrics& batch) {
    json doc;
    doc["schema"] = schema_tag("metrics");
    doc["seeds"] = batch.seeds;
    json aggregate;
    aggregate["discounted_reward"] = stat_to_json(batch.discounted_reward);
    aggregate["rebuffer_fraction"] = stat_to_json(batch.rebuffer_fraction);
    aggregate["base_only_fraction"] = stat_to_json(batch.base_only_fraction);
    doc["aggregate"] = std::move(aggregate);
    json per_seed = json::array();
    for (const auto& m : batch.per_seed) per_seed.push_back(metrics_summary_to_json(m));
    doc["per_seed"] = std::move(per_seed);
    return doc;
}

json single_run_metrics_to_json(const Metrics& metrics, uint64_t seed) {
    json doc;
    doc["schema"] = schema_tag("metrics");
    doc["seeds"] = json::array({seed});
    doc["aggregate"] = json{
        {"discounted_reward", json{{"mean", metrics.mean_discounted_reward}, {"stderr", nullptr}}},
        {"rebuffer_fraction", json{{"mean", metrics.mean_rebuffer_fraction}, {"stderr", nullptr}}},
        {"base_only_fraction", json{{"mean", metrics.mean_base_only_fraction}, {"stderr", nullptr}}},
    };
    doc["per_seed"] = json::array({metrics_summary_to_json(metrics)});
    return doc;
}

std::string format_double(double value) {
    char buffer[32];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buffer, ptr);
}

namespace {

std::string join_ints(const std::vector<int>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out += '|';
        out += std::to_string(values[i]);
    }
    return out;
}

}  // namespace

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
    std::string out = "slot,user,channel_state,scheduled,downloads,buffer,rebuffered,reward\n";
    for (const auto& row : trace) {
        out += std::to_string(row.slot);
        out += ',';
        out += std::to_string(row.user);
        out += ',';
        out += std::to_string(row.channel_state);
        out += ',';
        out += row.scheduled ? '1' : '0';
        out += ',';
        out += join_ints(row.downloads);
        out += ',';
        out += join_ints(row.buffer);
        out += ',';
        out += row.rebuffered ? '1' : '0';
        out += ',';
        out += format_double(row.reward);
        out += '\n';
    }
    return out;
}

std::string sweep_to_csv(const LoadSweep& sweep) {
    std::string out = "rho,subchannels,num_users,lambda_avg,mu_avg,lp_objective_per_user\n";
    for (const auto& p : sweep.points) {
        out += format_double(p.rho);
        out += ',';
        out += std::to_string(p.subchannels);
        out += ',';
        out += std::to_string(sweep.num_users);
        out += ',';
        out += format_double(p.lambda);
        out += ',';
        out += format_double(p.mu);
        out += ',';
        out += format_double(p.lp_objective_per_user);
        out += '\n';
    }
    return out;
}

std::string heatmap_to_csv(const std::vector<HeatmapRow>& rows) {
    bool two_layers = !rows.empty() && rows.front().buffer.size() == 2;
    std::string out =
        two_layers ? "channel_state,b1,b2,i_s,pruned\n" : "channel_state,buffer,i_s,pruned\n";
    for (const auto& row : rows) {
        out += std::to_string(row.channel_index);
        out += ',';
        if (two_layers) {
            out += std::to_string(row.buffer[0]);
            out += ',';
            out += std::to_string(row.buffer[1]);
        } else {
            out += join_ints(row.buffer);
        }
        out += ',';
        out += format_double(row.priority_index);
        out += ',';
        out += row.pruned ? '1' : '0';
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    auto temp = path;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + temp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + temp.string());
    }
    std::filesystem::rename(temp, path);
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw std::runtime_error("failed to parse " + path.string() + ": " + e.what());
    }
    return doc;
}

}  // namespace svcsched
