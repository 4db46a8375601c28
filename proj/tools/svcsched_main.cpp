// svcsched: build, solve, rank, simulate and analyze multi-user SVC
// streaming models from one JSON experiment config.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>

#include "svcsched/analysis.hpp"
#include "svcsched/artifacts.hpp"
#include "svcsched/config.hpp"
#include "svcsched/musmdp.hpp"
#include "svcsched/simulator.hpp"

namespace fs = std::filesystem;
using namespace svcsched;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<uint64_t> seed_override;
    int threads = 2;
};

struct CliError : std::runtime_error {
    std::string kind;
    CliError(std::string kind_, const std::string& message)
        : std::runtime_error(message), kind(std::move(kind_)) {}
};

ExperimentConfig load_config(CommonArgs& args) {
    if (!fs::exists(args.config_path))
        throw CliError("config", "config file not found: " + args.config_path);
    ExperimentConfig config = load_experiment_config(read_json_file(args.config_path));
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    if (args.seed_override.has_value()) config.seeds = {*args.seed_override};
    return config;
}

fs::path out_path(const ExperimentConfig& config, const std::string& name) {
    return fs::path(config.output_dir) / name;
}

void emit_resolved_config(const ExperimentConfig& config) {
    write_file_atomic(out_path(config, "resolved_config.json"),
                      resolved_config_json(config).dump(2) + "\n");
}

json require_artifact(const ExperimentConfig& config, const std::string& name,
                      const std::string& produced_by) {
    fs::path path = out_path(config, name);
    if (!fs::exists(path))
        throw CliError("dependency",
                       name + " not found in " + config.output_dir + "; run `" + produced_by +
                           "` first");
    return read_json_file(path);
}

json group_layout_json(const std::vector<CompiledGroup>& groups,
                       const std::vector<ExperimentConfig::GroupRef>& refs) {
    json out = json::array();
    for (size_t i = 0; i < groups.size(); ++i) {
        out.push_back(json{{"count", groups[i].count},
                           {"qa", refs[i].qa},
                           {"channel", refs[i].channel},
                           {"num_states", groups[i].space.size()},
                           {"num_channel_states", groups[i].space.num_channel_states},
                           {"buffer_space", groups[i].space.buffer_space}});
    }
    return out;
}

int run_solve_rb(CommonArgs& args) {
    ExperimentConfig config = load_config(args);
    if (config.subchannels < 1) throw CliError("config", "solve-rb requires subchannels >= 1");
    std::vector<CompiledGroup> groups;
    for (const auto& g : config.build_groups()) groups.push_back(compile_group(g));
    LpProblem lp = build_rb_lp(groups, config.subchannels, config.discount_per_second);
    LpSolution solution = solve(lp, config.solver);
    if (!solution.optimal())
        throw CliError("runtime", "RB solve ended " + to_string(solution.status) +
                                      (solution.message.empty() ? "" : ": " + solution.message));
    json doc;
    doc["schema"] = schema_tag("rb-solution");
    doc["subchannels"] = config.subchannels;
    doc["discount_per_second"] = config.discount_per_second;
    doc["groups"] = group_layout_json(groups, config.groups);
    doc["solution"] = lp_solution_to_json(solution);
    emit_resolved_config(config);
    write_file_atomic(out_path(config, "rb_solution.json"), doc.dump() + "\n");
    std::cout << "rb objective " << solution.objective << " in " << solution.iterations
              << " iterations\n";
    return 0;
}

int run_solve_musmdp(CommonArgs& args) {
    ExperimentConfig config = load_config(args);
    if (config.subchannels < 1) throw CliError("config", "solve-musmdp requires subchannels >= 1");
    std::vector<CompiledSmdpGroup> groups;
    for (const auto& g : config.build_groups()) {
        double tau_slot = make_smdp_space(g.channel, g.video).tau_slot;
        double slot_discount = std::pow(config.discount_per_second, tau_slot);
        std::string warning =
            check_discount_alignment(slot_discount, config.discount_per_second, tau_slot);
        if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
        groups.push_back(compile_smdp_group(g, slot_discount, config.smdp_tail_tol));
    }
    LpProblem lp = build_musmdp_lp(groups, config.subchannels);
    LpSolution solution = solve(lp, config.solver);
    if (!solution.optimal())
        throw CliError("runtime", "MUSMDP solve ended " + to_string(solution.status));
    json doc;
    doc["schema"] = schema_tag("musmdp-solution");
    doc["subchannels"] = config.subchannels;
    doc["slot_discount"] = groups.front().slot_discount;
    doc["discount_per_second"] = config.discount_per_second;
    doc["objective_in_rb_units"] = musmdp_value_in_rb_units(
        solution.objective, groups.front().slot_discount, config.discount_per_second);
    doc["solution"] = lp_solution_to_json(solution);
    emit_resolved_config(config);
    write_file_atomic(out_path(config, "musmdp_solution.json"), doc.dump() + "\n");
    std::cout << "musmdp objective " << solution.objective << "\n";
    return 0;
}

int run_rank(CommonArgs& args) {
    ExperimentConfig config = load_config(args);
    json doc = require_artifact(config, "rb_solution.json", "solve-rb");
    check_schema(doc, "rb-solution");
    LpSolution solution = lp_solution_from_json(doc.at("solution"));
    if (!solution.optimal()) throw CliError("dependency", "rb_solution.json is not optimal");

    std::vector<PriorityRanking> rankings;
    RankingArtifact artifact;
    artifact.rb_objective = solution.objective;
    int offset = 0;
    for (const auto& g : doc.at("groups")) {
        RbStateSpace space;
        space.num_channel_states = g.at("num_channel_states").get<int>();
        space.buffer_space = g.at("buffer_space").get<int>();
        RbSolutionView view{offset, space.size()};
        offset += 2 * space.size();
        GroupSolution gs = extract_group_solution(solution, view);
        PriorityRanking ranking = qaa_rank(gs, space);
        artifact.groups.push_back({space.num_channel_states, space.buffer_space, ranking.order});
        rankings.push_back(std::move(ranking));
    }
    emit_resolved_config(config);
    write_file_atomic(out_path(config, "ranking.json"), ranking_to_json(artifact).dump() + "\n");
    std::cout << "ranked " << artifact.groups.size() << " group(s)\n";
    return 0;
}

int run_simulate(CommonArgs& args) {
    ExperimentConfig config = load_config(args);
    SimConfig sim = config.to_sim_config();
    SimModel model;
    if (config.scheduler.kind == SchedulerKind::Qaa) {
        json doc = require_artifact(config, "ranking.json", "solve-rb, then rank");
        RankingArtifact artifact = ranking_from_json(doc);
        if (artifact.groups.size() != sim.groups.size())
            throw CliError("dependency", "ranking.json group count does not match the config");
        model = build_sim_model(sim, rankings_from_artifact(artifact), artifact.rb_objective);
        for (size_t i = 0; i < model.groups.size(); ++i) {
            if (artifact.groups[i].num_channel_states != model.groups[i].space.num_channel_states ||
                artifact.groups[i].buffer_space != model.groups[i].space.buffer_space)
                throw CliError("dependency", "ranking.json state space does not match the config");
        }
    } else {
        model = build_sim_model(sim, config.solver);
    }
    BatchMetrics batch = run_batch(model, sim, config.seeds, args.threads);
    emit_resolved_config(config);
    write_file_atomic(out_path(config, "metrics.json"), metrics_to_json(batch).dump() + "\n");
    // The per-slot trace is written for the first seed only.
    SimResult traced = run(model, sim, config.seeds.front(), true);
    write_file_atomic(out_path(config, "trace.csv"), trace_to_csv(traced.trace));
    std::cout << "mean discounted reward " << batch.discounted_reward.mean << " over "
              << config.seeds.size() << " seed(s)\n";

    // With a subchannel sweep configured, also tabulate the QoE metrics
    // against load. Each point gets its own model; for QAA that means a
    // fresh solve-and-rank at that load.
    if (!config.subchannel_sweep.empty()) {
        std::string csv =
            "scheduler,rho,subchannels,reward_mean,reward_stderr,rebuffer_mean,base_only_mean\n";
        int total_users = sim.total_users();
        for (int m : config.subchannel_sweep) {
            SimConfig point = sim;
            point.subchannels = m;
            SimModel point_model = build_sim_model(point, config.solver);
            BatchMetrics point_batch = run_batch(point_model, point, config.seeds, args.threads);
            csv += to_string(config.scheduler.kind) + ",";
            csv += format_double(static_cast<double>(total_users) / m) + ",";
            csv += std::to_string(m) + ",";
            csv += format_double(point_batch.discounted_reward.mean) + ",";
            csv += format_double(point_batch.discounted_reward.stderr_mean.value_or(0.0)) + ",";
            csv += format_double(point_batch.rebuffer_fraction.mean) + ",";
            csv += format_double(point_batch.base_only_fraction.mean) + "\n";
        }
        write_file_atomic(out_path(config, "figures.csv"), csv);
        std::cout << "figure table over " << config.subchannel_sweep.size() << " load points\n";
    }
    return 0;
}

int run_sweep(CommonArgs& args) {
    ExperimentConfig config = load_config(args);
    if (config.subchannel_sweep.empty())
        throw CliError("config", "sweep requires subchannel_sweep in the config");
    auto groups = config.build_groups();
    if (groups.size() != 1)
        throw CliError("config", "sweep expects a single homogeneous group");
    int num_users = groups.front().count;
    LoadSweep sweep = run_load_sweep(groups.front(), num_users, config.subchannel_sweep,
                                     config.discount_per_second, config.solver, args.threads);
    emit_resolved_config(config);
    write_file_atomic(out_path(config, "sweep.csv"), sweep_to_csv(sweep));
    json doc;
    doc["schema"] = schema_tag("sweep");
    doc["num_users"] = sweep.num_users;
    json points = json::array();
    for (const auto& p : sweep.points)
        points.push_back(json{{"rho", p.rho},
                              {"subchannels", p.subchannels},
                              {"lambda_avg", p.lambda},
                              {"mu_avg", p.mu},
                              {"lp_objective_per_user", p.lp_objective_per_user}});
    doc["points"] = std::move(points);
    write_file_atomic(out_path(config, "sweep.json"), doc.dump() + "\n");
    std::cout << "swept " << sweep.points.size() << " load points\n";
    return 0;
}

int run_analyze(CommonArgs& args) {
    ExperimentConfig config = load_config(args);
    json doc = require_artifact(config, "rb_solution.json", "solve-rb");
    check_schema(doc, "rb-solution");
    LpSolution solution = lp_solution_from_json(doc.at("solution"));
    int subchannels = doc.at("subchannels").get<int>();

    json analysis;
    analysis["schema"] = schema_tag("analysis");
    json per_group = json::array();
    int offset = 0;
    int total_users = 0;
    for (const auto& g : doc.at("groups")) total_users += g.at("count").get<int>();
    double rho = static_cast<double>(total_users) / subchannels;
    size_t group_index = 0;
    for (const auto& g : doc.at("groups")) {
        RbStateSpace space;
        space.num_channel_states = g.at("num_channel_states").get<int>();
        space.buffer_space = g.at("buffer_space").get<int>();
        RbSolutionView view{offset, space.size()};
        offset += 2 * space.size();
        GroupSolution gs = extract_group_solution(solution, view);
        const ChannelModel& channel = config.channels.at(g.at("channel").get<std::string>());
        double mu = mu_avg(gs, config.video, space);
        double lambda = lambda_avg(channel, rho);
        per_group.push_back(json{{"qa", g.at("qa")},
                                 {"channel", g.at("channel")},
                                 {"lambda_avg", lambda},
                                 {"mu_avg", mu}});
        PriorityRanking ranking = qaa_rank(gs, space);
        auto rows = heatmap_table(ranking, space, config.video);
        std::string name =
            doc.at("groups").size() == 1 ? "heatmap.csv"
                                         : "heatmap_group" + std::to_string(group_index) + ".csv";
        write_file_atomic(out_path(config, name), heatmap_to_csv(rows));
        ++group_index;
    }
    analysis["rho"] = rho;
    analysis["per_group"] = std::move(per_group);

    fs::path sweep_path = out_path(config, "sweep.json");
    if (fs::exists(sweep_path)) {
        json sweep_doc = read_json_file(sweep_path);
        check_schema(sweep_doc, "sweep");
        LoadSweep sweep;
        sweep.num_users = sweep_doc.at("num_users").get<int>();
        for (const auto& p : sweep_doc.at("points")) {
            SweepPoint point;
            point.rho = p.at("rho").get<double>();
            point.subchannels = p.at("subchannels").get<int>();
            point.lambda = p.at("lambda_avg").get<double>();
            point.mu = p.at("mu_avg").get<double>();
            point.lp_objective_per_user = p.at("lp_objective_per_user").get<double>();
            sweep.points.push_back(point);
        }
        try {
            CriticalLoad critical = critical_load(sweep);
            analysis["rho_star"] = critical.rho_star;
        } catch (const std::exception& e) {
            analysis["rho_star"] = nullptr;
            analysis["note"] = e.what();
        }
    } else {
        analysis["rho_star"] = nullptr;
        analysis["note"] = "run `sweep` to enable the critical-load estimate";
    }
    emit_resolved_config(config);
    write_file_atomic(out_path(config, "analysis.json"), analysis.dump(2) + "\n");
    std::cout << "analysis written to " << config.output_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-user SVC streaming: restless-bandit scheduling toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", args.config_path, "experiment config JSON")->required();
        cmd->add_option("--out", args.out_dir, "output directory (overrides the config)");
        cmd->add_option("--seed", args.seed_override, "single-seed override");
        cmd->add_option("--threads", args.threads, "worker threads for seed fan-out");
    };

    auto* solve_rb = app.add_subcommand("solve-rb", "build and solve the restless-bandit LP");
    auto* solve_musmdp =
        app.add_subcommand("solve-musmdp", "build and solve the joint MUSMDP benchmark LP");
    auto* rank = app.add_subcommand("rank", "derive the QAA priority ranking from a solved RB");
    auto* simulate = app.add_subcommand("simulate", "run the slot-level multi-user simulation");
    auto* sweep = app.add_subcommand("sweep", "solve the RB across a load sweep");
    auto* analyze = app.add_subcommand("analyze", "mu/lambda, critical load and heatmaps");
    for (auto* cmd : {solve_rb, solve_musmdp, rank, simulate, sweep, analyze}) add_common(cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_rb->parsed()) return run_solve_rb(args);
        if (solve_musmdp->parsed()) return run_solve_musmdp(args);
        if (rank->parsed()) return run_rank(args);
        if (simulate->parsed()) return run_simulate(args);
        if (sweep->parsed()) return run_sweep(args);
        if (analyze->parsed()) return run_analyze(args);
    } catch (const CliError& e) {
        std::cerr << json{{"error", {{"kind", e.kind}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"kind", "runtime"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 1;
}
