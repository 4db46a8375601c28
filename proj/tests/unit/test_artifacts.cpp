#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>

#include "support/fixtures.hpp"
#include "svcsched/artifacts.hpp"
#include "svcsched/config.hpp"

using namespace svcsched;

TEST_SUITE("artifacts") {

TEST_CASE("lp problems round-trip through json") {
    auto group = compile_group(fixtures::desk_group(2, fixtures::dbp(3.0)));
    auto lp = build_rb_lp_representative(group, 2, 1, 0.9);
    auto doc = lp_problem_to_json(lp);
    auto back = lp_problem_from_json(doc);
    CHECK(back.num_vars == lp.num_vars);
    CHECK(back.num_constraints == lp.num_constraints);
    CHECK(back.objective == lp.objective);
    CHECK(back.rhs == lp.rhs);
    CHECK(back.values == lp.values);
    CHECK(back.row_idx == lp.row_idx);
    auto a = solve(lp);
    auto b = solve(back);
    CHECK(a.objective == b.objective);
}

TEST_CASE("lp solutions round-trip through json") {
    auto group = compile_group(fixtures::desk_group(2, fixtures::dbp(3.0)));
    auto lp = build_rb_lp_representative(group, 2, 1, 0.9);
    auto sol = solve(lp);
    auto back = lp_solution_from_json(lp_solution_to_json(sol));
    CHECK(back.status == sol.status);
    CHECK(back.objective == sol.objective);
    CHECK(back.x == sol.x);
    CHECK(back.duals == sol.duals);
    CHECK(back.reduced_costs == sol.reduced_costs);
}

TEST_CASE("unknown schema majors are rejected") {
    json doc = {{"schema", "svcsched/lp-solution/999"}};
    CHECK_THROWS(lp_solution_from_json(doc));
    json wrong_kind = {{"schema", "svcsched/metrics/1"}};
    CHECK_THROWS(lp_solution_from_json(wrong_kind));
    json missing = json::object();
    CHECK_THROWS(lp_solution_from_json(missing));
}

TEST_CASE("ranking artifacts reconstruct the priority positions") {
    RankingArtifact artifact;
    artifact.rb_objective = 12.5;
    artifact.groups.push_back({2, 3, {4, 1, 3}});
    auto doc = ranking_to_json(artifact);
    auto back = ranking_from_json(doc);
    auto rankings = rankings_from_artifact(back);
    REQUIRE(rankings.size() == 1);
    CHECK(rankings[0].order == std::vector<int>{4, 1, 3});
    CHECK(rankings[0].position[4] == 1);
    CHECK(rankings[0].pruned(0));
    CHECK(rankings[0].normalized_index(3) == doctest::Approx(1.0));
}

TEST_CASE("csv writers emit the documented headers") {
    LoadSweep sweep;
    sweep.num_users = 20;
    sweep.points = {{2.0, 10, 2.25, 1.9, 37.5}};
    auto csv = sweep_to_csv(sweep);
    CHECK(csv.rfind("rho,subchannels,num_users,lambda_avg,mu_avg,lp_objective_per_user\n", 0) == 0);
    CHECK(csv.find("2,10,20,2.25,1.9,37.5\n") != std::string::npos);

    std::vector<TraceRow> trace(1);
    trace[0].downloads = {1, 0};
    trace[0].buffer = {1, 0};
    trace[0].reward = 0.5;
    auto trace_csv = trace_to_csv(trace);
    CHECK(trace_csv.rfind("slot,user,channel_state,scheduled,downloads,buffer,rebuffered,reward\n",
                          0) == 0);
    CHECK(trace_csv.find("0,0,0,0,1|0,1|0,0,0.5\n") != std::string::npos);
}

TEST_CASE("atomic writes land complete files") {
    auto dir = std::filesystem::temp_directory_path() / "svcsched_artifact_test";
    std::filesystem::remove_all(dir);
    auto path = dir / "nested" / "file.json";
    write_file_atomic(path, "{\"ok\":true}\n");
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "{\"ok\":true}\n");
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("experiment configs parse with precise error paths") {
    json doc = {
        {"video", {{"layer_rates", {1.0, 1.0}}, {"buffer_limit", 20}}},
        {"channels", {{"main", {{"states", {1.0, 2.0, 5.0, 10.0}}, {"mixing", 0.5}}}}},
        {"qas", {{"dbp20", {{"kind", "dbp"}, {"threshold_seconds", 20.0}}}}},
        {"groups", json::array({{{"count", 20}, {"qa", "dbp20"}, {"channel", "main"}}})},
        {"subchannels", 8},
        {"scheduler", {{"kind", "beas"}}},
        {"seed_count", 3},
    };
    auto config = load_experiment_config(doc);
    CHECK(config.seeds == std::vector<uint64_t>{1, 2, 3});
    CHECK(config.groups.size() == 1);
    CHECK(config.channels.at("main").num_states() == 4);

    auto resolved = resolved_config_json(config);
    check_schema(resolved, "resolved-config");
    // The resolved snapshot parses back to the same experiment.
    auto round_tripped = load_experiment_config([&] {
        json j = resolved;
        j.erase("schema");
        return j;
    }());
    CHECK(resolved_config_json(round_tripped) == resolved);

    json bad = doc;
    bad["groups"][0]["qa"] = "missing";
    CHECK_THROWS_WITH_AS(load_experiment_config(bad),
                         "config groups[0].qa: references unknown QA 'missing'",
                         std::invalid_argument);
    json typo = doc;
    typo["video"]["buffer_limits"] = 20;
    CHECK_THROWS_AS(load_experiment_config(typo), std::invalid_argument);
}

}  // TEST_SUITE
