#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "support/fixtures.hpp"
#include "svcsched/analysis.hpp"

using namespace svcsched;

namespace {

// Synthetic occupancy concentrated on chosen buffer states.
GroupSolution mass_at(const RbStateSpace& space, const VideoConfig& video,
                      const std::vector<std::pair<BufferState, double>>& weights) {
    GroupSolution g;
    g.x0.assign(space.size(), 0.0);
    g.x1.assign(space.size(), 0.0);
    g.gamma0.assign(space.size(), 0.0);
    g.gamma1.assign(space.size(), 0.0);
    for (const auto& [buffer, weight] : weights)
        g.x0[space.encode(0, index_buffer(buffer, video))] = weight;
    return g;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("lambda_avg is the average capacity over the load") {
    auto channel = fixtures::channel_four_state();
    CHECK(lambda_avg(channel, 2.0) == doctest::Approx(2.25));
    CHECK(lambda_avg(channel, 1.0) == doctest::Approx(4.5));
    auto three = make_doubly_stochastic_channel({1.0, 2.0, 5.0, 10.0}, 3.0, 0.5);
    CHECK(lambda_avg(three, 3.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(lambda_avg(channel, 0.0), std::invalid_argument);
}

TEST_CASE("mu_avg on synthetic occupancy masses") {
    auto video = fixtures::video_two_layer(3);
    auto channel = fixtures::channel_two_state();
    auto space = make_state_space(channel, video);

    // All mass at full quality: both layers play.
    auto full = mass_at(space, video, {{{2, 1}, 1.0}});
    CHECK(mu_avg(full, video, space) == doctest::Approx(2.0));

    // All mass re-buffering.
    auto stalled = mass_at(space, video, {{{0, 0}, 1.0}});
    CHECK(mu_avg(stalled, video, space) == doctest::Approx(0.0));

    // Half the time base-only, half full quality.
    auto mixed = mass_at(space, video, {{{2, 0}, 0.5}, {{1, 1}, 0.5}});
    CHECK(mu_avg(mixed, video, space) == doctest::Approx(1.5));
}

TEST_CASE("playback class fractions form a distribution") {
    auto group = compile_group(fixtures::desk_group(4, fixtures::dbp(3.0)));
    auto lp = build_rb_lp_representative(group, 4, 2, 0.95);
    auto sol = solve(lp);
    REQUIRE(sol.optimal());
    auto gs = extract_group_solution(sol, {0, group.space.size()});
    auto fractions = playback_class_fractions(gs, group.video, group.space);
    double total = 0.0;
    for (double f : fractions) {
        CHECK(f >= -1e-12);
        total += f;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("critical load interpolates the sign change") {
    LoadSweep sweep;
    sweep.num_users = 20;
    sweep.points = {{1.0, 20, 4.0, 2.0, 0.0}, {2.0, 10, 2.0, 1.8, 0.0}, {4.0, 5, 1.0, 1.6, 0.0}};
    auto critical = critical_load(sweep);
    // Crossing between rho=2 (gap +0.2) and rho=4 (gap -0.6): 2 + 2*0.25.
    CHECK(critical.rho_star == doctest::Approx(2.5));
    CHECK(critical.below.rho == 2.0);
    CHECK(critical.above.rho == 4.0);
}

TEST_CASE("an exact coincidence point is returned directly") {
    LoadSweep sweep;
    sweep.num_users = 20;
    sweep.points = {{1.0, 20, 4.0, 2.0, 0.0}, {2.0, 10, 2.0, 2.0, 0.0}};
    CHECK(critical_load(sweep).rho_star == doctest::Approx(2.0));
}

TEST_CASE("a sweep without a crossing reports an error") {
    LoadSweep sweep;
    sweep.num_users = 20;
    sweep.points = {{1.0, 20, 4.0, 2.0, 0.0}, {2.0, 10, 3.0, 2.0, 0.0}};
    CHECK_THROWS_AS(critical_load(sweep), std::runtime_error);
}

TEST_CASE("heatmap rows expose the normalized priority") {
    auto group = compile_group(fixtures::desk_group(4, fixtures::dbp(3.0)));
    auto lp = build_rb_lp_representative(group, 4, 2, 0.95);
    auto sol = solve(lp);
    REQUIRE(sol.optimal());
    auto gs = extract_group_solution(sol, {0, group.space.size()});
    auto ranking = qaa_rank(gs, group.space);
    auto rows = heatmap_table(ranking, group.space, group.video);
    REQUIRE(static_cast<int>(rows.size()) == group.space.size());
    int best = ranking.order.front();
    CHECK(rows[best].priority_index == doctest::Approx(1.0 / ranking.retained()));
    int worst = ranking.order.back();
    CHECK(rows[worst].priority_index == doctest::Approx(1.0));
    for (const auto& row : rows)
        if (row.pruned) CHECK(row.priority_index == 1.0);
}

TEST_CASE("load sweeps are identical across thread counts") {
    auto group = fixtures::desk_group(6, fixtures::dbp(3.0));
    std::vector<int> counts = {2, 3, 4, 6};
    auto serial = run_load_sweep(group, 6, counts, 0.95, {}, 1);
    auto parallel = run_load_sweep(group, 6, counts, 0.95, {}, 3);
    REQUIRE(serial.points.size() == parallel.points.size());
    for (size_t i = 0; i < serial.points.size(); ++i) {
        CHECK(serial.points[i].rho == parallel.points[i].rho);
        CHECK(serial.points[i].mu == parallel.points[i].mu);
        CHECK(serial.points[i].lp_objective_per_user == parallel.points[i].lp_objective_per_user);
        // lambda is exactly c_avg / rho at every point.
        CHECK(serial.points[i].lambda ==
              doctest::Approx(avg_rate(group.channel) / serial.points[i].rho).epsilon(1e-12));
    }
}

TEST_CASE("spearman handles monotone, reversed and tied data") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
    double with_ties = spearman({1, 1, 2, 2}, {1, 2, 3, 4});
    CHECK(with_ties > 0.0);
    CHECK(with_ties < 1.0);
    CHECK_THROWS_AS(spearman({1, 1}, {1, 1}), std::invalid_argument);
}

}  // TEST_SUITE
