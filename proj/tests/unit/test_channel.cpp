#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "support/fixtures.hpp"
#include "svcsched/channel.hpp"
#include "svcsched/rng.hpp"

using namespace svcsched;

TEST_SUITE("channel") {

TEST_CASE("identity matrix is flagged reducible") {
    ChannelModel model;
    model.states = {1.0, 2.0};
    model.transition = {{1.0, 0.0}, {0.0, 1.0}};
    auto diag = validate(model);
    REQUIRE_FALSE(diag.ok());
    CHECK(diag.violations.front().find("reducible") != std::string::npos);
}

TEST_CASE("non-stochastic rows are reported") {
    ChannelModel model;
    model.states = {1.0, 2.0};
    model.transition = {{0.5, 0.49}, {0.3, 0.7}};
    auto diag = validate(model);
    REQUIRE_FALSE(diag.ok());
    CHECK(diag.violations.front().find("not stochastic") != std::string::npos);
}

TEST_CASE("the doubly stochastic fixture validates") {
    CHECK(validate(fixtures::channel_four_state()).ok());
}

TEST_CASE("stationary distribution of a doubly stochastic chain is uniform") {
    auto model = fixtures::channel_four_state();
    auto pi = stationary_distribution(model);
    for (double p : pi) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(avg_rate(model) == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("single-state chain") {
    ChannelModel model;
    model.states = {10.0};
    model.transition = {{1.0}};
    CHECK(stationary_distribution(model) == std::vector<double>{1.0});
    CHECK(avg_rate(model) == 10.0);
}

TEST_CASE("two-state balance equations") {
    ChannelModel model;
    model.states = {1.0, 2.0};
    model.transition = {{0.9, 0.1}, {0.3, 0.7}};
    auto pi = stationary_distribution(model);
    CHECK(pi[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("whole sub-segments only") {
    CHECK(sub_segments_deliverable(1.0, 1.0, 1.0) == 1);
    CHECK(sub_segments_deliverable(10.0, 1.0, 1.0) == 10);
    CHECK(sub_segments_deliverable(1.0, 0.5, 1.0) == 0);
    CHECK_THROWS_AS(sub_segments_deliverable(1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("sampling follows the transition row") {
    ChannelModel model;
    model.states = {1.0, 2.0, 5.0, 10.0};
    model.transition = {{0.0, 1.0, 0.0, 0.0},
                        {0.0, 0.0, 1.0, 0.0},
                        {0.0, 0.0, 0.0, 1.0},
                        {1.0, 0.0, 0.0, 0.0}};
    Rng rng(3);
    CHECK(sample_next(model, 0, rng) == 1);
    CHECK(sample_next(model, 3, rng) == 0);
}

TEST_CASE("an even split stays within the law of large numbers band") {
    ChannelModel model;
    model.states = {1.0, 2.0};
    model.transition = {{0.5, 0.5}, {0.5, 0.5}};
    Rng rng(11);
    int hits = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) hits += sample_next(model, 0, rng) == 0;
    CHECK(std::abs(hits / static_cast<double>(trials) - 0.5) < 0.01);
}

TEST_CASE("long trajectories match the stationary distribution (chi-square)") {
    auto model = fixtures::channel_four_state();
    auto pi = stationary_distribution(model);
    Rng rng(17);
    // Thin the chain by 10 steps so the retained samples are effectively
    // independent (the slowest mode decays as 0.5^k) and the iid chi-square
    // threshold applies.
    const int samples = 100000;
    const int thinning = 10;
    std::vector<int> counts(model.num_states(), 0);
    int state = 0;
    for (int i = 0; i < samples; ++i) {
        for (int k = 0; k < thinning; ++k) state = sample_next(model, state, rng);
        counts[state] += 1;
    }
    double chi2 = 0.0;
    for (int i = 0; i < model.num_states(); ++i) {
        double expected = pi[i] * samples;
        chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
    }
    CHECK(chi2 < 16.27);  // chi-square 0.999 quantile at 3 degrees of freedom
}

TEST_CASE("fixture generator rescales states to the target mean") {
    auto model = make_doubly_stochastic_channel({1.0, 2.0, 5.0, 10.0}, 3.0, 0.5);
    CHECK(avg_rate(model) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(validate(model).ok());
}

TEST_CASE("avg_rate depends only on the states and their stationary weights") {
    // Different mixing speeds share the uniform stationary distribution.
    auto slow = make_doubly_stochastic_channel({1.0, 2.0, 5.0, 10.0}, 0.0, 0.2);
    auto fast = make_doubly_stochastic_channel({1.0, 2.0, 5.0, 10.0}, 0.0, 0.9);
    CHECK(avg_rate(slow) == doctest::Approx(avg_rate(fast)).epsilon(1e-12));
}

}  // TEST_SUITE
