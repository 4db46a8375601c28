#pragma once

#include <string>
#include <vector>

#include "svcsched/rng.hpp"

namespace svcsched {

/// Finite-state Markov model of one subchannel. States are achievable rates
/// in Mbps, strictly increasing; the transition matrix is row-stochastic and
/// must be irreducible so the stationary distribution is unique.
struct ChannelModel {
    std::vector<double> states;
    std::vector<std::vector<double>> transition;

    int num_states() const { return static_cast<int>(states.size()); }
};

struct ChannelDiagnostics {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Structural checks: sorted distinct positive states, row sums within 1e-12
/// of one, entries in [0,1], irreducible transition graph.
ChannelDiagnostics validate(const ChannelModel& model);

/// Throws std::invalid_argument with the joined diagnostics when invalid.
void validate_or_throw(const ChannelModel& model);

/// Unique solution of pi^T P = pi^T, sum(pi) = 1. Requires a valid model.
std::vector<double> stationary_distribution(const ChannelModel& model);

/// Stationary mean rate, sum_i pi_i * states_i.
double avg_rate(const ChannelModel& model);

/// Whole sub-segments deliverable in one slot at rate `rate`; leftover
/// capacity within the slot is discarded.
int sub_segments_deliverable(double rate, double slot_duration, double layer_rate);

/// One Markov step from state_index, sampled by CDF scan over the row.
int sample_next(const ChannelModel& model, int state_index, Rng& rng);

/// Fixture generator: lazy uniform-mixing chain P = (1-w) I + w/|C| * ones.
/// Doubly stochastic for any mixing w in (0,1], hence stationary-uniform with
/// c_avg = mean(states); states are rescaled to hit target_avg_rate when it
/// differs from that mean.
ChannelModel make_doubly_stochastic_channel(std::vector<double> states, double target_avg_rate,
                                            double mixing = 0.5);

}  // namespace svcsched
