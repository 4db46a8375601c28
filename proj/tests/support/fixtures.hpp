#pragma once

// Shared desk-scale fixtures for the unit and acceptance suites.

#include <vector>

#include "svcsched/channel.hpp"
#include "svcsched/core_model.hpp"
#include "svcsched/qa_policy.hpp"
#include "svcsched/rb_lp.hpp"

namespace fixtures {

// Two layers at 1 Mbps each, 1 s segments: the standard setup from the
// experiments this toolkit reproduces.
inline svcsched::VideoConfig video_two_layer(int buffer_limit) {
    svcsched::VideoConfig video;
    video.num_layers = 2;
    video.layer_rates = {1.0, 1.0};
    video.segment_duration = 1.0;
    video.buffer_limit = buffer_limit;
    video.qoe_phi = 0.16;
    video.qoe_theta = 0.66;
    video.rebuffer_penalty = 0.0;
    return video;
}

inline svcsched::VideoConfig video_three_layer(int buffer_limit) {
    auto video = video_two_layer(buffer_limit);
    video.num_layers = 3;
    video.layer_rates = {1.0, 1.0, 1.0};
    return video;
}

// Four rate states with a uniform stationary distribution; c_avg = 4.5 Mbps.
inline svcsched::ChannelModel channel_four_state() {
    return svcsched::make_doubly_stochastic_channel({1.0, 2.0, 5.0, 10.0}, 0.0, 0.5);
}

// Small two-state channel for desk-scale LP instances.
inline svcsched::ChannelModel channel_two_state() {
    svcsched::ChannelModel model;
    model.states = {1.0, 2.0};
    model.transition = {{0.7, 0.3}, {0.3, 0.7}};
    return model;
}

inline svcsched::QaSpec dbp(double threshold_seconds) {
    svcsched::QaSpec qa;
    qa.kind = svcsched::QaKind::Dbp;
    qa.dbp_thresholds_seconds = {threshold_seconds};
    return qa;
}

inline svcsched::QaSpec bpp(double switch_fraction) {
    svcsched::QaSpec qa;
    qa.kind = svcsched::QaKind::Bpp;
    qa.bpp_switch_fraction = switch_fraction;
    return qa;
}

inline svcsched::QaSpec cbp() {
    svcsched::QaSpec qa;
    qa.kind = svcsched::QaKind::Cbp;
    return qa;
}

// |C|=2, L=2, b_max=3 group used by the decomposition and dominance fixtures.
inline svcsched::UserGroup desk_group(int count, svcsched::QaSpec qa) {
    svcsched::UserGroup group;
    group.count = count;
    group.qa = std::move(qa);
    group.channel = channel_two_state();
    group.video = video_two_layer(3);
    return group;
}

// Table-I-scale group: 4 channel states, b_max=20, DBP.
inline svcsched::UserGroup table_one_group(int count, double dbp_threshold_seconds) {
    svcsched::UserGroup group;
    group.count = count;
    group.qa = dbp(dbp_threshold_seconds);
    group.channel = channel_four_state();
    group.video = video_two_layer(20);
    return group;
}

}  // namespace fixtures
