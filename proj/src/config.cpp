#include "svcsched/config.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace svcsched {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config " + path + ": " + what);
}

void expect_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) fail(path + "." + key, "unknown key");
    }
}

template <typename T>
T get_field(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) fail(path + "." + key, "missing required field");
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        fail(path + "." + key, "has the wrong type");
    }
}

template <typename T>
T get_field_or(const json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        fail(path + "." + key, "has the wrong type");
    }
}

VideoConfig parse_video(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    expect_keys(j, path,
                {"num_layers", "layer_rates", "segment_duration", "buffer_limit", "qoe_phi",
                 "qoe_theta", "rebuffer_penalty"});
    VideoConfig video;
    video.layer_rates = get_field<std::vector<double>>(j, path, "layer_rates");
    video.num_layers = get_field_or<int>(j, path, "num_layers", static_cast<int>(video.layer_rates.size()));
    video.segment_duration = get_field_or<double>(j, path, "segment_duration", 1.0);
    video.buffer_limit = get_field<int>(j, path, "buffer_limit");
    video.qoe_phi = get_field_or<double>(j, path, "qoe_phi", 0.16);
    video.qoe_theta = get_field_or<double>(j, path, "qoe_theta", 0.66);
    video.rebuffer_penalty = get_field_or<double>(j, path, "rebuffer_penalty", 0.0);
    try {
        video.validate();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return video;
}

ChannelModel parse_channel(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    expect_keys(j, path, {"states", "transition", "mixing", "target_avg_rate"});
    auto states = get_field<std::vector<double>>(j, path, "states");
    ChannelModel model;
    if (j.contains("transition")) {
        if (j.contains("mixing") || j.contains("target_avg_rate"))
            fail(path, "give either an explicit transition matrix or a fixture recipe, not both");
        model.states = states;
        model.transition = get_field<std::vector<std::vector<double>>>(j, path, "transition");
    } else {
        double target = get_field_or<double>(j, path, "target_avg_rate", 0.0);
        double mixing = get_field_or<double>(j, path, "mixing", 0.5);
        model = make_doubly_stochastic_channel(states, target, mixing);
    }
    auto diag = validate(model);
    if (!diag.ok()) {
        std::string joined;
        for (const auto& v : diag.violations) joined += v + "; ";
        fail(path, joined);
    }
    return model;
}

QaSpec parse_qa(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    expect_keys(j, path,
                {"kind", "threshold_seconds", "thresholds_seconds", "switch_fraction", "rules"});
    QaSpec qa;
    std::string kind = get_field<std::string>(j, path, "kind");
    if (kind == "dbp") {
        qa.kind = QaKind::Dbp;
        if (j.contains("thresholds_seconds"))
            qa.dbp_thresholds_seconds = get_field<std::vector<double>>(j, path, "thresholds_seconds");
        else
            qa.dbp_thresholds_seconds = {get_field<double>(j, path, "threshold_seconds")};
    } else if (kind == "bpp") {
        qa.kind = QaKind::Bpp;
        qa.bpp_switch_fraction = get_field<double>(j, path, "switch_fraction");
    } else if (kind == "cbp") {
        qa.kind = QaKind::Cbp;
        if (j.contains("rules")) {
            std::string rules_path = path + ".rules";
            if (!j.at("rules").is_array()) fail(rules_path, "expected an array");
            int index = 0;
            for (const auto& r : j.at("rules")) {
                std::string rule_path = rules_path + "[" + std::to_string(index++) + "]";
                expect_keys(r, rule_path, {"base_fraction", "full_quality"});
                CbpStateRule rule;
                rule.full_quality = get_field_or<bool>(r, rule_path, "full_quality", false);
                rule.base_fraction = get_field_or<double>(r, rule_path, "base_fraction",
                                                          rule.full_quality ? 0.0 : 1.0);
                qa.cbp_rules.push_back(rule);
            }
        }
    } else {
        fail(path + ".kind", "must be one of dbp, cbp, bpp");
    }
    return qa;
}

SchedulerSpec parse_scheduler(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    expect_keys(j, path,
                {"kind", "epsilon", "b_thresh", "h_alpha", "h_beta", "initial_level",
                 "time_constant", "initial_average"});
    SchedulerSpec spec;
    std::string kind = get_field<std::string>(j, path, "kind");
    if (kind == "qaa") spec.kind = SchedulerKind::Qaa;
    else if (kind == "beas") spec.kind = SchedulerKind::Beas;
    else if (kind == "pf") spec.kind = SchedulerKind::Pf;
    else if (kind == "bcf") spec.kind = SchedulerKind::Bcf;
    else if (kind == "lbf") spec.kind = SchedulerKind::Lbf;
    else fail(path + ".kind", "must be one of qaa, beas, pf, bcf, lbf");
    spec.beas.epsilon = get_field_or<double>(j, path, "epsilon", spec.beas.epsilon);
    spec.beas.b_thresh = get_field_or<double>(j, path, "b_thresh", spec.beas.b_thresh);
    spec.beas.h_alpha = get_field_or<double>(j, path, "h_alpha", spec.beas.h_alpha);
    spec.beas.h_beta = get_field_or<double>(j, path, "h_beta", spec.beas.h_beta);
    spec.beas.initial_level = get_field_or<double>(j, path, "initial_level", spec.beas.initial_level);
    spec.pf_time_constant = get_field_or<double>(j, path, "time_constant", spec.pf_time_constant);
    spec.pf_initial_average = get_field_or<double>(j, path, "initial_average", spec.pf_initial_average);
    if (spec.kind == SchedulerKind::Beas &&
        (!(spec.beas.epsilon > 0.0) || spec.beas.epsilon >= 1.0))
        fail(path + ".epsilon", "must lie strictly between 0 and 1");
    if (spec.kind == SchedulerKind::Pf && !(spec.pf_time_constant >= 1.0))
        fail(path + ".time_constant", "must be >= 1 slot");
    return spec;
}

}  // namespace

std::vector<UserGroup> ExperimentConfig::build_groups() const {
    std::vector<UserGroup> built;
    for (const auto& ref : groups) {
        UserGroup group;
        group.count = ref.count;
        group.video = video;
        group.qa = qas.at(ref.qa);
        group.channel = channels.at(ref.channel);
        built.push_back(std::move(group));
    }
    return built;
}

SimConfig ExperimentConfig::to_sim_config() const {
    SimConfig sim;
    sim.groups = build_groups();
    sim.subchannels = subchannels;
    sim.scheduler = scheduler;
    sim.horizon_slots = horizon_slots;
    sim.warmup_slots = warmup_slots;
    sim.discount_per_second = discount_per_second;
    return sim;
}

ExperimentConfig load_experiment_config(const json& document) {
    if (!document.is_object()) fail("", "top level must be an object");
    expect_keys(document, "",
                {"video", "channels", "qas", "groups", "subchannels", "subchannel_sweep",
                 "discount_per_second", "scheduler", "seeds", "seed_count", "seed_base",
                 "horizon_slots", "warmup_slots", "solver", "output_dir", "smdp_tail_tol"});
    ExperimentConfig config;
    config.video = parse_video(document.at("video"), "video");

    if (!document.contains("channels") || !document.at("channels").is_object())
        fail("channels", "expected an object of named channel models");
    for (const auto& [name, channel] : document.at("channels").items())
        config.channels[name] = parse_channel(channel, "channels." + name);

    if (!document.contains("qas") || !document.at("qas").is_object())
        fail("qas", "expected an object of named QA specs");
    for (const auto& [name, qa] : document.at("qas").items())
        config.qas[name] = parse_qa(qa, "qas." + name);

    if (!document.contains("groups") || !document.at("groups").is_array() ||
        document.at("groups").empty())
        fail("groups", "expected a non-empty array");
    int index = 0;
    for (const auto& g : document.at("groups")) {
        std::string path = "groups[" + std::to_string(index++) + "]";
        expect_keys(g, path, {"count", "qa", "channel"});
        ExperimentConfig::GroupRef ref;
        ref.count = get_field<int>(g, path, "count");
        if (ref.count < 1) fail(path + ".count", "must be >= 1");
        ref.qa = get_field<std::string>(g, path, "qa");
        ref.channel = get_field<std::string>(g, path, "channel");
        if (!config.qas.count(ref.qa)) fail(path + ".qa", "references unknown QA '" + ref.qa + "'");
        if (!config.channels.count(ref.channel))
            fail(path + ".channel", "references unknown channel '" + ref.channel + "'");
        config.groups.push_back(std::move(ref));
    }

    config.subchannels = get_field_or<int>(document, "", "subchannels", 0);
    config.subchannel_sweep =
        get_field_or<std::vector<int>>(document, "", "subchannel_sweep", {});
    config.discount_per_second = get_field_or<double>(document, "", "discount_per_second", 0.99);
    if (!(config.discount_per_second > 0.0) || !(config.discount_per_second < 1.0))
        fail("discount_per_second", "must lie strictly between 0 and 1");

    if (document.contains("scheduler"))
        config.scheduler = parse_scheduler(document.at("scheduler"), "scheduler");

    if (document.contains("seeds")) {
        config.seeds = get_field<std::vector<uint64_t>>(document, "", "seeds");
        if (config.seeds.empty()) fail("seeds", "must not be empty");
    } else if (document.contains("seed_count")) {
        int count = get_field<int>(document, "", "seed_count");
        if (count < 1) fail("seed_count", "must be >= 1");
        uint64_t base = get_field_or<uint64_t>(document, "", "seed_base", 1);
        config.seeds.clear();
        for (int i = 0; i < count; ++i) config.seeds.push_back(base + i);
    }

    config.horizon_slots = get_field_or<int>(document, "", "horizon_slots", 600);
    if (config.horizon_slots < 1) fail("horizon_slots", "must be >= 1");
    config.warmup_slots = get_field_or<int>(document, "", "warmup_slots", 0);
    if (config.warmup_slots < 0 || config.warmup_slots >= config.horizon_slots)
        fail("warmup_slots", "must lie in [0, horizon_slots)");

    if (document.contains("solver")) {
        const auto& s = document.at("solver");
        expect_keys(s, "solver",
                    {"feasibility_tol", "optimality_tol", "max_iterations",
                     "bland_after_degenerate", "refactor_interval"});
        config.solver.feasibility_tol =
            get_field_or<double>(s, "solver", "feasibility_tol", config.solver.feasibility_tol);
        config.solver.optimality_tol =
            get_field_or<double>(s, "solver", "optimality_tol", config.solver.optimality_tol);
        config.solver.max_iterations =
            get_field_or<long>(s, "solver", "max_iterations", config.solver.max_iterations);
        config.solver.bland_after_degenerate = get_field_or<int>(
            s, "solver", "bland_after_degenerate", config.solver.bland_after_degenerate);
        config.solver.refactor_interval =
            get_field_or<int>(s, "solver", "refactor_interval", config.solver.refactor_interval);
        if (!(config.solver.feasibility_tol > 0.0) || !(config.solver.optimality_tol > 0.0))
            fail("solver", "tolerances must be positive");
    }

    config.output_dir = get_field_or<std::string>(document, "", "output_dir", "out");
    config.smdp_tail_tol = get_field_or<double>(document, "", "smdp_tail_tol", 1e-9);

    // Resolve CBP rule tables now so the resolved config is self-contained.
    for (auto& [name, qa] : config.qas) {
        if (qa.kind != QaKind::Cbp) continue;
        int channel_states = -1;
        for (const auto& ref : config.groups) {
            if (ref.qa != name) continue;
            int n = config.channels.at(ref.channel).num_states();
            if (channel_states >= 0 && channel_states != n)
                fail("qas." + name, "CBP without an explicit rule table is used with channels of "
                                    "different state counts; spell the rules out");
            channel_states = n;
        }
        if (channel_states > 0) qa = resolve_qa(qa, config.video, channel_states);
    }
    return config;
}

namespace {

json video_to_json(const VideoConfig& v) {
    return json{{"num_layers", v.num_layers},
                {"layer_rates", v.layer_rates},
                {"segment_duration", v.segment_duration},
                {"buffer_limit", v.buffer_limit},
                {"qoe_phi", v.qoe_phi},
                {"qoe_theta", v.qoe_theta},
                {"rebuffer_penalty", v.rebuffer_penalty}};
}

json channel_to_json(const ChannelModel& c) {
    return json{{"states", c.states}, {"transition", c.transition}};
}

json qa_to_json(const QaSpec& qa) {
    switch (qa.kind) {
        case QaKind::Dbp:
            return json{{"kind", "dbp"}, {"thresholds_seconds", qa.dbp_thresholds_seconds}};
        case QaKind::Bpp:
            return json{{"kind", "bpp"}, {"switch_fraction", qa.bpp_switch_fraction}};
        case QaKind::Cbp: {
            json rules = json::array();
            for (const auto& r : qa.cbp_rules)
                rules.push_back(json{{"base_fraction", r.base_fraction}, {"full_quality", r.full_quality}});
            return json{{"kind", "cbp"}, {"rules", std::move(rules)}};
        }
    }
    return {};
}

json scheduler_to_json(const SchedulerSpec& s) {
    json doc{{"kind", to_string(s.kind)}};
    if (s.kind == SchedulerKind::Beas) {
        doc["epsilon"] = s.beas.epsilon;
        doc["b_thresh"] = s.beas.b_thresh;
        doc["h_alpha"] = s.beas.h_alpha;
        doc["h_beta"] = s.beas.h_beta;
        doc["initial_level"] = s.beas.initial_level;
    }
    if (s.kind == SchedulerKind::Pf) {
        doc["time_constant"] = s.pf_time_constant;
        doc["initial_average"] = s.pf_initial_average;
    }
    return doc;
}

}  // namespace

json resolved_config_json(const ExperimentConfig& config) {
    json doc;
    doc["schema"] = schema_tag("resolved-config");
    doc["video"] = video_to_json(config.video);
    json channels;
    for (const auto& [name, channel] : config.channels) channels[name] = channel_to_json(channel);
    doc["channels"] = std::move(channels);
    json qas;
    for (const auto& [name, qa] : config.qas) qas[name] = qa_to_json(qa);
    doc["qas"] = std::move(qas);
    json groups = json::array();
    for (const auto& g : config.groups)
        groups.push_back(json{{"count", g.count}, {"qa", g.qa}, {"channel", g.channel}});
    doc["groups"] = std::move(groups);
    doc["subchannels"] = config.subchannels;
    doc["subchannel_sweep"] = config.subchannel_sweep;
    doc["discount_per_second"] = config.discount_per_second;
    doc["scheduler"] = scheduler_to_json(config.scheduler);
    doc["seeds"] = config.seeds;
    doc["horizon_slots"] = config.horizon_slots;
    doc["warmup_slots"] = config.warmup_slots;
    doc["solver"] = json{{"feasibility_tol", config.solver.feasibility_tol},
                         {"optimality_tol", config.solver.optimality_tol},
                         {"max_iterations", config.solver.max_iterations},
                         {"bland_after_degenerate", config.solver.bland_after_degenerate},
                         {"refactor_interval", config.solver.refactor_interval}};
    doc["output_dir"] = config.output_dir;
    doc["smdp_tail_tol"] = config.smdp_tail_tol;
    return doc;
}

}  // namespace svcsched
