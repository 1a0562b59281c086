#include "moeval/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "moeval/errors.hpp"
#include "moeval/rng.hpp"

namespace moeval {

using nlohmann::json;
using nlohmann::ordered_json;

void RunConfig::validate() const {
    if (target_ids.empty()) throw ConfigError("target_ids must be nonempty");
    std::set<std::string> seen(target_ids.begin(), target_ids.end());
    if (seen.size() != target_ids.size()) throw ConfigError("target_ids contains duplicates");
    if (trials_per_target < 1) throw ConfigError("trials_per_target must be >= 1");
    if (static_cast<std::uint64_t>(trials_per_target) >= (1ull << 44)) {
        throw ConfigError("trials_per_target exceeds the seed-encoding range");
    }
    if (option_sizes.empty()) throw ConfigError("option_sizes must be nonempty");
    for (int n : option_sizes) {
        if (n < 2) throw ConfigError("every option size must be >= 2");
        if (n >= (1 << 16)) throw ConfigError("option size exceeds the seed-encoding range");
    }
    if (padding_conditions.empty()) throw ConfigError("padding_conditions must be nonempty");
    for (const auto& p : padding_conditions) p.validate();
    responder.validate();
    metrics.validate();
}

namespace {

prompting::PaddingCondition padding_from_json(const json& j) {
    prompting::PaddingCondition c;
    c.content = prompting::padding_content_from_string(j.at("content").get<std::string>());
    if (c.content == prompting::PaddingContent::kNone) {
        c.placement = prompting::PaddingPlacement::kNotApplicable;
    } else {
        c.placement =
            prompting::padding_placement_from_string(j.at("placement").get<std::string>());
        c.payload_ref = j.at("payload_ref").get<std::string>();
    }
    return c;
}

ordered_json padding_to_json(const prompting::PaddingCondition& c) {
    ordered_json j;
    j["content"] = prompting::to_string(c.content);
    if (!c.is_none()) {
        j["placement"] = prompting::to_string(c.placement);
        j["payload_ref"] = c.payload_ref;
    }
    return j;
}

responders::ResponderSpec responder_from_json(const json& j) {
    responders::ResponderSpec spec;
    spec.kind = responders::policy_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("id")) spec.id = j["id"].get<std::string>();
    if (j.contains("policy_seed")) spec.policy_seed = j["policy_seed"].get<std::uint64_t>();
    if (j.contains("p_know")) spec.p_know = j["p_know"].get<double>();
    if (j.contains("k_pre")) spec.k_pre = j["k_pre"].get<int>();
    if (j.contains("cutoff")) spec.cutoff = j["cutoff"].get<int>();
    if (j.contains("replay_log")) spec.replay_log = j["replay_log"].get<std::string>();
    if (j.contains("remote")) {
        const auto& r = j["remote"];
        spec.remote.endpoint = r.at("endpoint").get<std::string>();
        spec.remote.model_id = r.at("model_id").get<std::string>();
        if (r.contains("api_key_env")) spec.remote.api_key_env = r["api_key_env"].get<std::string>();
        if (r.contains("timeout_seconds")) spec.remote.timeout_seconds = r["timeout_seconds"].get<int>();
        if (r.contains("max_in_flight")) spec.remote.max_in_flight = r["max_in_flight"].get<int>();
        if (r.contains("max_retries")) spec.remote.max_retries = r["max_retries"].get<int>();
        if (r.contains("backoff_base_ms")) spec.remote.backoff_base_ms = r["backoff_base_ms"].get<int>();
    }
    return spec;
}

ordered_json responder_to_json(const responders::ResponderSpec& spec) {
    ordered_json j;
    j["kind"] = responders::to_string(spec.kind);
    if (!spec.id.empty()) j["id"] = spec.id;
    j["policy_seed"] = spec.policy_seed;
    switch (spec.kind) {
        case responders::PolicyKind::kPrimacyFallback:
            j["p_know"] = spec.p_know;
            j["k_pre"] = spec.k_pre;
            break;
        case responders::PolicyKind::kStepThreshold:
            j["cutoff"] = spec.cutoff;
            break;
        case responders::PolicyKind::kReplay:
            j["replay_log"] = spec.replay_log;
            break;
        case responders::PolicyKind::kRemote:
            j["remote"] = {{"endpoint", spec.remote.endpoint},
                           {"model_id", spec.remote.model_id},
                           {"api_key_env", spec.remote.api_key_env},
                           {"timeout_seconds", spec.remote.timeout_seconds},
                           {"max_in_flight", spec.remote.max_in_flight},
                           {"max_retries", spec.remote.max_retries},
                           {"backoff_base_ms", spec.remote.backoff_base_ms}};
            break;
        default:
            break;
    }
    return j;
}

metrics::MetricsConfig metrics_from_json(const json& j) {
    metrics::MetricsConfig m;
    if (j.contains("k_pre")) m.k_pre = j["k_pre"].get<int>();
    if (j.contains("bin_count")) m.bin_count = j["bin_count"].get<int>();
    if (j.contains("epsilon")) m.epsilon = j["epsilon"].get<double>();
    if (j.contains("ci_level")) m.ci_level = j["ci_level"].get<double>();
    if (j.contains("front_tail_width")) m.front_tail_width = j["front_tail_width"].get<int>();
    if (j.contains("bootstrap_samples")) m.bootstrap_samples = j["bootstrap_samples"].get<int>();
    if (j.contains("bootstrap_seed")) m.bootstrap_seed = j["bootstrap_seed"].get<std::uint64_t>();
    return m;
}

ordered_json metrics_to_json(const metrics::MetricsConfig& m) {
    ordered_json j;
    j["k_pre"] = m.k_pre;
    j["bin_count"] = m.bin_count;
    j["epsilon"] = m.epsilon;
    j["ci_level"] = m.ci_level;
    j["front_tail_width"] = m.front_tail_width;
    j["bootstrap_samples"] = m.bootstrap_samples;
    j["bootstrap_seed"] = m.bootstrap_seed;
    return j;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    try {
        cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
        cfg.target_ids = j.at("target_ids").get<std::vector<std::string>>();
        cfg.option_sizes = j.at("option_sizes").get<std::vector<int>>();
        cfg.trials_per_target = j.at("trials_per_target").get<int>();
        cfg.environment = corpus::env_from_string(j.at("environment").get<std::string>());
        if (j.contains("template")) cfg.template_path = j["template"].get<std::string>();
        if (j.contains("padding_conditions")) {
            for (const auto& p : j["padding_conditions"]) {
                cfg.padding_conditions.push_back(padding_from_json(p));
            }
        } else {
            cfg.padding_conditions.push_back(prompting::PaddingCondition::none());
        }
        cfg.responder = responder_from_json(j.at("responder"));
        if (j.contains("metrics")) cfg.metrics = metrics_from_json(j["metrics"]);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string RunConfig::to_json_text() const {
    ordered_json j;
    j["master_seed"] = master_seed;
    j["target_ids"] = target_ids;
    j["option_sizes"] = option_sizes;
    j["trials_per_target"] = trials_per_target;
    j["environment"] = corpus::to_string(environment);
    if (!template_path.empty()) j["template"] = template_path;
    j["padding_conditions"] = ordered_json::array();
    for (const auto& p : padding_conditions) j["padding_conditions"].push_back(padding_to_json(p));
    j["responder"] = responder_to_json(responder);
    j["metrics"] = metrics_to_json(metrics);
    return j.dump(2);
}

std::string RunConfig::hash() const {
    const std::uint64_t h = rng::fnv1a64(to_json_text());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace moeval
