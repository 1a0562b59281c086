#include "moeval/responders.hpp"

#include <cctype>
#include <map>

#include "moeval/errors.hpp"
#include "moeval/logio.hpp"
#include "moeval/rng.hpp"

namespace moeval::responders {

const char* to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::kOracle: return "oracle";
        case PolicyKind::kUniformRandom: return "uniform_random";
        case PolicyKind::kPrimacyFallback: return "primacy_fallback";
        case PolicyKind::kStepThreshold: return "step_threshold";
        case PolicyKind::kRemote: return "remote";
        case PolicyKind::kReplay: return "replay";
    }
    return "?";
}

PolicyKind policy_kind_from_string(const std::string& s) {
    if (s == "oracle") return PolicyKind::kOracle;
    if (s == "uniform_random") return PolicyKind::kUniformRandom;
    if (s == "primacy_fallback") return PolicyKind::kPrimacyFallback;
    if (s == "step_threshold") return PolicyKind::kStepThreshold;
    if (s == "remote") return PolicyKind::kRemote;
    if (s == "replay") return PolicyKind::kReplay;
    throw ConfigError("unknown responder kind: " + s);
}

void ResponderSpec::validate() const {
    switch (kind) {
        case PolicyKind::kPrimacyFallback:
            if (p_know < 0.0 || p_know > 1.0) throw ConfigError("p_know must be in [0,1]");
            if (k_pre < 1) throw ConfigError("k_pre must be >= 1");
            break;
        case PolicyKind::kStepThreshold:
            if (cutoff < 1) throw ConfigError("cutoff must be >= 1");
            break;
        case PolicyKind::kRemote:
            if (remote.endpoint.empty()) throw ConfigError("remote responder needs an endpoint");
            if (remote.model_id.empty()) throw ConfigError("remote responder needs a model id");
            if (remote.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
            break;
        case PolicyKind::kReplay:
            if (replay_log.empty()) throw ConfigError("replay responder needs a log path");
            break;
        default:
            break;
    }
}

std::string ResponderSpec::effective_id() const {
    if (!id.empty()) return id;
    if (kind == PolicyKind::kRemote) return "remote:" + remote.model_id;
    return to_string(kind);
}

ParsedIndex parse_index(std::string_view raw, int option_count) {
    ParsedIndex out;
    long long value = 0;
    bool overflow = false;
    int runs = 0;
    bool in_run = false;
    for (unsigned char c : raw) {
        if (std::isdigit(c)) {
            if (!in_run) {
                ++runs;
                in_run = true;
                value = 0;
                overflow = false;
            }
            value = value * 10 + (c - '0');
            if (value > 1'000'000'000) overflow = true;
        } else {
            in_run = false;
        }
    }
    if (runs == 0) {
        out.reason = "no-integer";
        return out;
    }
    if (runs > 1) {
        out.reason = "multiple-integers";
        return out;
    }
    if (overflow || value < 1 || value > option_count) {
        out.reason = "out-of-range";
        return out;
    }
    out.value = static_cast<int>(value);
    out.valid = true;
    return out;
}

std::uint64_t policy_stream_seed(std::uint64_t policy_seed, std::string_view target_id,
                                 int trial_index) {
    std::uint64_t h = rng::mix64(policy_seed ^ rng::kGolden);
    h = rng::mix64(h ^ rng::fnv1a64(target_id));
    h = rng::mix64(h ^ static_cast<std::uint64_t>(trial_index));
    return h;
}

namespace {

class OracleResponder final : public Responder {
public:
    explicit OracleResponder(std::string id) : id_(std::move(id)) {}
    ResponseOutcome respond(const trialgen::TrialSpec& spec,
                            const prompting::PromptArtifact&) override {
        return {spec.gold_position, true, std::nullopt, std::nullopt, std::nullopt};
    }
    const std::string& id() const override { return id_; }

private:
    std::string id_;
};

class UniformRandomResponder final : public Responder {
public:
    UniformRandomResponder(std::string id, std::uint64_t seed) : id_(std::move(id)), seed_(seed) {}
    ResponseOutcome respond(const trialgen::TrialSpec& spec,
                            const prompting::PromptArtifact&) override {
        rng::SplitMix64 gen(policy_stream_seed(seed_, spec.target_id, spec.trial_index));
        const int r = 1 + static_cast<int>(rng::bounded(gen, spec.option_ids.size()));
        return {r, true, std::nullopt, std::nullopt, std::nullopt};
    }
    const std::string& id() const override { return id_; }

private:
    std::string id_;
    std::uint64_t seed_;
};

class PrimacyFallbackResponder final : public Responder {
public:
    PrimacyFallbackResponder(std::string id, double p_know, int k_pre, std::uint64_t seed)
        : id_(std::move(id)), p_know_(p_know), k_pre_(k_pre), seed_(seed) {}

    ResponseOutcome respond(const trialgen::TrialSpec& spec,
                            const prompting::PromptArtifact&) override {
        if (k_pre_ > spec.option_count) {
            throw ConfigError("primacy_fallback k_pre=" + std::to_string(k_pre_) +
                              " exceeds option count " + std::to_string(spec.option_count));
        }
        rng::SplitMix64 gen(policy_stream_seed(seed_, spec.target_id, spec.trial_index));
        const double u = static_cast<double>(gen.next() >> 11) * 0x1.0p-53;
        int r;
        if (u < p_know_) {
            r = spec.gold_position;
        } else {
            r = 1 + static_cast<int>(rng::bounded(gen, static_cast<std::uint64_t>(k_pre_)));
        }
        return {r, true, std::nullopt, std::nullopt, std::nullopt};
    }
    const std::string& id() const override { return id_; }

private:
    std::string id_;
    double p_know_;
    int k_pre_;
    std::uint64_t seed_;
};

class StepThresholdResponder final : public Responder {
public:
    StepThresholdResponder(std::string id, int cutoff) : id_(std::move(id)), cutoff_(cutoff) {}
    ResponseOutcome respond(const trialgen::TrialSpec& spec,
                            const prompting::PromptArtifact&) override {
        int r;
        if (spec.gold_position <= cutoff_) {
            r = spec.gold_position;
        } else {
            r = spec.gold_position == 1 ? 2 : 1;  // first non-gold index
        }
        return {r, true, std::nullopt, std::nullopt, std::nullopt};
    }
    const std::string& id() const override { return id_; }

private:
    std::string id_;
    int cutoff_;
};

class ReplayResponder final : public Responder {
public:
    ReplayResponder(std::string id, const std::string& log_path) : id_(std::move(id)) {
        for (auto& rec : logio::load_records(log_path)) {
            records_[make_key(rec.target_id, rec.option_count, rec.environment,
                              rec.trial_index)]
                .push_back(std::move(rec));
        }
        if (records_.empty()) throw MissingRecordError("replay log is empty: " + log_path);
    }

    ResponseOutcome respond(const trialgen::TrialSpec& spec,
                            const prompting::PromptArtifact& prompt) override {
        const auto it = records_.find(make_key(spec.target_id, spec.option_count,
                                               corpus::to_string(spec.environment),
                                               spec.trial_index));
        if (it == records_.end()) {
            throw MissingRecordError("replay log has no record for target=" + spec.target_id +
                                     " N=" + std::to_string(spec.option_count) +
                                     " k=" + std::to_string(spec.trial_index));
        }
        const TrialRecord* match = nullptr;
        if (it->second.size() == 1) {
            match = &it->second.front();
        } else {
            // Several padding variants share the trial key; pick the one
            // recorded under the same condition.
            const std::string want = prompt.padding.key();
            for (const auto& rec : it->second) {
                if (rec.padding_key == want) {
                    match = &rec;
                    break;
                }
            }
        }
        if (!match) {
            throw MissingRecordError("replay log is ambiguous for target=" + spec.target_id +
                                     " N=" + std::to_string(spec.option_count) +
                                     " k=" + std::to_string(spec.trial_index));
        }
        ResponseOutcome out;
        out.valid = match->valid;
        out.position = match->response_position.value_or(0);
        out.raw_output = match->raw_output;
        out.invalid_reason = match->invalid_reason;
        return out;
    }
    const std::string& id() const override { return id_; }

private:
    static std::string make_key(const std::string& target, int n, const std::string& env, int k) {
        return target + "|" + std::to_string(n) + "|" + env + "|" + std::to_string(k);
    }
    std::string id_;
    std::map<std::string, std::vector<TrialRecord>> records_;
};

}  // namespace

std::unique_ptr<Responder> make_remote_responder(const ResponderSpec& spec);  // remote.cpp

std::unique_ptr<Responder> make_responder(const ResponderSpec& spec) {
    spec.validate();
    const std::string id = spec.effective_id();
    switch (spec.kind) {
        case PolicyKind::kOracle:
            return std::make_unique<OracleResponder>(id);
        case PolicyKind::kUniformRandom:
            return std::make_unique<UniformRandomResponder>(id, spec.policy_seed);
        case PolicyKind::kPrimacyFallback:
            return std::make_unique<PrimacyFallbackResponder>(id, spec.p_know, spec.k_pre,
                                                              spec.policy_seed);
        case PolicyKind::kStepThreshold:
            return std::make_unique<StepThresholdResponder>(id, spec.cutoff);
        case PolicyKind::kReplay:
            return std::make_unique<ReplayResponder>(id, spec.replay_log);
        case PolicyKind::kRemote:
            return make_remote_responder(spec);
    }
    throw ConfigError("unhandled responder kind");
}

}  // namespace moeval::responders
