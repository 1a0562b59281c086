#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "moeval/prompting.hpp"
#include "moeval/trialgen.hpp"

namespace moeval::responders {

enum class PolicyKind { kOracle, kUniformRandom, kPrimacyFallback, kStepThreshold, kRemote, kReplay };

const char* to_string(PolicyKind k);
PolicyKind policy_kind_from_string(const std::string& s);

struct RemoteOptions {
    std::string endpoint;     // e.g. http://127.0.0.1:8080/v1/chat/completions
    std::string model_id;
    std::string api_key_env;  // name of the env var holding the credential; empty = no auth
    int timeout_seconds = 30;
    int max_in_flight = 4;
    int max_retries = 3;
    int backoff_base_ms = 250;
};

struct ResponderSpec {
    PolicyKind kind = PolicyKind::kOracle;
    std::uint64_t policy_seed = 0;
    double p_know = 0.0;       // primacy_fallback
    int k_pre = 1;             // primacy_fallback
    int cutoff = 1;            // step_threshold
    RemoteOptions remote;      // remote
    std::string replay_log;    // replay
    std::string id;            // record label; defaults to the kind name

    void validate() const;
    std::string effective_id() const;
};

struct ResponseOutcome {
    int position = 0;  // meaningful only when valid
    bool valid = false;
    std::optional<std::string> raw_output;
    std::optional<std::string> invalid_reason;
    std::optional<double> latency_ms;
};

// Reply parsing: after stripping whitespace and formatting, the reply must
// contain exactly one maximal digit run, and its value must land in 1..N.
struct ParsedIndex {
    int value = 0;
    bool valid = false;
    std::string reason;  // "no-integer" | "multiple-integers" | "out-of-range"
};
ParsedIndex parse_index(std::string_view raw, int option_count);

class Responder {
public:
    virtual ~Responder() = default;
    virtual ResponseOutcome respond(const trialgen::TrialSpec& spec,
                                    const prompting::PromptArtifact& prompt) = 0;
    virtual const std::string& id() const = 0;
    // Upper bound on simultaneous respond() calls the backend tolerates.
    virtual int max_in_flight() const { return 1 << 20; }
};

// Synthetic responders draw from a stream keyed by (policy_seed, target, k)
// so responder noise never perturbs trial sampling and outcomes do not
// depend on execution order.
std::uint64_t policy_stream_seed(std::uint64_t policy_seed, std::string_view target_id,
                                 int trial_index);

std::unique_ptr<Responder> make_responder(const ResponderSpec& spec);

}  // namespace moeval::responders
