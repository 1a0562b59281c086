#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>

namespace moeval {

// One evaluation outcome. The key (responder, env, padding, N, target, k) is
// unique within a log; canonical log order sorts by exactly that tuple.
struct TrialRecord {
    std::string responder_id;
    std::string environment;   // "Easy" | "Full"
    std::string padding_key;   // "none" or "<content>/<placement>"
    int option_count = 0;      // N
    std::string target_id;
    int trial_index = 0;       // k, 0-based
    std::uint64_t trial_seed = 0;
    int gold_position = 0;     // g, 1-based
    std::optional<int> response_position;  // r, absent when invalid
    bool valid = false;
    int correct = 0;  // c = 1 iff valid and r == g
    std::optional<std::string> raw_output;
    std::optional<std::string> invalid_reason;
    long length_units = 0;
    std::string timestamp;  // live-log only; stripped at canonicalization

    std::tuple<const std::string&, const std::string&, const std::string&, int,
               const std::string&, int>
    key() const {
        return {responder_id, environment, padding_key, option_count, target_id, trial_index};
    }
};

inline bool canonical_less(const TrialRecord& a, const TrialRecord& b) {
    return a.key() < b.key();
}

}  // namespace moeval
