#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moeval/corpus.hpp"
#include "moeval/distribution.hpp"
#include "moeval/record.hpp"

namespace moeval::trialgen {

// Fully materialized trial: the shuffled option list and where the target
// landed in it.
struct TrialSpec {
    std::string target_id;
    corpus::EnvName environment = corpus::EnvName::kFull;
    int option_count = 0;  // N
    int trial_index = 0;   // k, 0-based
    std::uint64_t trial_seed = 0;
    std::vector<std::string> option_ids;
    int gold_position = 0;  // 1-based index of the target in option_ids
};

// Trial seeds are shared across targets so the k-th trial of every target
// sees the same draw sequence. The mapping is pinned: encode (k, N, env) into
// a single stream offset and read the SplitMix64 stream seeded by the master
// seed at that offset.
//
//   offset = (k << 20) | (N << 4) | env_ordinal      (Easy=0, Full=1)
//   trial_seed = SplitMix64(master_seed) advanced by offset, then one output
//
// The encoding is injective for k < 2^44, N < 2^16, which the harness
// enforces at config validation.
std::uint64_t derive_trial_seed(std::uint64_t master_seed, int trial_index, int option_count,
                                corpus::EnvName env);

std::uint64_t encode_trial_coordinates(int trial_index, int option_count, corpus::EnvName env);

// Repeated sampling for one target: the pool is filtered once (the target's
// own id must not appear; its base sentence, when known, is removed) and each
// call runs the pinned draw procedure:
//
//   1. xoshiro256** seeded with trial_seed
//   2. partial Fisher-Yates picks N-1 distractor indices without replacement
//   3. the target is appended and the full N-option list is Fisher-Yates
//      shuffled by the same generator
class TrialSampler {
public:
    TrialSampler(const corpus::SentenceItem& target, const corpus::EnvironmentPool& pool);

    TrialSpec sample(int option_count, int trial_index, std::uint64_t trial_seed) const;

    std::size_t pool_size() const { return members_.size(); }

private:
    std::string target_id_;
    corpus::EnvName environment_;
    std::vector<std::string> members_;  // filtered distractor ids, stable order
};

// One-shot convenience wrapper over TrialSampler.
TrialSpec sample_trial(const corpus::SentenceItem& target, const corpus::EnvironmentPool& pool,
                       int option_count, std::uint64_t trial_seed, int trial_index = 0);

// Empirical gold-position distribution over a trial set at fixed N.
PositionDistribution empirical_gold_distribution(const std::vector<int>& gold_positions,
                                                 int option_count);
PositionDistribution empirical_gold_distribution(const std::vector<TrialRecord>& records);

}  // namespace moeval::trialgen
