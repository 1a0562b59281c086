#pragma once

#include <cstdint>
#include <vector>

#include "moeval/corpus.hpp"

namespace moeval::synth {

struct SynthSpec {
    int targets = 30;
    int distractors = 695;
    int bases = 25;        // unperturbed twins of the first `bases` targets
    std::uint64_t seed = 1;
};

// Deterministic synthetic sentence pool for policy sweeps and tests: verified
// targets (unanimous error verdicts), verified distractors (unanimous clean),
// and base sentences without verdicts. Feature counts are drawn from the
// seeded stream so difficulty levels spread over 1..4.
std::vector<corpus::SentenceItem> make_items(const SynthSpec& spec);

corpus::Corpus make_corpus(const SynthSpec& spec);

}  // namespace moeval::synth
