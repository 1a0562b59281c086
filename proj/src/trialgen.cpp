#include "moeval/trialgen.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "moeval/errors.hpp"
#include "moeval/rng.hpp"

namespace moeval::trialgen {

std::uint64_t encode_trial_coordinates(int trial_index, int option_count, corpus::EnvName env) {
    if (trial_index < 0 || static_cast<std::uint64_t>(trial_index) >= (1ull << 44)) {
        throw IntegrityError("trial index out of encodable range");
    }
    if (option_count < 2 || option_count >= (1 << 16)) {
        throw IntegrityError("option count out of encodable range");
    }
    const std::uint64_t env_ordinal = env == corpus::EnvName::kEasy ? 0 : 1;
    return (static_cast<std::uint64_t>(trial_index) << 20) |
           (static_cast<std::uint64_t>(option_count) << 4) | env_ordinal;
}

std::uint64_t derive_trial_seed(std::uint64_t master_seed, int trial_index, int option_count,
                                corpus::EnvName env) {
    rng::SplitMix64 stream(master_seed);
    stream.discard(encode_trial_coordinates(trial_index, option_count, env));
    return stream.next();
}

TrialSampler::TrialSampler(const corpus::SentenceItem& target, const corpus::EnvironmentPool& pool)
    : target_id_(target.id),
      environment_(pool.name) {
    if (target.role != corpus::Role::kTarget) {
        throw IntegrityError("item '" + target.id + "' is not labeled as a target");
    }
    members_.reserve(pool.member_ids.size());
    for (const auto& id : pool.member_ids) {
        if (id == target.id) {
            throw IntegrityError("target '" + target.id + "' appears in the distractor pool");
        }
        if (target.base_id && id == *target.base_id) continue;  // exclude the unperturbed twin
        members_.push_back(id);
    }
}

TrialSpec TrialSampler::sample(int option_count, int trial_index, std::uint64_t trial_seed) const {
    if (option_count < 2) throw IntegrityError("option count must be at least 2");
    if (trial_index < 0) throw IntegrityError("trial index must be nonnegative");
    const std::size_t need = static_cast<std::size_t>(option_count) - 1;
    if (members_.size() < need) {
        std::ostringstream msg;
        msg << "pool for target '" << target_id_ << "' too small: required " << need
            << " distractors, available " << members_.size();
        throw CapacityError(msg.str());
    }

    rng::Xoshiro256ss gen(trial_seed);

    std::vector<std::uint32_t> idx(members_.size());
    std::iota(idx.begin(), idx.end(), 0u);
    rng::partial_shuffle(idx.data(), idx.size(), need, gen);

    TrialSpec spec;
    spec.target_id = target_id_;
    spec.environment = environment_;
    spec.option_count = option_count;
    spec.trial_index = trial_index;
    spec.trial_seed = trial_seed;
    spec.option_ids.reserve(static_cast<std::size_t>(option_count));
    for (std::size_t i = 0; i < need; ++i) spec.option_ids.push_back(members_[idx[i]]);
    spec.option_ids.push_back(target_id_);

    rng::shuffle_all(spec.option_ids.data(), spec.option_ids.size(), gen);

    const auto it = std::find(spec.option_ids.begin(), spec.option_ids.end(), target_id_);
    spec.gold_position = static_cast<int>(it - spec.option_ids.begin()) + 1;
    return spec;
}

TrialSpec sample_trial(const corpus::SentenceItem& target, const corpus::EnvironmentPool& pool,
                       int option_count, std::uint64_t trial_seed, int trial_index) {
    return TrialSampler(target, pool).sample(option_count, trial_index, trial_seed);
}

PositionDistribution empirical_gold_distribution(const std::vector<int>& gold_positions,
                                                 int option_count) {
    if (gold_positions.empty()) {
        throw AggregationError("cannot build a gold distribution from zero records");
    }
    PositionDistribution dist;
    dist.option_count = option_count;
    dist.side = DistributionSide::kGold;
    dist.mass.assign(static_cast<std::size_t>(option_count), 0.0);
    for (int g : gold_positions) {
        if (g < 1 || g > option_count) {
            throw ShapeError("gold position " + std::to_string(g) + " outside 1.." +
                             std::to_string(option_count));
        }
        dist.mass[static_cast<std::size_t>(g - 1)] += 1.0;
    }
    const double total = static_cast<double>(gold_positions.size());
    for (double& m : dist.mass) m /= total;
    return dist;
}

PositionDistribution empirical_gold_distribution(const std::vector<TrialRecord>& records) {
    if (records.empty()) {
        throw AggregationError("cannot build a gold distribution from zero records");
    }
    const int n = records.front().option_count;
    std::vector<int> golds;
    golds.reserve(records.size());
    for (const auto& r : records) {
        if (r.option_count != n) {
            throw ShapeError("record set mixes option counts " + std::to_string(n) + " and " +
                             std::to_string(r.option_count));
        }
        golds.push_back(r.gold_position);
    }
    return empirical_gold_distribution(golds, n);
}

}  // namespace moeval::trialgen
