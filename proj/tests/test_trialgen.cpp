#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "moeval/errors.hpp"
#include "moeval/synth.hpp"
#include "moeval/trialgen.hpp"

using namespace moeval;
using corpus::EnvName;

TEST_CASE("trial seeds are pure and target-independent") {
    const auto s1 = trialgen::derive_trial_seed(42, 7, 100, EnvName::kFull);
    const auto s2 = trialgen::derive_trial_seed(42, 7, 100, EnvName::kFull);
    CHECK(s1 == s2);

    CHECK(trialgen::derive_trial_seed(42, 0, 4, EnvName::kEasy) !=
          trialgen::derive_trial_seed(42, 1, 4, EnvName::kEasy));
    CHECK(trialgen::derive_trial_seed(42, 0, 4, EnvName::kEasy) !=
          trialgen::derive_trial_seed(42, 0, 10, EnvName::kEasy));
    CHECK(trialgen::derive_trial_seed(42, 0, 4, EnvName::kEasy) !=
          trialgen::derive_trial_seed(42, 0, 4, EnvName::kFull));
    CHECK(trialgen::derive_trial_seed(42, 0, 4, EnvName::kEasy) !=
          trialgen::derive_trial_seed(43, 0, 4, EnvName::kEasy));
}

TEST_CASE("trial seeds are injective over the trial-index range") {
    // Brute-force over k=0..9999 for a fixed (master, N, env).
    std::set<std::uint64_t> seeds;
    for (int k = 0; k < 10000; ++k) {
        seeds.insert(trialgen::derive_trial_seed(123, k, 100, EnvName::kFull));
    }
    CHECK(seeds.size() == 10000);
}

TEST_CASE("coordinate encoding rejects out-of-range input") {
    CHECK_THROWS_AS(trialgen::encode_trial_coordinates(-1, 4, EnvName::kFull), IntegrityError);
    CHECK_THROWS_AS(trialgen::encode_trial_coordinates(0, 1, EnvName::kFull), IntegrityError);
    CHECK_THROWS_AS(trialgen::encode_trial_coordinates(0, 1 << 16, EnvName::kFull),
                    IntegrityError);
}

namespace {

struct Fixture {
    corpus::Corpus built;
    corpus::EnvironmentPool pool;
    const corpus::SentenceItem* target;

    explicit Fixture(synth::SynthSpec spec = {6, 200, 4, 11})
        : built(synth::make_corpus(spec)),
          pool(corpus::build_environment(built, EnvName::kFull)),
          target(&built.item("t0000")) {}
};

}  // namespace

TEST_CASE("sampled trials contain the target exactly once among distinct distractors") {
    Fixture fx;
    trialgen::TrialSampler sampler(*fx.target, fx.pool);
    for (int k = 0; k < 50; ++k) {
        const auto seed = trialgen::derive_trial_seed(1, k, 20, EnvName::kFull);
        const auto spec = sampler.sample(20, k, seed);
        REQUIRE(spec.option_ids.size() == 20);
        CHECK(spec.gold_position >= 1);
        CHECK(spec.gold_position <= 20);
        CHECK(spec.option_ids[static_cast<std::size_t>(spec.gold_position - 1)] == "t0000");
        std::set<std::string> unique(spec.option_ids.begin(), spec.option_ids.end());
        CHECK(unique.size() == 20);  // without replacement
        CHECK(std::count(spec.option_ids.begin(), spec.option_ids.end(), "t0000") == 1);
    }
}

TEST_CASE("a pool of exactly N-1 forces the full composition") {
    Fixture fx({1, 3, 0, 5});
    const auto full = corpus::build_environment(fx.built, EnvName::kFull);
    REQUIRE(full.size() == 3);
    const auto spec = trialgen::sample_trial(*fx.target, full, 4, 99);
    std::set<std::string> ids(spec.option_ids.begin(), spec.option_ids.end());
    CHECK(ids == std::set<std::string>{"t0000", "d0000", "d0001", "d0002"});
}

TEST_CASE("identical inputs give byte-identical trials; insufficient pools raise") {
    Fixture fx;
    trialgen::TrialSampler sampler(*fx.target, fx.pool);
    const auto a = sampler.sample(10, 0, 777);
    const auto b = sampler.sample(10, 0, 777);
    CHECK(a.option_ids == b.option_ids);
    CHECK(a.gold_position == b.gold_position);

    CHECK_THROWS_AS(sampler.sample(1000, 0, 777), CapacityError);
}

TEST_CASE("the target's base sentence is excluded from its own draws") {
    // t0000 .. t0003 carry base ids b0000 .. b0003; bases have no verdicts and
    // never enter pools, so craft a pool that contains the base id directly.
    Fixture fx;
    corpus::EnvironmentPool pool = fx.pool;
    pool.member_ids.push_back(fx.target->base_id.value());
    std::sort(pool.member_ids.begin(), pool.member_ids.end());

    trialgen::TrialSampler sampler(*fx.target, pool);
    CHECK(sampler.pool_size() == fx.pool.size());  // base filtered back out
    for (int k = 0; k < 200; ++k) {
        const auto spec =
            sampler.sample(50, k, trialgen::derive_trial_seed(5, k, 50, EnvName::kFull));
        CHECK(std::find(spec.option_ids.begin(), spec.option_ids.end(),
                        fx.target->base_id.value()) == spec.option_ids.end());
    }
}

TEST_CASE("a target found inside the pool is an integrity error") {
    Fixture fx;
    corpus::EnvironmentPool pool = fx.pool;
    pool.member_ids.push_back("t0000");
    std::sort(pool.member_ids.begin(), pool.member_ids.end());
    CHECK_THROWS_AS(trialgen::TrialSampler(*fx.target, pool), IntegrityError);
}

TEST_CASE("synchronized seeding draws the same distractor sequence for every target") {
    // Targets without base exclusions see identical pools, so the same trial
    // seed must produce the same distractors and the same permutation.
    Fixture fx({6, 200, 0, 17});
    const auto& t4 = fx.built.item("t0004");
    const auto& t5 = fx.built.item("t0005");
    REQUIRE(!t4.base_id);
    REQUIRE(!t5.base_id);
    trialgen::TrialSampler s4(t4, fx.pool);
    trialgen::TrialSampler s5(t5, fx.pool);
    for (int k = 0; k < 30; ++k) {
        const auto seed = trialgen::derive_trial_seed(2, k, 10, EnvName::kFull);
        const auto a = s4.sample(10, k, seed);
        const auto b = s5.sample(10, k, seed);
        CHECK(a.gold_position == b.gold_position);
        // identical option lists up to swapping the target id itself
        for (std::size_t i = 0; i < a.option_ids.size(); ++i) {
            if (static_cast<int>(i) + 1 == a.gold_position) {
                CHECK(a.option_ids[i] == "t0004");
                CHECK(b.option_ids[i] == "t0005");
            } else {
                CHECK(a.option_ids[i] == b.option_ids[i]);
            }
        }
    }
}

TEST_CASE("empirical gold distribution anchors") {
    SUBCASE("counting example") {
        const auto dist = trialgen::empirical_gold_distribution({1, 1, 2, 4}, 4);
        CHECK(dist.mass[0] == doctest::Approx(0.5));
        CHECK(dist.mass[1] == doctest::Approx(0.25));
        CHECK(dist.mass[2] == doctest::Approx(0.0));
        CHECK(dist.mass[3] == doctest::Approx(0.25));
    }
    SUBCASE("single record is a point mass") {
        const auto dist = trialgen::empirical_gold_distribution({3}, 4);
        CHECK(dist.mass[2] == doctest::Approx(1.0));
    }
    SUBCASE("mass always sums to one") {
        const auto dist = trialgen::empirical_gold_distribution({1, 5, 9, 9, 2}, 10);
        double sum = 0;
        for (double m : dist.mass) sum += m;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("empty input raises") {
        CHECK_THROWS_AS(trialgen::empirical_gold_distribution(std::vector<int>{}, 4),
                        AggregationError);
    }
}

TEST_CASE("gold positions scatter uniformly") {
    Fixture fx;
    trialgen::TrialSampler sampler(*fx.target, fx.pool);
    const int n = 10;
    const int trials = 5000;
    std::vector<long> hist(static_cast<std::size_t>(n), 0);
    for (int k = 0; k < trials; ++k) {
        const auto spec =
            sampler.sample(n, k, trialgen::derive_trial_seed(4, k, n, EnvName::kFull));
        hist[static_cast<std::size_t>(spec.gold_position - 1)] += 1;
    }
    const double expected = static_cast<double>(trials) / n;
    double stat = 0;
    for (long c : hist) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    // chi-square 0.999 quantile at 9 dof
    CHECK(stat < 27.877);
}
