#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "moeval/rng.hpp"

using namespace moeval;

TEST_CASE("splitmix64 matches the published stream") {
    // Known-answer vectors frozen from the reference implementation.
    rng::SplitMix64 zero(0);
    CHECK(zero.next() == 0xE220A8397B1DCDAFull);
    CHECK(zero.next() == 0x6E789E6AA1B965F4ull);
    CHECK(zero.next() == 0x06C45D188009454Full);
    CHECK(zero.next() == 0xF88BB8A8724C81ECull);

    rng::SplitMix64 forty_two(42);
    CHECK(forty_two.next() == 0xBDD732262FEB6E95ull);
    CHECK(forty_two.next() == 0x28EFE333B266F103ull);

    rng::SplitMix64 big(0x123456789ABCDEFull);
    CHECK(big.next() == 0x157A3807A48FAA9Dull);
    CHECK(big.next() == 0xD573529B34A1D093ull);
}

TEST_CASE("splitmix64 discard is equivalent to stepping") {
    rng::SplitMix64 stepped(77);
    for (int i = 0; i < 1000; ++i) stepped.next();
    rng::SplitMix64 jumped(77);
    jumped.discard(1000);
    CHECK(stepped.next() == jumped.next());
}

TEST_CASE("bounded draws stay in range and cover all residues") {
    rng::SplitMix64 gen(3);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t v = rng::bounded(gen, 7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("bounded handles powers of two and m=1") {
    rng::SplitMix64 gen(9);
    for (int i = 0; i < 100; ++i) {
        CHECK(rng::bounded(gen, 1) == 0);
        CHECK(rng::bounded(gen, 16) < 16);
    }
}

TEST_CASE("partial shuffle yields a without-replacement prefix") {
    rng::Xoshiro256ss gen(5);
    std::vector<int> data(50);
    for (int i = 0; i < 50; ++i) data[static_cast<std::size_t>(i)] = i;
    rng::partial_shuffle(data.data(), data.size(), 10, gen);

    std::set<int> prefix(data.begin(), data.begin() + 10);
    CHECK(prefix.size() == 10);
    std::set<int> all(data.begin(), data.end());
    CHECK(all.size() == 50);  // still a permutation of the original values
}

TEST_CASE("full shuffle is a permutation and is seed-deterministic") {
    std::vector<int> a(20), b(20);
    for (int i = 0; i < 20; ++i) a[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] = i;
    rng::Xoshiro256ss g1(11), g2(11);
    rng::shuffle_all(a.data(), a.size(), g1);
    rng::shuffle_all(b.data(), b.size(), g2);
    CHECK(a == b);
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 20; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("fnv1a64 known answers") {
    CHECK(rng::fnv1a64("") == 0xCBF29CE484222325ull);
    CHECK(rng::fnv1a64("a") == 0xAF63DC4C8601EC8Cull);
    CHECK(rng::fnv1a64("hello") != rng::fnv1a64("hellp"));
}
