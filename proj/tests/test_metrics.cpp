#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "helpers.hpp"
#include "moeval/errors.hpp"
#include "moeval/metrics.hpp"

using namespace moeval;
using metrics::MetricsConfig;

namespace {

TrialRecord rec(const std::string& target, int n, int k, int g, int r, bool valid = true) {
    TrialRecord out;
    out.responder_id = "test";
    out.environment = "Full";
    out.padding_key = "none";
    out.option_count = n;
    out.target_id = target;
    out.trial_index = k;
    out.gold_position = g;
    out.valid = valid;
    if (valid) out.response_position = r;
    out.correct = valid && r == g ? 1 : 0;
    return out;
}

PositionDistribution dist_of(std::vector<double> mass) {
    PositionDistribution d;
    d.option_count = static_cast<int>(mass.size());
    d.mass = std::move(mass);
    return d;
}

}  // namespace

TEST_CASE("accuracy aggregation anchors") {
    CHECK(metrics::per_target_accuracy({1, 1, 0, 0}) == doctest::Approx(0.5));
    CHECK(metrics::per_target_accuracy({1, 1, 1}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(metrics::per_target_accuracy({}), AggregationError);

    CHECK(metrics::overall_accuracy({1.0, 0.0}) == doctest::Approx(0.5));
    CHECK(metrics::overall_accuracy(std::vector<double>(30, 0.37)) == doctest::Approx(0.37));
    CHECK_THROWS_AS(metrics::overall_accuracy({}), AggregationError);
}

TEST_CASE("target mean differs from pooled-trial mean under unequal counts") {
    // Target a: 10 trials, 10 correct. Target b: 2 trials, 0 correct.
    std::vector<TrialRecord> records;
    for (int k = 0; k < 10; ++k) records.push_back(rec("a", 4, k, 1, 1));
    for (int k = 0; k < 2; ++k) records.push_back(rec("b", 4, k, 1, 2));

    const auto cell = metrics::compute_cell(records, MetricsConfig{});
    CHECK(cell.accuracy == doctest::Approx(0.5));  // (1.0 + 0.0) / 2, not 10/12
    long correct = 0;
    for (const auto& r : records) correct += r.correct;
    CHECK(static_cast<double>(correct) / records.size() == doctest::Approx(10.0 / 12.0));
}

TEST_CASE("chance normalization anchors from the published table") {
    CHECK(metrics::chance_normalized(0.1401, 100) == doctest::Approx(0.1314).epsilon(5e-4));
    CHECK(metrics::chance_normalized(0.8119, 4) == doctest::Approx(0.7492).epsilon(5e-4));
    CHECK(metrics::chance_normalized(0.25, 4) == doctest::Approx(0.0));
    CHECK(metrics::chance_normalized(1.0, 7) == doctest::Approx(1.0));
    // affine renormalization pins for every N
    for (int n : {2, 4, 10, 20, 50, 100}) {
        CHECK(metrics::chance_normalized(1.0 / n, n) == doctest::Approx(0.0));
        CHECK(metrics::chance_normalized(1.0, n) == 1.0);
    }
    // may go negative below chance
    CHECK(metrics::chance_normalized(0.005, 100) < 0.0);
}

TEST_CASE("bubble index anchors") {
    const double na4 = metrics::chance_normalized(0.8119, 4);
    const double na100 = metrics::chance_normalized(0.1401, 100);
    CHECK(metrics::bubble_index(na100, na4, 1e-6) == doctest::Approx(0.8245).epsilon(2e-3));

    CHECK(metrics::bubble_index(1.0, 1.0, 1e-6) == doctest::Approx(1e-6).epsilon(1e-2));
    CHECK(metrics::bubble_index(0.9897, 0.9998, 1e-6) == doctest::Approx(0.0101).epsilon(2e-2));

    // no-bubble bound: BI(x, x, eps) <= eps / x
    for (double x : {0.05, 0.3, 0.9}) {
        CHECK(metrics::bubble_index(x, x, 1e-6) <= 1e-6 / x + 1e-15);
        CHECK(metrics::bubble_index(x, x, 1e-6) >= 0.0);
    }
    CHECK(metrics::bubble_degenerate(0.0));
    CHECK(metrics::bubble_degenerate(-0.2));
    CHECK_FALSE(metrics::bubble_degenerate(0.5));
}

TEST_CASE("response distribution excludes invalid outcomes from mass") {
    std::vector<TrialRecord> records = {
        rec("a", 4, 0, 1, 1), rec("a", 4, 1, 2, 1), rec("a", 4, 2, 3, 2),
        rec("a", 4, 3, 4, 0, false),  // invalid: no position
    };
    const auto dist = metrics::response_distribution(records);
    CHECK(dist.mass[0] == doctest::Approx(2.0 / 3));
    CHECK(dist.mass[1] == doctest::Approx(1.0 / 3));
    CHECK(dist.mass[2] == doctest::Approx(0.0));
    CHECK(metrics::invalid_rate(records) == doctest::Approx(0.25));

    std::vector<TrialRecord> all_invalid = {rec("a", 4, 0, 1, 0, false)};
    CHECK_THROWS_AS(metrics::response_distribution(all_invalid), DegenerateDistributionError);
}

TEST_CASE("pfi anchors") {
    CHECK(metrics::pfi(dist_of(std::vector<double>(100, 0.01)), 10) == doctest::Approx(0.10));
    auto point = std::vector<double>(100, 0.0);
    point[0] = 1.0;
    CHECK(metrics::pfi(dist_of(point), 10) == doctest::Approx(1.0));
    CHECK(metrics::pfi(dist_of({0.7, 0.1, 0.1, 0.1}), 1) == doctest::Approx(0.7));
    CHECK_THROWS_AS(metrics::pfi(dist_of({0.5, 0.5}), 3), ShapeError);
}

TEST_CASE("excess primacy is exactly zero when response equals gold") {
    const auto d = dist_of({0.25, 0.5, 0.125, 0.125});
    CHECK(metrics::excess_primacy(d, d, 2) == 0.0);
    CHECK(metrics::excess_primacy(d, d, 4) == 0.0);

    auto resp = std::vector<double>(100, 0.18 / 90);
    for (int i = 0; i < 10; ++i) resp[static_cast<std::size_t>(i)] = 0.082;
    const auto gold = dist_of(std::vector<double>(100, 0.01));
    CHECK(metrics::excess_primacy(dist_of(resp), gold, 10) == doctest::Approx(0.72));

    CHECK_THROWS_AS(metrics::excess_primacy(dist_of({0.5, 0.5}), dist_of({1.0, 0, 0}), 1),
                    ShapeError);
}

TEST_CASE("normalized entropy anchors and bounds") {
    CHECK(metrics::normalized_entropy(dist_of(std::vector<double>(17, 1.0 / 17))) ==
          doctest::Approx(1.0));
    auto point = std::vector<double>(9, 0.0);
    point[4] = 1.0;
    CHECK(metrics::normalized_entropy(dist_of(point)) == doctest::Approx(0.0));
    CHECK(metrics::normalized_entropy(dist_of({0.5, 0.5, 0.0, 0.0})) == doctest::Approx(0.5));

    std::mt19937 gen(7);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> mass(20);
        double total = 0;
        for (double& m : mass) total += (m = static_cast<double>(gen() % 1000) + 1);
        for (double& m : mass) m /= total;
        const double h = metrics::normalized_entropy(dist_of(mass));
        CHECK(h >= 0.0);
        CHECK(h <= 1.0 + 1e-12);
    }
}

TEST_CASE("front/tail/mean anchors") {
    const auto uniform = dist_of(std::vector<double>(100, 0.01));
    const auto ftm = metrics::front_tail_mean(uniform, 20);
    CHECK(ftm.front == doctest::Approx(0.20));
    CHECK(ftm.tail == doctest::Approx(0.20));
    CHECK(ftm.mean_pos == doctest::Approx(50.5));

    auto point = std::vector<double>(100, 0.0);
    point[0] = 1.0;
    const auto pointy = metrics::front_tail_mean(dist_of(point), 20);
    CHECK(pointy.front == doctest::Approx(1.0));
    CHECK(pointy.tail == doctest::Approx(0.0));
    CHECK(pointy.mean_pos == doctest::Approx(1.0));
    CHECK(pointy.front + pointy.tail <= 1.0 + 1e-12);

    CHECK_THROWS_AS(metrics::front_tail_mean(dist_of({0.5, 0.5}), 20), ShapeError);
}

TEST_CASE("ks distance anchors, symmetry, and brute-force agreement") {
    const auto d = dist_of({0.2, 0.3, 0.5});
    CHECK(metrics::ks_distance(d, d) == 0.0);

    auto point = std::vector<double>(100, 0.0);
    point[0] = 1.0;
    const auto uniform = dist_of(std::vector<double>(100, 0.01));
    CHECK(metrics::ks_distance(dist_of(point), uniform) == doctest::Approx(0.99));

    std::mt19937 gen(9);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 2 + static_cast<int>(gen() % 50);
        std::vector<double> a(static_cast<std::size_t>(n)), b(a);
        double ta = 0, tb = 0;
        for (int i = 0; i < n; ++i) {
            ta += (a[static_cast<std::size_t>(i)] = static_cast<double>(gen() % 100) + 1);
            tb += (b[static_cast<std::size_t>(i)] = static_cast<double>(gen() % 100) + 1);
        }
        for (int i = 0; i < n; ++i) {
            a[static_cast<std::size_t>(i)] /= ta;
            b[static_cast<std::size_t>(i)] /= tb;
        }
        // independent long-double oracle over all prefix sums
        long double ca = 0, cb = 0, best = 0;
        for (int i = 0; i < n; ++i) {
            ca += a[static_cast<std::size_t>(i)];
            cb += b[static_cast<std::size_t>(i)];
            best = std::max(best, ca > cb ? ca - cb : cb - ca);
        }
        const double got = metrics::ks_distance(dist_of(a), dist_of(b));
        CHECK(got == doctest::Approx(static_cast<double>(best)).epsilon(1e-12));
        CHECK(got == metrics::ks_distance(dist_of(b), dist_of(a)));
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
    }
}

TEST_CASE("bins partition 1..N into near-equal contiguous ranges") {
    for (int n : {4, 10, 17, 100}) {
        for (int b : {2, 3, 4, 10}) {
            if (b > n) continue;
            const auto bins = metrics::make_bins(n, b);
            REQUIRE(static_cast<int>(bins.size()) == b);
            CHECK(bins.front().lo == 1);
            CHECK(bins.back().hi == n);
            int min_size = n, max_size = 0;
            for (std::size_t i = 0; i < bins.size(); ++i) {
                const int size = bins[i].hi - bins[i].lo + 1;
                min_size = std::min(min_size, size);
                max_size = std::max(max_size, size);
                if (i > 0) CHECK(bins[i].lo == bins[i - 1].hi + 1);
                for (int pos = bins[i].lo; pos <= bins[i].hi; ++pos) {
                    CHECK(metrics::bin_of_position(pos, n, b) == bins[i].bin);
                }
            }
            CHECK(max_size - min_size <= 1);
        }
    }
}

TEST_CASE("slope anchors") {
    SUBCASE("constant accuracy gives exactly zero slope") {
        std::vector<TrialRecord> records;
        for (int k = 0; k < 400; ++k) {
            const int g = 1 + k % 100;
            records.push_back(rec("a", 100, k, g, g));  // always correct
        }
        const auto fit = metrics::binned_accuracy_slope(records, 10);
        CHECK(fit.slope == 0.0);
        CHECK(fit.intercept == doctest::Approx(1.0));
    }
    SUBCASE("step pattern reproduces the closed-form OLS slope") {
        // accuracy 1 in bins 1-5, 0 in bins 6-10, equal counts:
        // slope = -12.5 / 82.5
        std::vector<TrialRecord> records;
        int k = 0;
        for (int g = 1; g <= 100; ++g) {
            for (int repeat = 0; repeat < 3; ++repeat) {
                const bool hit = g <= 50;
                records.push_back(rec("a", 100, k++, g, hit ? g : (g == 1 ? 2 : 1)));
            }
        }
        const auto fit = metrics::binned_accuracy_slope(records, 10);
        CHECK(fit.slope == doctest::Approx(-12.5 / 82.5).epsilon(1e-12));
        CHECK(fit.nonempty_bins == 10);
    }
    SUBCASE("slope is invariant to uniform weight scaling") {
        std::vector<TrialRecord> base, scaled;
        int k1 = 0, k2 = 0;
        std::mt19937 gen(13);
        for (int g = 1; g <= 20; ++g) {
            const bool hit = gen() % 2 == 0;
            base.push_back(rec("a", 20, k1++, g, hit ? g : (g == 1 ? 2 : 1)));
            for (int c = 0; c < 5; ++c) {
                scaled.push_back(rec("a", 20, k2++, g, hit ? g : (g == 1 ? 2 : 1)));
            }
        }
        const auto f1 = metrics::binned_accuracy_slope(base, 5);
        const auto f2 = metrics::binned_accuracy_slope(scaled, 5);
        CHECK(f1.slope == doctest::Approx(f2.slope).epsilon(1e-12));
        CHECK(f1.intercept == doctest::Approx(f2.intercept).epsilon(1e-12));
    }
    SUBCASE("weighted fit matches a long-double normal-equation oracle") {
        std::mt19937 gen(21);
        for (int rep = 0; rep < 25; ++rep) {
            std::vector<TrialRecord> records;
            int k = 0;
            for (int g = 1; g <= 50; ++g) {
                const int copies = 1 + static_cast<int>(gen() % 7);
                for (int c = 0; c < copies; ++c) {
                    const bool hit = gen() % 3 != 0;
                    records.push_back(rec("a", 50, k++, g, hit ? g : (g == 1 ? 2 : 1)));
                }
            }
            const int b = 5;
            const auto fit = metrics::binned_accuracy_slope(records, b);

            // oracle: accumulate the normal equations directly
            std::vector<long double> w(b, 0), y(b, 0);
            for (const auto& r : records) {
                const int bin = metrics::bin_of_position(r.gold_position, 50, b);
                w[static_cast<std::size_t>(bin - 1)] += 1;
                y[static_cast<std::size_t>(bin - 1)] += r.correct;
            }
            long double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (int i = 0; i < b; ++i) {
                if (w[static_cast<std::size_t>(i)] == 0) continue;
                const long double wi = w[static_cast<std::size_t>(i)];
                const long double xi = i + 1;
                const long double yi = y[static_cast<std::size_t>(i)] / wi;
                sw += wi, sx += wi * xi, sy += wi * yi;
                sxx += wi * xi * xi, sxy += wi * xi * yi;
            }
            const long double slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
            CHECK(fit.slope == doctest::Approx(static_cast<double>(slope)).epsilon(1e-9));
        }
    }
    SUBCASE("fewer than two nonempty bins is a fit error") {
        std::vector<TrialRecord> records;
        for (int k = 0; k < 10; ++k) records.push_back(rec("a", 100, k, 3, 3));
        CHECK_THROWS_AS(metrics::binned_accuracy_slope(records, 10), FitError);
    }
}

TEST_CASE("trial-level Wald interval anchors") {
    const auto ci = metrics::trial_ci(5000, 10000, 0.95);
    CHECK((ci.hi - ci.lo) / 2 == doctest::Approx(0.0098).epsilon(1e-3));
    CHECK(ci.lo == doctest::Approx(0.5 - 0.0098).epsilon(1e-3));
    CHECK_FALSE(ci.degenerate);

    const auto zero = metrics::trial_ci(0, 100, 0.95);
    CHECK(zero.degenerate);
    CHECK(zero.lo == zero.hi);
    const auto one = metrics::trial_ci(100, 100, 0.95);
    CHECK(one.degenerate);
    CHECK(one.hi == doctest::Approx(1.0));

    CHECK_THROWS_AS(metrics::trial_ci(0, 0, 0.95), AggregationError);
    CHECK(metrics::normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-9));
}

TEST_CASE("target-level Student-t interval anchors") {
    SUBCASE("equal means collapse to a zero-width interval") {
        const auto ci = metrics::target_ci({0.8, 0.8, 0.8, 0.8}, 0.95);
        CHECK(ci.lo == doctest::Approx(0.8));
        CHECK(ci.hi == doctest::Approx(0.8));
        CHECK(ci.degenerate);
    }
    SUBCASE("two targets reproduce the hand-computed t interval") {
        // s = sqrt(0.02), half-width = t_{.975,1} * s / sqrt(2) = 12.7062 * 0.1
        const auto ci = metrics::target_ci({0.4, 0.6}, 0.95);
        CHECK((ci.hi - ci.lo) / 2 == doctest::Approx(1.2706).epsilon(1e-4));
        CHECK((ci.hi + ci.lo) / 2 == doctest::Approx(0.5));
    }
    SUBCASE("near-ceiling target means push the upper bound above 1") {
        std::vector<double> means(30, 1.0);
        means[7] = 0.99;
        const auto ci = metrics::target_ci(means, 0.95);
        CHECK(ci.hi > 1.0);  // not clipped
        CHECK(ci.lo < 1.0);
    }
    SUBCASE("fewer than two targets raises") {
        CHECK_THROWS_AS(metrics::target_ci({0.5}, 0.95), SampleSizeError);
    }
    CHECK(metrics::student_t_quantile(0.975, 1) == doctest::Approx(12.7062047).epsilon(1e-7));
    CHECK(metrics::student_t_quantile(0.975, 29) == doctest::Approx(2.0452296).epsilon(1e-7));
}

TEST_CASE("padding spread anchors and fixture ingestion") {
    CHECK(metrics::padding_spread({0.1, 0.1, 0.1}) == doctest::Approx(0.0));
    CHECK(metrics::padding_spread({0.01, -0.03, -0.48, 0.00}) == doctest::Approx(0.49));
    CHECK_THROWS_AS(metrics::padding_spread({}), AggregationError);

    const auto fixture = nlohmann::json::parse(
        testutil::slurp(testutil::fixture("reference/published_metrics.json")));
    std::vector<double> deltas;
    for (const auto& [key, v] : fixture.at("padding_deltas_hyperclovax_easy_n100").items()) {
        deltas.push_back(v.get<double>());
    }
    REQUIRE(deltas.size() == 8);
    CHECK(metrics::padding_spread(deltas) == doctest::Approx(0.473).epsilon(1e-9));
}

TEST_CASE("policy reference fixture is internally consistent") {
    const auto fixture = nlohmann::json::parse(
        testutil::slurp(testutil::fixture("reference/published_metrics.json")));
    bool found = false;
    for (const auto& row : fixture.at("policy_full_n100")) {
        const double front = row.at("front_20").get<double>();
        const double tail = row.at("tail_20").get<double>();
        CHECK(front + tail <= 1.0 + 1e-9);
        CHECK(row.at("delta_pfi_10").get<double>() <= 1.0);
        CHECK(row.at("entropy").get<double>() <= 1.0);
        if (row.at("model") == "HyperCLOVAX-Think") {
            found = true;
            CHECK(row.at("delta_pfi_10").get<double>() == doctest::Approx(0.526));
            CHECK(front == doctest::Approx(0.71));
            CHECK(tail == doctest::Approx(0.02));
        }
    }
    CHECK(found);
}

TEST_CASE("bootstrap bubble interval is deterministic and brackets the point value") {
    std::map<std::string, double> low, high;
    std::mt19937 gen(31);
    for (int t = 0; t < 30; ++t) {
        const std::string id = "t" + std::to_string(t);
        low[id] = 0.85 + 0.005 * static_cast<double>(gen() % 20);
        high[id] = 0.2 + 0.01 * static_cast<double>(gen() % 30);
    }
    MetricsConfig config;
    const auto ci1 = metrics::bootstrap_bubble_ci(low, high, 4, 100, config);
    const auto ci2 = metrics::bootstrap_bubble_ci(low, high, 4, 100, config);
    CHECK(ci1.lo == ci2.lo);
    CHECK(ci1.hi == ci2.hi);
    CHECK(ci1.lo < ci1.hi);

    double mean_low = 0, mean_high = 0;
    for (const auto& [id, v] : low) mean_low += v;
    for (const auto& [id, v] : high) mean_high += v;
    const double bi = metrics::bubble_index(
        metrics::chance_normalized(mean_high / 30, 100),
        metrics::chance_normalized(mean_low / 30, 4), config.epsilon);
    CHECK(ci1.lo < bi);
    CHECK(ci1.hi > bi);
}

TEST_CASE("compute_cell assembles every diagnostic") {
    std::vector<TrialRecord> records;
    int k = 0;
    for (int t = 0; t < 3; ++t) {
        for (int g = 1; g <= 40; ++g) {
            const bool hit = g <= 20;
            auto r = rec("t" + std::to_string(t), 40, k++, g, hit ? g : 1);
            records.push_back(r);
        }
    }
    MetricsConfig config;
    config.front_tail_width = 20;
    const auto cell = metrics::compute_cell(records, config);
    CHECK(cell.option_count == 40);
    CHECK(cell.trial_count == 120);
    CHECK(cell.per_target.size() == 3);
    CHECK(cell.accuracy == doctest::Approx(0.5));
    CHECK(cell.invalid_rate == doctest::Approx(0.0));
    CHECK(cell.pfi.has_value());
    CHECK(cell.delta_pfi.has_value());
    CHECK(cell.entropy.has_value());
    CHECK(cell.front.has_value());  // 2*20 <= 40
    CHECK(cell.ks.has_value());
    CHECK(cell.slope.has_value());
    CHECK(cell.slope->slope < 0.0);
    CHECK(cell.accuracy_target_ci.has_value());
    CHECK(cell.k_pre_used == 10);

    // k_pre and front width adapt to small N
    std::vector<TrialRecord> small;
    for (int i = 0; i < 8; ++i) small.push_back(rec("a", 4, i, 1 + i % 4, 1 + i % 4));
    const auto small_cell = metrics::compute_cell(small, config);
    CHECK(small_cell.k_pre_used == 4);
    CHECK_FALSE(small_cell.front.has_value());
    CHECK(small_cell.mean_pos.has_value());
}
