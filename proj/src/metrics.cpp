#include "moeval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "moeval/errors.hpp"
#include "moeval/rng.hpp"

namespace moeval::metrics {

void MetricsConfig::validate() const {
    if (k_pre < 1) throw ConfigError("k_pre must be >= 1");
    if (bin_count < 2) throw ConfigError("bin_count must be >= 2");
    if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
    if (ci_level <= 0.0 || ci_level >= 1.0) throw ConfigError("ci_level must be in (0,1)");
    if (front_tail_width < 1) throw ConfigError("front_tail_width must be >= 1");
    if (bootstrap_samples < 1) throw ConfigError("bootstrap_samples must be >= 1");
}

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double student_t_quantile(double p, int dof) {
    return boost::math::quantile(
        boost::math::students_t_distribution<double>(static_cast<double>(dof)), p);
}

double per_target_accuracy(const std::vector<int>& corrects) {
    if (corrects.empty()) throw AggregationError("per-target accuracy over zero trials");
    long sum = 0;
    for (int c : corrects) sum += c;
    return static_cast<double>(sum) / static_cast<double>(corrects.size());
}

double overall_accuracy(const std::vector<double>& target_accuracies) {
    if (target_accuracies.empty()) throw AggregationError("overall accuracy over zero targets");
    double sum = 0.0;
    for (double a : target_accuracies) sum += a;
    return sum / static_cast<double>(target_accuracies.size());
}

double chance_normalized(double accuracy, int option_count) {
    if (option_count < 2) throw ShapeError("chance normalization needs N >= 2");
    const double chance = 1.0 / static_cast<double>(option_count);
    return (accuracy - chance) / (1.0 - chance);
}

double bubble_index(double na_high, double na_low, double epsilon) {
    return 1.0 - na_high / (na_low + epsilon);
}

bool bubble_degenerate(double na_low) { return na_low <= 0.0; }

PositionDistribution response_distribution(const std::vector<TrialRecord>& records) {
    if (records.empty()) throw AggregationError("response distribution over zero records");
    const int n = records.front().option_count;
    PositionDistribution dist;
    dist.option_count = n;
    dist.side = DistributionSide::kResponse;
    dist.mass.assign(static_cast<std::size_t>(n), 0.0);
    long valid = 0;
    for (const auto& r : records) {
        if (r.option_count != n) throw ShapeError("record set mixes option counts");
        if (!r.valid) continue;
        const int pos = r.response_position.value_or(0);
        if (pos < 1 || pos > n) throw ShapeError("valid response position outside 1..N");
        dist.mass[static_cast<std::size_t>(pos - 1)] += 1.0;
        ++valid;
    }
    if (valid == 0) {
        throw DegenerateDistributionError("all outcomes invalid; no response distribution");
    }
    for (double& m : dist.mass) m /= static_cast<double>(valid);
    return dist;
}

double invalid_rate(const std::vector<TrialRecord>& records) {
    if (records.empty()) throw AggregationError("invalid rate over zero records");
    long invalid = 0;
    for (const auto& r : records) invalid += r.valid ? 0 : 1;
    return static_cast<double>(invalid) / static_cast<double>(records.size());
}

double pfi(const PositionDistribution& dist, int k_pre) {
    if (k_pre < 1 || k_pre > dist.option_count) {
        throw ShapeError("k_pre outside 1..N");
    }
    double sum = 0.0;
    for (int i = 0; i < k_pre; ++i) sum += dist.mass[static_cast<std::size_t>(i)];
    return sum;
}

double excess_primacy(const PositionDistribution& response, const PositionDistribution& gold,
                      int k_pre) {
    if (response.option_count != gold.option_count) {
        throw ShapeError("response/gold distributions disagree on N");
    }
    if (k_pre < 1 || k_pre > response.option_count) throw ShapeError("k_pre outside 1..N");
    double sum = 0.0;
    for (int i = 0; i < k_pre; ++i) {
        sum += response.mass[static_cast<std::size_t>(i)] - gold.mass[static_cast<std::size_t>(i)];
    }
    return sum;
}

double normalized_entropy(const PositionDistribution& dist) {
    if (dist.option_count < 2) throw ShapeError("entropy needs N >= 2");
    double h = 0.0;
    for (double p : dist.mass) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h / std::log(static_cast<double>(dist.option_count));
}

double mean_position(const PositionDistribution& dist) {
    double sum = 0.0;
    for (int i = 0; i < dist.option_count; ++i) {
        sum += static_cast<double>(i + 1) * dist.mass[static_cast<std::size_t>(i)];
    }
    return sum;
}

FrontTailMean front_tail_mean(const PositionDistribution& dist, int width) {
    if (width < 1 || 2 * width > dist.option_count) {
        throw ShapeError("front/tail width must satisfy 2*width <= N");
    }
    FrontTailMean out;
    for (int i = 0; i < width; ++i) {
        out.front += dist.mass[static_cast<std::size_t>(i)];
        out.tail += dist.mass[static_cast<std::size_t>(dist.option_count - 1 - i)];
    }
    out.mean_pos = mean_position(dist);
    return out;
}

double ks_distance(const PositionDistribution& a, const PositionDistribution& b) {
    if (a.option_count != b.option_count) throw ShapeError("KS distance needs matching N");
    double cdf_a = 0.0, cdf_b = 0.0, best = 0.0;
    for (int i = 0; i < a.option_count; ++i) {
        cdf_a += a.mass[static_cast<std::size_t>(i)];
        cdf_b += b.mass[static_cast<std::size_t>(i)];
        best = std::max(best, std::abs(cdf_a - cdf_b));
    }
    return best;
}

std::vector<BinStat> make_bins(int option_count, int bin_count) {
    if (bin_count < 2 || bin_count > option_count) {
        throw ShapeError("bin count must be in 2..N");
    }
    std::vector<BinStat> bins;
    bins.reserve(static_cast<std::size_t>(bin_count));
    const int base = option_count / bin_count;
    const int remainder = option_count % bin_count;
    int next = 1;
    for (int b = 1; b <= bin_count; ++b) {
        BinStat stat;
        stat.bin = b;
        stat.lo = next;
        stat.hi = next + base - 1 + (b <= remainder ? 1 : 0);
        next = stat.hi + 1;
        bins.push_back(stat);
    }
    return bins;
}

int bin_of_position(int position, int option_count, int bin_count) {
    const int base = option_count / bin_count;
    const int remainder = option_count % bin_count;
    const int fat = remainder * (base + 1);  // positions covered by the wider bins
    if (position <= fat) return 1 + (position - 1) / (base + 1);
    return 1 + remainder + (position - fat - 1) / base;
}

SlopeFit binned_accuracy_slope(const std::vector<TrialRecord>& records, int bin_count) {
    if (records.empty()) throw AggregationError("slope fit over zero records");
    const int n = records.front().option_count;

    SlopeFit fit;
    fit.bins = make_bins(n, bin_count);
    std::vector<long> correct(fit.bins.size(), 0);
    for (const auto& r : records) {
        if (r.option_count != n) throw ShapeError("record set mixes option counts");
        const int b = bin_of_position(r.gold_position, n, bin_count);
        auto& stat = fit.bins[static_cast<std::size_t>(b - 1)];
        stat.count += 1;
        correct[static_cast<std::size_t>(b - 1)] += r.correct;
    }
    for (std::size_t i = 0; i < fit.bins.size(); ++i) {
        if (fit.bins[i].count > 0) {
            fit.bins[i].accuracy =
                static_cast<double>(correct[i]) / static_cast<double>(fit.bins[i].count);
            ++fit.nonempty_bins;
        }
    }
    if (fit.nonempty_bins < 2) {
        throw FitError("slope fit needs at least 2 nonempty bins, got " +
                       std::to_string(fit.nonempty_bins));
    }

    // Weighted least squares on (b, A_b) with weights = bin counts.
    double wsum = 0.0, xbar = 0.0, ybar = 0.0;
    for (const auto& s : fit.bins) {
        if (s.count == 0) continue;
        const double w = static_cast<double>(s.count);
        wsum += w;
        xbar += w * static_cast<double>(s.bin);
        ybar += w * s.accuracy;
    }
    xbar /= wsum;
    ybar /= wsum;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& s : fit.bins) {
        if (s.count == 0) continue;
        const double w = static_cast<double>(s.count);
        const double dx = static_cast<double>(s.bin) - xbar;
        sxx += w * dx * dx;
        sxy += w * dx * (s.accuracy - ybar);
    }
    if (sxx == 0.0) throw FitError("degenerate slope fit: all mass in one bin index");
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    return fit;
}

ConfidenceInterval trial_ci(long successes, long total, double level) {
    if (total < 1) throw AggregationError("trial CI over zero trials");
    const double p = static_cast<double>(successes) / static_cast<double>(total);
    const double z = normal_quantile(0.5 + level / 2.0);
    const double half = z * std::sqrt(p * (1.0 - p) / static_cast<double>(total));
    ConfidenceInterval ci{p - half, p + half, false};
    ci.degenerate = successes == 0 || successes == total;
    return ci;
}

ConfidenceInterval trial_ci(const std::vector<TrialRecord>& records, double level) {
    long successes = 0;
    for (const auto& r : records) successes += r.correct;
    return trial_ci(successes, static_cast<long>(records.size()), level);
}

ConfidenceInterval target_ci(const std::vector<double>& target_means, double level) {
    const std::size_t n = target_means.size();
    if (n < 2) throw SampleSizeError("target CI needs at least 2 targets");
    double mean = 0.0;
    for (double v : target_means) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : target_means) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const double t = student_t_quantile(0.5 + level / 2.0, static_cast<int>(n - 1));
    const double half = t * sd / std::sqrt(static_cast<double>(n));
    ConfidenceInterval ci{mean - half, mean + half, false};
    ci.degenerate = sd == 0.0;
    return ci;
}

ConfidenceInterval chance_normalized(const ConfidenceInterval& ci, int option_count) {
    ConfidenceInterval out;
    out.lo = chance_normalized(ci.lo, option_count);
    out.hi = chance_normalized(ci.hi, option_count);
    out.degenerate = ci.degenerate;
    return out;
}

double padding_spread(const std::vector<double>& deltas) {
    if (deltas.empty()) throw AggregationError("padding spread over zero conditions");
    const auto [lo, hi] = std::minmax_element(deltas.begin(), deltas.end());
    return *hi - *lo;
}

CellMetrics compute_cell(const std::vector<TrialRecord>& records, const MetricsConfig& config) {
    config.validate();
    if (records.empty()) throw AggregationError("cell with zero records");

    CellMetrics cell;
    const auto& head = records.front();
    cell.responder_id = head.responder_id;
    cell.environment = head.environment;
    cell.padding_key = head.padding_key;
    cell.option_count = head.option_count;
    cell.trial_count = static_cast<long>(records.size());

    std::map<std::string, std::vector<int>> by_target;
    long valid = 0;
    for (const auto& r : records) {
        if (r.responder_id != cell.responder_id || r.environment != cell.environment ||
            r.padding_key != cell.padding_key || r.option_count != cell.option_count) {
            throw ShapeError("cell records are not homogeneous");
        }
        by_target[r.target_id].push_back(r.correct);
        valid += r.valid ? 1 : 0;
    }
    cell.valid_count = valid;
    cell.invalid_rate =
        static_cast<double>(cell.trial_count - valid) / static_cast<double>(cell.trial_count);

    std::vector<double> target_means;
    target_means.reserve(by_target.size());
    for (const auto& [target, corrects] : by_target) {
        const double a = per_target_accuracy(corrects);
        cell.per_target[target] = a;
        target_means.push_back(a);
    }
    cell.accuracy = overall_accuracy(target_means);
    cell.na = chance_normalized(cell.accuracy, cell.option_count);

    cell.accuracy_trial_ci = trial_ci(records, config.ci_level);
    cell.na_trial_ci = chance_normalized(cell.accuracy_trial_ci, cell.option_count);
    if (target_means.size() >= 2) {
        cell.accuracy_target_ci = target_ci(target_means, config.ci_level);
        cell.na_target_ci = chance_normalized(*cell.accuracy_target_ci, cell.option_count);
    }

    cell.gold_dist = [&] {
        std::vector<int> golds;
        golds.reserve(records.size());
        for (const auto& r : records) golds.push_back(r.gold_position);
        PositionDistribution dist;
        dist.option_count = cell.option_count;
        dist.side = DistributionSide::kGold;
        dist.mass.assign(static_cast<std::size_t>(cell.option_count), 0.0);
        for (int g : golds) dist.mass[static_cast<std::size_t>(g - 1)] += 1.0;
        for (double& m : dist.mass) m /= static_cast<double>(golds.size());
        return dist;
    }();

    cell.k_pre_used = std::min(config.k_pre, cell.option_count);
    if (valid > 0) {
        const PositionDistribution resp = response_distribution(records);
        cell.pfi = pfi(resp, cell.k_pre_used);
        cell.delta_pfi = excess_primacy(resp, cell.gold_dist, cell.k_pre_used);
        cell.entropy = normalized_entropy(resp);
        cell.mean_pos = mean_position(resp);
        if (2 * config.front_tail_width <= cell.option_count) {
            const FrontTailMean ftm = front_tail_mean(resp, config.front_tail_width);
            cell.front = ftm.front;
            cell.tail = ftm.tail;
        }
        cell.ks = ks_distance(resp, cell.gold_dist);
        cell.response_dist = resp;
    }

    cell.bin_count_used = std::min(config.bin_count, cell.option_count);
    try {
        cell.slope = binned_accuracy_slope(records, cell.bin_count_used);
    } catch (const FitError&) {
        // fewer than 2 nonempty bins; slope stays absent
    }
    return cell;
}

ConfidenceInterval bootstrap_bubble_ci(const std::map<std::string, double>& per_target_low_n,
                                       const std::map<std::string, double>& per_target_high_n,
                                       int low_n, int high_n, const MetricsConfig& config) {
    std::vector<std::pair<double, double>> paired;  // (A_t at low N, A_t at high N)
    for (const auto& [target, a_low] : per_target_low_n) {
        const auto it = per_target_high_n.find(target);
        if (it != per_target_high_n.end()) paired.emplace_back(a_low, it->second);
    }
    if (paired.size() < 2) {
        throw SampleSizeError("bubble bootstrap needs >= 2 targets present at both N");
    }

    rng::SplitMix64 gen(config.bootstrap_seed);
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(config.bootstrap_samples));
    const std::size_t t = paired.size();
    for (int s = 0; s < config.bootstrap_samples; ++s) {
        double sum_low = 0.0, sum_high = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            const auto& pick = paired[static_cast<std::size_t>(rng::bounded(gen, t))];
            sum_low += pick.first;
            sum_high += pick.second;
        }
        const double na_low = chance_normalized(sum_low / static_cast<double>(t), low_n);
        const double na_high = chance_normalized(sum_high / static_cast<double>(t), high_n);
        stats.push_back(bubble_index(na_high, na_low, config.epsilon));
    }
    std::sort(stats.begin(), stats.end());

    const auto percentile = [&](double q) {
        const double idx = q * static_cast<double>(stats.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(lo + 1, stats.size() - 1);
        const double frac = idx - static_cast<double>(lo);
        return stats[lo] * (1.0 - frac) + stats[hi] * frac;
    };
    const double alpha = 1.0 - config.ci_level;
    return {percentile(alpha / 2.0), percentile(1.0 - alpha / 2.0), false};
}

}  // namespace moeval::metrics
