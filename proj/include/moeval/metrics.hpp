#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moeval/distribution.hpp"
#include "moeval/record.hpp"

namespace moeval::metrics {

struct MetricsConfig {
    int k_pre = 10;               // prefix cutoff for PFI / excess primacy
    int bin_count = 10;           // gold-position bins for the slope fit
    double epsilon = 1e-6;        // Bubble Index stabilizer
    double ci_level = 0.95;
    int front_tail_width = 20;
    int bootstrap_samples = 1000;             // Bubble Index CI resamples
    std::uint64_t bootstrap_seed = 0x5EEDB007; // fixed so reports are reproducible

    void validate() const;
};

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool degenerate = false;  // zero-width boundary interval (p exactly 0 or 1)
};

// --- accuracy -------------------------------------------------------------

// Mean correctness over one target's trials.
double per_target_accuracy(const std::vector<int>& corrects);

// Unweighted mean across targets (not across pooled trials).
double overall_accuracy(const std::vector<double>& target_accuracies);

// NA = (A - 1/N) / (1 - 1/N); 0 at chance, 1 at perfect, negative below chance.
double chance_normalized(double accuracy, int option_count);

// BI = 1 - NA_100 / (NA_4 + eps).
double bubble_index(double na_high, double na_low, double epsilon);
// NA_4 <= 0 makes the ratio blow up; reports carry this flag instead of a value cap.
bool bubble_degenerate(double na_low);

// --- position distributions ------------------------------------------------

// Response-position distribution over valid outcomes only. Invalid outcomes
// stay out of the mass (they have no position) and are reported separately
// via invalid_rate.
PositionDistribution response_distribution(const std::vector<TrialRecord>& records);

double invalid_rate(const std::vector<TrialRecord>& records);

// Prefix mass sum_{i<=k_pre} P(i).
double pfi(const PositionDistribution& dist, int k_pre);

// Excess primacy: prefix mass of the responses minus the empirical
// gold-position baseline.
double excess_primacy(const PositionDistribution& response, const PositionDistribution& gold,
                      int k_pre);

// Shannon entropy normalized by log N; 1 for uniform, 0 for a point mass.
double normalized_entropy(const PositionDistribution& dist);

double mean_position(const PositionDistribution& dist);

struct FrontTailMean {
    double front = 0.0;
    double tail = 0.0;
    double mean_pos = 0.0;
};
// Mass in the first/last `width` options plus the mean position.
// Requires 2*width <= N.
FrontTailMean front_tail_mean(const PositionDistribution& dist, int width);

// Kolmogorov-Smirnov distance between the two position CDFs.
double ks_distance(const PositionDistribution& a, const PositionDistribution& b);

// --- gold-position slope ----------------------------------------------------

struct BinStat {
    int bin = 0;       // 1-based
    int lo = 0;        // first position in the bin
    int hi = 0;        // last position in the bin
    long count = 0;    // trials whose gold position fell in the bin
    double accuracy = 0.0;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<BinStat> bins;
    int nonempty_bins = 0;
};

// Contiguous near-equal bins over positions 1..N (sizes differ by at most 1;
// earlier bins take the remainder). Returned bin index of a position is 1-based.
std::vector<BinStat> make_bins(int option_count, int bin_count);
int bin_of_position(int position, int option_count, int bin_count);

// Accuracy per gold-position bin plus the count-weighted least-squares line
// A ~ alpha * b + beta. Empty bins are excluded from the fit.
SlopeFit binned_accuracy_slope(const std::vector<TrialRecord>& records, int bin_count);

// --- confidence intervals ---------------------------------------------------

// Two-sided normal-approximation (Wald) interval on pooled trial correctness.
// Symmetric and deliberately not clipped to [0,1].
ConfidenceInterval trial_ci(long successes, long total, double level);
ConfidenceInterval trial_ci(const std::vector<TrialRecord>& records, double level);

// Student-t interval across per-target means; also not clipped, so
// near-ceiling pools can produce bounds above 1.
ConfidenceInterval target_ci(const std::vector<double>& target_means, double level);

// Rescales an accuracy-scale interval to the chance-normalized scale.
ConfidenceInterval chance_normalized(const ConfidenceInterval& ci, int option_count);

// --- padding ----------------------------------------------------------------

// Range (max - min) of accuracy deltas across padding conditions.
double padding_spread(const std::vector<double>& deltas);

// --- per-cell report ----------------------------------------------------------

// All diagnostics for one (responder, environment, N, padding) cell.
// Distribution metrics are absent when every outcome in the cell is invalid;
// front/tail masses are absent when 2*front_tail_width > N.
struct CellMetrics {
    std::string responder_id;
    std::string environment;
    std::string padding_key;
    int option_count = 0;

    long trial_count = 0;
    long valid_count = 0;
    double invalid_rate = 0.0;

    std::map<std::string, double> per_target;  // target id -> A_t
    double accuracy = 0.0;                     // mean over targets
    double na = 0.0;

    ConfidenceInterval accuracy_trial_ci;
    ConfidenceInterval na_trial_ci;
    std::optional<ConfidenceInterval> accuracy_target_ci;
    std::optional<ConfidenceInterval> na_target_ci;

    std::optional<double> pfi;
    std::optional<double> delta_pfi;
    std::optional<double> entropy;
    std::optional<double> front;
    std::optional<double> tail;
    std::optional<double> mean_pos;
    std::optional<double> ks;
    std::optional<SlopeFit> slope;

    int k_pre_used = 0;
    int bin_count_used = 0;

    std::optional<PositionDistribution> response_dist;
    PositionDistribution gold_dist;
};

// Computes every diagnostic for one homogeneous record set. Records must all
// share (responder, env, padding, N) and be keyed uniquely.
CellMetrics compute_cell(const std::vector<TrialRecord>& records, const MetricsConfig& config);

// Nonparametric bootstrap over targets for the Bubble Index: resample target
// ids with replacement, recompute NA_low/NA_high/BI, take percentile bounds.
ConfidenceInterval bootstrap_bubble_ci(const std::map<std::string, double>& per_target_low_n,
                                       const std::map<std::string, double>& per_target_high_n,
                                       int low_n, int high_n, const MetricsConfig& config);

// Distribution quantiles used by the interval constructions.
double normal_quantile(double p);
double student_t_quantile(double p, int dof);

}  // namespace moeval::metrics
