#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace uemr::stats {

enum class ResampleUnit { Detection, Satellite };

struct RatioWithCI {
  double estimate = 0.0;
  double ci_low = 0.0;   // 2.5 percentile of the bootstrap distribution
  double ci_high = 0.0;  // 97.5 percentile
  int n_resamples = 0;   // requested B
  int n_excluded = 0;    // undefined/empty-stratum resamples, excluded
  ResampleUnit resample_unit = ResampleUnit::Detection;
  std::uint64_t seed = 0;
};

enum class MwuMethod { Exact, Normal };

struct MwuResult {
  double u_statistic = 0.0;  // half-credit for ties
  double p_two_sided = 1.0;
  MwuMethod method = MwuMethod::Exact;
  std::size_t n_x = 0;
  std::size_t n_y = 0;
  double cliffs_delta = 0.0;  // == 2U/(n_x n_y) - 1
};

enum class BaselineMode { Pooled, LeaveOneOut };

struct ChannelTestResult {
  double freq_mhz = 0.0;
  std::int64_t n_total = 0;
  std::int64_t n_xx = 0;
  double f_xx = 0.0;
  double deviation = 0.0;  // f_xx - baseline_used
  double p_two_sided = 1.0;
  double log10_p = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 1.0;
  bool bh_significant = false;
  double baseline_used = 0.0;
  BaselineMode baseline_mode = BaselineMode::Pooled;
};

// U statistic per the rank-sum definition with half-credit ties. Exact
// two-sided p when n_x, n_y <= 20 and the pooled sample is tie-free;
// otherwise the normal approximation with tie-corrected variance and
// continuity correction.
MwuResult mann_whitney(std::span<const double> x, std::span<const double> y);

// (#{x>y} - #{x<y}) / (n_x n_y). Direct pair count for small inputs, sorted
// counting for large ones; the two paths agree exactly.
double cliffs_delta(std::span<const double> x, std::span<const double> y);

// Ratio of medians with a percentile bootstrap CI; x and y are resampled
// independently with replacement. Deterministic in (x, y, B, seed).
// Resamples whose y-median is zero are excluded; more than 5% of them is an
// error.
RatioWithCI bootstrap_median_ratio(std::span<const double> x,
                                   std::span<const double> y, int n_resamples,
                                   std::uint64_t seed);

// One satellite's detections split by illumination state.
struct ClusterGroup {
  std::int64_t satellite_id = 0;
  std::vector<double> illuminated;
  std::vector<double> eclipsed;
};

// Satellite-level bootstrap of the pooled illuminated/eclipsed median ratio.
// Each resample draws satellites with replacement and concatenates their
// detections; resamples with an empty state stratum are excluded and counted.
RatioWithCI cluster_bootstrap_ratio(std::span<const ClusterGroup> groups,
                                    int n_resamples, std::uint64_t seed);

struct InteractionResult {
  double diff = 0.0;  // ratio_a - ratio_b on the original data
  double diff_low = 0.0, diff_high = 0.0;
  double ratio_of_ratios = 0.0;
  double rr_low = 0.0, rr_high = 0.0;
  double p_two_sided = 1.0;  // 2*min(Pr[diff>=0], Pr[diff<=0]), floored at 1/B
  int n_resamples = 0;
  int n_excluded = 0;
  std::uint64_t seed = 0;
};

// Joint cluster bootstrap: per iteration the two satellite samples are drawn
// independently and the difference / ratio of the pooled state ratios is
// recorded.
InteractionResult interaction_test(std::span<const ClusterGroup> groups_a,
                                   std::span<const ClusterGroup> groups_b,
                                   int n_resamples, std::uint64_t seed);

enum class BinomConvention { MinLikelihood, DoubledTail };

struct BinomTail {
  double p = 1.0;        // clamped to (0, 1]
  double log10_p = 0.0;  // meaningful far below double range
};

// Exact two-sided binomial test, summed in log space so tails down to
// 1e-300 and beyond stay representable. DoubledTail (the default) doubles the
// smaller of the two tails including k; MinLikelihood sums pmf(k') over all
// k' with pmf(k') <= pmf(k). Both are symmetric under
// (k, p0) -> (n-k, 1-p0). The convention is a config choice, never switched
// silently.
BinomTail binom_two_sided(std::int64_t k, std::int64_t n, double p0,
                          BinomConvention convention = BinomConvention::DoubledTail);

// Benjamini-Hochberg step-up at level q; returns one flag per input p-value.
std::vector<bool> bh_fdr(std::span<const double> p_values, double q);

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

Interval wilson_interval(std::int64_t k, std::int64_t n, double z = 1.96);

// --- shared numeric helpers ---

// median with the even-count midpoint rule; sorts its argument
double median_inplace(std::vector<double>& v);
double median_of(std::span<const double> v);

// linear interpolation between order statistics (type 7); input must be sorted
double quantile_sorted(std::span<const double> sorted, double q);

struct KsResult {
  double d = 0.0;
  double p = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

double normal_two_sided_p(double z);

// Student-t quantile via the regularised incomplete beta (bisection).
double student_t_quantile(double cumulative_prob, int dof);

}  // namespace uemr::stats
