#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uemr/catalogue.hpp"
#include "uemr/config.hpp"
#include "uemr/stats.hpp"

namespace uemr::analysis {

struct AnalysisConfig {
  int n_resamples = 2000;
  double q = 0.05;   // BH false discovery rate
  double z = 1.96;   // Wilson interval
  std::uint64_t master_seed = 20240615;
  double r_ref_km = 1000.0;

  double target_freq_mhz = 230.46875;
  int target_fine_index = 22;

  double t1_target_mhz = 230.627441;
  double t1_tol_khz = 12.207;
  std::vector<double> t1_fundamentals_khz{27.5, 36.66, 55.0,  110.0, 220.0,
                                          37.5, 50.0,  75.0,  150.0, 50.0,
                                          150.0, 48.8, 65.0,  97.5};
  std::vector<double> t1_crystals_khz{10000.0, 13000.0, 16000.0, 20000.0, 25000.0,
                                      27000.0, 100000.0, 12288.0, 32.768};

  double bright_quantile = 0.95;
  int t3_min_detections = 5;
  int per_satellite_min_per_state = 5;

  int matched_launch_start_ymd = 20240103;
  int matched_launch_end_ymd = 20241018;

  std::vector<double> control_freqs_mhz{150.78, 153.12, 161.72, 170.31, 200.0};
  double bonferroni_alpha = 0.05;

  double altitude_bin_km = 56.0;
  double altitude_origin_km = 300.0;
  int latitude_bins = 5;
  int min_per_state_per_freq = 30;
  int min_per_state_per_stratum = 5;
  double pass_gap_seconds = 60.0;

  FluxBasis fine_basis = FluxBasis::RangeCorrected;
  stats::BinomConvention binom_convention = stats::BinomConvention::DoubledTail;

  std::int64_t dynspec_norad = 0;  // 0 = brightest satellite at the target channel

  static AnalysisConfig from_config(const Config& cfg);
};

// --- per-satellite excess -------------------------------------------------

enum class Reduction { RawPerDet, NormPerDet, RawPerSat, NormPerSat };
const char* to_string(Reduction r);

struct ReductionResult {
  Reduction reduction = Reduction::NormPerSat;
  stats::RatioWithCI ratio;  // DTC over Ku-only
  stats::MwuResult mwu;
};

struct PerChannelExcess {
  double freq_mhz = 0.0;
  std::int64_t n_dtc = 0;
  std::int64_t n_ku = 0;
  double ratio = 0.0;  // range-corrected median ratio within the channel
  double ks_p = 1.0;
  double mwu_p = 1.0;
  double cliffs_delta = 0.0;
};

struct PopulationCount {
  std::string label;
  std::int64_t satellites = 0;
  std::int64_t stacked_detections = 0;
};

struct ExcessReport {
  std::vector<ReductionResult> reductions;  // all four; NormPerSat is the headline
  std::vector<PerChannelExcess> per_channel;  // channels with n_dtc >= 20
  std::vector<PopulationCount> populations;   // all four labels, for the summary
};

ExcessReport dtc_excess(const Catalogue& catalogue, const AnalysisConfig& cfg);

// --- polarisation ----------------------------------------------------------

struct PolarisationReport {
  stats::BaselineMode baseline_mode = stats::BaselineMode::Pooled;
  double pooled_baseline = 0.0;  // XX fraction of the analysed sample
  std::vector<stats::ChannelTestResult> channels;
  int n_flagged = 0;
};

PolarisationReport polarisation_anomaly(const Catalogue& catalogue,
                                        const AnalysisConfig& cfg,
                                        stats::BaselineMode mode);

// --- fine-channel isolation -------------------------------------------------

struct FineBinRow {
  int index = 0;
  std::int64_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  double xx_fraction = 0.0;  // descriptive only: one feed label spans all 31 rows
};

struct FineChannelReport {
  double coarse_freq_mhz = 0.0;
  int target_index = 0;
  std::vector<FineBinRow> per_bin;  // 31 rows
  double z_target = 0.0;
  double inter_bin_mu = 0.0;     // mean of the 30 non-target bin means
  double inter_bin_sigma = 0.0;  // their sample standard deviation
  double bonferroni_threshold = 0.0;
};

FineChannelReport fine_channel_scan(const Catalogue& catalogue,
                                    const AnalysisConfig& cfg, double coarse_freq_mhz,
                                    int target_index);

struct ControlChannelZ {
  double freq_mhz = 0.0;
  double z = 0.0;
};

std::vector<ControlChannelZ> cross_channel_control(
    const Catalogue& catalogue, const AnalysisConfig& cfg,
    std::span<const double> control_freqs_mhz, int target_index);

// --- mechanism-discrimination tests ------------------------------------------

struct T1Row {
  double fundamental_khz = 0.0;
  std::int64_t best_harmonic = 0;
  double predicted_mhz = 0.0;
  double residual_khz = 0.0;
  bool matched = false;
};

struct T1Result {
  std::vector<T1Row> rows;
  int observed_matches = 0;
  double expected_chance = 0.0;  // sum_i min(1, 2 tol / f0_i)
  double dedup_expected = 0.0;   // duplicates merged before the sum
  double target_mhz = 0.0;
  double tol_khz = 0.0;
};

T1Result t1_harmonic_coincidence(std::span<const double> fundamentals_khz,
                                 double target_mhz, double tol_khz);

struct T2Result {
  double p95_cut = 0.0;
  int n_bright = 0;
  double baseline_mu = 0.0;     // mean over the 28 bins excluding target+-1
  double baseline_sigma = 0.0;  // sample sd of those bin means
  double z_below = 0.0;         // target - 1
  double z_target = 0.0;
  double z_above = 0.0;         // target + 1
};

T2Result t2_adjacent_bin(const Catalogue& catalogue, const AnalysisConfig& cfg,
                         double coarse_freq_mhz, int target_index,
                         double bright_quantile);

struct T3Result {
  int n_satellites = 0;
  double median_r = 0.0;
  double mean_r = 0.0;
  double p95_r = 0.0;
  double max_r = 0.0;
  int n_over_2 = 0;
  double z_target_excluding = 0.0;  // fine-channel z after dropping R > 2 satellites
  double top_decile_mean = 0.0;
  double bottom_half_mean = 0.0;
  double frac_over_105 = 0.0;  // fraction with R > 1.05
  std::vector<std::pair<std::int64_t, double>> per_satellite;
};

T3Result t3_satellite_ratios(const Catalogue& catalogue, const AnalysisConfig& cfg,
                             double coarse_freq_mhz, int target_index,
                             int min_detections);

struct MechanismReport {
  T1Result t1;
  T1Result t1_crystal;
  T2Result t2;
  T3Result t3;
};

MechanismReport mechanism_tests(const Catalogue& catalogue, const AnalysisConfig& cfg);

// --- eclipse-state analysis ---------------------------------------------------

struct PopulationEclipse {
  std::string label;  // Pooled, DTC, KuOnly, MatchedKu
  std::int64_t n_illuminated = 0;
  std::int64_t n_eclipsed = 0;
  std::int64_t sats_illuminated = 0;
  std::int64_t sats_eclipsed = 0;
  // absent when a state stratum is empty (ratio undefined, reported as such)
  std::optional<stats::RatioWithCI> detection_level;
  std::optional<stats::RatioWithCI> satellite_level;
};

struct StratumRow {
  std::string population;
  double bin_low = 0.0;  // for frequency strata, low == high == channel MHz
  double bin_high = 0.0;
  std::int64_t n_illuminated = 0;
  std::int64_t n_eclipsed = 0;
  double ratio = 0.0;
};

struct EclipseReport {
  std::vector<PopulationEclipse> populations;
  std::optional<stats::InteractionResult> interaction;  // DTC vs Ku-only
  std::vector<StratumRow> altitude_strata;
  std::vector<StratumRow> latitude_strata;
  std::vector<StratumRow> frequency_strata;
  std::vector<std::pair<std::int64_t, double>> per_satellite_dtc;
  std::vector<std::pair<std::int64_t, double>> per_satellite_ku;
  // median of the per-satellite ratios; distinct from the population
  // ratio of medians and labelled as such in the report
  std::optional<double> per_satellite_median_ratio_dtc;
  std::optional<double> time_avg_factor;
};

EclipseReport eclipse_analysis(const Catalogue& catalogue, const AnalysisConfig& cfg);

// time-averaged contribution relative to illuminated-only:
// frac_illum + frac_ecl / ratio
double eclipse_time_average_factor(std::int64_t n_illuminated,
                                   std::int64_t n_eclipsed,
                                   double illum_over_ecl_ratio);

// --- thermal order-of-magnitude estimate -------------------------------------

double thermal_flux_estimate(double emissivity, double temperature_k,
                             double area_m2, double wavelength_m, double range_m);

// --- dynamic spectrum pivot ---------------------------------------------------

struct DynamicSpectrum {
  std::int64_t norad_id = 0;
  double coarse_freq_mhz = 0.0;
  int n_passes = 0;
  double duration_s = 0.0;
  std::vector<double> epochs;           // pass epochs, ascending
  std::vector<double> elevation_deg;    // per epoch
  std::vector<std::array<double, 31>> matrix;  // NaN where a bin is missing
  std::vector<double> time_marginal;           // per-epoch sum over bins
  std::array<double, 31> freq_marginal{};      // per-bin sum over epochs
};

DynamicSpectrum dynamic_spectrum(const Catalogue& catalogue, const AnalysisConfig& cfg,
                                 std::int64_t norad_id, double coarse_freq_mhz);

}  // namespace uemr::analysis
