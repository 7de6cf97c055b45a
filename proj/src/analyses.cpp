#include "uemr/analyses.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "uemr/rng.hpp"
#include "uemr/timeutil.hpp"

namespace uemr::analysis {

namespace {

constexpr double kBoltzmann = 1.380649e-23;  // J/K
constexpr double kJyInSi = 1e-26;            // W m^-2 Hz^-1

bool is_analysed(const Catalogue& cat, const DetectionEvent& e) {
  const Population p = cat.population_of(e.norad_id);
  return p == Population::DTC || p == Population::KuOnly;
}

double flux_of(const DetectionEvent& e, FluxBasis basis) {
  return basis == FluxBasis::Raw ? e.flux_jy : e.s_norm_jy;
}

bool same_channel(double a_mhz, double b_mhz) { return std::abs(a_mhz - b_mhz) < 0.5; }

double sample_sd(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (const double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double mean_of(std::span<const double> v) {
  double acc = 0.0;
  for (const double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

std::vector<double> medians_only(
    const std::vector<std::pair<std::int64_t, double>>& per_sat) {
  std::vector<double> out;
  out.reserve(per_sat.size());
  for (const auto& [norad, med] : per_sat) out.push_back(med);
  return out;
}

}  // namespace

AnalysisConfig AnalysisConfig::from_config(const Config& cfg) {
  AnalysisConfig a;
  a.n_resamples = static_cast<int>(cfg.get_int("stats.b", a.n_resamples));
  a.q = cfg.get_double("stats.q", a.q);
  a.z = cfg.get_double("stats.z", a.z);
  a.master_seed = cfg.get_u64("stats.master_seed", a.master_seed);
  a.r_ref_km = cfg.get_double("catalogue.r_ref_km", a.r_ref_km);
  a.target_freq_mhz = cfg.get_double("analysis.target_freq_mhz", a.target_freq_mhz);
  a.target_fine_index =
      static_cast<int>(cfg.get_int("analysis.target_fine_index", a.target_fine_index));
  a.t1_target_mhz = cfg.get_double("analysis.t1_target_mhz", a.t1_target_mhz);
  a.t1_tol_khz = cfg.get_double("analysis.t1_tol_khz", a.t1_tol_khz);
  a.t1_fundamentals_khz =
      cfg.get_double_list("analysis.t1_fundamentals_khz", a.t1_fundamentals_khz);
  a.t1_crystals_khz = cfg.get_double_list("analysis.t1_crystals_khz", a.t1_crystals_khz);
  a.bright_quantile = cfg.get_double("analysis.bright_quantile", a.bright_quantile);
  a.t3_min_detections =
      static_cast<int>(cfg.get_int("analysis.t3_min_detections", a.t3_min_detections));
  a.per_satellite_min_per_state = static_cast<int>(
      cfg.get_int("analysis.per_satellite_min_per_state", a.per_satellite_min_per_state));
  if (const auto ymd = parse_date_ymd(cfg.get_string("analysis.matched_launch_start", "")))
    a.matched_launch_start_ymd = *ymd;
  if (const auto ymd = parse_date_ymd(cfg.get_string("analysis.matched_launch_end", "")))
    a.matched_launch_end_ymd = *ymd;
  a.control_freqs_mhz =
      cfg.get_double_list("analysis.control_freqs_mhz", a.control_freqs_mhz);
  a.bonferroni_alpha = cfg.get_double("analysis.bonferroni_alpha", a.bonferroni_alpha);
  a.altitude_bin_km = cfg.get_double("analysis.altitude_bin_km", a.altitude_bin_km);
  a.altitude_origin_km =
      cfg.get_double("analysis.altitude_origin_km", a.altitude_origin_km);
  a.latitude_bins = static_cast<int>(cfg.get_int("analysis.latitude_bins", a.latitude_bins));
  a.min_per_state_per_freq = static_cast<int>(
      cfg.get_int("analysis.min_per_state_per_freq", a.min_per_state_per_freq));
  a.min_per_state_per_stratum = static_cast<int>(
      cfg.get_int("analysis.min_per_state_per_stratum", a.min_per_state_per_stratum));
  a.pass_gap_seconds = cfg.get_double("analysis.pass_gap_seconds", a.pass_gap_seconds);
  a.fine_basis = cfg.get_string("analysis.fine_basis", "range_corrected") == "raw"
                     ? FluxBasis::Raw
                     : FluxBasis::RangeCorrected;
  a.binom_convention =
      cfg.get_string("stats.binom_convention", "doubled_tail") == "min_likelihood"
          ? stats::BinomConvention::MinLikelihood
          : stats::BinomConvention::DoubledTail;
  a.dynspec_norad = cfg.get_int("analysis.dynspec_norad", a.dynspec_norad);
  return a;
}

const char* to_string(Reduction r) {
  switch (r) {
    case Reduction::RawPerDet: return "raw_per_detection";
    case Reduction::NormPerDet: return "norm_per_detection";
    case Reduction::RawPerSat: return "raw_per_satellite";
    default: return "norm_per_satellite";
  }
}

// ---------------------------------------------------------------------------
// per-satellite excess

ExcessReport dtc_excess(const Catalogue& cat, const AnalysisConfig& cfg) {
  std::vector<double> dtc_raw, dtc_norm, ku_raw, ku_norm;
  for (const auto& e : cat.events) {
    if (!e.is_stacked()) continue;
    const Population p = cat.population_of(e.norad_id);
    if (p == Population::DTC) {
      dtc_raw.push_back(e.flux_jy);
      dtc_norm.push_back(e.s_norm_jy);
    } else if (p == Population::KuOnly) {
      ku_raw.push_back(e.flux_jy);
      ku_norm.push_back(e.s_norm_jy);
    }
  }
  if (dtc_raw.empty() || ku_raw.empty())
    throw std::runtime_error("dtc_excess: a population is empty");

  const std::vector<double> dtc_sat_raw =
      medians_only(per_satellite_median(cat, Population::DTC, FluxBasis::Raw));
  const std::vector<double> dtc_sat_norm =
      medians_only(per_satellite_median(cat, Population::DTC, FluxBasis::RangeCorrected));
  const std::vector<double> ku_sat_raw =
      medians_only(per_satellite_median(cat, Population::KuOnly, FluxBasis::Raw));
  const std::vector<double> ku_sat_norm =
      medians_only(per_satellite_median(cat, Population::KuOnly, FluxBasis::RangeCorrected));

  ExcessReport report;
  const auto run = [&](Reduction red, const std::vector<double>& x,
                       const std::vector<double>& y, stats::ResampleUnit unit) {
    ReductionResult r;
    r.reduction = red;
    r.ratio = stats::bootstrap_median_ratio(
        x, y, cfg.n_resamples,
        derive_seed(cfg.master_seed, std::string("excess.") + to_string(red), 0));
    r.ratio.resample_unit = unit;
    r.mwu = stats::mann_whitney(x, y);
    report.reductions.push_back(std::move(r));
  };
  run(Reduction::RawPerDet, dtc_raw, ku_raw, stats::ResampleUnit::Detection);
  run(Reduction::NormPerDet, dtc_norm, ku_norm, stats::ResampleUnit::Detection);
  run(Reduction::RawPerSat, dtc_sat_raw, ku_sat_raw, stats::ResampleUnit::Satellite);
  run(Reduction::NormPerSat, dtc_sat_norm, ku_sat_norm, stats::ResampleUnit::Satellite);

  for (const Population p : {Population::DTC, Population::KuOnly, Population::V1x,
                             Population::Unclassified}) {
    PopulationCount count;
    count.label = to_string(p);
    count.stacked_detections = cat.stacked_count(p);
    for (const auto& [norad, rec] : cat.satellites) count.satellites += rec.population == p;
    report.populations.push_back(std::move(count));
  }

  // per-channel table, range-corrected per-detection, n_dtc >= 20 rule
  std::map<std::int64_t, std::pair<std::vector<double>, std::vector<double>>> by_channel;
  std::map<std::int64_t, double> channel_mhz;
  for (const auto& e : cat.events) {
    if (!e.is_stacked()) continue;
    const Population p = cat.population_of(e.norad_id);
    if (p != Population::DTC && p != Population::KuOnly) continue;
    auto& bucket = by_channel[e.freq_key()];
    channel_mhz[e.freq_key()] = e.freq_mhz;
    (p == Population::DTC ? bucket.first : bucket.second).push_back(e.s_norm_jy);
  }
  for (auto& [key, bucket] : by_channel) {
    auto& [dtc, ku] = bucket;
    if (static_cast<std::int64_t>(dtc.size()) < 20 || ku.empty()) continue;
    PerChannelExcess row;
    row.freq_mhz = channel_mhz[key];
    row.n_dtc = static_cast<std::int64_t>(dtc.size());
    row.n_ku = static_cast<std::int64_t>(ku.size());
    row.ratio = stats::median_of(dtc) / stats::median_of(ku);
    row.ks_p = stats::ks_two_sample(dtc, ku).p;
    const auto mwu = stats::mann_whitney(dtc, ku);
    row.mwu_p = mwu.p_two_sided;
    row.cliffs_delta = mwu.cliffs_delta;
    report.per_channel.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// polarisation

PolarisationReport polarisation_anomaly(const Catalogue& cat, const AnalysisConfig& cfg,
                                        stats::BaselineMode mode) {
  std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> counts;  // n, k_xx
  std::map<std::int64_t, double> channel_mhz;
  std::int64_t total = 0, total_xx = 0;
  for (const auto& e : cat.events) {
    if (!e.is_stacked() || !is_analysed(cat, e)) continue;
    auto& [n, k] = counts[e.freq_key()];
    channel_mhz[e.freq_key()] = e.freq_mhz;
    ++n;
    ++total;
    if (e.pol == PolFeed::XX) {
      ++k;
      ++total_xx;
    }
  }
  if (total == 0) throw std::runtime_error("polarisation_anomaly: no analysed events");
  const double pooled = static_cast<double>(total_xx) / static_cast<double>(total);

  PolarisationReport report;
  report.baseline_mode = mode;
  report.pooled_baseline = pooled;

  std::vector<double> pvals;
  for (const auto& [key, nk] : counts) {
    const auto [n, k] = nk;
    stats::ChannelTestResult r;
    r.freq_mhz = channel_mhz[key];
    r.n_total = n;
    r.n_xx = k;
    r.f_xx = static_cast<double>(k) / static_cast<double>(n);
    r.baseline_mode = mode;
    if (mode == stats::BaselineMode::Pooled) {
      r.baseline_used = pooled;
    } else {
      const std::int64_t rest_n = total - n;
      const std::int64_t rest_k = total_xx - k;
      if (rest_n == 0)
        throw std::runtime_error("polarisation_anomaly: leave-one-out needs >1 channel");
      r.baseline_used = static_cast<double>(rest_k) / static_cast<double>(rest_n);
    }
    if (!(r.baseline_used > 0.0 && r.baseline_used < 1.0))
      throw std::runtime_error("polarisation_anomaly: degenerate XX baseline");
    r.deviation = r.f_xx - r.baseline_used;
    const auto tail = stats::binom_two_sided(k, n, r.baseline_used, cfg.binom_convention);
    r.p_two_sided = tail.p;
    r.log10_p = tail.log10_p;
    const auto wi = stats::wilson_interval(k, n, cfg.z);
    r.wilson_low = wi.low;
    r.wilson_high = wi.high;
    report.channels.push_back(r);
    pvals.push_back(r.p_two_sided);
  }

  const std::vector<bool> flags = stats::bh_fdr(pvals, cfg.q);
  for (std::size_t i = 0; i < flags.size(); ++i) {
    report.channels[i].bh_significant = flags[i];
    report.n_flagged += flags[i];
  }
  return report;
}

// ---------------------------------------------------------------------------
// fine-channel isolation

namespace {

struct FineBins {
  std::array<std::vector<double>, 31> flux;      // per bin
  std::array<std::int64_t, 31> n_xx{};           // per bin XX count
};

FineBins collect_fine_bins(const Catalogue& cat, const AnalysisConfig& cfg,
                           double coarse_freq_mhz,
                           const std::unordered_map<std::int64_t, bool>* sat_filter) {
  FineBins bins;
  for (const auto& e : cat.events) {
    if (e.is_stacked() || !is_analysed(cat, e)) continue;
    if (!same_channel(e.freq_mhz, coarse_freq_mhz)) continue;
    if (sat_filter) {
      const auto it = sat_filter->find(e.norad_id);
      if (it != sat_filter->end() && !it->second) continue;
    }
    bins.flux[static_cast<std::size_t>(e.fine_channel_index)].push_back(
        flux_of(e, cfg.fine_basis));
    if (e.pol == PolFeed::XX) ++bins.n_xx[static_cast<std::size_t>(e.fine_channel_index)];
  }
  return bins;
}

struct InterBinZ {
  double z = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  int n_other = 0;
};

// z of the target bin's mean against the mean/sd of the other 30 bin means
InterBinZ inter_bin_z(const FineBins& bins, int target_index) {
  std::vector<double> other_means;
  double target_mean = std::numeric_limits<double>::quiet_NaN();
  for (int b = 0; b < 31; ++b) {
    const auto& v = bins.flux[static_cast<std::size_t>(b)];
    if (v.empty()) continue;
    const double m = mean_of(v);
    if (b == target_index) target_mean = m;
    else other_means.push_back(m);
  }
  if (!std::isfinite(target_mean) || other_means.size() < 2)
    throw std::runtime_error("fine channel scan: insufficient populated bins");
  InterBinZ out;
  out.mu = mean_of(other_means);
  out.sigma = sample_sd(other_means, out.mu);
  out.z = (target_mean - out.mu) / out.sigma;
  out.n_other = static_cast<int>(other_means.size());
  return out;
}

}  // namespace

FineChannelReport fine_channel_scan(const Catalogue& cat, const AnalysisConfig& cfg,
                                    double coarse_freq_mhz, int target_index) {
  if (target_index < 0 || target_index > 30)
    throw std::invalid_argument("fine_channel_scan: target index must be 0..30");
  const FineBins bins = collect_fine_bins(cat, cfg, coarse_freq_mhz, nullptr);
  std::int64_t total = 0;
  for (const auto& v : bins.flux) total += static_cast<std::int64_t>(v.size());
  if (total < 100)
    throw std::runtime_error("fine_channel_scan: fewer than 100 fine rows");

  FineChannelReport report;
  report.coarse_freq_mhz = coarse_freq_mhz;
  report.target_index = target_index;
  for (int b = 0; b < 31; ++b) {
    auto v = bins.flux[static_cast<std::size_t>(b)];
    FineBinRow row;
    row.index = b;
    row.n = static_cast<std::int64_t>(v.size());
    if (!v.empty()) {
      row.mean = mean_of(v);
      std::sort(v.begin(), v.end());
      row.median = stats::quantile_sorted(v, 0.5);
      row.p95 = stats::quantile_sorted(v, 0.95);
      row.xx_fraction = static_cast<double>(bins.n_xx[static_cast<std::size_t>(b)]) /
                        static_cast<double>(v.size());
    }
    report.per_bin.push_back(row);
  }

  const InterBinZ z = inter_bin_z(bins, target_index);
  report.z_target = z.z;
  report.inter_bin_mu = z.mu;
  report.inter_bin_sigma = z.sigma;

  // look-elsewhere threshold over the populated bins; the baseline sd carries
  // n_other - 1 degrees of freedom, so the quantile is Student-t, not normal
  const int n_bins = z.n_other + 1;
  report.bonferroni_threshold = stats::student_t_quantile(
      1.0 - cfg.bonferroni_alpha / (2.0 * n_bins), z.n_other - 1);
  return report;
}

std::vector<ControlChannelZ> cross_channel_control(
    const Catalogue& cat, const AnalysisConfig& cfg,
    std::span<const double> control_freqs_mhz, int target_index) {
  std::vector<ControlChannelZ> out;
  for (const double f : control_freqs_mhz) {
    const FineBins bins = collect_fine_bins(cat, cfg, f, nullptr);
    std::int64_t total = 0;
    for (const auto& v : bins.flux) total += static_cast<std::int64_t>(v.size());
    if (total < 100)
      throw std::runtime_error("cross_channel_control: fewer than 100 fine rows at " +
                               std::to_string(f) + " MHz");
    out.push_back({f, inter_bin_z(bins, target_index).z});
  }
  return out;
}

// ---------------------------------------------------------------------------
// mechanism tests

T1Result t1_harmonic_coincidence(std::span<const double> fundamentals_khz,
                                 double target_mhz, double tol_khz) {
  if (tol_khz <= 0.0) throw std::invalid_argument("t1: tolerance must be > 0");
  const double target_khz = target_mhz * 1000.0;
  T1Result out;
  out.target_mhz = target_mhz;
  out.tol_khz = tol_khz;

  std::vector<double> unique;
  for (const double f0 : fundamentals_khz) {
    if (f0 <= 0.0) throw std::invalid_argument("t1: fundamentals must be > 0");
    T1Row row;
    row.fundamental_khz = f0;
    row.best_harmonic = static_cast<std::int64_t>(std::llround(target_khz / f0));
    row.predicted_mhz = static_cast<double>(row.best_harmonic) * f0 / 1000.0;
    row.residual_khz = std::abs(static_cast<double>(row.best_harmonic) * f0 - target_khz);
    row.matched = row.residual_khz <= tol_khz;
    out.observed_matches += row.matched;
    out.expected_chance += std::min(1.0, 2.0 * tol_khz / f0);
    out.rows.push_back(row);
    if (std::find(unique.begin(), unique.end(), f0) == unique.end()) unique.push_back(f0);
  }
  for (const double f0 : unique)
    out.dedup_expected += std::min(1.0, 2.0 * tol_khz / f0);
  return out;
}

namespace {

// one detection's 31 fine-bin fluxes (NaN where the bin is absent)
struct PivotDetection {
  std::int64_t norad = 0;
  std::array<double, 31> bins;
};

std::vector<PivotDetection> pivot_fine_rows(const Catalogue& cat,
                                            const AnalysisConfig& cfg,
                                            double coarse_freq_mhz) {
  struct Key {
    std::int64_t norad;
    double epoch;
    bool operator<(const Key& o) const {
      return norad != o.norad ? norad < o.norad : epoch < o.epoch;
    }
  };
  std::map<Key, std::array<double, 31>> byDetection;
  for (const auto& e : cat.events) {
    if (e.is_stacked() || !is_analysed(cat, e)) continue;
    if (!same_channel(e.freq_mhz, coarse_freq_mhz)) continue;
    auto [it, inserted] = byDetection.try_emplace(Key{e.norad_id, e.epoch_unix});
    if (inserted) it->second.fill(std::numeric_limits<double>::quiet_NaN());
    it->second[static_cast<std::size_t>(e.fine_channel_index)] =
        flux_of(e, cfg.fine_basis);
  }
  std::vector<PivotDetection> out;
  out.reserve(byDetection.size());
  for (const auto& [key, bins] : byDetection) out.push_back({key.norad, bins});
  return out;
}

}  // namespace

T2Result t2_adjacent_bin(const Catalogue& cat, const AnalysisConfig& cfg,
                         double coarse_freq_mhz, int target_index,
                         double bright_quantile) {
  if (target_index < 0 || target_index > 30)
    throw std::invalid_argument("t2: target index must be 0..30");
  const std::vector<PivotDetection> detections =
      pivot_fine_rows(cat, cfg, coarse_freq_mhz);

  std::vector<double> target_flux;
  for (const auto& d : detections) {
    const double f = d.bins[static_cast<std::size_t>(target_index)];
    if (std::isfinite(f)) target_flux.push_back(f);
  }
  if (target_flux.size() < 20)
    throw std::runtime_error("t2: fewer than 20 detections with target-bin flux");
  std::sort(target_flux.begin(), target_flux.end());
  const double cut = stats::quantile_sorted(target_flux, bright_quantile);

  std::array<std::vector<double>, 31> bright_bins;
  int n_bright = 0;
  for (const auto& d : detections) {
    const double f = d.bins[static_cast<std::size_t>(target_index)];
    if (!std::isfinite(f) || f <= cut) continue;
    ++n_bright;
    for (int b = 0; b < 31; ++b)
      if (std::isfinite(d.bins[static_cast<std::size_t>(b)]))
        bright_bins[static_cast<std::size_t>(b)].push_back(
            d.bins[static_cast<std::size_t>(b)]);
  }
  if (n_bright < 20)
    throw std::runtime_error("t2: bright subset smaller than 20 detections");

  std::vector<double> baseline_means;
  std::array<double, 31> bin_mean;
  bin_mean.fill(std::numeric_limits<double>::quiet_NaN());
  for (int b = 0; b < 31; ++b) {
    const auto& v = bright_bins[static_cast<std::size_t>(b)];
    if (v.empty()) continue;
    bin_mean[static_cast<std::size_t>(b)] = mean_of(v);
    if (b < target_index - 1 || b > target_index + 1)
      baseline_means.push_back(bin_mean[static_cast<std::size_t>(b)]);
  }
  if (baseline_means.size() < 2)
    throw std::runtime_error("t2: not enough baseline bins");

  T2Result out;
  out.p95_cut = cut;
  out.n_bright = n_bright;
  out.baseline_mu = mean_of(baseline_means);
  out.baseline_sigma = sample_sd(baseline_means, out.baseline_mu);
  const auto z_of = [&](int b) {
    if (b < 0 || b > 30) return std::numeric_limits<double>::quiet_NaN();
    const double m = bin_mean[static_cast<std::size_t>(b)];
    return (m - out.baseline_mu) / out.baseline_sigma;
  };
  out.z_below = z_of(target_index - 1);
  out.z_target = z_of(target_index);
  out.z_above = z_of(target_index + 1);
  return out;
}

T3Result t3_satellite_ratios(const Catalogue& cat, const AnalysisConfig& cfg,
                             double coarse_freq_mhz, int target_index,
                             int min_detections) {
  if (min_detections < 2)
    throw std::invalid_argument("t3: min_detections must be >= 2");
  const std::vector<PivotDetection> detections =
      pivot_fine_rows(cat, cfg, coarse_freq_mhz);

  struct Acc {
    std::vector<double> target;
    std::vector<double> other;
    int n_det = 0;
  };
  std::map<std::int64_t, Acc> by_sat;
  for (const auto& d : detections) {
    const double tf = d.bins[static_cast<std::size_t>(target_index)];
    if (!std::isfinite(tf)) continue;
    Acc& acc = by_sat[d.norad];
    ++acc.n_det;
    acc.target.push_back(tf);
    for (int b = 0; b < 31; ++b) {
      if (b >= target_index - 1 && b <= target_index + 1) continue;
      const double f = d.bins[static_cast<std::size_t>(b)];
      if (std::isfinite(f)) acc.other.push_back(f);
    }
  }

  T3Result out;
  std::vector<double> ratios;
  std::unordered_map<std::int64_t, bool> keep;  // satellites to keep for the re-run
  for (const auto& [norad, acc] : by_sat) {
    if (acc.n_det < min_detections || acc.other.empty()) continue;
    const double r = mean_of(acc.target) / mean_of(acc.other);
    out.per_satellite.emplace_back(norad, r);
    ratios.push_back(r);
    keep[norad] = r <= 2.0;
  }
  if (out.per_satellite.size() < 5)
    throw std::runtime_error("t3: fewer than 5 qualifying satellites");

  out.n_satellites = static_cast<int>(ratios.size());
  std::sort(ratios.begin(), ratios.end());
  out.median_r = stats::quantile_sorted(ratios, 0.5);
  out.mean_r = mean_of(ratios);
  out.p95_r = stats::quantile_sorted(ratios, 0.95);
  out.max_r = ratios.back();
  for (const double r : ratios) {
    out.n_over_2 += r > 2.0;
    out.frac_over_105 += r > 1.05;
  }
  out.frac_over_105 /= static_cast<double>(ratios.size());

  // top decile (rounded count) vs bottom half of the sorted ratios
  const std::size_t n = ratios.size();
  const std::size_t n_top =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n * 0.1)));
  const std::size_t n_bottom = n / 2;
  out.top_decile_mean =
      mean_of(std::span<const double>(ratios.data() + n - n_top, n_top));
  out.bottom_half_mean = mean_of(std::span<const double>(ratios.data(), n_bottom));

  // fine-channel z with the R > 2 satellites removed entirely
  const FineBins filtered = collect_fine_bins(cat, cfg, coarse_freq_mhz, &keep);
  out.z_target_excluding = inter_bin_z(filtered, target_index).z;
  return out;
}

MechanismReport mechanism_tests(const Catalogue& cat, const AnalysisConfig& cfg) {
  MechanismReport report;
  report.t1 =
      t1_harmonic_coincidence(cfg.t1_fundamentals_khz, cfg.t1_target_mhz, cfg.t1_tol_khz);
  report.t1_crystal =
      t1_harmonic_coincidence(cfg.t1_crystals_khz, cfg.t1_target_mhz, cfg.t1_tol_khz);
  report.t2 = t2_adjacent_bin(cat, cfg, cfg.target_freq_mhz, cfg.target_fine_index,
                              cfg.bright_quantile);
  report.t3 = t3_satellite_ratios(cat, cfg, cfg.target_freq_mhz, cfg.target_fine_index,
                                  cfg.t3_min_detections);
  return report;
}

// ---------------------------------------------------------------------------
// eclipse analysis

namespace {

struct StateValues {
  std::vector<double> illuminated;
  std::vector<double> eclipsed;
};

bool in_launch_window(const SatelliteRecord& rec, int start_ymd, int end_ymd) {
  return rec.launch_ymd >= start_ymd && rec.launch_ymd <= end_ymd;
}

}  // namespace

double eclipse_time_average_factor(std::int64_t n_illuminated, std::int64_t n_eclipsed,
                                   double illum_over_ecl_ratio) {
  const double n = static_cast<double>(n_illuminated + n_eclipsed);
  if (n <= 0.0 || illum_over_ecl_ratio <= 0.0)
    throw std::invalid_argument("eclipse_time_average_factor: bad inputs");
  const double frac_ill = static_cast<double>(n_illuminated) / n;
  const double frac_ecl = static_cast<double>(n_eclipsed) / n;
  return frac_ill + frac_ecl / illum_over_ecl_ratio;
}

EclipseReport eclipse_analysis(const Catalogue& cat, const AnalysisConfig& cfg) {
  // membership: 0 pooled, 1 DTC, 2 Ku, 3 matched Ku
  const auto member_of = [&](const DetectionEvent& e, int which) {
    const Population p = cat.population_of(e.norad_id);
    if (p != Population::DTC && p != Population::KuOnly) return false;
    switch (which) {
      case 0: return true;
      case 1: return p == Population::DTC;
      case 2: return p == Population::KuOnly;
      default: {
        if (p != Population::KuOnly) return false;
        const auto it = cat.satellites.find(e.norad_id);
        return it != cat.satellites.end() &&
               in_launch_window(it->second, cfg.matched_launch_start_ymd,
                                cfg.matched_launch_end_ymd);
      }
    }
  };
  static constexpr const char* kLabels[4] = {"Pooled", "DTC", "KuOnly", "MatchedKu"};

  EclipseReport report;
  std::vector<stats::ClusterGroup> dtc_groups, ku_groups;

  for (int which = 0; which < 4; ++which) {
    PopulationEclipse pop;
    pop.label = kLabels[which];
    StateValues pooled;
    std::map<std::int64_t, StateValues> per_sat;

    for (const auto& e : cat.events) {
      if (!e.is_stacked() || !member_of(e, which)) continue;
      if (!e.illum.has_value())
        throw std::runtime_error("eclipse_analysis: catalogue is not illumination-tagged");
      const bool lit = e.illum->state == geo::IlluminationState::Illuminated;
      auto& sat = per_sat[e.norad_id];
      if (lit) {
        pooled.illuminated.push_back(e.s_norm_jy);
        sat.illuminated.push_back(e.s_norm_jy);
      } else {
        pooled.eclipsed.push_back(e.s_norm_jy);
        sat.eclipsed.push_back(e.s_norm_jy);
      }
    }
    pop.n_illuminated = static_cast<std::int64_t>(pooled.illuminated.size());
    pop.n_eclipsed = static_cast<std::int64_t>(pooled.eclipsed.size());

    std::vector<stats::ClusterGroup> groups;
    for (auto& [norad, sv] : per_sat) {
      pop.sats_illuminated += !sv.illuminated.empty();
      pop.sats_eclipsed += !sv.eclipsed.empty();
      stats::ClusterGroup g;
      g.satellite_id = norad;
      g.illuminated = std::move(sv.illuminated);
      g.eclipsed = std::move(sv.eclipsed);
      groups.push_back(std::move(g));
    }

    if (pop.n_illuminated > 0 && pop.n_eclipsed > 0) {
      pop.detection_level = stats::bootstrap_median_ratio(
          pooled.illuminated, pooled.eclipsed, cfg.n_resamples,
          derive_seed(cfg.master_seed, std::string("eclipse.det.") + pop.label, 0));
      pop.satellite_level = stats::cluster_bootstrap_ratio(
          groups, cfg.n_resamples,
          derive_seed(cfg.master_seed, std::string("eclipse.sat.") + pop.label, 0));
    }
    if (which == 1) dtc_groups = groups;
    if (which == 2) ku_groups = groups;
    report.populations.push_back(std::move(pop));
  }

  const PopulationEclipse& dtc = report.populations[1];
  const PopulationEclipse& ku = report.populations[2];
  if (dtc.detection_level && ku.detection_level) {
    report.interaction = stats::interaction_test(
        dtc_groups, ku_groups, cfg.n_resamples,
        derive_seed(cfg.master_seed, "eclipse.interaction", 0));
  }
  if (dtc.detection_level) {
    report.time_avg_factor = eclipse_time_average_factor(
        dtc.n_illuminated, dtc.n_eclipsed, dtc.detection_level->estimate);
  }

  // strata are descriptive: point ratios only, no extra FDR control
  const auto stratified = [&](auto&& bin_of, std::vector<StratumRow>& rows,
                              auto&& bounds_of) {
    for (int which : {1, 2}) {
      std::map<int, StateValues> strata;
      for (const auto& e : cat.events) {
        if (!e.is_stacked() || !member_of(e, which) || !e.illum.has_value()) continue;
        const int bin = bin_of(e);
        if (bin == INT_MIN) continue;
        auto& sv = strata[bin];
        if (e.illum->state == geo::IlluminationState::Illuminated)
          sv.illuminated.push_back(e.s_norm_jy);
        else
          sv.eclipsed.push_back(e.s_norm_jy);
      }
      for (auto& [bin, sv] : strata) {
        if (static_cast<int>(sv.illuminated.size()) < cfg.min_per_state_per_stratum ||
            static_cast<int>(sv.eclipsed.size()) < cfg.min_per_state_per_stratum)
          continue;
        StratumRow row;
        row.population = kLabels[which];
        const auto [lo, hi] = bounds_of(bin);
        row.bin_low = lo;
        row.bin_high = hi;
        row.n_illuminated = static_cast<std::int64_t>(sv.illuminated.size());
        row.n_eclipsed = static_cast<std::int64_t>(sv.eclipsed.size());
        row.ratio = stats::median_of(sv.illuminated) / stats::median_of(sv.eclipsed);
        rows.push_back(std::move(row));
      }
    }
  };

  stratified(
      [&](const DetectionEvent& e) {
        const double alt_km = e.illum->subsat.height_m / 1000.0;
        return static_cast<int>(
            std::floor((alt_km - cfg.altitude_origin_km) / cfg.altitude_bin_km));
      },
      report.altitude_strata,
      [&](int bin) {
        return std::pair<double, double>(
            cfg.altitude_origin_km + bin * cfg.altitude_bin_km,
            cfg.altitude_origin_km + (bin + 1) * cfg.altitude_bin_km);
      });

  // latitude bin edges from the analysed latitude range
  double lat_min = 90.0, lat_max = -90.0;
  for (const auto& e : cat.events) {
    if (!e.is_stacked() || !member_of(e, 0) || !e.illum.has_value()) continue;
    lat_min = std::min(lat_min, e.illum->subsat.lat_deg);
    lat_max = std::max(lat_max, e.illum->subsat.lat_deg);
  }
  const double lat_width =
      (lat_max > lat_min) ? (lat_max - lat_min) / cfg.latitude_bins : 1.0;
  stratified(
      [&](const DetectionEvent& e) {
        const double lat = e.illum->subsat.lat_deg;
        int bin = static_cast<int>(std::floor((lat - lat_min) / lat_width));
        return std::clamp(bin, 0, cfg.latitude_bins - 1);
      },
      report.latitude_strata,
      [&](int bin) {
        return std::pair<double, double>(lat_min + bin * lat_width,
                                         lat_min + (bin + 1) * lat_width);
      });

  // per-frequency strata use the stricter >= 30 per-state rule
  {
    std::map<std::int64_t, double> channel_mhz;
    for (const auto& e : cat.events)
      if (e.is_stacked()) channel_mhz[e.freq_key()] = e.freq_mhz;
    for (int which : {1, 2}) {
      std::map<std::int64_t, StateValues> strata;
      for (const auto& e : cat.events) {
        if (!e.is_stacked() || !member_of(e, which) || !e.illum.has_value()) continue;
        auto& sv = strata[e.freq_key()];
        if (e.illum->state == geo::IlluminationState::Illuminated)
          sv.illuminated.push_back(e.s_norm_jy);
        else
          sv.eclipsed.push_back(e.s_norm_jy);
      }
      for (auto& [key, sv] : strata) {
        if (static_cast<int>(sv.illuminated.size()) < cfg.min_per_state_per_freq ||
            static_cast<int>(sv.eclipsed.size()) < cfg.min_per_state_per_freq)
          continue;
        StratumRow row;
        row.population = kLabels[which];
        row.bin_low = row.bin_high = channel_mhz[key];
        row.n_illuminated = static_cast<std::int64_t>(sv.illuminated.size());
        row.n_eclipsed = static_cast<std::int64_t>(sv.eclipsed.size());
        row.ratio = stats::median_of(sv.illuminated) / stats::median_of(sv.eclipsed);
        report.frequency_strata.push_back(std::move(row));
      }
    }
  }

  // per-satellite ratios for satellites with enough coverage in both states
  const auto per_sat_ratios = [&](const std::vector<stats::ClusterGroup>& groups,
                                  std::vector<std::pair<std::int64_t, double>>& out) {
    for (const auto& g : groups) {
      if (static_cast<int>(g.illuminated.size()) < cfg.per_satellite_min_per_state ||
          static_cast<int>(g.eclipsed.size()) < cfg.per_satellite_min_per_state)
        continue;
      out.emplace_back(g.satellite_id,
                       stats::median_of(g.illuminated) / stats::median_of(g.eclipsed));
    }
    std::sort(out.begin(), out.end());
  };
  per_sat_ratios(dtc_groups, report.per_satellite_dtc);
  per_sat_ratios(ku_groups, report.per_satellite_ku);
  if (!report.per_satellite_dtc.empty()) {
    std::vector<double> r;
    for (const auto& [norad, ratio] : report.per_satellite_dtc) r.push_back(ratio);
    report.per_satellite_median_ratio_dtc = stats::median_of(r);
  }
  return report;
}

// ---------------------------------------------------------------------------
// thermal estimate and dynamic spectrum

double thermal_flux_estimate(double emissivity, double temperature_k, double area_m2,
                             double wavelength_m, double range_m) {
  if (emissivity <= 0.0 || temperature_k <= 0.0 || area_m2 <= 0.0 ||
      wavelength_m <= 0.0 || range_m <= 0.0)
    throw std::invalid_argument("thermal_flux_estimate: all inputs must be > 0");
  const double s_si = 2.0 * emissivity * kBoltzmann * temperature_k * area_m2 /
                      (wavelength_m * wavelength_m * range_m * range_m);
  return s_si / kJyInSi;
}

DynamicSpectrum dynamic_spectrum(const Catalogue& cat, const AnalysisConfig& cfg,
                                 std::int64_t norad_id, double coarse_freq_mhz) {
  // epoch -> (bins, elevation)
  std::map<double, std::pair<std::array<double, 31>, double>> by_epoch;
  for (const auto& e : cat.events) {
    if (e.is_stacked() || e.norad_id != norad_id) continue;
    if (!same_channel(e.freq_mhz, coarse_freq_mhz)) continue;
    auto [it, inserted] = by_epoch.try_emplace(e.epoch_unix);
    if (inserted) {
      it->second.first.fill(std::numeric_limits<double>::quiet_NaN());
      it->second.second = e.elevation_deg;
    }
    it->second.first[static_cast<std::size_t>(e.fine_channel_index)] = e.s_norm_jy;
  }
  if (by_epoch.empty())
    throw std::runtime_error("dynamic_spectrum: no fine rows for satellite " +
                             std::to_string(norad_id));

  // segment into passes on epoch gaps, pick the highest integrated S_norm
  struct Pass {
    std::vector<double> epochs;
    double integrated = 0.0;
  };
  std::vector<Pass> passes;
  double prev = -1.0;
  for (const auto& [epoch, data] : by_epoch) {
    if (passes.empty() || epoch - prev > cfg.pass_gap_seconds) passes.emplace_back();
    passes.back().epochs.push_back(epoch);
    for (const double f : data.first)
      if (std::isfinite(f)) passes.back().integrated += f;
    prev = epoch;
  }
  const Pass& best =
      *std::max_element(passes.begin(), passes.end(),
                        [](const Pass& a, const Pass& b) { return a.integrated < b.integrated; });

  DynamicSpectrum out;
  out.norad_id = norad_id;
  out.coarse_freq_mhz = coarse_freq_mhz;
  out.n_passes = static_cast<int>(passes.size());
  out.duration_s = best.epochs.back() - best.epochs.front();
  out.freq_marginal.fill(0.0);
  for (const double epoch : best.epochs) {
    const auto& [bins, elevation] = by_epoch.at(epoch);
    out.epochs.push_back(epoch);
    out.elevation_deg.push_back(elevation);
    out.matrix.push_back(bins);
    double row_sum = 0.0;
    for (int b = 0; b < 31; ++b) {
      const double f = bins[static_cast<std::size_t>(b)];
      if (std::isfinite(f)) {
        row_sum += f;
        out.freq_marginal[static_cast<std::size_t>(b)] += f;
      }
    }
    out.time_marginal.push_back(row_sum);
  }
  return out;
}

}  // namespace uemr::analysis
