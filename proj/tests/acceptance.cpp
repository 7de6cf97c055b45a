// Acceptance suite: one line per criterion, PASS/FAIL, nonzero exit on any
// failure. Criteria 1-9 are self-contained; criterion 10 needs the public
// catalogue and bus table (respects --catalogue/--bus, otherwise SKIP).

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "uemr/analyses.hpp"
#include "uemr/catalogue.hpp"
#include "uemr/geometry.hpp"
#include "uemr/rng.hpp"
#include "uemr/stats.hpp"
#include "uemr/synth.hpp"
#include "uemr/tagging.hpp"
#include "uemr/timeutil.hpp"

using namespace uemr;

namespace {

int g_failures = 0;

void line(const char* id, bool pass, const std::string& detail) {
  std::printf("%-4s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++g_failures;
}

void skip(const char* id, const std::string& detail) {
  std::printf("%-4s SKIP  %s\n", id, detail.c_str());
}

std::string fmt(const char* spec, ...) {
  char buf[512];
  va_list args;
  va_start(args, spec);
  std::vsnprintf(buf, sizeof buf, spec, args);
  va_end(args);
  return buf;
}

double utc(const char* s) { return *parse_utc(s); }

// ---------------------------------------------------------------------------

void a1_wilson() {
  const auto w = stats::wilson_interval(2193, 2704, 1.96);
  const bool pass = std::abs(w.low - 0.795) <= 1e-3 && std::abs(w.high - 0.825) <= 1e-3;
  line("A1", pass, fmt("wilson(2193, 2704) = [%.5f, %.5f], target [0.795, 0.825] to 3 decimals", w.low, w.high));
}

void a2_binomial() {
  const auto tail = stats::binom_two_sided(2193, 2704, 0.4809);
  const bool pass = std::abs(tail.log10_p - (-274.4)) <= 0.5;
  line("A2", pass,
       fmt("binom(2193, 2704, 0.4809) log10 p = %.2f, target -274.4 +- 0.5 "
           "[convention: doubled_tail; min_likelihood gives %.2f]",
           tail.log10_p,
           stats::binom_two_sided(2193, 2704, 0.4809,
                                  stats::BinomConvention::MinLikelihood).log10_p));
}

void a3_bh_count() {
  // the 21 per-channel p-values, in channel order
  const std::vector<double> p{
      2e-1, 2e-1, 5e-1, 6e-4, 2e-1, 9e-2, 3e-2, 5e-1, 3e-4, 1e-1, 2e-1,
      6e-61, 1e-16, 2e-3, 9e-31, 3e-8, 2e-2, 4e-1, 3e-15, 4e-275, 2e-29};
  const auto flags = stats::bh_fdr(p, 0.05);
  const int n = static_cast<int>(std::count(flags.begin(), flags.end(), true));
  line("A3", n == 11, fmt("BH at q = 0.05 flags %d of 21 channels, target 11", n));
}

void a4_t1() {
  const analysis::AnalysisConfig cfg;
  const auto t1 = analysis::t1_harmonic_coincidence(cfg.t1_fundamentals_khz,
                                                    230.627441, 12.207);
  const auto crystal =
      analysis::t1_harmonic_coincidence(cfg.t1_crystals_khz, 230.627441, 12.207);
  bool crystal_ok = crystal.observed_matches == 1;
  for (const auto& row : crystal.rows)
    if (row.matched) crystal_ok = crystal_ok && row.best_harmonic == 7038;
  const bool pass = t1.observed_matches == 5 &&
                    std::abs(t1.expected_chance - 5.73) <= 0.01 &&
                    std::abs(t1.dedup_expected - 5.08) <= 0.02 && crystal_ok;
  line("A4", pass,
       fmt("harmonic matches %d/5, expected %.4f (5.73 +- 0.01), dedup %.4f "
           "(5.08 +- 0.02), crystal %d match at N = %s",
           t1.observed_matches, t1.expected_chance, t1.dedup_expected,
           crystal.observed_matches, crystal_ok ? "7038" : "?"));
}

void a5_time_average() {
  const double f = analysis::eclipse_time_average_factor(7686, 2494, 0.465);
  line("A5", std::abs(f - 1.282) <= 0.005,
       fmt("time-averaged factor %.4f, target 1.282 +- 0.005", f));
}

void a6_thermal() {
  const double s = analysis::thermal_flux_estimate(0.3, 300.0, 100.0, 1.3, 1e6);
  line("A6", s >= 1.0e-5 && s <= 2.0e-5,
       fmt("thermal flux %.3e Jy, target [1.0, 2.0]e-5", s));
}

void a7_statistical_oracles() {
  // exhaustive: every tie-free rank arrangement with n_x + n_y <= 10
  long checked = 0, agree = 0;
  for (std::size_t n = 2; n <= 10; ++n) {
    for (std::size_t n_x = 1; n_x < n; ++n_x) {
      std::vector<int> mask(n, 0);
      std::fill(mask.begin(), mask.begin() + static_cast<long>(n_x), 1);
      std::sort(mask.begin(), mask.end(), std::greater<int>());
      do {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < n; ++i)
          (mask[i] ? x : y).push_back(static_cast<double>(i + 1));
        const auto prod = stats::mann_whitney(x, y);
        const double oracle = synth::oracle_mwu_exact(x, y);
        ++checked;
        agree += prod.method == stats::MwuMethod::Exact &&
                 std::abs(prod.p_two_sided - oracle) < 1e-12;
      } while (std::prev_permutation(mask.begin(), mask.end()));
    }
  }

  // cliffs delta vs pair enumeration + the 2U/(mn)-1 identity, 500 random draws
  Rng rng(314);
  long cliff_ok = 0, identity_ok = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x, y;
    const std::size_t n_x = 1 + rng.next_index(25), n_y = 1 + rng.next_index(25);
    for (std::size_t i = 0; i < n_x; ++i)
      x.push_back(static_cast<double>(rng.next_index(8)));
    for (std::size_t i = 0; i < n_y; ++i)
      y.push_back(static_cast<double>(rng.next_index(8)));
    double gt = 0, lt = 0;
    for (double a : x)
      for (double b : y) {
        gt += a > b;
        lt += a < b;
      }
    const double enumerated = (gt - lt) / static_cast<double>(n_x * n_y);
    const double delta = stats::cliffs_delta(x, y);
    cliff_ok += std::abs(delta - enumerated) < 1e-12;
    const auto mwu = stats::mann_whitney(x, y);
    identity_ok +=
        std::abs(mwu.cliffs_delta -
                 (2.0 * mwu.u_statistic / static_cast<double>(n_x * n_y) - 1.0)) < 1e-12;
  }

  const bool pass = agree == checked && cliff_ok == 500 && identity_ok == 500;
  line("A7", pass,
       fmt("MWU exact == oracle on %ld/%ld arrangements; delta == enumeration "
           "%ld/500; delta identity %ld/500",
           agree, checked, cliff_ok, identity_ok));
}

void a8_geometry() {
  // geodetic round-trip over a 1000-point grid
  Rng rng(2718);
  double worst_mm = 0.0;
  for (int i = 0; i < 1000; ++i) {
    geo::GeodeticCoord c;
    c.lat_deg = rng.next_unit() * 178.0 - 89.0;
    c.lon_deg = rng.next_unit() * 359.9 - 179.9;
    c.height_m = rng.next_unit() * 2001000.0 - 1000.0;
    const auto e = geo::geodetic_to_ecef(c);
    const auto e2 = geo::geodetic_to_ecef(geo::ecef_to_geodetic(e));
    worst_mm = std::max(worst_mm, (e2 - e).norm() * 1000.0);
  }

  // solar ephemeris vs the independent oracle, 100 epochs in 2024
  double worst_deg = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = utc("2024-01-01T00:00:00Z") + rng.next_unit() * 365.0 * 86400.0;
    const auto a = geo::solar_position_ecef(t).unit();
    const auto b = synth::oracle_sun(t).unit();
    worst_deg = std::max(
        worst_deg, std::acos(std::clamp(a.dot(b), -1.0, 1.0)) / geo::kDeg);
  }

  // shadow classification agreement over 10^4 random LEO states
  long states = 10000, agree = 0;
  for (long i = 0; i < states; ++i) {
    const double t = utc("2024-01-01T00:00:00Z") + rng.next_unit() * 365.0 * 86400.0;
    const double radius = 6378137.0 + 300000.0 + rng.next_unit() * 1100000.0;
    const double zu = rng.next_unit() * 2.0 - 1.0;
    const double az = rng.next_unit() * 2.0 * geo::kPi;
    const double su = std::sqrt(1.0 - zu * zu);
    const geo::EcefVector sat{radius * su * std::cos(az), radius * su * std::sin(az),
                              radius * zu};
    const auto prod = geo::illumination_state(sat, geo::solar_position_ecef(t));
    const auto orac = geo::illumination_state(sat, synth::oracle_sun(t));
    agree += prod.state == orac.state;
  }
  const double agree_frac = static_cast<double>(agree) / static_cast<double>(states);

  const bool pass = worst_mm < 1.0 && worst_deg < 0.02 && agree_frac >= 0.99;
  line("A8", pass,
       fmt("round-trip worst %.4f mm (< 1); ephemeris worst %.4f deg (< 0.02); "
           "shadow agreement %.4f (>= 0.99)",
           worst_mm, worst_deg, agree_frac));
}

// --- A9: synthetic end-to-end ------------------------------------------------

synth::SynthSpec a9_base(std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.seed = seed;
  spec.epoch_span_days = 90.0;
  spec.channels_mhz = {150.78125, 161.71875, 230.46875};
  spec.populations.resize(2);
  spec.populations[0].bus_label = "V2MD";
  spec.populations[0].n_satellites = 25;
  spec.populations[0].mean_detections = 60;
  spec.populations[0].flux_mu_log = 3.0;
  spec.populations[0].flux_sigma_log = 0.6;
  spec.populations[1].bus_label = "V2M";
  spec.populations[1].n_satellites = 50;
  spec.populations[1].mean_detections = 60;
  spec.populations[1].flux_mu_log = 3.0;
  spec.populations[1].flux_sigma_log = 0.6;
  return spec;
}

void a9_synthetic() {
  analysis::AnalysisConfig cfg;
  cfg.n_resamples = 600;
  const int n_seeds = 50;

  // (a) eclipse reversal: multipliers 2.15x and 0.85x, CIs exclude unity with
  // opposite signs
  int reversal_ok = 0;
  for (int s = 0; s < n_seeds; ++s) {
    auto spec = a9_base(10000 + s);
    spec.populations[0].eclipse_multiplier = 2.15;
    spec.populations[1].eclipse_multiplier = 0.85;
    const auto result = synth::generate(spec);
    cfg.master_seed = 5000 + s;
    const auto report = analysis::eclipse_analysis(result.catalogue, cfg);
    const auto& dtc = report.populations[1].detection_level;
    const auto& ku = report.populations[2].detection_level;
    if (dtc && ku && dtc->ci_high < 1.0 && ku->ci_low > 1.0) ++reversal_ok;
  }

  // (b) null generator: excess CI covers unity; fine-channel max |z| under the
  // look-elsewhere threshold
  int null_excess_ok = 0, null_fine_ok = 0;
  for (int s = 0; s < n_seeds; ++s) {
    auto spec = a9_base(20000 + s);
    spec.fine_channels_mhz = {230.46875};
    const auto result = synth::generate(spec);
    cfg.master_seed = 6000 + s;
    const auto excess = analysis::dtc_excess(result.catalogue, cfg);
    const auto& headline = excess.reductions[3].ratio;
    null_excess_ok += headline.ci_low <= 1.0 && headline.ci_high >= 1.0;

    double max_abs_z = 0.0, threshold = 0.0;
    for (int b = 0; b < 31; ++b) {
      const auto scan = analysis::fine_channel_scan(result.catalogue, cfg,
                                                    230.46875, b);
      max_abs_z = std::max(max_abs_z, std::abs(scan.z_target));
      threshold = scan.bonferroni_threshold;
    }
    null_fine_ok += max_abs_z < threshold;
  }

  // (c) single-bin injector, 55% of satellites expressing
  auto spec = a9_base(31415);
  spec.fine_channels_mhz = {230.46875};
  spec.injector.fine_index = 22;
  spec.injector.coarse_mhz = 230.46875;
  spec.injector.multiplier = 2.0;
  spec.injector.satellite_fraction = 0.55;
  const auto result = synth::generate(spec);
  cfg.master_seed = 7000;
  const auto t3 =
      analysis::t3_satellite_ratios(result.catalogue, cfg, 230.46875, 22, 5);
  const auto t2 = analysis::t2_adjacent_bin(result.catalogue, cfg, 230.46875, 22, 0.95);
  const double decile_ratio = t3.top_decile_mean / t3.bottom_half_mean;
  const bool injector_ok =
      decile_ratio > 1.5 && t2.z_below < 3.0 && t2.z_above < 3.0;

  const bool pass = reversal_ok >= 45 && null_excess_ok >= 45 && null_fine_ok >= 45 &&
                    injector_ok;
  line("A9", pass,
       fmt("reversal CIs exclude unity %d/50 (>= 45); null excess covers unity "
           "%d/50 (>= 45); null fine max|z| under threshold %d/50 (>= 45); "
           "injector decile ratio %.2f (> 1.5) with adjacent z %.2f / %.2f (< 3)",
           reversal_ok, null_excess_ok, null_fine_ok, decile_ratio, t2.z_below,
           t2.z_above));
}

// --- A10: optional real-catalogue tier ------------------------------------------

void a10_real(const std::string& detections_path, const std::string& bus_path) {
  if (detections_path.empty() || bus_path.empty()) {
    skip("A10", "public catalogue not supplied (use --catalogue and --bus); "
                "A1-A9 constitute acceptance");
    return;
  }
  std::ifstream det(detections_path);
  std::ifstream bus(bus_path);
  if (!det || !bus) {
    line("A10", false, "cannot open the supplied catalogue files");
    return;
  }

  Catalogue cat = parse_detections(det);
  classify(cat, parse_bus_table(bus));
  apply_quality_cuts(cat);
  compute_range_corrected(cat);
  geo::tag_catalogue(cat);

  analysis::AnalysisConfig cfg;  // paper defaults, B = 2000
  bool pass = true;
  std::string notes;

  const auto check = [&](bool ok, const std::string& what) {
    pass = pass && ok;
    if (!ok) notes += " [" + what + "]";
  };

  check(cat.stacked_count(Population::DTC) == 10180, "DTC stacked 10180");
  check(cat.stacked_count(Population::KuOnly) == 102197, "Ku stacked 102197");
  check(cat.stacked_count(Population::V1x) == 157, "V1x stacked 157");
  std::int64_t dtc_sats = 0, ku_sats = 0;
  for (const auto& [norad, rec] : cat.satellites) {
    dtc_sats += rec.population == Population::DTC;
    ku_sats += rec.population == Population::KuOnly;
  }
  check(dtc_sats == 175, "DTC satellites 175");
  check(ku_sats == 1623, "Ku satellites 1623");

  const auto excess = analysis::dtc_excess(cat, cfg);
  const auto& headline = excess.reductions[3];
  check(std::abs(headline.ratio.estimate - 1.449) <= 0.01, "headline 1.449");
  check(std::abs(headline.ratio.ci_low - 1.27) <= 0.03 &&
            std::abs(headline.ratio.ci_high - 1.67) <= 0.03,
        "headline CI");
  check(std::abs(headline.mwu.cliffs_delta - 0.303) <= 0.002, "delta 0.303");

  const auto pol = analysis::polarisation_anomaly(cat, cfg, stats::BaselineMode::Pooled);
  const std::vector<double> f_xx_expected{
      0.528, 0.442, 0.498, 0.430, 0.466, 0.460, 0.458, 0.475, 0.554, 0.499, 0.461,
      0.418, 0.444, 0.471, 0.518, 0.519, 0.503, 0.476, 0.572, 0.811, 0.371};
  bool fxx_ok = pol.channels.size() == f_xx_expected.size();
  for (std::size_t i = 0; fxx_ok && i < pol.channels.size(); ++i)
    fxx_ok = std::abs(pol.channels[i].f_xx - f_xx_expected[i]) < 5e-4;
  check(fxx_ok, "f_XX column to 3 decimals");

  const auto eclipse = analysis::eclipse_analysis(cat, cfg);
  const double targets[4] = {1.164, 0.465, 1.184, 1.188};
  for (int i = 0; i < 4; ++i) {
    const auto& dl = eclipse.populations[i].detection_level;
    check(dl && std::abs(dl->estimate - targets[i]) <= 0.005,
          fmt("eclipse ratio %d", i));
  }

  const auto fine = analysis::fine_channel_scan(cat, cfg, cfg.target_freq_mhz, 22);
  check(std::abs(fine.z_target - 11.0) <= 0.2, "fine-22 z 11.0");

  const auto t2 = analysis::t2_adjacent_bin(cat, cfg, cfg.target_freq_mhz, 22, 0.95);
  check(std::abs(t2.z_target - 25.4) <= 0.3, "t2 z22 +25.4");

  const auto t3 = analysis::t3_satellite_ratios(cat, cfg, cfg.target_freq_mhz, 22, 5);
  check(std::abs(t3.median_r - 1.07) <= 0.02, "t3 median 1.07");
  check(std::abs(t3.p95_r - 1.79) <= 0.02, "t3 p95 1.79");
  check(std::abs(t3.max_r - 3.75) <= 0.02, "t3 max 3.75");

  line("A10", pass, "real-catalogue reproduction" + (notes.empty() ? "" : notes));
}

}  // namespace

int main(int argc, char** argv) {
  std::string detections_path, bus_path;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--catalogue") == 0 && i + 1 < argc)
      detections_path = argv[++i];
    else if (std::strcmp(argv[i], "--bus") == 0 && i + 1 < argc)
      bus_path = argv[++i];
  }

  a1_wilson();
  a2_binomial();
  a3_bh_count();
  a4_t1();
  a5_time_average();
  a6_thermal();
  a7_statistical_oracles();
  a8_geometry();
  a9_synthetic();
  a10_real(detections_path, bus_path);

  if (g_failures > 0) std::printf("%d criterion(s) FAILED\n", g_failures);
  else std::printf("all criteria passed\n");
  return g_failures == 0 ? 0 : 1;
}
