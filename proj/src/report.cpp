#include "uemr/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace uemr::report {

namespace {

constexpr const char* kSchemaVersion = "1";

nlohmann::json config_echo(const analysis::AnalysisConfig& cfg) {
  nlohmann::json j;
  j["n_resamples"] = cfg.n_resamples;
  j["q"] = cfg.q;
  j["z"] = cfg.z;
  j["master_seed"] = cfg.master_seed;
  j["r_ref_km"] = cfg.r_ref_km;
  j["target_freq_mhz"] = cfg.target_freq_mhz;
  j["target_fine_index"] = cfg.target_fine_index;
  j["fine_basis"] =
      cfg.fine_basis == FluxBasis::Raw ? "raw" : "range_corrected";
  return j;
}

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

nlohmann::json to_json(const stats::RatioWithCI& r) {
  return {{"estimate", r.estimate},
          {"ci_low", r.ci_low},
          {"ci_high", r.ci_high},
          {"n_resamples", r.n_resamples},
          {"n_excluded", r.n_excluded},
          {"resample_unit",
           r.resample_unit == stats::ResampleUnit::Satellite ? "satellite" : "detection"},
          {"seed", r.seed}};
}

nlohmann::json to_json(const stats::MwuResult& r) {
  return {{"u", r.u_statistic},
          {"p_two_sided", r.p_two_sided},
          {"method", r.method == stats::MwuMethod::Exact ? "exact" : "normal"},
          {"n_x", r.n_x},
          {"n_y", r.n_y},
          {"cliffs_delta", r.cliffs_delta}};
}

nlohmann::json to_json(const stats::InteractionResult& r) {
  return {{"diff", r.diff},
          {"diff_ci", {r.diff_low, r.diff_high}},
          {"ratio_of_ratios", r.ratio_of_ratios},
          {"ratio_of_ratios_ci", {r.rr_low, r.rr_high}},
          {"p_two_sided", r.p_two_sided},
          {"n_resamples", r.n_resamples},
          {"n_excluded", r.n_excluded},
          {"seed", r.seed}};
}

nlohmann::json to_json(const stats::ChannelTestResult& r) {
  return {{"freq_mhz", r.freq_mhz},
          {"n_total", r.n_total},
          {"n_xx", r.n_xx},
          {"f_xx", r.f_xx},
          {"deviation", r.deviation},
          {"p_two_sided", r.p_two_sided},
          {"log10_p", r.log10_p},
          {"wilson_low", r.wilson_low},
          {"wilson_high", r.wilson_high},
          {"bh_significant", r.bh_significant},
          {"baseline_used", r.baseline_used},
          {"baseline_mode",
           r.baseline_mode == stats::BaselineMode::Pooled ? "pooled" : "leave_one_out"}};
}

nlohmann::json excess_document(const analysis::ExcessReport& r,
                               const analysis::AnalysisConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["analysis"] = "excess";
  j["config"] = config_echo(cfg);
  j["headline"] = "norm_per_satellite";
  j["populations"] = nlohmann::json::array();
  for (const auto& p : r.populations)
    j["populations"].push_back({{"label", p.label},
                                {"satellites", p.satellites},
                                {"stacked_detections", p.stacked_detections}});
  for (const auto& red : r.reductions) {
    nlohmann::json jr;
    jr["ratio"] = to_json(red.ratio);
    jr["mwu"] = to_json(red.mwu);
    j["reductions"][analysis::to_string(red.reduction)] = jr;
  }
  j["per_channel"] = nlohmann::json::array();
  for (const auto& row : r.per_channel) {
    j["per_channel"].push_back({{"freq_mhz", row.freq_mhz},
                                {"n_dtc", row.n_dtc},
                                {"n_ku", row.n_ku},
                                {"ratio", row.ratio},
                                {"ks_p", row.ks_p},
                                {"mwu_p", row.mwu_p},
                                {"cliffs_delta", row.cliffs_delta}});
  }
  return j;
}

nlohmann::json polarisation_document(const analysis::PolarisationReport& r,
                                     const analysis::AnalysisConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["analysis"] = "polarisation";
  j["config"] = config_echo(cfg);
  j["baseline_mode"] =
      r.baseline_mode == stats::BaselineMode::Pooled ? "pooled" : "leave_one_out";
  j["pooled_baseline"] = r.pooled_baseline;
  j["n_flagged"] = r.n_flagged;
  j["n_channels"] = r.channels.size();
  j["channels"] = nlohmann::json::array();
  for (const auto& c : r.channels) j["channels"].push_back(to_json(c));
  return j;
}

nlohmann::json fine_channel_document(const analysis::FineChannelReport& r,
                                     const std::vector<analysis::ControlChannelZ>& controls,
                                     const analysis::AnalysisConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["analysis"] = "fine_channel";
  j["config"] = config_echo(cfg);
  j["coarse_freq_mhz"] = r.coarse_freq_mhz;
  j["target_index"] = r.target_index;
  j["z_target"] = r.z_target;
  j["inter_bin_mu"] = r.inter_bin_mu;
  j["inter_bin_sigma"] = r.inter_bin_sigma;
  j["bonferroni_threshold"] = r.bonferroni_threshold;
  j["per_bin"] = nlohmann::json::array();
  for (const auto& bin : r.per_bin) {
    j["per_bin"].push_back({{"index", bin.index},
                            {"n", bin.n},
                            {"mean", bin.mean},
                            {"median", bin.median},
                            {"p95", bin.p95},
                            {"xx_fraction", bin.xx_fraction}});
  }
  j["controls"] = nlohmann::json::array();
  for (const auto& c : controls)
    j["controls"].push_back({{"freq_mhz", c.freq_mhz}, {"z", c.z}});
  return j;
}

namespace {

nlohmann::json t1_json(const analysis::T1Result& t1) {
  nlohmann::json j;
  j["target_mhz"] = t1.target_mhz;
  j["tol_khz"] = t1.tol_khz;
  j["observed_matches"] = t1.observed_matches;
  j["expected_chance"] = t1.expected_chance;
  j["dedup_expected"] = t1.dedup_expected;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : t1.rows) {
    j["rows"].push_back({{"fundamental_khz", row.fundamental_khz},
                         {"best_harmonic", row.best_harmonic},
                         {"predicted_mhz", row.predicted_mhz},
                         {"residual_khz", row.residual_khz},
                         {"matched", row.matched}});
  }
  return j;
}

}  // namespace

nlohmann::json mechanism_document(const analysis::MechanismReport& r,
                                  const analysis::AnalysisConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["analysis"] = "mechanism";
  j["config"] = config_echo(cfg);
  j["t1"] = t1_json(r.t1);
  j["t1_crystal"] = t1_json(r.t1_crystal);
  j["t2"] = {{"p95_cut", r.t2.p95_cut},
             {"n_bright", r.t2.n_bright},
             {"baseline_mu", r.t2.baseline_mu},
             {"baseline_sigma", r.t2.baseline_sigma},
             {"z_below", r.t2.z_below},
             {"z_target", r.t2.z_target},
             {"z_above", r.t2.z_above}};
  nlohmann::json t3;
  t3["n_satellites"] = r.t3.n_satellites;
  t3["median_r"] = r.t3.median_r;
  t3["mean_r"] = r.t3.mean_r;
  t3["p95_r"] = r.t3.p95_r;
  t3["max_r"] = r.t3.max_r;
  t3["n_over_2"] = r.t3.n_over_2;
  t3["z_target_excluding"] = r.t3.z_target_excluding;
  t3["top_decile_mean"] = r.t3.top_decile_mean;
  t3["bottom_half_mean"] = r.t3.bottom_half_mean;
  t3["frac_over_1_05"] = r.t3.frac_over_105;
  t3["per_satellite"] = nlohmann::json::array();
  for (const auto& [norad, ratio] : r.t3.per_satellite)
    t3["per_satellite"].push_back({{"norad_id", norad}, {"ratio", ratio}});
  j["t3"] = t3;
  return j;
}

nlohmann::json eclipse_document(const analysis::EclipseReport& r,
                                const analysis::AnalysisConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["analysis"] = "eclipse";
  j["config"] = config_echo(cfg);
  for (const auto& pop : r.populations) {
    nlohmann::json jp;
    jp["n_illuminated"] = pop.n_illuminated;
    jp["n_eclipsed"] = pop.n_eclipsed;
    jp["sats_illuminated"] = pop.sats_illuminated;
    jp["sats_eclipsed"] = pop.sats_eclipsed;
    jp["detection_level"] =
        pop.detection_level ? to_json(*pop.detection_level) : nlohmann::json();
    jp["satellite_level"] =
        pop.satellite_level ? to_json(*pop.satellite_level) : nlohmann::json();
    j["populations"][pop.label] = jp;
  }
  j["interaction"] = r.interaction ? to_json(*r.interaction) : nlohmann::json();
  j["time_avg_factor"] = r.time_avg_factor ? nlohmann::json(*r.time_avg_factor)
                                           : nlohmann::json();
  j["per_satellite_median_ratio_dtc"] =
      r.per_satellite_median_ratio_dtc ? nlohmann::json(*r.per_satellite_median_ratio_dtc)
                                       : nlohmann::json();

  const auto strata = [](const std::vector<analysis::StratumRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
      arr.push_back({{"population", row.population},
                     {"bin_low", row.bin_low},
                     {"bin_high", row.bin_high},
                     {"n_illuminated", row.n_illuminated},
                     {"n_eclipsed", row.n_eclipsed},
                     {"ratio", row.ratio}});
    }
    return arr;
  };
  j["altitude_strata"] = strata(r.altitude_strata);
  j["latitude_strata"] = strata(r.latitude_strata);
  j["frequency_strata"] = strata(r.frequency_strata);

  const auto per_sat = [](const std::vector<std::pair<std::int64_t, double>>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [norad, ratio] : rows)
      arr.push_back({{"norad_id", norad}, {"ratio", ratio}});
    return arr;
  };
  j["per_satellite_dtc"] = per_sat(r.per_satellite_dtc);
  j["per_satellite_ku"] = per_sat(r.per_satellite_ku);
  return j;
}

nlohmann::json thermal_document(double flux_jy, double emissivity, double temperature_k,
                                double area_m2, double wavelength_m, double range_m) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["analysis"] = "thermal";
  j["flux_jy"] = flux_jy;
  j["emissivity"] = emissivity;
  j["temperature_k"] = temperature_k;
  j["area_m2"] = area_m2;
  j["wavelength_m"] = wavelength_m;
  j["range_m"] = range_m;
  return j;
}

nlohmann::json dynspec_document(const analysis::DynamicSpectrum& r) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["analysis"] = "dynspec";
  j["norad_id"] = r.norad_id;
  j["coarse_freq_mhz"] = r.coarse_freq_mhz;
  j["n_passes"] = r.n_passes;
  j["duration_s"] = r.duration_s;
  j["epochs"] = r.epochs;
  j["elevation_deg"] = r.elevation_deg;
  j["time_marginal"] = r.time_marginal;
  j["freq_marginal"] = r.freq_marginal;
  j["matrix"] = nlohmann::json::array();
  for (const auto& row : r.matrix) j["matrix"].push_back(row);
  return j;
}

// ---------------------------------------------------------------------------
// markdown rendering (no recomputation)

namespace {

nlohmann::json load_or_null(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) return nlohmann::json();
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  return j.is_discarded() ? nlohmann::json() : j;
}

void render_excess(std::ostringstream& md, const nlohmann::json& j,
                   const nlohmann::json& truth) {
  if (j.contains("populations") && !j["populations"].empty()) {
    md << "## Populations\n\n| population | N_sat | N_det |\n|---|---|---|\n";
    for (const auto& p : j["populations"]) {
      md << "| " << p["label"].get<std::string>() << " | "
         << p["satellites"].get<long long>() << " | "
         << p["stacked_detections"].get<long long>() << " |\n";
    }
    md << "\n";
  }

  md << "## Per-satellite excess\n\n";
  if (!truth.is_null() && truth.contains("populations")) {
    double mu_dtc = 0.0, mu_ku = 0.0;
    for (const auto& p : truth["populations"]) {
      if (p.value("bus_label", "") == "V2MD") mu_dtc = p.value("median_s_norm_jy", 0.0);
      if (p.value("bus_label", "") == "V2M") mu_ku = p.value("median_s_norm_jy", 0.0);
    }
    if (mu_dtc > 0.0 && mu_ku > 0.0)
      md << "Generator truth: population median ratio " << fmt(mu_dtc / mu_ku, "%.3f")
         << "\n\n";
  }
  md << "| reduction | ratio | 95% CI | MWU p | Cliff's delta |\n";
  md << "|---|---|---|---|---|\n";
  for (const auto& name : {"raw_per_detection", "norm_per_detection",
                           "raw_per_satellite", "norm_per_satellite"}) {
    if (!j["reductions"].contains(name)) continue;
    const auto& red = j["reductions"][name];
    const auto& ratio = red["ratio"];
    const auto& mwu = red["mwu"];
    md << "| " << name << (std::string(name) == j.value("headline", "") ? " (headline)" : "")
       << " | " << fmt(ratio["estimate"].get<double>())
       << " | [" << fmt(ratio["ci_low"].get<double>()) << ", "
       << fmt(ratio["ci_high"].get<double>()) << "]"
       << " | " << fmt(mwu["p_two_sided"].get<double>(), "%.3g")
       << " | " << fmt(mwu["cliffs_delta"].get<double>(), "%+.3f") << " |\n";
  }
  md << "\n### Per-channel ratios\n\n";
  md << "| f [MHz] | N_dtc | N_ku | ratio | KS p | MWU p | delta |\n";
  md << "|---|---|---|---|---|---|---|\n";
  for (const auto& row : j["per_channel"]) {
    md << "| " << fmt(row["freq_mhz"].get<double>(), "%.2f") << " | "
       << row["n_dtc"].get<long long>() << " | " << row["n_ku"].get<long long>() << " | "
       << fmt(row["ratio"].get<double>(), "%.2f") << " | "
       << fmt(row["ks_p"].get<double>(), "%.2g") << " | "
       << fmt(row["mwu_p"].get<double>(), "%.2g") << " | "
       << fmt(row["cliffs_delta"].get<double>(), "%+.2f") << " |\n";
  }
  md << "\n";
}

void render_polarisation(std::ostringstream& md, const nlohmann::json& j) {
  md << "## Polarisation anomalies (baseline " << j.value("baseline_mode", "?")
     << " = " << fmt(j.value("pooled_baseline", 0.0)) << ")\n\n";
  md << "| f [MHz] | N | f_XX | deviation | p | Wilson 95% | BH |\n";
  md << "|---|---|---|---|---|---|---|\n";
  for (const auto& c : j["channels"]) {
    md << "| " << fmt(c["freq_mhz"].get<double>(), "%.2f") << " | "
       << c["n_total"].get<long long>() << " | "
       << fmt(c["f_xx"].get<double>(), "%.3f") << " | "
       << fmt(c["deviation"].get<double>(), "%+.3f") << " | "
       << fmt(c["p_two_sided"].get<double>(), "%.2g") << " | ["
       << fmt(c["wilson_low"].get<double>(), "%.3f") << ", "
       << fmt(c["wilson_high"].get<double>(), "%.3f") << "] | "
       << (c["bh_significant"].get<bool>() ? "yes" : "") << " |\n";
  }
  md << "\nFlagged " << j.value("n_flagged", 0) << "/" << j["channels"].size()
     << " channels.\n\n";
}

void render_fine(std::ostringstream& md, const nlohmann::json& j) {
  md << "## Fine-channel scan at " << fmt(j.value("coarse_freq_mhz", 0.0), "%.3f")
     << " MHz\n\n";
  md << "Target bin " << j.value("target_index", 0) << ": z = "
     << fmt(j.value("z_target", 0.0), "%.2f") << " against "
     << fmt(j.value("inter_bin_mu", 0.0)) << " +- " << fmt(j.value("inter_bin_sigma", 0.0))
     << " (threshold " << fmt(j.value("bonferroni_threshold", 0.0), "%.2f") << ")\n\n";
  if (j.contains("controls") && !j["controls"].empty()) {
    md << "| control [MHz] | z |\n|---|---|\n";
    for (const auto& c : j["controls"])
      md << "| " << fmt(c["freq_mhz"].get<double>(), "%.2f") << " | "
         << fmt(c["z"].get<double>(), "%+.2f") << " |\n";
    md << "\n";
  }
}

void render_mechanism(std::ostringstream& md, const nlohmann::json& j) {
  md << "## Mechanism-discrimination tests\n\n";
  const auto& t1 = j["t1"];
  md << "T1: " << t1.value("observed_matches", 0) << " matches, expected "
     << fmt(t1.value("expected_chance", 0.0), "%.2f") << " (dedup "
     << fmt(t1.value("dedup_expected", 0.0), "%.2f") << ") at tol "
     << fmt(t1.value("tol_khz", 0.0), "%.3f") << " kHz\n\n";
  const auto& t2 = j["t2"];
  md << "T2: bright N = " << t2.value("n_bright", 0) << ", z(target) = "
     << fmt(t2.value("z_target", 0.0), "%+.1f") << ", adjacent z = "
     << fmt(t2.value("z_below", 0.0), "%+.2f") << " / "
     << fmt(t2.value("z_above", 0.0), "%+.2f") << "\n\n";
  const auto& t3 = j["t3"];
  md << "T3: " << t3.value("n_satellites", 0) << " satellites, median R = "
     << fmt(t3.value("median_r", 0.0), "%.2f") << ", max R = "
     << fmt(t3.value("max_r", 0.0), "%.2f") << ", R>2: " << t3.value("n_over_2", 0)
     << ", z excluding = " << fmt(t3.value("z_target_excluding", 0.0), "%+.2f")
     << ", top-decile mean = " << fmt(t3.value("top_decile_mean", 0.0), "%.2f")
     << ", bottom-half mean = " << fmt(t3.value("bottom_half_mean", 0.0), "%.2f")
     << "\n\n";
}

void render_eclipse(std::ostringstream& md, const nlohmann::json& j,
                    const nlohmann::json& truth) {
  // truth ratios keyed by the population label, when a generator run is present
  std::map<std::string, double> truth_ratio;
  if (!truth.is_null() && truth.contains("populations")) {
    for (const auto& p : truth["populations"]) {
      const std::string bus = p.value("bus_label", "");
      const double r = p.value("illum_over_ecl_ratio", 0.0);
      if (bus == "V2MD") truth_ratio["DTC"] = r;
      if (bus == "V2M") truth_ratio["KuOnly"] = truth_ratio["MatchedKu"] = r;
    }
  }

  md << "## Eclipse-state ratios\n\n";
  md << "| population | N_ill / N_ecl | detection-level | satellite-level |";
  md << (truth_ratio.empty() ? "\n|---|---|---|---|\n" : " truth |\n|---|---|---|---|---|\n");
  for (const auto& name : {"Pooled", "DTC", "KuOnly", "MatchedKu"}) {
    if (!j["populations"].contains(name)) continue;
    const auto& p = j["populations"][name];
    md << "| " << name << " | " << p["n_illuminated"].get<long long>() << " / "
       << p["n_eclipsed"].get<long long>() << " | ";
    const auto render_ratio = [&](const nlohmann::json& r) {
      if (r.is_null()) md << "undefined";
      else
        md << fmt(r["estimate"].get<double>(), "%.3f") << " ["
           << fmt(r["ci_low"].get<double>(), "%.3f") << ", "
           << fmt(r["ci_high"].get<double>(), "%.3f") << "]";
    };
    render_ratio(p["detection_level"]);
    md << " | ";
    render_ratio(p["satellite_level"]);
    if (!truth_ratio.empty()) {
      md << " | ";
      if (truth_ratio.count(name)) md << fmt(truth_ratio.at(name), "%.3f");
    }
    md << " |\n";
  }
  if (!j["interaction"].is_null()) {
    const auto& i = j["interaction"];
    md << "\nInteraction: diff = " << fmt(i["diff"].get<double>(), "%.2f") << " ["
       << fmt(i["diff_ci"][0].get<double>(), "%.2f") << ", "
       << fmt(i["diff_ci"][1].get<double>(), "%.2f") << "], ratio of ratios = "
       << fmt(i["ratio_of_ratios"].get<double>(), "%.2f") << ", p = "
       << fmt(i["p_two_sided"].get<double>(), "%.2g") << "\n";
  }
  if (!j["time_avg_factor"].is_null())
    md << "\nTime-averaged factor: " << fmt(j["time_avg_factor"].get<double>(), "%.3f")
       << "\n";
  if (!j["per_satellite_median_ratio_dtc"].is_null())
    md << "\nMedian of DTC per-satellite ratios: "
       << fmt(j["per_satellite_median_ratio_dtc"].get<double>(), "%.3f")
       << " (distinct from the population ratio of medians above)\n";

  if (j.contains("altitude_strata") && !j["altitude_strata"].empty()) {
    md << "\n### Altitude strata\n\n| population | bin [km] | N_ill | N_ecl | ratio |\n"
       << "|---|---|---|---|---|\n";
    for (const auto& s : j["altitude_strata"]) {
      md << "| " << s["population"].get<std::string>() << " | "
         << fmt(s["bin_low"].get<double>(), "%.0f") << "-"
         << fmt(s["bin_high"].get<double>(), "%.0f") << " | "
         << s["n_illuminated"].get<long long>() << " | "
         << s["n_eclipsed"].get<long long>() << " | "
         << fmt(s["ratio"].get<double>(), "%.3f") << " |\n";
    }
  }
  md << "\n";
}

void render_summary(std::ostringstream& md, const nlohmann::json& excess,
                    const nlohmann::json& pol, const nlohmann::json& eclipse) {
  md << "## Effect-size summary\n\n";
  md << "| effect | estimate | interval |\n|---|---|---|\n";
  if (!excess.is_null() && excess["reductions"].contains("norm_per_satellite")) {
    const auto& r = excess["reductions"]["norm_per_satellite"]["ratio"];
    md << "| DTC/Ku per-satellite median ratio | "
       << fmt(r["estimate"].get<double>(), "%.3f") << " | ["
       << fmt(r["ci_low"].get<double>(), "%.3f") << ", "
       << fmt(r["ci_high"].get<double>(), "%.3f") << "] |\n";
  }
  if (!pol.is_null()) {
    double best_dev = 0.0;
    nlohmann::json best;
    for (const auto& c : pol["channels"]) {
      if (std::abs(c["deviation"].get<double>()) > std::abs(best_dev)) {
        best_dev = c["deviation"].get<double>();
        best = c;
      }
    }
    if (!best.is_null())
      md << "| largest XX-fraction deviation ("
         << fmt(best["freq_mhz"].get<double>(), "%.2f") << " MHz) | "
         << fmt(best["f_xx"].get<double>(), "%.3f") << " | ["
         << fmt(best["wilson_low"].get<double>(), "%.3f") << ", "
         << fmt(best["wilson_high"].get<double>(), "%.3f") << "] |\n";
    md << "| BH-significant channels | " << pol.value("n_flagged", 0) << "/"
       << pol["channels"].size() << " | |\n";
  }
  if (!eclipse.is_null()) {
    for (const auto& name : {"DTC", "KuOnly", "Pooled"}) {
      if (!eclipse["populations"].contains(name)) continue;
      const auto& r = eclipse["populations"][name]["detection_level"];
      if (r.is_null()) continue;
      md << "| " << name << " illuminated/eclipsed ratio | "
         << fmt(r["estimate"].get<double>(), "%.3f") << " | ["
         << fmt(r["ci_low"].get<double>(), "%.3f") << ", "
         << fmt(r["ci_high"].get<double>(), "%.3f") << "] |\n";
    }
  }
  md << "\n";
}

}  // namespace

std::vector<std::string> write_csv_tables(const std::string& analysis_dir,
                                          const nlohmann::json& doc) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  const auto table = [&](const std::string& name, const std::string& header,
                         const nlohmann::json& rows, auto&& emit) {
    const fs::path path = fs::path(analysis_dir) / name;
    std::ofstream out(path);
    out << header << "\n";
    for (const auto& row : rows) emit(out, row);
    written.push_back(path.string());
  };
  const std::string analysis = doc.value("analysis", "");

  if (analysis == "excess" && doc.contains("per_channel")) {
    table("excess_per_channel.csv",
          "freq_mhz,n_dtc,n_ku,ratio,ks_p,mwu_p,cliffs_delta", doc["per_channel"],
          [](std::ofstream& out, const nlohmann::json& r) {
            out << r["freq_mhz"].get<double>() << ',' << r["n_dtc"].get<long long>()
                << ',' << r["n_ku"].get<long long>() << ',' << r["ratio"].get<double>()
                << ',' << r["ks_p"].get<double>() << ',' << r["mwu_p"].get<double>()
                << ',' << r["cliffs_delta"].get<double>() << '\n';
          });
  } else if (analysis == "polarisation" && doc.contains("channels")) {
    table("polarisation_channels.csv",
          "freq_mhz,n_total,n_xx,f_xx,deviation,p_two_sided,log10_p,wilson_low,"
          "wilson_high,bh_significant,baseline_used",
          doc["channels"], [](std::ofstream& out, const nlohmann::json& c) {
            out << c["freq_mhz"].get<double>() << ',' << c["n_total"].get<long long>()
                << ',' << c["n_xx"].get<long long>() << ',' << c["f_xx"].get<double>()
                << ',' << c["deviation"].get<double>() << ','
                << c["p_two_sided"].get<double>() << ',' << c["log10_p"].get<double>()
                << ',' << c["wilson_low"].get<double>() << ','
                << c["wilson_high"].get<double>() << ','
                << (c["bh_significant"].get<bool>() ? 1 : 0) << ','
                << c["baseline_used"].get<double>() << '\n';
          });
  } else if (analysis == "fine_channel" && doc.contains("per_bin")) {
    table("fine_channel_bins.csv", "index,n,mean,median,p95,xx_fraction",
          doc["per_bin"], [](std::ofstream& out, const nlohmann::json& b) {
            out << b["index"].get<int>() << ',' << b["n"].get<long long>() << ','
                << b["mean"].get<double>() << ',' << b["median"].get<double>() << ','
                << b["p95"].get<double>() << ',' << b["xx_fraction"].get<double>()
                << '\n';
          });
    if (doc.contains("controls"))
      table("fine_channel_controls.csv", "freq_mhz,z", doc["controls"],
            [](std::ofstream& out, const nlohmann::json& c) {
              out << c["freq_mhz"].get<double>() << ',' << c["z"].get<double>() << '\n';
            });
  } else if (analysis == "mechanism") {
    if (doc.contains("t1") && doc["t1"].contains("rows"))
      table("mechanism_t1.csv",
            "fundamental_khz,best_harmonic,predicted_mhz,residual_khz,matched",
            doc["t1"]["rows"], [](std::ofstream& out, const nlohmann::json& r) {
              out << r["fundamental_khz"].get<double>() << ','
                  << r["best_harmonic"].get<long long>() << ','
                  << r["predicted_mhz"].get<double>() << ','
                  << r["residual_khz"].get<double>() << ','
                  << (r["matched"].get<bool>() ? 1 : 0) << '\n';
            });
    if (doc.contains("t3") && doc["t3"].contains("per_satellite"))
      table("mechanism_t3_satellites.csv", "norad_id,ratio", doc["t3"]["per_satellite"],
            [](std::ofstream& out, const nlohmann::json& r) {
              out << r["norad_id"].get<long long>() << ',' << r["ratio"].get<double>()
                  << '\n';
            });
  } else if (analysis == "eclipse") {
    for (const char* strata : {"altitude_strata", "latitude_strata", "frequency_strata"}) {
      if (!doc.contains(strata) || doc[strata].empty()) continue;
      table(std::string("eclipse_") + strata + ".csv",
            "population,bin_low,bin_high,n_illuminated,n_eclipsed,ratio", doc[strata],
            [](std::ofstream& out, const nlohmann::json& s) {
              out << s["population"].get<std::string>() << ','
                  << s["bin_low"].get<double>() << ',' << s["bin_high"].get<double>()
                  << ',' << s["n_illuminated"].get<long long>() << ','
                  << s["n_eclipsed"].get<long long>() << ',' << s["ratio"].get<double>()
                  << '\n';
            });
    }
    if (doc.contains("per_satellite_dtc"))
      table("eclipse_per_satellite_dtc.csv", "norad_id,ratio", doc["per_satellite_dtc"],
            [](std::ofstream& out, const nlohmann::json& r) {
              out << r["norad_id"].get<long long>() << ',' << r["ratio"].get<double>()
                  << '\n';
            });
  } else if (analysis == "dynspec" && doc.contains("matrix")) {
    const fs::path path = fs::path(analysis_dir) / "dynspec_matrix.csv";
    std::ofstream out(path);
    out << "epoch_unix,elevation_deg,time_marginal";
    for (int b = 0; b < 31; ++b) out << ",bin" << b;
    out << "\n";
    for (std::size_t i = 0; i < doc["matrix"].size(); ++i) {
      out << doc["epochs"][i].get<double>() << ','
          << doc["elevation_deg"][i].get<double>() << ','
          << doc["time_marginal"][i].get<double>();
      for (const auto& cell : doc["matrix"][i]) {
        out << ',';
        if (!cell.is_null()) out << cell.get<double>();
      }
      out << "\n";
    }
    written.push_back(path.string());
  }
  return written;
}

std::string render_markdown(const std::string& analysis_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(analysis_dir);

  const nlohmann::json excess = load_or_null(dir / "excess.json");
  const nlohmann::json pol = load_or_null(dir / "polarisation.json");
  const nlohmann::json fine = load_or_null(dir / "fine_channel.json");
  const nlohmann::json mech = load_or_null(dir / "mechanism.json");
  const nlohmann::json eclipse = load_or_null(dir / "eclipse.json");
  const nlohmann::json thermal = load_or_null(dir / "thermal.json");
  // generator ground truth rides along when the run came from a synthetic fixture
  const nlohmann::json truth = load_or_null(dir / "ground_truth.json");

  std::ostringstream md;
  md << "# Analysis summary\n\n";

  std::vector<std::string> missing;
  for (const auto& [name, doc] :
       {std::pair<const char*, const nlohmann::json*>{"excess.json", &excess},
        {"polarisation.json", &pol},
        {"fine_channel.json", &fine},
        {"mechanism.json", &mech},
        {"eclipse.json", &eclipse},
        {"thermal.json", &thermal}}) {
    if (doc->is_null()) missing.push_back(name);
  }
  if (!missing.empty()) {
    md << "> Warning: missing analysis documents:";
    for (const auto& m : missing) md << " " << m;
    md << "\n\n";
  }

  if (!excess.is_null()) render_excess(md, excess, truth);
  if (!pol.is_null()) render_polarisation(md, pol);
  if (!fine.is_null()) render_fine(md, fine);
  if (!mech.is_null()) render_mechanism(md, mech);
  if (!eclipse.is_null()) render_eclipse(md, eclipse, truth);
  if (!thermal.is_null())
    md << "## Thermal estimate\n\nRayleigh-Jeans flux density: "
       << fmt(thermal.value("flux_jy", 0.0), "%.3g") << " Jy\n\n";
  render_summary(md, excess, pol, eclipse);
  return md.str();
}

}  // namespace uemr::report
