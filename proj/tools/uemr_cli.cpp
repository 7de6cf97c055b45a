// uemr: ingest -> tag -> analyze -> report pipeline over detection catalogues,
// plus a synthetic-catalogue generator for fixtures and calibration runs.
//
// Exit codes: 0 success, 1 usage, 2 input error, 3 analysis error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "uemr/analyses.hpp"
#include "uemr/catalogue.hpp"
#include "uemr/config.hpp"
#include "uemr/report.hpp"
#include "uemr/synth.hpp"
#include "uemr/tagging.hpp"

namespace fs = std::filesystem;
using namespace uemr;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitAnalysis = 3;

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;  // 0 = keep the config value
  bool seed_set = false;
};

Config load_config(const GlobalOpts& g) {
  Config cfg = g.config_path.empty() ? Config() : Config::from_file(g.config_path);
  if (g.seed_set) cfg.set("stats.master_seed", std::to_string(g.seed));
  return cfg;
}

geo::TagParams tag_params(const Config& cfg) {
  geo::TagParams p;
  p.site.lat_deg = cfg.get_double("site.lat_deg", p.site.lat_deg);
  p.site.lon_deg = cfg.get_double("site.lon_deg", p.site.lon_deg);
  p.site.height_m = cfg.get_double("geometry.site_height_m", p.site.height_m);
  p.site.ellipsoid.a_m = cfg.get_double("geometry.wgs84_a_m", p.site.ellipsoid.a_m);
  const double inv_f = cfg.get_double("geometry.wgs84_inv_f", 298.257223563);
  p.site.ellipsoid.f = 1.0 / inv_f;
  p.shadow_radius_m =
      cfg.get_double("geometry.r_earth_shadow_km", 6378.137) * 1000.0;
  return p;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64_hex(ss.str());
}

ColumnMap column_map(const Config& cfg) {
  ColumnMap m;
  m.norad_id = cfg.get_string("columns.norad_id", m.norad_id);
  m.utc = cfg.get_string("columns.utc", m.utc);
  m.freq_mhz = cfg.get_string("columns.freq_mhz", m.freq_mhz);
  m.fine_channel_index =
      cfg.get_string("columns.fine_channel_index", m.fine_channel_index);
  m.pol = cfg.get_string("columns.pol", m.pol);
  m.flux_jy = cfg.get_string("columns.flux_jy", m.flux_jy);
  m.azimuth_deg = cfg.get_string("columns.azimuth_deg", m.azimuth_deg);
  m.elevation_deg = cfg.get_string("columns.elevation_deg", m.elevation_deg);
  m.range_km = cfg.get_string("columns.range_km", m.range_km);
  return m;
}

int cmd_ingest(const GlobalOpts& g, const std::string& detections_path,
               const std::string& bus_path, bool also_tag) {
  const Config cfg = load_config(g);
  std::ifstream det(detections_path);
  if (!det) {
    std::cerr << "error: cannot open " << detections_path << "\n";
    return kExitInput;
  }
  std::ifstream bus(bus_path);
  if (!bus) {
    std::cerr << "error: cannot open " << bus_path << "\n";
    return kExitInput;
  }

  Catalogue cat = parse_detections(det, column_map(cfg));
  cat.provenance.detections_digest = file_digest(detections_path);
  classify(cat, parse_bus_table(bus));
  cat.provenance.bus_digest = file_digest(bus_path);
  apply_quality_cuts(cat);
  compute_range_corrected(cat, cfg.get_double("catalogue.r_ref_km", 1000.0));
  if (also_tag) geo::tag_catalogue(cat, tag_params(cfg));

  fs::create_directories(g.out_dir);
  const std::string out_path = (fs::path(g.out_dir) / "catalogue.csv").string();
  write_canonical(cat, out_path);

  std::cout << "catalogue: " << out_path << "\n";
  std::cout << "stacked detections by population:\n";
  for (const auto& [pop, n] : cat.provenance.population_stacked_counts)
    std::cout << "  " << pop << ": " << n << "\n";
  std::int64_t rejects = 0;
  for (const auto& [reason, n] : cat.provenance.parse_rejects) rejects += n;
  std::cout << "parse rejects: " << rejects << "\n";
  for (const auto& [cut, n] : cat.provenance.cut_tally)
    if (n > 0) std::cout << "  cut " << cut << ": " << n << "\n";
  return 0;
}

int cmd_tag(const GlobalOpts& g, const std::string& catalogue_path) {
  const Config cfg = load_config(g);
  Catalogue cat = read_canonical(catalogue_path);
  const auto summary = geo::tag_catalogue(cat, tag_params(cfg));
  write_canonical(cat, catalogue_path);
  std::cout << "illumination by population (stacked rows):\n";
  for (const auto& [pop, counts] : summary.per_population)
    std::cout << "  " << pop << ": " << counts.illuminated << " illuminated / "
              << counts.eclipsed << " eclipsed (" << counts.fraction_illuminated()
              << " illuminated)\n";
  return 0;
}

void write_doc(const fs::path& dir, const std::string& name, const nlohmann::json& doc,
               bool with_csv) {
  std::ofstream out(dir / name);
  out << doc.dump(2) << "\n";
  std::cout << "wrote " << (dir / name).string() << "\n";
  if (with_csv)
    for (const auto& path : report::write_csv_tables(dir.string(), doc))
      std::cout << "wrote " << path << "\n";
}

int cmd_analyze(const GlobalOpts& g, const std::string& catalogue_path,
                const std::string& which, bool with_csv) {
  const Config cfg = load_config(g);
  const auto acfg = analysis::AnalysisConfig::from_config(cfg);

  static const std::vector<std::string> known = {
      "excess", "polarisation", "fine", "mechanism", "eclipse", "thermal", "dynspec"};
  std::vector<std::string> selected;
  if (which == "all") {
    selected = known;
  } else if (std::find(known.begin(), known.end(), which) != known.end()) {
    selected = {which};
  } else if (which == "t1" || which == "t2" || which == "t3") {
    selected = {"mechanism"};
  } else {
    std::cerr << "usage: unknown analysis '" << which << "' (expected one of: all";
    for (const auto& k : known) std::cerr << " " << k;
    std::cerr << " t1 t2 t3)\n";
    return kExitUsage;
  }

  Catalogue cat = read_canonical(catalogue_path);
  fs::create_directories(g.out_dir);
  const fs::path dir(g.out_dir);

  // eclipse needs illumination tags; tag in memory when the canonical file
  // carries none (the tag subcommand persists them)
  const bool needs_tags =
      std::find(selected.begin(), selected.end(), "eclipse") != selected.end();
  if (needs_tags) {
    const bool tagged =
        !cat.events.empty() && cat.events.front().illum.has_value();
    if (!tagged) geo::tag_catalogue(cat, tag_params(cfg));
  }

  for (const auto& name : selected) {
    if (name == "excess") {
      write_doc(dir, "excess.json",
                report::excess_document(analysis::dtc_excess(cat, acfg), acfg),
                with_csv);
    } else if (name == "polarisation") {
      const auto pooled =
          analysis::polarisation_anomaly(cat, acfg, stats::BaselineMode::Pooled);
      nlohmann::json doc = report::polarisation_document(pooled, acfg);
      const auto loo =
          analysis::polarisation_anomaly(cat, acfg, stats::BaselineMode::LeaveOneOut);
      doc["leave_one_out"] = report::polarisation_document(loo, acfg);
      write_doc(dir, "polarisation.json", doc, with_csv);
    } else if (name == "fine") {
      const auto scan = analysis::fine_channel_scan(cat, acfg, acfg.target_freq_mhz,
                                                    acfg.target_fine_index);
      std::vector<analysis::ControlChannelZ> controls;
      try {
        controls = analysis::cross_channel_control(cat, acfg, acfg.control_freqs_mhz,
                                                   acfg.target_fine_index);
      } catch (const std::exception& e) {
        std::cerr << "note: cross-channel control skipped: " << e.what() << "\n";
      }
      write_doc(dir, "fine_channel.json",
                report::fine_channel_document(scan, controls, acfg), with_csv);
    } else if (name == "mechanism") {
      write_doc(dir, "mechanism.json",
                report::mechanism_document(analysis::mechanism_tests(cat, acfg), acfg),
                with_csv);
    } else if (name == "eclipse") {
      write_doc(dir, "eclipse.json",
                report::eclipse_document(analysis::eclipse_analysis(cat, acfg), acfg),
                with_csv);
    } else if (name == "thermal") {
      const double emissivity = cfg.get_double("thermal.emissivity", 0.3);
      const double temperature = cfg.get_double("thermal.temperature_k", 300.0);
      const double area = cfg.get_double("thermal.area_m2", 100.0);
      const double wavelength = cfg.get_double("thermal.wavelength_m", 1.3);
      const double range = cfg.get_double("thermal.range_m", 1e6);
      write_doc(dir, "thermal.json",
                report::thermal_document(
                    analysis::thermal_flux_estimate(emissivity, temperature, area,
                                                    wavelength, range),
                    emissivity, temperature, area, wavelength, range),
                with_csv);
    } else if (name == "dynspec") {
      std::int64_t norad = acfg.dynspec_norad;
      if (norad == 0) {
        // brightest satellite: most fine rows at the target channel
        std::map<std::int64_t, std::int64_t> counts;
        for (const auto& e : cat.events)
          if (!e.is_stacked() && std::abs(e.freq_mhz - acfg.target_freq_mhz) < 0.5)
            ++counts[e.norad_id];
        for (const auto& [id, n] : counts)
          if (norad == 0 || n > counts[norad]) norad = id;
      }
      if (norad == 0) {
        std::cerr << "note: dynspec skipped, no fine rows at the target channel\n";
        continue;
      }
      write_doc(dir, "dynspec.json",
                report::dynspec_document(analysis::dynamic_spectrum(
                    cat, acfg, norad, acfg.target_freq_mhz)),
                with_csv);
    }
  }
  return 0;
}

int cmd_report(const GlobalOpts& g) {
  const std::string md = report::render_markdown(g.out_dir);
  const fs::path out = fs::path(g.out_dir) / "report.md";
  std::ofstream f(out);
  f << md;
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_synth(const GlobalOpts& g, const std::string& spec_path) {
  Config spec_cfg = Config::from_file(spec_path);
  if (g.seed_set) spec_cfg.set("synth.seed", std::to_string(g.seed));
  fs::create_directories(g.out_dir);
  synth::write_synth_files(synth::synth_spec_from_config(spec_cfg), g.out_dir);
  std::cout << "wrote " << g.out_dir << "/detections.csv, bus_table.csv, ground_truth.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"satellite UEMR catalogue analysis"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "key = value configuration file");
  app.add_option("--out", g.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", g.seed, "override stats.master_seed");

  std::string detections_path, bus_path, catalogue_path = "catalogue.csv";
  std::string which = "all", spec_path;
  bool also_tag = false;
  bool with_csv = false;

  auto* ingest = app.add_subcommand("ingest", "parse, classify, cut, range-correct");
  ingest->add_option("--detections", detections_path, "detections CSV")->required();
  ingest->add_option("--bus", bus_path, "bus classification table")->required();
  ingest->add_flag("--tag", also_tag, "also compute illumination tags");

  auto* tag = app.add_subcommand("tag", "add illumination tags to a canonical catalogue");
  tag->add_option("--catalogue", catalogue_path, "canonical catalogue CSV");

  auto* analyze = app.add_subcommand("analyze", "run analyses, one JSON document each");
  analyze->add_option("--catalogue", catalogue_path, "canonical catalogue CSV");
  analyze->add_option("--which", which, "analysis name or 'all'");
  analyze->add_flag("--csv", with_csv, "also write plot-ready CSV tables");

  auto* rep = app.add_subcommand("report", "render markdown from analysis documents");
  (void)rep;

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic catalogue");
  synth_cmd->add_option("--spec", spec_path, "synthesis spec (key = value)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  g.seed_set = seed_opt->count() > 0;

  try {
    if (ingest->parsed()) return cmd_ingest(g, detections_path, bus_path, also_tag);
    if (tag->parsed()) return cmd_tag(g, catalogue_path);
    if (analyze->parsed()) return cmd_analyze(g, catalogue_path, which, with_csv);
    if (rep->parsed()) return cmd_report(g);
    if (synth_cmd->parsed()) return cmd_synth(g, spec_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::runtime_error& e) {
    // file/parse problems are input errors; anything raised mid-analysis is not
    const std::string what = e.what();
    if (what.find("cannot open") != std::string::npos ||
        what.find("not a canonical") != std::string::npos ||
        what.find("empty input") != std::string::npos) {
      std::cerr << "input error: " << what << "\n";
      return kExitInput;
    }
    std::cerr << "analysis error: " << what << "\n";
    return kExitAnalysis;
  }
  return kExitUsage;
}
