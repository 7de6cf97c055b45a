#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <map>

#include "uemr/analyses.hpp"
#include "uemr/catalogue.hpp"
#include "uemr/geometry.hpp"
#include "uemr/report.hpp"
#include "uemr/rng.hpp"
#include "uemr/stats.hpp"
#include "uemr/synth.hpp"
#include "uemr/tagging.hpp"
#include "uemr/timeutil.hpp"

namespace py = pybind11;
using namespace uemr;

namespace {

double parse_utc_or_throw(const std::string& text) {
  const auto t = parse_utc(text);
  if (!t) throw std::invalid_argument("not an ISO-8601 UTC timestamp: " + text);
  return *t;
}

std::string run_analyses_json(const std::string& canonical_path,
                              const std::string& which,
                              const std::map<std::string, std::string>& overrides) {
  Config cfg;
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  const auto acfg = analysis::AnalysisConfig::from_config(cfg);
  Catalogue cat = read_canonical(canonical_path);

  nlohmann::json out;
  if (which == "excess")
    out = report::excess_document(analysis::dtc_excess(cat, acfg), acfg);
  else if (which == "polarisation")
    out = report::polarisation_document(
        analysis::polarisation_anomaly(cat, acfg, stats::BaselineMode::Pooled), acfg);
  else if (which == "fine") {
    std::vector<analysis::ControlChannelZ> controls;
    try {
      controls = analysis::cross_channel_control(cat, acfg, acfg.control_freqs_mhz,
                                                 acfg.target_fine_index);
    } catch (const std::exception&) {
      // control channels without fine rows are simply absent from the document
    }
    out = report::fine_channel_document(
        analysis::fine_channel_scan(cat, acfg, acfg.target_freq_mhz,
                                    acfg.target_fine_index),
        controls, acfg);
  }
  else if (which == "mechanism")
    out = report::mechanism_document(analysis::mechanism_tests(cat, acfg), acfg);
  else if (which == "eclipse")
    out = report::eclipse_document(analysis::eclipse_analysis(cat, acfg), acfg);
  else
    throw std::invalid_argument("unknown analysis: " + which);
  return out.dump(2);
}

}  // namespace

PYBIND11_MODULE(uemrkit, m) {
  m.doc() = "Satellite UEMR catalogue forensics: range correction, illumination "
            "geometry, rank statistics, bootstrap intervals, and the analysis "
            "battery behind the uemr CLI.";

  // catalogue
  m.def("range_correct", &range_correct, py::arg("s_obs_jy"), py::arg("r_sat_km"),
        py::arg("r_ref_km") = 1000.0);

  // stats
  m.def("mann_whitney", [](const std::vector<double>& x, const std::vector<double>& y) {
    const auto r = stats::mann_whitney(x, y);
    return py::make_tuple(r.u_statistic, r.p_two_sided,
                          r.method == stats::MwuMethod::Exact ? "exact" : "normal",
                          r.cliffs_delta);
  }, "Returns (U, two-sided p, method, Cliff's delta)");
  m.def("cliffs_delta", [](const std::vector<double>& x, const std::vector<double>& y) {
    return stats::cliffs_delta(x, y);
  });
  m.def("bootstrap_median_ratio",
        [](const std::vector<double>& x, const std::vector<double>& y, int b,
           std::uint64_t seed) {
          const auto r = stats::bootstrap_median_ratio(x, y, b, seed);
          return py::make_tuple(r.estimate, r.ci_low, r.ci_high);
        },
        py::arg("x"), py::arg("y"), py::arg("n_resamples") = 2000, py::arg("seed") = 1);
  m.def("binom_two_sided", [](std::int64_t k, std::int64_t n, double p0) {
    const auto r = stats::binom_two_sided(k, n, p0);
    return py::make_tuple(r.p, r.log10_p);
  }, "Returns (p, log10_p)");
  m.def("bh_fdr", [](const std::vector<double>& p, double q) {
    return stats::bh_fdr(p, q);
  }, py::arg("p_values"), py::arg("q") = 0.05);
  m.def("wilson_interval", [](std::int64_t k, std::int64_t n, double z) {
    const auto r = stats::wilson_interval(k, n, z);
    return py::make_tuple(r.low, r.high);
  }, py::arg("k"), py::arg("n"), py::arg("z") = 1.96);
  m.def("derive_seed", &derive_seed, py::arg("master_seed"), py::arg("stream_label"),
        py::arg("counter"));

  // geometry
  m.def("gmst_rad", [](const std::string& utc) {
    return geo::gmst_rad(parse_utc_or_throw(utc));
  });
  m.def("solar_position_ecef", [](const std::string& utc) {
    const auto v = geo::solar_position_ecef(parse_utc_or_throw(utc));
    return py::make_tuple(v.x, v.y, v.z);
  });
  m.def("illumination_state",
        [](double sx, double sy, double sz, double ux, double uy, double uz) {
          const auto tag = geo::illumination_state({sx, sy, sz}, {ux, uy, uz});
          return py::make_tuple(
              tag.state == geo::IlluminationState::Illuminated ? "illuminated"
                                                               : "eclipsed",
              tag.p_parallel_m, tag.p_perp_m);
        },
        "Cylindrical shadow test on ECEF positions in metres");
  m.def("geodetic_to_ecef", [](double lat, double lon, double h) {
    const auto v = geo::geodetic_to_ecef({lat, lon, h});
    return py::make_tuple(v.x, v.y, v.z);
  });
  m.def("ecef_to_geodetic", [](double x, double y, double z) {
    const auto c = geo::ecef_to_geodetic({x, y, z});
    return py::make_tuple(c.lat_deg, c.lon_deg, c.height_m);
  });

  // analyses
  m.def("thermal_flux_estimate", &analysis::thermal_flux_estimate,
        py::arg("emissivity"), py::arg("temperature_k"), py::arg("area_m2"),
        py::arg("wavelength_m"), py::arg("range_m"));
  m.def("eclipse_time_average_factor", &analysis::eclipse_time_average_factor,
        py::arg("n_illuminated"), py::arg("n_eclipsed"), py::arg("illum_over_ecl_ratio"));
  m.def("t1_harmonic_coincidence",
        [](const std::vector<double>& fundamentals_khz, double target_mhz,
           double tol_khz) {
          const auto r = analysis::t1_harmonic_coincidence(fundamentals_khz, target_mhz,
                                                           tol_khz);
          py::list rows;
          for (const auto& row : r.rows)
            rows.append(py::make_tuple(row.fundamental_khz, row.best_harmonic,
                                       row.residual_khz, row.matched));
          return py::make_tuple(r.observed_matches, r.expected_chance, r.dedup_expected,
                                rows);
        },
        py::arg("fundamentals_khz"), py::arg("target_mhz") = 230.627441,
        py::arg("tol_khz") = 12.207);

  // file-level pipeline
  m.def("ingest",
        [](const std::string& detections_csv, const std::string& bus_csv,
           const std::string& out_canonical, double r_ref_km) {
          std::ifstream det(detections_csv);
          if (!det) throw std::runtime_error("cannot open " + detections_csv);
          Catalogue cat = parse_detections(det);
          std::ifstream bus(bus_csv);
          if (!bus) throw std::runtime_error("cannot open " + bus_csv);
          classify(cat, parse_bus_table(bus));
          apply_quality_cuts(cat);
          compute_range_corrected(cat, r_ref_km);
          geo::tag_catalogue(cat);
          write_canonical(cat, out_canonical);
          return cat.stacked_count();
        },
        py::arg("detections_csv"), py::arg("bus_csv"), py::arg("out_canonical"),
        py::arg("r_ref_km") = 1000.0);
  m.def("analyze_json", &run_analyses_json, py::arg("canonical_path"), py::arg("which"),
        py::arg("overrides") = std::map<std::string, std::string>{},
        "Run one analysis on a canonical catalogue, returning its JSON document");

  // synthetic fixtures
  m.def("synth_write",
        [](const std::string& spec_file, const std::string& out_dir) {
          synth::write_synth_files(
              synth::synth_spec_from_config(Config::from_file(spec_file)), out_dir);
        },
        py::arg("spec_file"), py::arg("out_dir"));
}
