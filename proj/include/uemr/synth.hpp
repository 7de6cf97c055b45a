#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "uemr/catalogue.hpp"
#include "uemr/config.hpp"
#include "uemr/geometry.hpp"

namespace uemr::synth {

struct PopulationSynthSpec {
  std::string bus_label;        // classified through the production mapping
  int n_satellites = 0;
  double mean_detections = 50;  // per satellite
  bool poisson_counts = true;   // otherwise fixed at mean_detections
  double flux_mu_log = 3.0;     // ln(S_norm/Jy) location
  double flux_sigma_log = 0.8;  // per-detection scatter
  double sat_sigma_log = 0.3;   // per-satellite lognormal offset
  double eclipse_multiplier = 1.0;  // flux factor applied while eclipsed
  int launch_start_ymd = 20240103;
  int launch_end_ymd = 20241018;
};

struct InjectorSpec {
  int fine_index = -1;  // -1 disables
  double coarse_mhz = 230.46875;
  double multiplier = 2.0;          // target-bin flux factor for expressors
  double satellite_fraction = 0.0;  // fraction of satellites expressing the line
  double detection_fraction = 1.0;  // on-fraction among an expressor's detections
  int width_bins = 1;               // odd; >1 smears the line into neighbours
};

struct BandpassSpec {
  int fine_index = -1;       // -1 disables; applies at the same index in every channel
  double multiplier = 1.3;
};

struct SynthSpec {
  std::uint64_t seed = 1;
  double epoch_start_unix = 0.0;  // defaults to 2024-06-01T00:00:00Z
  double epoch_span_days = 120.0;
  std::vector<double> channels_mhz{150.78125, 161.71875, 230.46875};
  std::vector<double> fine_channels_mhz;  // channels that also emit fine rows
  double fine_jitter_sigma = 0.10;        // lognormal sigma of fine-bin noise
  double orbit_altitude_km = 550.0;
  double xx_probability = 0.5;  // per-detection feed assignment
  // per-channel override of the XX probability, keyed by round(MHz * 1000)
  std::map<std::int64_t, double> xx_probability_per_channel;
  double r_ref_km = 1000.0;
  geo::ObservatorySite site{};
  std::vector<PopulationSynthSpec> populations;
  InjectorSpec injector{};
  BandpassSpec bandpass{};
};

struct GroundTruth {
  std::uint64_t seed = 0;
  struct PopulationTruth {
    std::string bus_label;
    int n_satellites = 0;
    double median_s_norm_jy = 0.0;     // exp(flux_mu_log)
    double eclipse_multiplier = 1.0;
    double illum_over_ecl_ratio = 1.0;  // 1 / eclipse_multiplier
  };
  std::vector<PopulationTruth> populations;
  std::vector<std::int64_t> injector_satellites;  // expressors
  double injector_true_ratio = 1.0;               // target-bin multiplier
  int injector_fine_index = -1;
  int bandpass_fine_index = -1;
  std::string to_json_string() const;
};

// Deterministic under spec.seed: the catalogue comes back classified, quality
// consistent, range-corrected, and illumination-tagged with the production
// geometry. Parallel callers must observe the sequential output.
struct SynthResult {
  Catalogue catalogue;
  GroundTruth truth;
};

SynthResult generate(const SynthSpec& spec);

SynthSpec synth_spec_from_config(const Config& cfg);

// Writes the detections CSV + bus table the ingest pipeline consumes, plus
// the ground-truth JSON next to them.
void write_synth_files(const SynthSpec& spec, const std::string& out_dir);

// --- independent test oracles ---

// Full enumeration of all C(n_x+n_y, n_x) group assignments; n_x + n_y <= 10.
double oracle_mwu_exact(std::span<const double> x, std::span<const double> y);

// Independent solar ephemeris (truncated VSOP87 series with nutation and
// aberration, fixed TT-UTC offset); documented accuracy ~0.003 deg over
// 1990-2060, an order better than the production series. Self-contained:
// shares no code with geo::solar_position_ecef, including the sidereal
// rotation.
geo::EcefVector oracle_sun(double epoch_unix);

struct OracleSunEquatorial {
  double ra_rad = 0.0;
  double dec_rad = 0.0;
  double distance_au = 1.0;
};

OracleSunEquatorial oracle_sun_equatorial(double epoch_unix);

}  // namespace uemr::synth
