#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "uemr/geometry.hpp"

namespace uemr {

enum class PolFeed { XX, YY };
enum class Population { DTC, KuOnly, V1x, Unclassified };

const char* to_string(PolFeed p);
const char* to_string(Population p);
std::optional<Population> population_from_string(std::string_view s);

// Bus label -> population, per the classification table:
// V2MD -> DTC, V2M -> KuOnly, V1.0/V1.5 -> V1x, anything else -> Unclassified.
Population population_from_bus(std::string_view bus_label);

// fine_channel_index 0..30 are the ~24.4 kHz fine bins; 31 is the stacked
// (per-detection summary) row used by all population-level statistics.
inline constexpr int kStackedFineIndex = 31;

struct DetectionEvent {
  std::int64_t norad_id = 0;
  double epoch_unix = 0.0;   // UTC
  double freq_mhz = 0.0;     // coarse-channel centre
  int fine_channel_index = kStackedFineIndex;
  PolFeed pol = PolFeed::XX;
  double flux_jy = 0.0;
  double azimuth_deg = 0.0;    // [0, 360)
  double elevation_deg = 0.0;  // (0, 90]
  double range_km = 0.0;       // > 0
  double s_norm_jy = 0.0;      // range-corrected; filled by compute_range_corrected
  std::optional<geo::IlluminationTag> illum;

  bool is_stacked() const { return fine_channel_index == kStackedFineIndex; }
  // integer channel key (kHz) so float parsing noise cannot split a channel
  std::int64_t freq_key() const { return static_cast<std::int64_t>(freq_mhz * 1000.0 + 0.5); }
};

struct SatelliteRecord {
  std::int64_t norad_id = 0;
  std::string bus_label;                      // verbatim from the bus table
  Population population = Population::Unclassified;
  int launch_ymd = 0;                         // yyyymmdd, 0 if unknown
  std::int64_t n_detections = 0;              // stacked rows
};

struct Provenance {
  std::string detections_digest;  // fnv1a64 of the raw bytes
  std::string bus_digest;
  std::map<std::string, std::int64_t> parse_rejects;   // reason -> count
  std::map<std::string, std::int64_t> cut_tally;       // cut -> removed count
  std::map<std::string, std::int64_t> population_stacked_counts;
  std::int64_t bus_duplicates = 0;
};

struct Catalogue {
  std::vector<DetectionEvent> events;
  std::unordered_map<std::int64_t, SatelliteRecord> satellites;
  Provenance provenance;

  Population population_of(std::int64_t norad_id) const;
  std::int64_t stacked_count() const;
  std::int64_t stacked_count(Population p) const;
};

// Maps the required semantic fields onto the source file's header names.
struct ColumnMap {
  std::string norad_id = "norad_id";
  std::string utc = "utc";
  std::string freq_mhz = "freq_mhz";
  std::string fine_channel_index = "fine_channel_index";
  std::string pol = "pol";
  std::string flux_jy = "flux_jy";
  std::string azimuth_deg = "azimuth_deg";
  std::string elevation_deg = "elevation_deg";
  std::string range_km = "range_km";
};

// CSV with a header row -> events-only catalogue. Rows that fail to parse are
// tallied under a reason code in provenance.parse_rejects, never silently
// dropped. A required column missing from the header is fatal.
Catalogue parse_detections(std::istream& source, const ColumnMap& columns = {});

struct BusInfo {
  std::string bus_label;
  int launch_ymd = 0;
};

struct BusTable {
  std::unordered_map<std::int64_t, BusInfo> by_norad;
  std::int64_t duplicate_count = 0;  // duplicate norad ids (last wins)
};

// Tab- or comma-separated with a header naming norad_id, bus, launch_date.
// Empty table is fatal.
BusTable parse_bus_table(std::istream& source);

// Populates catalogue.satellites from the bus table. Unknown or absent bus
// labels classify as Unclassified; never an error.
void classify(Catalogue& catalogue, const BusTable& bus);

// Removes events with non-positive range, flux, or elevation, tallying each
// cut. Population exclusions happen at analysis selection, not here.
void apply_quality_cuts(Catalogue& catalogue);

// S_norm = S_obs * (r_sat / r_ref)^2
double range_correct(double s_obs_jy, double r_sat_km, double r_ref_km = 1000.0);

void compute_range_corrected(Catalogue& catalogue, double r_ref_km = 1000.0);

enum class FluxBasis { Raw, RangeCorrected };

// Per-satellite median over stacked rows of the given population, sorted by
// norad id. Median of an even count is the midpoint of the central pair.
std::vector<std::pair<std::int64_t, double>> per_satellite_median(
    const Catalogue& catalogue, Population population, FluxBasis basis);

// Canonical on-disk form (CSV + .meta.json sidecar).
void write_canonical(const Catalogue& catalogue, const std::string& path);
Catalogue read_canonical(const std::string& path);

std::string fnv1a64_hex(std::string_view bytes);

}  // namespace uemr
