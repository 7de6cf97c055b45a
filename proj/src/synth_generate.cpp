#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "uemr/rng.hpp"
#include "uemr/synth.hpp"
#include "uemr/timeutil.hpp"

namespace uemr::synth {

namespace {

constexpr double kMeanEarthRadiusKm = 6371.0;

// slant range from elevation for a circular orbit at the given altitude
double slant_range_km(double elevation_deg, double altitude_km) {
  const double e = elevation_deg * geo::kDeg;
  const double r = kMeanEarthRadiusKm;
  const double ra = r + altitude_km;
  const double rs = r * std::sin(e);
  return std::sqrt(ra * ra - r * r * std::cos(e) * std::cos(e)) - rs;
}

int poisson_min1(double mean, Rng& rng) {
  // inverse-CDF by multiplication; means stay small (tens)
  const double limit = std::exp(-mean);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= rng.next_unit();
  } while (p > limit);
  return std::max(1, k - 1);
}

double ymd_to_unix(int ymd) {
  return static_cast<double>(days_from_civil(ymd / 10000, (ymd / 100) % 100,
                                             ymd % 100)) *
         kSecondsPerDay;
}

int unix_to_ymd(double unix_seconds) {
  int y, m, d;
  civil_from_days(static_cast<std::int64_t>(std::floor(unix_seconds / kSecondsPerDay)),
                  y, m, d);
  return y * 10000 + m * 100 + d;
}

}  // namespace

SynthResult generate(const SynthSpec& spec) {
  if (spec.populations.empty())
    throw std::invalid_argument("generate: no populations configured");
  if (spec.channels_mhz.empty())
    throw std::invalid_argument("generate: no channels configured");
  if (spec.injector.satellite_fraction < 0.0 || spec.injector.satellite_fraction > 1.0)
    throw std::invalid_argument("generate: satellite_fraction must be in [0, 1]");

  SynthResult out;
  out.truth.seed = spec.seed;
  out.truth.injector_fine_index = spec.injector.fine_index;
  out.truth.injector_true_ratio = spec.injector.multiplier;
  out.truth.bandpass_fine_index = spec.bandpass.fine_index;

  const double epoch_start = spec.epoch_start_unix != 0.0
                                 ? spec.epoch_start_unix
                                 : *parse_utc("2024-06-01T00:00:00Z");
  const double span_s = spec.epoch_span_days * kSecondsPerDay;

  const auto is_fine_channel = [&](double mhz) {
    for (const double f : spec.fine_channels_mhz)
      if (std::abs(f - mhz) < 0.5) return true;
    return false;
  };

  std::int64_t next_norad = 60001;
  std::uint64_t sat_counter = 0;
  for (const auto& pop : spec.populations) {
    GroundTruth::PopulationTruth truth;
    truth.bus_label = pop.bus_label;
    truth.n_satellites = pop.n_satellites;
    truth.median_s_norm_jy = std::exp(pop.flux_mu_log);
    truth.eclipse_multiplier = pop.eclipse_multiplier;
    truth.illum_over_ecl_ratio = 1.0 / pop.eclipse_multiplier;
    out.truth.populations.push_back(truth);

    const double launch_lo = ymd_to_unix(pop.launch_start_ymd);
    const double launch_hi = ymd_to_unix(pop.launch_end_ymd);

    for (int s = 0; s < pop.n_satellites; ++s, ++sat_counter) {
      Rng rng(derive_seed(spec.seed, "synth.satellite", sat_counter));
      const std::int64_t norad = next_norad++;

      SatelliteRecord rec;
      rec.norad_id = norad;
      rec.bus_label = pop.bus_label;
      rec.population = population_from_bus(pop.bus_label);
      rec.launch_ymd =
          unix_to_ymd(launch_lo + rng.next_unit() * std::max(0.0, launch_hi - launch_lo));
      out.catalogue.satellites.emplace(norad, rec);

      const double sat_offset = std::exp(pop.sat_sigma_log * rng.next_normal());
      const bool expressor = spec.injector.fine_index >= 0 &&
                             rng.next_bernoulli(spec.injector.satellite_fraction);
      if (expressor) out.truth.injector_satellites.push_back(norad);

      const int n_det = pop.poisson_counts
                            ? poisson_min1(pop.mean_detections, rng)
                            : static_cast<int>(pop.mean_detections);
      for (int d = 0; d < n_det; ++d) {
        DetectionEvent ev;
        ev.norad_id = norad;
        ev.epoch_unix = std::floor(epoch_start + rng.next_unit() * span_s);
        ev.freq_mhz = spec.channels_mhz[rng.next_index(spec.channels_mhz.size())];
        ev.azimuth_deg = rng.next_unit() * 360.0;
        ev.elevation_deg = 30.0 + rng.next_unit() * 58.0;
        ev.range_km = slant_range_km(ev.elevation_deg, spec.orbit_altitude_km);
        double p_xx = spec.xx_probability;
        const auto bias = spec.xx_probability_per_channel.find(ev.freq_key());
        if (bias != spec.xx_probability_per_channel.end()) p_xx = bias->second;
        ev.pol = rng.next_bernoulli(p_xx) ? PolFeed::XX : PolFeed::YY;

        // illumination from the production geometry at the sampled track point
        const geo::Vec3 enu =
            geo::enu_from_azel(ev.azimuth_deg, ev.elevation_deg, ev.range_km);
        const geo::EcefVector sat_ecef = geo::enu_to_ecef(enu, spec.site);
        geo::IlluminationTag tag = geo::illumination_state(
            sat_ecef, geo::solar_position_ecef(ev.epoch_unix));
        tag.subsat = geo::ecef_to_geodetic(sat_ecef, spec.site.ellipsoid);
        ev.illum = tag;
        const bool eclipsed = tag.state == geo::IlluminationState::Eclipsed;

        // flux law lives in range-corrected space; raw flux inverts the
        // correction so the ingest pipeline reproduces it exactly
        double s_norm = sat_offset *
                        std::exp(pop.flux_mu_log + pop.flux_sigma_log * rng.next_normal());
        if (eclipsed) s_norm *= pop.eclipse_multiplier;
        const double geom = (ev.range_km / spec.r_ref_km) * (ev.range_km / spec.r_ref_km);

        ev.s_norm_jy = s_norm;
        ev.flux_jy = s_norm / geom;
        ev.fine_channel_index = kStackedFineIndex;
        out.catalogue.events.push_back(ev);

        if (is_fine_channel(ev.freq_mhz)) {
          const bool line_on =
              expressor && std::abs(ev.freq_mhz - spec.injector.coarse_mhz) < 0.5 &&
              rng.next_bernoulli(spec.injector.detection_fraction);
          const int half_width = spec.injector.width_bins / 2;
          for (int bin = 0; bin < kStackedFineIndex; ++bin) {
            DetectionEvent fine = ev;
            fine.fine_channel_index = bin;
            double f = s_norm * std::exp(spec.fine_jitter_sigma * rng.next_normal());
            if (line_on && std::abs(bin - spec.injector.fine_index) <= half_width)
              f *= spec.injector.multiplier;
            if (spec.bandpass.fine_index == bin) f *= spec.bandpass.multiplier;
            fine.s_norm_jy = f;
            fine.flux_jy = f / geom;
            out.catalogue.events.push_back(fine);
          }
        }
      }
    }
  }

  // stacked counts + population tallies
  for (auto& [norad, rec] : out.catalogue.satellites) rec.n_detections = 0;
  for (const auto& e : out.catalogue.events)
    if (e.is_stacked()) ++out.catalogue.satellites[e.norad_id].n_detections;
  for (const auto& [norad, rec] : out.catalogue.satellites)
    out.catalogue.provenance.population_stacked_counts[to_string(rec.population)] +=
        rec.n_detections;
  std::sort(out.truth.injector_satellites.begin(), out.truth.injector_satellites.end());
  return out;
}

std::string GroundTruth::to_json_string() const {
  nlohmann::json j;
  j["schema_version"] = "1";
  j["seed"] = seed;
  for (const auto& p : populations) {
    nlohmann::json jp;
    jp["bus_label"] = p.bus_label;
    jp["n_satellites"] = p.n_satellites;
    jp["median_s_norm_jy"] = p.median_s_norm_jy;
    jp["eclipse_multiplier"] = p.eclipse_multiplier;
    jp["illum_over_ecl_ratio"] = p.illum_over_ecl_ratio;
    j["populations"].push_back(jp);
  }
  j["injector"]["fine_index"] = injector_fine_index;
  j["injector"]["true_ratio"] = injector_true_ratio;
  j["injector"]["satellites"] = injector_satellites;
  j["bandpass"]["fine_index"] = bandpass_fine_index;
  return j.dump(2);
}

namespace {

PopulationSynthSpec population_from_config(const Config& cfg, const std::string& prefix,
                                           const std::string& bus_default) {
  PopulationSynthSpec p;
  p.bus_label = cfg.get_string(prefix + ".bus", bus_default);
  p.n_satellites = static_cast<int>(cfg.get_int(prefix + ".n_satellites", 0));
  p.mean_detections = cfg.get_double(prefix + ".mean_detections", 50.0);
  p.poisson_counts = cfg.get_bool(prefix + ".poisson_counts", true);
  p.flux_mu_log = cfg.get_double(prefix + ".flux_mu_log", 3.0);
  p.flux_sigma_log = cfg.get_double(prefix + ".flux_sigma_log", 0.8);
  p.sat_sigma_log = cfg.get_double(prefix + ".sat_sigma_log", 0.3);
  p.eclipse_multiplier = cfg.get_double(prefix + ".eclipse_multiplier", 1.0);
  if (const auto ymd = parse_date_ymd(cfg.get_string(prefix + ".launch_start", "")))
    p.launch_start_ymd = *ymd;
  if (const auto ymd = parse_date_ymd(cfg.get_string(prefix + ".launch_end", "")))
    p.launch_end_ymd = *ymd;
  return p;
}

}  // namespace

SynthSpec synth_spec_from_config(const Config& cfg) {
  SynthSpec spec;
  spec.seed = cfg.get_u64("synth.seed", 1);
  if (const auto t = parse_utc(cfg.get_string("synth.epoch_start", "")))
    spec.epoch_start_unix = *t;
  spec.epoch_span_days = cfg.get_double("synth.epoch_span_days", 120.0);
  spec.channels_mhz = cfg.get_double_list("synth.channels_mhz", spec.channels_mhz);
  spec.fine_channels_mhz =
      cfg.get_double_list("synth.fine_channels_mhz", spec.fine_channels_mhz);
  spec.fine_jitter_sigma = cfg.get_double("synth.fine_jitter_sigma", 0.10);
  spec.orbit_altitude_km = cfg.get_double("synth.orbit_altitude_km", 550.0);
  spec.xx_probability = cfg.get_double("synth.xx_probability", 0.5);
  // per-channel feed bias: polbias.<MHz> = probability
  for (const auto& [key, value] : cfg.entries()) {
    if (key.rfind("polbias.", 0) != 0) continue;
    char* end = nullptr;
    const double mhz = std::strtod(key.c_str() + 8, &end);
    if (end == key.c_str() + 8 || *end != '\0')
      throw std::runtime_error("bad polbias key: " + key);
    spec.xx_probability_per_channel[static_cast<std::int64_t>(mhz * 1000.0 + 0.5)] =
        cfg.get_double(key, 0.5);
  }
  spec.r_ref_km = cfg.get_double("synth.r_ref_km", 1000.0);
  spec.site.lat_deg = cfg.get_double("site.lat_deg", spec.site.lat_deg);
  spec.site.lon_deg = cfg.get_double("site.lon_deg", spec.site.lon_deg);
  spec.site.height_m = cfg.get_double("site.height_m", spec.site.height_m);

  for (const auto& [prefix, bus] :
       {std::pair<std::string, std::string>{"pop.dtc", "V2MD"},
        {"pop.ku", "V2M"},
        {"pop.v1x", "V1.0"}}) {
    if (cfg.has(prefix + ".n_satellites")) {
      const auto p = population_from_config(cfg, prefix, bus);
      if (p.n_satellites > 0) spec.populations.push_back(p);
    }
  }

  spec.injector.fine_index = static_cast<int>(cfg.get_int("injector.fine_index", -1));
  spec.injector.coarse_mhz = cfg.get_double("injector.coarse_mhz", 230.46875);
  spec.injector.multiplier = cfg.get_double("injector.multiplier", 2.0);
  spec.injector.satellite_fraction = cfg.get_double("injector.satellite_fraction", 0.0);
  spec.injector.detection_fraction = cfg.get_double("injector.detection_fraction", 1.0);
  spec.injector.width_bins = static_cast<int>(cfg.get_int("injector.width_bins", 1));
  spec.bandpass.fine_index = static_cast<int>(cfg.get_int("bandpass.fine_index", -1));
  spec.bandpass.multiplier = cfg.get_double("bandpass.multiplier", 1.3);
  return spec;
}

void write_synth_files(const SynthSpec& spec, const std::string& out_dir) {
  const SynthResult result = generate(spec);

  const std::string det_path = out_dir + "/detections.csv";
  std::ofstream det(det_path);
  if (!det) throw std::runtime_error("cannot write " + det_path);
  det << "norad_id,utc,freq_mhz,fine_channel_index,pol,flux_jy,azimuth_deg,"
         "elevation_deg,range_km\n";
  char buf[320];
  for (const auto& e : result.catalogue.events) {
    std::snprintf(buf, sizeof buf, "%lld,%s,%.17g,%d,%s,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(e.norad_id), format_utc(e.epoch_unix).c_str(),
                  e.freq_mhz, e.fine_channel_index, to_string(e.pol), e.flux_jy,
                  e.azimuth_deg, e.elevation_deg, e.range_km);
    det << buf;
  }
  det.close();

  const std::string bus_path = out_dir + "/bus_table.csv";
  std::ofstream bus(bus_path);
  if (!bus) throw std::runtime_error("cannot write " + bus_path);
  bus << "norad_id,bus,launch_date\n";
  std::vector<std::int64_t> ids;
  for (const auto& [norad, rec] : result.catalogue.satellites) ids.push_back(norad);
  std::sort(ids.begin(), ids.end());
  for (const std::int64_t id : ids) {
    const auto& rec = result.catalogue.satellites.at(id);
    std::snprintf(buf, sizeof buf, "%lld,%s,%04d-%02d-%02d\n",
                  static_cast<long long>(id), rec.bus_label.c_str(),
                  rec.launch_ymd / 10000, (rec.launch_ymd / 100) % 100,
                  rec.launch_ymd % 100);
    bus << buf;
  }
  bus.close();

  std::ofstream truth(out_dir + "/ground_truth.json");
  truth << result.truth.to_json_string() << "\n";
}

}  // namespace uemr::synth
