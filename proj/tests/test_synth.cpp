#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "uemr/catalogue.hpp"
#include "uemr/rng.hpp"
#include "uemr/stats.hpp"
#include "uemr/synth.hpp"
#include "uemr/timeutil.hpp"

using namespace uemr;
using doctest::Approx;

namespace {

synth::SynthSpec two_population_spec(std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.seed = seed;
  spec.epoch_span_days = 90.0;
  spec.channels_mhz = {150.78125, 161.71875};
  spec.populations.resize(2);
  spec.populations[0].bus_label = "V2MD";
  spec.populations[0].n_satellites = 12;
  spec.populations[0].mean_detections = 30;
  spec.populations[0].flux_mu_log = 3.0;
  spec.populations[1].bus_label = "V2M";
  spec.populations[1].n_satellites = 20;
  spec.populations[1].mean_detections = 30;
  spec.populations[1].flux_mu_log = 2.3;
  return spec;
}

}  // namespace

TEST_CASE("generate: deterministic and population-count exact") {
  const auto spec = two_population_spec(4242);
  const auto a = synth::generate(spec);
  const auto b = synth::generate(spec);

  REQUIRE(a.catalogue.events.size() == b.catalogue.events.size());
  for (std::size_t i = 0; i < a.catalogue.events.size(); ++i) {
    CHECK(a.catalogue.events[i].norad_id == b.catalogue.events[i].norad_id);
    CHECK(a.catalogue.events[i].epoch_unix == b.catalogue.events[i].epoch_unix);
    CHECK(a.catalogue.events[i].flux_jy == b.catalogue.events[i].flux_jy);
  }

  std::int64_t dtc_sats = 0, ku_sats = 0;
  for (const auto& [norad, rec] : a.catalogue.satellites) {
    dtc_sats += rec.population == Population::DTC;
    ku_sats += rec.population == Population::KuOnly;
  }
  CHECK(dtc_sats == 12);
  CHECK(ku_sats == 20);
  for (const auto& [norad, rec] : a.catalogue.satellites)
    CHECK(rec.n_detections >= 1);
}

TEST_CASE("generate: flux law lands where the ground truth says") {
  auto spec = two_population_spec(77);
  spec.populations[0].mean_detections = 80;
  const auto result = synth::generate(spec);

  std::vector<double> dtc_snorm;
  for (const auto& e : result.catalogue.events)
    if (e.is_stacked() &&
        result.catalogue.population_of(e.norad_id) == Population::DTC)
      dtc_snorm.push_back(e.s_norm_jy);
  const double med = stats::median_of(dtc_snorm);
  // population median of the lognormal law; satellite offsets add spread only
  CHECK(med == Approx(result.truth.populations[0].median_s_norm_jy).epsilon(0.25));

  // raw flux inverts the range correction exactly
  for (const auto& e : result.catalogue.events)
    CHECK(e.s_norm_jy == Approx(range_correct(e.flux_jy, e.range_km)).epsilon(1e-9));
}

TEST_CASE("generate: eclipse multiplier produces both states and shifts eclipsed flux") {
  auto spec = two_population_spec(2024);
  spec.populations[0].eclipse_multiplier = 2.0;
  spec.populations[0].mean_detections = 150;
  const auto result = synth::generate(spec);

  std::vector<double> lit, dark;
  for (const auto& e : result.catalogue.events) {
    if (!e.is_stacked()) continue;
    if (result.catalogue.population_of(e.norad_id) != Population::DTC) continue;
    REQUIRE(e.illum.has_value());
    if (e.illum->state == geo::IlluminationState::Illuminated)
      lit.push_back(e.s_norm_jy);
    else
      dark.push_back(e.s_norm_jy);
  }
  CHECK(lit.size() > 100);
  CHECK(dark.size() > 100);
  const double ratio = stats::median_of(lit) / stats::median_of(dark);
  CHECK(ratio == Approx(0.5).epsilon(0.25));
  CHECK(result.truth.populations[0].illum_over_ecl_ratio == Approx(0.5));
}

TEST_CASE("generate: injector marks expressors and brightens only the target bin") {
  auto spec = two_population_spec(99);
  spec.fine_channels_mhz = {150.78125};
  spec.channels_mhz = {150.78125};
  spec.injector.fine_index = 22;
  spec.injector.coarse_mhz = 150.78125;
  spec.injector.multiplier = 3.0;
  spec.injector.satellite_fraction = 0.5;
  const auto result = synth::generate(spec);

  REQUIRE_FALSE(result.truth.injector_satellites.empty());
  CHECK(result.truth.injector_satellites.size() < result.catalogue.satellites.size());

  const auto ratio_of = [&](std::int64_t norad) {
    double target_sum = 0, other_sum = 0;
    std::int64_t target_n = 0, other_n = 0;
    for (const auto& e : result.catalogue.events) {
      if (e.norad_id != norad || e.is_stacked()) continue;
      if (e.fine_channel_index == 22) {
        target_sum += e.s_norm_jy;
        ++target_n;
      } else if (e.fine_channel_index < 21 || e.fine_channel_index > 23) {
        other_sum += e.s_norm_jy;
        ++other_n;
      }
    }
    REQUIRE(target_n > 0);
    return (target_sum / target_n) / (other_sum / other_n);
  };

  for (const std::int64_t norad : result.truth.injector_satellites)
    CHECK(ratio_of(norad) > 2.0);
  for (const auto& [norad, rec] : result.catalogue.satellites) {
    if (std::find(result.truth.injector_satellites.begin(),
                  result.truth.injector_satellites.end(),
                  norad) == result.truth.injector_satellites.end())
      CHECK(ratio_of(norad) < 1.5);
  }
}

TEST_CASE("synth spec from config and file output") {
  const Config cfg = Config::from_string(
      "synth.seed = 31\n"
      "synth.channels_mhz = 150.78125, 230.46875\n"
      "synth.fine_channels_mhz = 230.46875\n"
      "pop.dtc.n_satellites = 4\n"
      "pop.dtc.mean_detections = 10\n"
      "pop.dtc.poisson_counts = false\n"
      "pop.ku.n_satellites = 6\n"
      "pop.ku.mean_detections = 10\n"
      "pop.ku.poisson_counts = false\n"
      "injector.fine_index = 22\n"
      "injector.satellite_fraction = 0.5\n");
  const auto spec = synth::synth_spec_from_config(cfg);
  CHECK(spec.seed == 31);
  CHECK(spec.channels_mhz.size() == 2);
  CHECK(spec.populations.size() == 2);
  CHECK(spec.populations[0].bus_label == "V2MD");
  CHECK(spec.populations[0].n_satellites == 4);
  CHECK_FALSE(spec.populations[0].poisson_counts);
  CHECK(spec.injector.fine_index == 22);

  const auto dir = std::filesystem::temp_directory_path() / "uemr_synth_test";
  std::filesystem::create_directories(dir);
  synth::write_synth_files(spec, dir.string());

  // the emitted files ingest cleanly and reproduce the in-memory catalogue
  std::ifstream det(dir / "detections.csv");
  Catalogue cat = parse_detections(det);
  std::ifstream bus(dir / "bus_table.csv");
  classify(cat, parse_bus_table(bus));
  const auto direct = synth::generate(spec);
  CHECK(cat.events.size() == direct.catalogue.events.size());
  CHECK(cat.stacked_count(Population::DTC) ==
        direct.catalogue.stacked_count(Population::DTC));
  std::ifstream truth(dir / "ground_truth.json");
  CHECK(truth.good());
  std::filesystem::remove_all(dir);
}

TEST_CASE("oracle_mwu_exact: pinned enumerations and input guards") {
  CHECK(synth::oracle_mwu_exact(std::vector<double>{1, 2},
                                std::vector<double>{3, 4}) == Approx(1.0 / 3.0));
  CHECK(synth::oracle_mwu_exact(std::vector<double>{1},
                                std::vector<double>{2}) == Approx(1.0));
  CHECK_THROWS(synth::oracle_mwu_exact(std::vector<double>(6, 1.0),
                                       std::vector<double>(5, 2.0)));
}

TEST_CASE("oracle_sun: solstice and equinox declination") {
  const auto solstice = synth::oracle_sun(*parse_utc("2024-06-20T20:51:00Z"));
  CHECK(std::asin(solstice.unit().z) / geo::kDeg == Approx(23.44).epsilon(5e-4));

  const auto equinox = synth::oracle_sun(*parse_utc("2024-09-22T12:44:00Z"));
  CHECK(std::abs(std::asin(equinox.unit().z) / geo::kDeg) < 0.1);
}

TEST_CASE("oracle_sun: almanac-grade reference epoch") {
  // apparent place references: RA 13h13m30.75s, dec -7d47'01.7", R 0.9976078 AU
  const auto eq = synth::oracle_sun_equatorial(*parse_utc("1992-10-12T23:59:01Z"));
  CHECK(eq.ra_rad / geo::kDeg == Approx(198.37812).epsilon(2e-5));
  CHECK(eq.dec_rad / geo::kDeg == Approx(-7.78382).epsilon(3e-4));
  CHECK(eq.distance_au == Approx(0.99760775).epsilon(1e-6));
}

TEST_CASE("oracle_sun: production ephemeris tracks it across epochs") {
  Rng rng(123);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t =
        *parse_utc("2024-01-01T00:00:00Z") + rng.next_unit() * 365.0 * 86400.0;
    const auto a = geo::solar_position_ecef(t).unit();
    const auto b = synth::oracle_sun(t).unit();
    const double sep = std::acos(std::clamp(a.dot(b), -1.0, 1.0)) / geo::kDeg;
    worst = std::max(worst, sep);
  }
  CHECK(worst < 0.02);
}
