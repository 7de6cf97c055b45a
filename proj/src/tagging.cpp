#include "uemr/tagging.hpp"

namespace uemr::geo {

TagSummary tag_catalogue(Catalogue& cat, const TagParams& params) {
  TagSummary summary;
  // Sun position depends only on the epoch; detections come in epoch runs
  // (31 fine rows + 1 stacked row per detection), so a one-slot cache covers
  // nearly all events.
  double cached_epoch = std::nan("");
  EcefVector cached_sun{};

  for (auto& e : cat.events) {
    if (e.epoch_unix != cached_epoch) {
      cached_epoch = e.epoch_unix;
      cached_sun = solar_position_ecef(e.epoch_unix);
    }
    const Vec3 enu = enu_from_azel(e.azimuth_deg, e.elevation_deg, e.range_km);
    const EcefVector sat = enu_to_ecef(enu, params.site);
    IlluminationTag tag = illumination_state(sat, cached_sun, params.shadow_radius_m);
    tag.subsat = ecef_to_geodetic(sat, params.site.ellipsoid);
    e.illum = tag;

    if (e.is_stacked()) {
      auto& pop = summary.per_population[to_string(cat.population_of(e.norad_id))];
      if (tag.state == IlluminationState::Illuminated) ++pop.illuminated;
      else ++pop.eclipsed;
    }
  }
  return summary;
}

}  // namespace uemr::geo
