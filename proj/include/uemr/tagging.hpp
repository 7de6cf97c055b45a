#pragma once

#include <map>
#include <string>

#include "uemr/catalogue.hpp"
#include "uemr/geometry.hpp"

namespace uemr::geo {

struct PopulationIllumination {
  std::int64_t illuminated = 0;  // stacked rows
  std::int64_t eclipsed = 0;
  double fraction_illuminated() const {
    const std::int64_t n = illuminated + eclipsed;
    return n == 0 ? 0.0 : static_cast<double>(illuminated) / static_cast<double>(n);
  }
};

struct TagSummary {
  std::map<std::string, PopulationIllumination> per_population;
};

// Fills event.illum for every event: az/el/range -> ENU -> ECEF -> sub-satellite
// geodetic point, plus the cylindrical shadow state at the event epoch.
TagSummary tag_catalogue(Catalogue& catalogue, const TagParams& params = {});

}  // namespace uemr::geo
