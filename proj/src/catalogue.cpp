#include "uemr/catalogue.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "uemr/csv.hpp"
#include "uemr/timeutil.hpp"

namespace uemr {

const char* to_string(PolFeed p) { return p == PolFeed::XX ? "XX" : "YY"; }

const char* to_string(Population p) {
  switch (p) {
    case Population::DTC: return "DTC";
    case Population::KuOnly: return "KuOnly";
    case Population::V1x: return "V1x";
    default: return "Unclassified";
  }
}

std::optional<Population> population_from_string(std::string_view s) {
  if (s == "DTC") return Population::DTC;
  if (s == "KuOnly") return Population::KuOnly;
  if (s == "V1x") return Population::V1x;
  if (s == "Unclassified") return Population::Unclassified;
  return std::nullopt;
}

Population population_from_bus(std::string_view bus) {
  if (bus == "V2MD") return Population::DTC;
  if (bus == "V2M") return Population::KuOnly;
  if (bus == "V1.0" || bus == "V1.5") return Population::V1x;
  return Population::Unclassified;
}

Population Catalogue::population_of(std::int64_t norad_id) const {
  const auto it = satellites.find(norad_id);
  return it == satellites.end() ? Population::Unclassified : it->second.population;
}

std::int64_t Catalogue::stacked_count() const {
  std::int64_t n = 0;
  for (const auto& e : events) n += e.is_stacked();
  return n;
}

std::int64_t Catalogue::stacked_count(Population p) const {
  std::int64_t n = 0;
  for (const auto& e : events)
    if (e.is_stacked() && population_of(e.norad_id) == p) ++n;
  return n;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') return std::nullopt;
  return v;
}

std::optional<PolFeed> parse_pol(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "XX" || s == "X" || s == "0") return PolFeed::XX;
  if (s == "YY" || s == "Y" || s == "1") return PolFeed::YY;
  return std::nullopt;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

void reject(Provenance& prov, const std::string& reason) {
  ++prov.parse_rejects[reason];
}

}  // namespace

Catalogue parse_detections(std::istream& source, const ColumnMap& columns) {
  Catalogue cat;
  DelimReader reader(source, ',');
  std::vector<std::string> row;
  if (!reader.next_row(row))
    throw std::runtime_error("detections: empty input, expected a header row");

  struct Cols {
    int norad, utc, freq, fine, pol, flux, az, el, range;
  } c{};
  const auto required = [&](const std::string& name) {
    const int idx = find_column(row, name);
    if (idx < 0)
      throw std::runtime_error("detections: required column not in header: " + name);
    return idx;
  };
  c.norad = required(columns.norad_id);
  c.utc = required(columns.utc);
  c.freq = required(columns.freq_mhz);
  c.fine = required(columns.fine_channel_index);
  c.pol = required(columns.pol);
  c.flux = required(columns.flux_jy);
  c.az = required(columns.azimuth_deg);
  c.el = required(columns.elevation_deg);
  c.range = required(columns.range_km);
  const std::size_t width = row.size();

  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // trailing blank line
    if (row.size() != width) {
      reject(cat.provenance, "wrong_field_count");
      continue;
    }
    DetectionEvent ev;

    const auto norad = parse_int(row[c.norad]);
    if (!norad) { reject(cat.provenance, "bad:norad_id"); continue; }
    ev.norad_id = *norad;

    const auto epoch = parse_utc(row[c.utc]);
    if (!epoch) { reject(cat.provenance, "bad:utc"); continue; }
    ev.epoch_unix = *epoch;

    const auto freq = parse_double(row[c.freq]);
    if (!freq) { reject(cat.provenance, "bad:freq_mhz"); continue; }
    ev.freq_mhz = *freq;

    const auto fine = parse_int(row[c.fine]);
    if (!fine || *fine < 0 || *fine > kStackedFineIndex) {
      reject(cat.provenance, "bad:fine_channel_index");
      continue;
    }
    ev.fine_channel_index = static_cast<int>(*fine);

    const auto pol = parse_pol(row[c.pol]);
    if (!pol) { reject(cat.provenance, "bad:pol"); continue; }
    ev.pol = *pol;

    const auto flux = parse_double(row[c.flux]);
    if (!flux) {
      reject(cat.provenance, row[c.flux].empty() ? "missing:flux" : "bad:flux");
      continue;
    }
    ev.flux_jy = *flux;

    const auto az = parse_double(row[c.az]);
    if (!az) { reject(cat.provenance, "bad:azimuth_deg"); continue; }
    ev.azimuth_deg = std::fmod(*az, 360.0);
    if (ev.azimuth_deg < 0.0) ev.azimuth_deg += 360.0;

    const auto el = parse_double(row[c.el]);
    if (!el) { reject(cat.provenance, "bad:elevation_deg"); continue; }
    ev.elevation_deg = *el;

    const auto range = parse_double(row[c.range]);
    if (!range) {
      reject(cat.provenance, row[c.range].empty() ? "missing:range" : "bad:range");
      continue;
    }
    ev.range_km = *range;

    cat.events.push_back(ev);
  }
  return cat;
}

BusTable parse_bus_table(std::istream& source) {
  // sniff the delimiter from the header line
  std::string header_line;
  if (!std::getline(source, header_line))
    throw std::runtime_error("bus table: empty input");
  const char delim =
      std::count(header_line.begin(), header_line.end(), '\t') > 0 ? '\t' : ',';

  std::istringstream header_stream(header_line);
  DelimReader header_reader(header_stream, delim);
  std::vector<std::string> header;
  header_reader.next_row(header);
  for (auto& h : header)
    for (auto& ch : h) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));

  const auto col = [&](std::initializer_list<const char*> names) {
    for (const char* n : names) {
      const int idx = find_column(header, n);
      if (idx >= 0) return idx;
    }
    std::string msg = "bus table: missing column ";
    msg += *names.begin();
    throw std::runtime_error(msg);
  };
  const int c_norad = col({"norad_id", "norad"});
  const int c_bus = col({"bus"});
  const int c_launch = col({"launch_date", "launch", "ldate"});

  BusTable table;
  DelimReader reader(source, delim);
  std::vector<std::string> row;
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (static_cast<int>(row.size()) <= std::max({c_norad, c_bus, c_launch})) continue;
    const auto norad = parse_int(row[c_norad]);
    if (!norad) continue;
    BusInfo info;
    info.bus_label = row[c_bus];
    if (const auto ymd = parse_date_ymd(row[c_launch])) info.launch_ymd = *ymd;
    if (table.by_norad.count(*norad)) ++table.duplicate_count;
    table.by_norad[*norad] = std::move(info);  // last wins
  }
  if (table.by_norad.empty()) throw std::runtime_error("bus table: no entries parsed");
  return table;
}

void classify(Catalogue& cat, const BusTable& bus) {
  if (bus.by_norad.empty()) throw std::invalid_argument("classify: empty bus map");
  cat.satellites.clear();
  for (const auto& e : cat.events) {
    auto [it, inserted] = cat.satellites.try_emplace(e.norad_id);
    SatelliteRecord& rec = it->second;
    if (inserted) {
      rec.norad_id = e.norad_id;
      const auto b = bus.by_norad.find(e.norad_id);
      if (b != bus.by_norad.end()) {
        rec.bus_label = b->second.bus_label;
        rec.launch_ymd = b->second.launch_ymd;
        rec.population = population_from_bus(rec.bus_label);
      }
    }
    if (e.is_stacked()) ++rec.n_detections;
  }
  cat.provenance.bus_duplicates = bus.duplicate_count;
  cat.provenance.population_stacked_counts.clear();
  for (const auto& [norad, rec] : cat.satellites)
    cat.provenance.population_stacked_counts[to_string(rec.population)] +=
        rec.n_detections;
}

void apply_quality_cuts(Catalogue& cat) {
  auto& tally = cat.provenance.cut_tally;
  tally["nonpositive_flux"] += 0;  // make the audit keys always present
  tally["nonpositive_range"] += 0;
  tally["nonpositive_elevation"] += 0;

  std::vector<DetectionEvent> kept;
  kept.reserve(cat.events.size());
  for (const auto& e : cat.events) {
    if (e.flux_jy <= 0.0) { ++tally["nonpositive_flux"]; continue; }
    if (e.range_km <= 0.0) { ++tally["nonpositive_range"]; continue; }
    if (e.elevation_deg <= 0.0) { ++tally["nonpositive_elevation"]; continue; }
    kept.push_back(e);
  }
  cat.events = std::move(kept);

  // refresh stacked counts after the cuts
  for (auto& [norad, rec] : cat.satellites) rec.n_detections = 0;
  for (const auto& e : cat.events) {
    if (!e.is_stacked()) continue;
    const auto it = cat.satellites.find(e.norad_id);
    if (it != cat.satellites.end()) ++it->second.n_detections;
  }
  cat.provenance.population_stacked_counts.clear();
  for (const auto& [norad, rec] : cat.satellites)
    cat.provenance.population_stacked_counts[to_string(rec.population)] +=
        rec.n_detections;
}

double range_correct(double s_obs_jy, double r_sat_km, double r_ref_km) {
  if (r_sat_km <= 0.0) throw std::invalid_argument("range_correct: r_sat must be > 0");
  if (r_ref_km <= 0.0) throw std::invalid_argument("range_correct: r_ref must be > 0");
  const double ratio = r_sat_km / r_ref_km;
  return s_obs_jy * ratio * ratio;
}

void compute_range_corrected(Catalogue& cat, double r_ref_km) {
  for (auto& e : cat.events) e.s_norm_jy = range_correct(e.flux_jy, e.range_km, r_ref_km);
}

std::vector<std::pair<std::int64_t, double>> per_satellite_median(
    const Catalogue& cat, Population population, FluxBasis basis) {
  std::unordered_map<std::int64_t, std::vector<double>> values;
  for (const auto& e : cat.events) {
    if (!e.is_stacked()) continue;
    if (cat.population_of(e.norad_id) != population) continue;
    values[e.norad_id].push_back(basis == FluxBasis::Raw ? e.flux_jy : e.s_norm_jy);
  }
  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(values.size());
  for (auto& [norad, v] : values) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double med =
        (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    out.emplace_back(norad, med);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// canonical on-disk form

namespace {
constexpr const char* kCanonicalHeader =
    "norad_id,epoch_utc,freq_mhz,fine_channel_index,pol,flux_jy,azimuth_deg,"
    "elevation_deg,range_km,s_norm_jy,bus,population,launch_date,illuminated,"
    "subsat_lat_deg,subsat_lon_deg,subsat_height_km";

std::string format_launch(int ymd) {
  if (ymd == 0) return "";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", ymd / 10000, (ymd / 100) % 100,
                ymd % 100);
  return buf;
}
}  // namespace

void write_canonical(const Catalogue& cat, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kCanonicalHeader << "\n";
  char buf[512];
  for (const auto& e : cat.events) {
    const auto sat = cat.satellites.find(e.norad_id);
    const SatelliteRecord* rec = sat == cat.satellites.end() ? nullptr : &sat->second;
    std::snprintf(buf, sizeof buf,
                  "%lld,%s,%.17g,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%s,%s",
                  static_cast<long long>(e.norad_id), format_utc(e.epoch_unix).c_str(),
                  e.freq_mhz, e.fine_channel_index, to_string(e.pol), e.flux_jy,
                  e.azimuth_deg, e.elevation_deg, e.range_km, e.s_norm_jy,
                  rec ? rec->bus_label.c_str() : "",
                  rec ? to_string(rec->population) : "Unclassified",
                  rec ? format_launch(rec->launch_ymd).c_str() : "");
    out << buf;
    if (e.illum) {
      std::snprintf(buf, sizeof buf, ",%d,%.10f,%.10f,%.6f",
                    e.illum->state == geo::IlluminationState::Illuminated ? 1 : 0,
                    e.illum->subsat.lat_deg, e.illum->subsat.lon_deg,
                    e.illum->subsat.height_m / 1000.0);
      out << buf << "\n";
    } else {
      out << ",,,,\n";
    }
  }

  nlohmann::json meta;
  meta["schema_version"] = "1";
  meta["detections_digest"] = cat.provenance.detections_digest;
  meta["bus_digest"] = cat.provenance.bus_digest;
  meta["parse_rejects"] = cat.provenance.parse_rejects;
  meta["cut_tally"] = cat.provenance.cut_tally;
  meta["population_stacked_counts"] = cat.provenance.population_stacked_counts;
  meta["bus_duplicates"] = cat.provenance.bus_duplicates;
  std::ofstream mout(path + ".meta.json");
  mout << meta.dump(2) << "\n";
}

Catalogue read_canonical(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Catalogue cat;
  DelimReader reader(in, ',');
  std::vector<std::string> row;
  if (!reader.next_row(row) || row.empty() || row[0] != "norad_id")
    throw std::runtime_error(path + ": not a canonical catalogue file");

  const auto need = [&](auto&& opt, const char* what) {
    if (!opt)
      throw std::runtime_error(path + " line " + std::to_string(reader.line_number()) +
                               ": bad " + what);
    return *opt;
  };
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() < 17)
      throw std::runtime_error(path + " line " + std::to_string(reader.line_number()) +
                               ": short row");
    DetectionEvent e;
    e.norad_id = need(parse_int(row[0]), "norad_id");
    e.epoch_unix = need(parse_utc(row[1]), "epoch");
    e.freq_mhz = need(parse_double(row[2]), "freq");
    e.fine_channel_index = static_cast<int>(need(parse_int(row[3]), "fine index"));
    e.pol = need(parse_pol(row[4]), "pol");
    e.flux_jy = need(parse_double(row[5]), "flux");
    e.azimuth_deg = need(parse_double(row[6]), "azimuth");
    e.elevation_deg = need(parse_double(row[7]), "elevation");
    e.range_km = need(parse_double(row[8]), "range");
    e.s_norm_jy = need(parse_double(row[9]), "s_norm");

    auto [it, inserted] = cat.satellites.try_emplace(e.norad_id);
    if (inserted) {
      it->second.norad_id = e.norad_id;
      it->second.bus_label = row[10];
      if (const auto p = population_from_string(row[11])) it->second.population = *p;
      if (!row[12].empty())
        if (const auto ymd = parse_date_ymd(row[12])) it->second.launch_ymd = *ymd;
    }
    if (e.is_stacked()) ++it->second.n_detections;

    if (!row[13].empty()) {
      geo::IlluminationTag tag;
      tag.state = row[13] == "1" ? geo::IlluminationState::Illuminated
                                 : geo::IlluminationState::Eclipsed;
      tag.subsat.lat_deg = need(parse_double(row[14]), "subsat lat");
      tag.subsat.lon_deg = need(parse_double(row[15]), "subsat lon");
      tag.subsat.height_m = need(parse_double(row[16]), "subsat height") * 1000.0;
      e.illum = tag;
    }
    cat.events.push_back(std::move(e));
  }

  std::ifstream min(path + ".meta.json");
  if (min) {
    nlohmann::json meta = nlohmann::json::parse(min, nullptr, false);
    if (!meta.is_discarded()) {
      cat.provenance.detections_digest = meta.value("detections_digest", "");
      cat.provenance.bus_digest = meta.value("bus_digest", "");
      if (meta.contains("parse_rejects"))
        cat.provenance.parse_rejects =
            meta["parse_rejects"].get<std::map<std::string, std::int64_t>>();
      if (meta.contains("cut_tally"))
        cat.provenance.cut_tally =
            meta["cut_tally"].get<std::map<std::string, std::int64_t>>();
      if (meta.contains("population_stacked_counts"))
        cat.provenance.population_stacked_counts =
            meta["population_stacked_counts"].get<std::map<std::string, std::int64_t>>();
      cat.provenance.bus_duplicates = meta.value("bus_duplicates", 0);
    }
  }
  return cat;
}

}  // namespace uemr
