#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace uemr {

// Epochs are UTC, carried as seconds since the Unix epoch (double).
// UT1 = UTC throughout; no leap-second table is consulted.

inline constexpr double kJ2000UnixSeconds = 946728000.0;  // 2000-01-01T12:00:00Z
inline constexpr double kSecondsPerDay = 86400.0;

// Days from 1970-01-01 for a proleptic Gregorian date (Hinnant's civil algorithm).
std::int64_t days_from_civil(int year, int month, int day);
void civil_from_days(std::int64_t z, int& year, int& month, int& day);

// ISO-8601 timestamp -> unix seconds. Accepts "YYYY-MM-DD[T ]hh:mm:ss[.frac][Z|±hh[:]mm]".
std::optional<double> parse_utc(std::string_view text);

// "YYYY-MM-DD" -> integer yyyymmdd (order-comparable). Returns nullopt on malformed input.
std::optional<int> parse_date_ymd(std::string_view text);

// unix seconds -> "YYYY-MM-DDThh:mm:ss.ffffffZ"
std::string format_utc(double unix_seconds);

inline double days_since_j2000(double unix_seconds) {
  return (unix_seconds - kJ2000UnixSeconds) / kSecondsPerDay;
}

inline double julian_date(double unix_seconds) {
  return unix_seconds / kSecondsPerDay + 2440587.5;
}

}  // namespace uemr
