#include "uemr/timeutil.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace uemr {

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  year = static_cast<int>(y + (month <= 2));
}

namespace {

bool take_int(std::string_view& s, int digits, int& out) {
  if (s.size() < static_cast<size_t>(digits)) return false;
  int v = 0;
  for (int i = 0; i < digits; ++i) {
    const char c = s[static_cast<size_t>(i)];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  s.remove_prefix(static_cast<size_t>(digits));
  out = v;
  return true;
}

bool take_char(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

}  // namespace

std::optional<double> parse_utc(std::string_view s) {
  int y, mo, d, h, mi, sec;
  if (!take_int(s, 4, y) || !take_char(s, '-') || !take_int(s, 2, mo) ||
      !take_char(s, '-') || !take_int(s, 2, d))
    return std::nullopt;
  if (s.empty() || (s.front() != 'T' && s.front() != ' ')) return std::nullopt;
  s.remove_prefix(1);
  if (!take_int(s, 2, h) || !take_char(s, ':') || !take_int(s, 2, mi) ||
      !take_char(s, ':') || !take_int(s, 2, sec))
    return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
    return std::nullopt;

  double frac = 0.0;
  if (!s.empty() && s.front() == '.') {
    s.remove_prefix(1);
    double scale = 0.1;
    bool any = false;
    while (!s.empty() && s.front() >= '0' && s.front() <= '9') {
      frac += (s.front() - '0') * scale;
      scale *= 0.1;
      s.remove_prefix(1);
      any = true;
    }
    if (!any) return std::nullopt;
  }

  double offset = 0.0;
  if (!s.empty()) {
    if (s.front() == 'Z') {
      s.remove_prefix(1);
    } else if (s.front() == '+' || s.front() == '-') {
      const double sign = (s.front() == '-') ? -1.0 : 1.0;
      s.remove_prefix(1);
      int oh = 0, om = 0;
      if (!take_int(s, 2, oh)) return std::nullopt;
      if (!s.empty() && s.front() == ':') s.remove_prefix(1);
      if (!s.empty()) {
        if (!take_int(s, 2, om)) return std::nullopt;
      }
      offset = sign * (oh * 3600.0 + om * 60.0);
    }
  }
  if (!s.empty()) return std::nullopt;

  const std::int64_t days = days_from_civil(y, mo, d);
  return static_cast<double>(days) * kSecondsPerDay + h * 3600.0 + mi * 60.0 +
         sec + frac - offset;
}

std::optional<int> parse_date_ymd(std::string_view s) {
  int y, mo, d;
  if (!take_int(s, 4, y) || !take_char(s, '-') || !take_int(s, 2, mo) ||
      !take_char(s, '-') || !take_int(s, 2, d))
    return std::nullopt;
  if (!s.empty() || mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
  return y * 10000 + mo * 100 + d;
}

std::string format_utc(double unix_seconds) {
  double day_floor = std::floor(unix_seconds / kSecondsPerDay);
  double in_day = unix_seconds - day_floor * kSecondsPerDay;
  // keep in_day in [0, 86400)
  if (in_day >= kSecondsPerDay) {
    in_day -= kSecondsPerDay;
    day_floor += 1.0;
  }
  int y, mo, d;
  civil_from_days(static_cast<std::int64_t>(day_floor), y, mo, d);
  const int h = static_cast<int>(in_day / 3600.0);
  const int mi = static_cast<int>((in_day - h * 3600.0) / 60.0);
  double sec = in_day - h * 3600.0 - mi * 60.0;
  // avoid "60.000000" from round-off
  if (sec > 59.9999995) sec = 59.999999;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%09.6fZ", y, mo, d,
                h, mi, sec);
  return buf;
}

}  // namespace uemr
