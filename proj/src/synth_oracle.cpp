// Test oracles: exhaustive Mann-Whitney enumeration and an independent
// high-precision solar ephemeris. The ephemeris is a truncated VSOP87 Earth
// series (heliocentric L, B, R) carried to apparent place with a short
// nutation series and annual aberration, then rotated to ECEF through
// apparent sidereal time. It shares no code with the production series.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "uemr/synth.hpp"
#include "uemr/timeutil.hpp"

namespace uemr::synth {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kDeg = kPi / 180.0;
constexpr double kArcsec = kDeg / 3600.0;
// fixed TT-UTC offset; drift over 1990-2060 moves the Sun by < 0.0003 deg
constexpr double kTtMinusUtcSeconds = 69.0;
}  // namespace

// ---------------------------------------------------------------------------
// exhaustive Mann-Whitney oracle

namespace {

double arrangement_u(const std::vector<double>& pooled,
                     const std::vector<int>& pick_mask) {
  double u = 0.0;
  const std::size_t n = pooled.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!pick_mask[i]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (pick_mask[j]) continue;
      if (pooled[i] > pooled[j]) u += 1.0;
      else if (pooled[i] == pooled[j]) u += 0.5;
    }
  }
  return u;
}

}  // namespace

double oracle_mwu_exact(std::span<const double> x, std::span<const double> y) {
  const std::size_t n_x = x.size(), n_y = y.size();
  if (n_x == 0 || n_y == 0) throw std::invalid_argument("oracle_mwu_exact: empty");
  if (n_x + n_y > 10)
    throw std::invalid_argument("oracle_mwu_exact: n_x + n_y must be <= 10");

  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const std::size_t n = pooled.size();

  std::vector<int> mask(n, 0);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(n_x), 1);
  const double u_obs = arrangement_u(pooled, mask);
  const double centre = static_cast<double>(n_x * n_y) / 2.0;
  const double dist = std::abs(u_obs - centre);

  // iterate over all C(n, n_x) selector masks
  std::sort(mask.begin(), mask.end(), std::greater<int>());
  long hits = 0, total = 0;
  do {
    ++total;
    if (std::abs(arrangement_u(pooled, mask) - centre) >= dist - 1e-9) ++hits;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// VSOP87 Earth series, truncated (amplitudes in 1e-8 rad / 1e-8 AU)

namespace {

struct Term {
  double a, b, c;
};

constexpr Term kL0[] = {
    {175347046, 0, 0},          {3341656, 4.6692568, 6283.0758500},
    {34894, 4.62610, 12566.15170}, {3497, 2.7441, 5753.3849},
    {3418, 2.8289, 3.5231},     {3136, 3.6277, 77713.7715},
    {2676, 4.4181, 7860.4194},  {2343, 6.1352, 3930.2097},
    {1324, 0.7425, 11506.7698}, {1273, 2.0371, 529.6910},
    {1199, 1.1096, 1577.3435},  {990, 5.233, 5884.927},
    {902, 2.045, 26.298},       {857, 3.508, 398.149},
    {780, 1.179, 5223.694},     {753, 2.533, 5507.553},
    {505, 4.583, 18849.228},    {492, 4.205, 775.523},
    {357, 2.920, 0.067},        {317, 5.849, 11790.629},
    {284, 1.899, 796.298},      {271, 0.315, 10977.079},
    {243, 0.345, 5486.778},     {206, 4.806, 2544.314},
    {205, 1.869, 5573.143},     {202, 2.458, 6069.777},
    {156, 0.833, 213.299},      {132, 3.411, 2942.463},
    {126, 1.083, 20.775},       {115, 0.645, 0.980},
    {103, 0.636, 4694.003},     {102, 0.976, 15720.839},
    {102, 4.267, 7.114},        {99, 6.21, 2146.17},
    {98, 0.68, 155.42},         {86, 5.98, 161000.69},
    {85, 1.30, 6275.96},        {85, 3.67, 71430.70},
    {80, 1.81, 17260.15},       {79, 3.04, 12036.46},
    {75, 1.76, 5088.63},        {74, 3.50, 3154.69},
    {74, 4.68, 801.82},         {70, 0.83, 9437.76},
    {62, 3.98, 8827.39},        {61, 1.82, 7084.90},
    {57, 2.78, 6286.60},        {56, 4.39, 14143.50},
    {56, 3.47, 6279.55},        {52, 0.19, 12139.55},
    {52, 1.33, 1748.02},        {51, 0.28, 5856.48},
    {49, 0.49, 1194.45},        {41, 5.37, 8429.24},
    {41, 2.40, 19651.05},       {39, 6.17, 10447.39},
    {37, 6.04, 10213.29},       {37, 2.57, 1059.38},
    {36, 1.71, 2352.87},        {36, 1.78, 6812.77},
    {33, 0.59, 17789.85},       {30, 0.44, 83996.85},
    {30, 2.74, 1349.87},        {25, 3.16, 4690.48},
};

constexpr Term kL1[] = {
    {628331966747.0, 0, 0},     {206059, 2.678235, 6283.075850},
    {4303, 2.6351, 12566.1517}, {425, 1.590, 3.523},
    {119, 5.796, 26.298},       {109, 2.966, 1577.344},
    {93, 2.59, 18849.23},       {72, 1.14, 529.69},
    {68, 1.87, 398.15},         {67, 4.41, 5507.55},
    {59, 2.89, 5223.69},        {56, 2.17, 155.42},
    {45, 0.40, 796.30},         {36, 0.47, 775.52},
    {29, 2.65, 7.11},           {21, 5.34, 0.98},
    {19, 1.85, 5486.78},        {19, 4.97, 213.30},
    {17, 2.99, 6275.96},        {16, 0.03, 2544.31},
    {16, 1.43, 2146.17},        {15, 1.21, 10977.08},
    {12, 2.83, 1748.02},        {12, 3.26, 5088.63},
    {12, 5.27, 1194.45},        {12, 2.08, 4694.00},
    {11, 0.77, 553.57},         {10, 1.30, 6286.60},
    {10, 4.24, 1349.87},        {9, 2.70, 242.73},
    {9, 5.64, 951.72},          {8, 5.30, 2352.87},
    {6, 2.65, 9437.76},         {6, 4.67, 4690.48},
};

constexpr Term kL2[] = {
    {52919, 0, 0},          {8720, 1.0721, 6283.0758},
    {309, 0.867, 12566.152}, {27, 0.05, 3.52},
    {16, 5.19, 26.30},      {16, 3.68, 155.42},
    {10, 0.76, 18849.23},   {9, 2.06, 77713.77},
    {7, 0.83, 775.52},      {5, 4.66, 1577.34},
    {4, 1.03, 7.11},        {4, 3.44, 5573.14},
    {3, 5.14, 796.30},      {3, 6.05, 5507.55},
    {3, 1.19, 242.73},      {3, 6.12, 529.69},
    {3, 0.31, 398.15},      {3, 2.28, 553.57},
    {2, 4.38, 5223.69},     {2, 3.75, 0.98},
};

constexpr Term kL3[] = {
    {289, 5.844, 6283.076}, {35, 0, 0},       {17, 5.49, 12566.15},
    {3, 5.20, 155.42},      {1, 4.72, 3.52},  {1, 5.30, 18849.23},
    {1, 5.97, 242.73},
};

constexpr Term kL4[] = {
    {114, 3.142, 0}, {8, 4.13, 6283.08}, {1, 3.84, 12566.15},
};

constexpr Term kL5[] = {{1, 3.14, 0}};

constexpr Term kB0[] = {
    {280, 3.199, 84334.662}, {102, 5.422, 5507.553}, {80, 3.88, 5223.69},
    {44, 3.70, 2352.87},     {32, 4.00, 1577.34},
};

constexpr Term kB1[] = {{9, 3.90, 5507.55}, {6, 1.73, 5223.69}};

constexpr Term kR0[] = {
    {100013989, 0, 0},          {1670700, 3.0984635, 6283.0758500},
    {13956, 3.05525, 12566.15170}, {3084, 5.1985, 77713.7715},
    {1628, 1.1739, 5753.3849},  {1576, 2.8469, 7860.4194},
    {925, 5.453, 11506.770},    {542, 4.564, 3930.210},
    {472, 3.661, 5884.927},     {346, 0.964, 5507.553},
    {329, 5.900, 5223.694},     {307, 0.299, 5573.143},
    {243, 4.273, 11790.629},    {212, 5.847, 1577.344},
    {186, 5.022, 10977.079},    {175, 3.012, 18849.228},
    {110, 5.055, 5486.778},     {98, 0.89, 6069.78},
    {86, 5.69, 15720.84},       {86, 1.27, 161000.69},
    {65, 0.27, 17260.15},       {63, 0.92, 529.69},
    {57, 2.01, 83996.85},       {56, 5.24, 71430.70},
    {49, 3.25, 2544.31},        {47, 2.58, 775.52},
    {45, 5.54, 9437.76},        {43, 6.01, 6275.96},
    {39, 5.36, 4694.00},        {38, 2.39, 8827.39},
    {37, 0.83, 19651.05},       {37, 4.90, 12139.55},
    {36, 1.67, 12036.46},       {35, 1.84, 2942.46},
    {33, 0.24, 7084.90},        {32, 0.18, 5088.63},
    {32, 1.78, 398.15},         {28, 1.21, 6286.60},
    {28, 1.90, 6279.55},        {26, 4.59, 10447.39},
};

constexpr Term kR1[] = {
    {103019, 1.107490, 6283.075850}, {1721, 1.0644, 12566.1517},
    {702, 3.142, 0},                 {32, 1.02, 18849.23},
    {31, 2.84, 5507.55},             {25, 1.32, 5223.69},
    {18, 1.42, 1577.34},             {10, 5.91, 10977.08},
    {9, 1.42, 6275.96},              {9, 0.27, 5486.78},
};

constexpr Term kR2[] = {
    {4359, 5.7846, 6283.0758}, {124, 5.579, 12566.152}, {12, 3.14, 0},
    {9, 3.63, 77713.77},       {6, 1.87, 5573.14},      {3, 5.47, 18849.23},
};

constexpr Term kR3[] = {{145, 4.273, 6283.076}, {7, 3.92, 12566.15}};

constexpr Term kR4[] = {{4, 2.56, 6283.08}};

double sum_series(const Term* terms, std::size_t n, double tau) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += terms[i].a * std::cos(terms[i].b + terms[i].c * tau);
  return s;
}

#define SERIES(t, tau) sum_series(t, sizeof(t) / sizeof(Term), tau)

double wrap_2pi(double x) {
  x = std::fmod(x, 2.0 * kPi);
  return x < 0.0 ? x + 2.0 * kPi : x;
}

struct Nutation {
  double dpsi_rad;  // in longitude
  double deps_rad;  // in obliquity
};

Nutation nutation_short(double t_centuries) {
  const double t = t_centuries;
  const double omega = (125.04452 - 1934.136261 * t) * kDeg;   // lunar node
  const double lsun = (280.4665 + 36000.7698 * t) * kDeg;      // mean Sun
  const double lmoon = (218.3165 + 481267.8813 * t) * kDeg;    // mean Moon
  Nutation n;
  n.dpsi_rad = (-17.20 * std::sin(omega) - 1.32 * std::sin(2.0 * lsun) -
                0.23 * std::sin(2.0 * lmoon) + 0.21 * std::sin(2.0 * omega)) *
               kArcsec;
  n.deps_rad = (9.20 * std::cos(omega) + 0.57 * std::cos(2.0 * lsun) +
                0.10 * std::cos(2.0 * lmoon) - 0.09 * std::cos(2.0 * omega)) *
               kArcsec;
  return n;
}

double mean_obliquity_rad(double t_centuries) {
  const double t = t_centuries;
  const double seconds =
      84381.448 - 46.8150 * t - 0.00059 * t * t + 0.001813 * t * t * t;
  return seconds * kArcsec;
}

struct ApparentSun {
  double lambda_rad;  // apparent ecliptic longitude
  double beta_rad;
  double dist_au;
  double eps_rad;   // true obliquity
  double dpsi_rad;  // for the equation of the equinoxes
};

ApparentSun apparent_sun(double epoch_unix) {
  const double jde = julian_date(epoch_unix + kTtMinusUtcSeconds);
  const double tau = (jde - 2451545.0) / 365250.0;  // julian millennia, TT
  const double t = tau * 10.0;                      // julian centuries

  const double l_helio =
      (SERIES(kL0, tau) + tau * (SERIES(kL1, tau) + tau * (SERIES(kL2, tau) +
       tau * (SERIES(kL3, tau) + tau * (SERIES(kL4, tau) + tau * SERIES(kL5, tau)))))) *
      1e-8;
  const double b_helio = (SERIES(kB0, tau) + tau * SERIES(kB1, tau)) * 1e-8;
  const double r_au =
      (SERIES(kR0, tau) + tau * (SERIES(kR1, tau) + tau * (SERIES(kR2, tau) +
       tau * (SERIES(kR3, tau) + tau * SERIES(kR4, tau))))) *
      1e-8;

  double theta = wrap_2pi(l_helio + kPi);  // geocentric
  double beta = -b_helio;

  // VSOP -> FK5 frame correction in longitude
  theta += -0.09033 * kArcsec;

  const Nutation nut = nutation_short(t);
  const double aberration = -20.4898 * kArcsec / r_au;

  ApparentSun sun;
  sun.lambda_rad = wrap_2pi(theta + nut.dpsi_rad + aberration);
  sun.beta_rad = beta;
  sun.dist_au = r_au;
  sun.eps_rad = mean_obliquity_rad(t) + nut.deps_rad;
  sun.dpsi_rad = nut.dpsi_rad;
  return sun;
}

#undef SERIES

// IAU-82 sidereal time in the seconds-per-century form; written independently
// of geo::gmst_rad so the two formulations cross-check each other.
double oracle_gmst_rad(double epoch_unix) {
  const double tu = days_since_j2000(epoch_unix) / 36525.0;
  double seconds = 67310.54841 +
                   (876600.0 * 3600.0 + 8640184.812866) * tu +
                   0.093104 * tu * tu - 6.2e-6 * tu * tu * tu;
  seconds = std::fmod(seconds, 86400.0);
  if (seconds < 0.0) seconds += 86400.0;
  return seconds * (2.0 * kPi / 86400.0);
}

}  // namespace

OracleSunEquatorial oracle_sun_equatorial(double epoch_unix) {
  const ApparentSun sun = apparent_sun(epoch_unix);
  const double sl = std::sin(sun.lambda_rad), cl = std::cos(sun.lambda_rad);
  const double se = std::sin(sun.eps_rad), ce = std::cos(sun.eps_rad);
  const double sb = std::sin(sun.beta_rad), cb = std::cos(sun.beta_rad);

  OracleSunEquatorial out;
  out.ra_rad = wrap_2pi(std::atan2(cb * sl * ce - sb * se, cb * cl));
  out.dec_rad = std::asin(sb * ce + cb * se * sl);
  out.distance_au = sun.dist_au;
  return out;
}

geo::EcefVector oracle_sun(double epoch_unix) {
  const ApparentSun sun = apparent_sun(epoch_unix);
  const OracleSunEquatorial eq = oracle_sun_equatorial(epoch_unix);

  const double cd = std::cos(eq.dec_rad);
  const double xi = cd * std::cos(eq.ra_rad);
  const double yi = cd * std::sin(eq.ra_rad);
  const double zi = std::sin(eq.dec_rad);

  // apparent sidereal time = GMST + equation of the equinoxes
  const double gast = oracle_gmst_rad(epoch_unix) + sun.dpsi_rad * std::cos(sun.eps_rad);
  const double st = std::sin(gast), ct = std::cos(gast);
  return {xi * ct + yi * st, -xi * st + yi * ct, zi};
}

}  // namespace uemr::synth
