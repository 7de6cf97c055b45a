#include "uemr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "uemr/rng.hpp"

namespace uemr::stats {

namespace {
constexpr double kLn10 = 2.302585092994045684;
}

double median_inplace(std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

double median_of(std::span<const double> v) {
  std::vector<double> copy(v.begin(), v.end());
  return median_inplace(copy);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// ---------------------------------------------------------------------------
// Mann-Whitney

namespace {

// tie-adjusted U plus the tie-group sizes of the pooled sample
struct URaw {
  double u = 0.0;
  bool has_ties = false;
  double tie_correction = 0.0;  // sum of (t^3 - t) over tie groups
};

URaw u_statistic(std::span<const double> x, std::span<const double> y) {
  std::vector<double> ys(y.begin(), y.end());
  std::sort(ys.begin(), ys.end());
  URaw r;
  for (const double xi : x) {
    const auto lo = std::lower_bound(ys.begin(), ys.end(), xi);
    const auto hi = std::upper_bound(lo, ys.end(), xi);
    r.u += static_cast<double>(lo - ys.begin());          // y < x
    r.u += 0.5 * static_cast<double>(hi - lo);            // ties
  }
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::sort(pooled.begin(), pooled.end());
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
    const double t = static_cast<double>(j - i);
    if (t > 1.0) {
      r.has_ties = true;
      r.tie_correction += t * t * t - t;
    }
    i = j;
  }
  return r;
}

// Null distribution of the rank-sum via the subset-count recurrence:
// counts[w] = number of size-m subsets of ranks {1..N} with rank sum w.
// U = W - m(m+1)/2. Exact for tie-free samples.
std::vector<double> rank_sum_counts(std::size_t m, std::size_t n_total) {
  const std::size_t w_max = m * n_total;  // loose upper bound on the rank sum
  std::vector<std::vector<double>> dp(m + 1, std::vector<double>(w_max + 1, 0.0));
  dp[0][0] = 1.0;
  for (std::size_t rank = 1; rank <= n_total; ++rank) {
    const std::size_t j_hi = std::min(rank, m);
    for (std::size_t j = j_hi; j >= 1; --j) {
      for (std::size_t w = w_max; w >= rank; --w) {
        if (dp[j - 1][w - rank] != 0.0) dp[j][w] += dp[j - 1][w - rank];
      }
    }
  }
  return dp[m];
}

double exact_two_sided_p(double u, std::size_t n_x, std::size_t n_y) {
  const std::vector<double> counts = rank_sum_counts(n_x, n_x + n_y);
  const double offset = static_cast<double>(n_x * (n_x + 1)) / 2.0;
  const double mn = static_cast<double>(n_x * n_y);
  double total = 0.0;
  for (const double c : counts) total += c;

  // symmetric null: sum both tails at distance >= |u - mn/2| from the centre
  const double dist = std::abs(u - mn / 2.0);
  double tail = 0.0;
  for (std::size_t w = 0; w < counts.size(); ++w) {
    if (counts[w] == 0.0) continue;
    const double u_w = static_cast<double>(w) - offset;
    if (u_w < 0.0 || u_w > mn) continue;
    if (std::abs(u_w - mn / 2.0) >= dist - 1e-9) tail += counts[w];
  }
  return std::min(1.0, tail / total);
}

}  // namespace

MwuResult mann_whitney(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty())
    throw std::invalid_argument("mann_whitney: empty sample");
  const URaw raw = u_statistic(x, y);
  const double n_x = static_cast<double>(x.size());
  const double n_y = static_cast<double>(y.size());
  const double mn = n_x * n_y;

  MwuResult res;
  res.u_statistic = raw.u;
  res.n_x = x.size();
  res.n_y = y.size();
  res.cliffs_delta = 2.0 * raw.u / mn - 1.0;

  if (x.size() <= 20 && y.size() <= 20 && !raw.has_ties) {
    res.method = MwuMethod::Exact;
    res.p_two_sided = exact_two_sided_p(raw.u, x.size(), y.size());
    return res;
  }

  res.method = MwuMethod::Normal;
  const double n_tot = n_x + n_y;
  const double var =
      mn / 12.0 *
      ((n_tot + 1.0) - raw.tie_correction / (n_tot * (n_tot - 1.0)));
  if (var <= 0.0) {  // all values identical
    res.p_two_sided = 1.0;
    return res;
  }
  double numer = raw.u - mn / 2.0;
  // continuity correction toward the mean
  if (numer > 0.5) numer -= 0.5;
  else if (numer < -0.5) numer += 0.5;
  else numer = 0.0;
  res.p_two_sided = normal_two_sided_p(numer / std::sqrt(var));
  return res;
}

double cliffs_delta(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty())
    throw std::invalid_argument("cliffs_delta: empty sample");
  const double mn = static_cast<double>(x.size()) * static_cast<double>(y.size());
  if (mn <= 250000.0) {  // direct pair count
    double gt = 0.0, lt = 0.0;
    for (const double xi : x)
      for (const double yj : y) {
        gt += xi > yj;
        lt += xi < yj;
      }
    return (gt - lt) / mn;
  }
  std::vector<double> ys(y.begin(), y.end());
  std::sort(ys.begin(), ys.end());
  double gt = 0.0, lt = 0.0;
  for (const double xi : x) {
    const auto lo = std::lower_bound(ys.begin(), ys.end(), xi);
    const auto hi = std::upper_bound(lo, ys.end(), xi);
    gt += static_cast<double>(lo - ys.begin());
    lt += static_cast<double>(ys.end() - hi);
  }
  return (gt - lt) / mn;
}

// ---------------------------------------------------------------------------
// bootstrap

namespace {

void resample_into(std::span<const double> src, std::vector<double>& dst, Rng& rng) {
  dst.clear();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst.push_back(src[rng.next_index(src.size())]);
}

struct PercentilePair {
  double low, high;
};

PercentilePair percentile_ci(std::vector<double>& samples) {
  std::sort(samples.begin(), samples.end());
  return {quantile_sorted(samples, 0.025), quantile_sorted(samples, 0.975)};
}

}  // namespace

RatioWithCI bootstrap_median_ratio(std::span<const double> x,
                                   std::span<const double> y, int n_resamples,
                                   std::uint64_t seed) {
  if (x.empty() || y.empty())
    throw std::invalid_argument("bootstrap_median_ratio: empty sample");
  if (n_resamples < 100)
    throw std::invalid_argument("bootstrap_median_ratio: need B >= 100");
  const double med_y = median_of(y);
  if (med_y == 0.0)
    throw std::invalid_argument("bootstrap_median_ratio: median(y) is zero");

  RatioWithCI out;
  out.estimate = median_of(x) / med_y;
  out.n_resamples = n_resamples;
  out.resample_unit = ResampleUnit::Detection;
  out.seed = seed;

  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(n_resamples));
  std::vector<double> rx, ry;
  rx.reserve(x.size());
  ry.reserve(y.size());
  for (int b = 0; b < n_resamples; ++b) {
    Rng rng(derive_seed(seed, "bootstrap_median_ratio", static_cast<std::uint64_t>(b)));
    resample_into(x, rx, rng);
    resample_into(y, ry, rng);
    const double my = median_inplace(ry);
    if (my == 0.0) {
      ++out.n_excluded;
      continue;
    }
    ratios.push_back(median_inplace(rx) / my);
  }
  if (out.n_excluded > 0.05 * n_resamples)
    throw std::runtime_error(
        "bootstrap_median_ratio: more than 5% of resamples undefined");
  const auto ci = percentile_ci(ratios);
  out.ci_low = ci.low;
  out.ci_high = ci.high;
  return out;
}

namespace {

// pooled illuminated/eclipsed median ratio of a drawn satellite sample;
// NaN when either stratum is empty
double pooled_state_ratio(std::span<const ClusterGroup> groups,
                          std::span<const std::size_t> picks,
                          std::vector<double>& lit, std::vector<double>& dark) {
  lit.clear();
  dark.clear();
  for (const std::size_t g : picks) {
    const ClusterGroup& grp = groups[g];
    lit.insert(lit.end(), grp.illuminated.begin(), grp.illuminated.end());
    dark.insert(dark.end(), grp.eclipsed.begin(), grp.eclipsed.end());
  }
  if (lit.empty() || dark.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double md = median_inplace(dark);
  if (md == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return median_inplace(lit) / md;
}

std::vector<std::size_t> identity_picks(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return p;
}

void draw_picks(std::vector<std::size_t>& picks, std::size_t n, Rng& rng) {
  picks.clear();
  for (std::size_t i = 0; i < n; ++i) picks.push_back(rng.next_index(n));
}

}  // namespace

RatioWithCI cluster_bootstrap_ratio(std::span<const ClusterGroup> groups,
                                    int n_resamples, std::uint64_t seed) {
  if (groups.empty())
    throw std::invalid_argument("cluster_bootstrap_ratio: no groups");
  if (n_resamples < 100)
    throw std::invalid_argument("cluster_bootstrap_ratio: need B >= 100");

  std::vector<double> lit, dark;
  const double estimate =
      pooled_state_ratio(groups, identity_picks(groups.size()), lit, dark);
  if (std::isnan(estimate))
    throw std::runtime_error(
        "cluster_bootstrap_ratio: a state stratum is empty on the full sample");

  RatioWithCI out;
  out.estimate = estimate;
  out.n_resamples = n_resamples;
  out.resample_unit = ResampleUnit::Satellite;
  out.seed = seed;

  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(n_resamples));
  std::vector<std::size_t> picks;
  for (int b = 0; b < n_resamples; ++b) {
    Rng rng(derive_seed(seed, "cluster_bootstrap_ratio", static_cast<std::uint64_t>(b)));
    draw_picks(picks, groups.size(), rng);
    const double r = pooled_state_ratio(groups, picks, lit, dark);
    if (std::isnan(r)) {
      ++out.n_excluded;
      continue;
    }
    ratios.push_back(r);
  }
  if (ratios.empty())
    throw std::runtime_error("cluster_bootstrap_ratio: all resamples excluded");
  const auto ci = percentile_ci(ratios);
  out.ci_low = ci.low;
  out.ci_high = ci.high;
  return out;
}

InteractionResult interaction_test(std::span<const ClusterGroup> groups_a,
                                   std::span<const ClusterGroup> groups_b,
                                   int n_resamples, std::uint64_t seed) {
  if (groups_a.empty() || groups_b.empty())
    throw std::invalid_argument("interaction_test: empty group list");
  if (n_resamples < 100)
    throw std::invalid_argument("interaction_test: need B >= 100");

  std::vector<double> lit, dark;
  const double ra =
      pooled_state_ratio(groups_a, identity_picks(groups_a.size()), lit, dark);
  const double rb =
      pooled_state_ratio(groups_b, identity_picks(groups_b.size()), lit, dark);
  if (std::isnan(ra) || std::isnan(rb))
    throw std::runtime_error("interaction_test: empty stratum on the full sample");

  InteractionResult out;
  out.diff = ra - rb;
  out.ratio_of_ratios = ra / rb;
  out.n_resamples = n_resamples;
  out.seed = seed;

  std::vector<double> diffs, rrs;
  std::vector<std::size_t> picks;
  int n_ge = 0, n_le = 0, n_valid = 0;
  for (int b = 0; b < n_resamples; ++b) {
    Rng rng_a(derive_seed(seed, "interaction_test.a", static_cast<std::uint64_t>(b)));
    Rng rng_b(derive_seed(seed, "interaction_test.b", static_cast<std::uint64_t>(b)));
    draw_picks(picks, groups_a.size(), rng_a);
    const double sa = pooled_state_ratio(groups_a, picks, lit, dark);
    draw_picks(picks, groups_b.size(), rng_b);
    const double sb = pooled_state_ratio(groups_b, picks, lit, dark);
    if (std::isnan(sa) || std::isnan(sb)) {
      ++out.n_excluded;
      continue;
    }
    const double d = sa - sb;
    diffs.push_back(d);
    rrs.push_back(sa / sb);
    n_ge += d >= 0.0;
    n_le += d <= 0.0;
    ++n_valid;
  }
  if (n_valid == 0)
    throw std::runtime_error("interaction_test: all resamples excluded");

  const auto ci_d = percentile_ci(diffs);
  out.diff_low = ci_d.low;
  out.diff_high = ci_d.high;
  const auto ci_r = percentile_ci(rrs);
  out.rr_low = ci_r.low;
  out.rr_high = ci_r.high;

  const double p = 2.0 * std::min(static_cast<double>(n_ge), static_cast<double>(n_le)) /
                   static_cast<double>(n_valid);
  out.p_two_sided = std::min(1.0, std::max(p, 1.0 / static_cast<double>(n_resamples)));
  return out;
}

// ---------------------------------------------------------------------------
// binomial / BH / Wilson

BinomTail binom_two_sided(std::int64_t k, std::int64_t n, double p0,
                          BinomConvention convention) {
  if (n < 1 || k < 0 || k > n)
    throw std::invalid_argument("binom_two_sided: need 0 <= k <= n, n >= 1");
  if (!(p0 > 0.0 && p0 < 1.0))
    throw std::invalid_argument("binom_two_sided: need 0 < p0 < 1");

  const double lp = std::log(p0);
  const double lq = std::log1p(-p0);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  const auto log_pmf = [&](std::int64_t kk) {
    const double dk = static_cast<double>(kk);
    return lgn - std::lgamma(dk + 1.0) - std::lgamma(static_cast<double>(n) - dk + 1.0) +
           dk * lp + (static_cast<double>(n) - dk) * lq;
  };

  const double log_obs = log_pmf(k);
  // relative slack absorbs round-off in the pmf comparison
  const double cutoff = log_obs + 1e-7;

  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n) + 1);
  if (convention == BinomConvention::MinLikelihood) {
    for (std::int64_t kk = 0; kk <= n; ++kk) {
      const double l = log_pmf(kk);
      if (l <= cutoff) {
        terms.push_back(l);
        max_term = std::max(max_term, l);
      }
    }
  } else {  // doubled smaller tail, both tails include the observed k
    const auto log_tail = [&](std::int64_t lo, std::int64_t hi) {
      double mt = -std::numeric_limits<double>::infinity();
      for (std::int64_t kk = lo; kk <= hi; ++kk) mt = std::max(mt, log_pmf(kk));
      double s = 0.0;
      for (std::int64_t kk = lo; kk <= hi; ++kk) s += std::exp(log_pmf(kk) - mt);
      return mt + std::log(s);
    };
    const double lower = log_tail(0, k);
    const double upper = log_tail(k, n);
    const double l = std::min(lower, upper) + std::log(2.0);
    terms.push_back(l);
    max_term = l;
  }

  double sum = 0.0;
  for (const double l : terms) sum += std::exp(l - max_term);
  const double log_p = max_term + std::log(sum);

  BinomTail out;
  out.log10_p = std::min(0.0, log_p / kLn10);
  out.p = std::min(1.0, std::exp(log_p));
  if (out.p <= 0.0) out.p = std::numeric_limits<double>::denorm_min();
  return out;
}

std::vector<bool> bh_fdr(std::span<const double> p_values, double q) {
  const std::size_t m = p_values.size();
  std::vector<bool> flags(m, false);
  if (m == 0) return flags;
  for (const double p : p_values)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("bh_fdr: p-values must lie in [0, 1]");

  std::vector<double> sorted(p_values.begin(), p_values.end());
  std::sort(sorted.begin(), sorted.end());
  double threshold = -1.0;
  for (std::size_t r = m; r >= 1; --r) {
    if (sorted[r - 1] <= static_cast<double>(r) * q / static_cast<double>(m)) {
      threshold = sorted[r - 1];
      break;
    }
  }
  if (threshold < 0.0) return flags;
  for (std::size_t i = 0; i < m; ++i) flags[i] = p_values[i] <= threshold;
  return flags;
}

Interval wilson_interval(std::int64_t k, std::int64_t n, double z) {
  if (n < 1) throw std::invalid_argument("wilson_interval: need n >= 1");
  if (k < 0 || k > n) throw std::invalid_argument("wilson_interval: need 0 <= k <= n");
  if (z <= 0.0) throw std::invalid_argument("wilson_interval: need z > 0");
  const double nn = static_cast<double>(n);
  const double p_hat = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p_hat + z2 / (2.0 * nn)) / denom;
  const double half =
      z / denom * std::sqrt(p_hat * (1.0 - p_hat) / nn + z2 / (4.0 * nn * nn));
  Interval out;
  out.low = std::max(0.0, centre - half);
  out.high = std::min(1.0, centre + half);
  if (k == 0) out.low = 0.0;    // boundary cases are exact
  if (k == n) out.high = 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// KS and Student-t helpers

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty())
    throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());

  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= v) ++i;
    while (j < ys.size() && ys[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }

  const double n_eff = nx * ny / (nx + ny);
  const double lambda = std::sqrt(n_eff) * d;
  double p;
  if (lambda < 1e-3) {
    p = 1.0;
  } else {
    p = 0.0;
    for (int m = 1; m <= 100; ++m) {
      const double term = 2.0 * ((m % 2 == 1) ? 1.0 : -1.0) *
                          std::exp(-2.0 * m * m * lambda * lambda);
      p += term;
      if (std::abs(term) < 1e-16) break;
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  return {d, p};
}

namespace {

// regularised incomplete beta via the Lentz continued fraction
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-15, kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double betai(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double nu) {
  const double x = nu / (nu + t * t);
  const double tail = 0.5 * betai(nu / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

}  // namespace

double student_t_quantile(double cumulative_prob, int dof) {
  if (!(cumulative_prob > 0.0 && cumulative_prob < 1.0))
    throw std::invalid_argument("student_t_quantile: prob must be in (0, 1)");
  if (dof < 1) throw std::invalid_argument("student_t_quantile: dof >= 1");
  double lo = -1e3, hi = 1e3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, static_cast<double>(dof)) < cumulative_prob) lo = mid;
    else hi = mid;
    if (hi - lo < 1e-12) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace uemr::stats
