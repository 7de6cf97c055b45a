#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "uemr/rng.hpp"
#include "uemr/stats.hpp"
#include "uemr/synth.hpp"

using namespace uemr;
using doctest::Approx;

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n, bool allow_ties = false) {
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i)
    v.push_back(allow_ties ? static_cast<double>(rng.next_index(6))
                           : rng.next_unit());
  return v;
}

// direct pair enumeration, the oracle for cliffs_delta
double cliff_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  double gt = 0, lt = 0;
  for (double a : x)
    for (double b : y) {
      gt += a > b;
      lt += a < b;
    }
  return (gt - lt) / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

}  // namespace

TEST_CASE("mann-whitney: exact p from enumeration") {
  const std::vector<double> x{1, 2}, y{3, 4};
  const auto r = stats::mann_whitney(x, y);
  CHECK(r.u_statistic == 0.0);
  CHECK(r.method == stats::MwuMethod::Exact);
  // all 6 rank arrangements, two extreme ones
  CHECK(r.p_two_sided == Approx(2.0 / 6.0).epsilon(1e-12));
  CHECK(synth::oracle_mwu_exact(x, y) == Approx(2.0 / 6.0));
}

TEST_CASE("mann-whitney: all-tied samples") {
  const std::vector<double> x{5, 5, 5}, y{5, 5, 5};
  const auto r = stats::mann_whitney(x, y);
  CHECK(r.u_statistic == Approx(4.5));  // n_x n_y / 2
  CHECK(r.cliffs_delta == Approx(0.0));
  CHECK(r.method == stats::MwuMethod::Normal);  // ties force the normal path
  CHECK(r.p_two_sided == Approx(1.0));
}

TEST_CASE("mann-whitney: exact path equals the enumeration oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n_x = 1 + rng.next_index(5);
    const std::size_t n_y = 1 + rng.next_index(5);
    std::vector<double> x = random_values(rng, n_x);
    std::vector<double> y = random_values(rng, n_y);
    const auto r = stats::mann_whitney(x, y);
    REQUIRE(r.method == stats::MwuMethod::Exact);
    CHECK(r.p_two_sided == Approx(synth::oracle_mwu_exact(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("mann-whitney: delta identity and monotone-transform invariance") {
  Rng rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x = random_values(rng, 3 + rng.next_index(30), true);
    std::vector<double> y = random_values(rng, 3 + rng.next_index(30), true);
    const auto r = stats::mann_whitney(x, y);
    const double mn = static_cast<double>(x.size()) * static_cast<double>(y.size());
    CHECK(r.cliffs_delta ==
          Approx(2.0 * r.u_statistic / mn - 1.0).epsilon(1e-12));
    CHECK(r.cliffs_delta == Approx(stats::cliffs_delta(x, y)).epsilon(1e-12));

    // strictly increasing transform leaves U, p, delta unchanged
    auto tx = x, ty = y;
    for (double& v : tx) v = std::exp(0.5 * v) + 3.0;
    for (double& v : ty) v = std::exp(0.5 * v) + 3.0;
    const auto rt = stats::mann_whitney(tx, ty);
    CHECK(rt.u_statistic == Approx(r.u_statistic));
    CHECK(rt.p_two_sided == Approx(r.p_two_sided).epsilon(1e-12));
    CHECK(rt.cliffs_delta == Approx(r.cliffs_delta));
  }
}

TEST_CASE("mann-whitney: empty input throws") {
  const std::vector<double> x{1.0}, empty;
  CHECK_THROWS(stats::mann_whitney(empty, x));
  CHECK_THROWS(stats::mann_whitney(x, empty));
}

TEST_CASE("cliffs delta: examples") {
  CHECK(stats::cliffs_delta(std::vector<double>{1, 2, 3},
                            std::vector<double>{0, 0, 0}) == Approx(1.0));
  CHECK(stats::cliffs_delta(std::vector<double>{1, 2, 3},
                            std::vector<double>{1, 2, 3}) == Approx(0.0));
  // enumerate 4 pairs: 1>2 no, 1>4 no, 3>2 yes, 3>4 no -> (1-3)/4
  CHECK(stats::cliffs_delta(std::vector<double>{1, 3},
                            std::vector<double>{2, 4}) == Approx(-0.5));
}

TEST_CASE("cliffs delta: sorted path equals pair enumeration") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x = random_values(rng, 1 + rng.next_index(40), true);
    std::vector<double> y = random_values(rng, 1 + rng.next_index(40), true);
    CHECK(stats::cliffs_delta(x, y) == Approx(cliff_oracle(x, y)).epsilon(1e-12));
  }
  // force the large-input path and compare against the direct count
  std::vector<double> x = random_values(rng, 700, true);
  std::vector<double> y = random_values(rng, 600, true);
  CHECK(stats::cliffs_delta(x, y) == Approx(cliff_oracle(x, y)).epsilon(1e-12));
}

TEST_CASE("bootstrap median ratio: degenerate distributions give a point CI") {
  const std::vector<double> x(10, 6.0), y(8, 3.0);
  const auto r = stats::bootstrap_median_ratio(x, y, 200, 42);
  CHECK(r.estimate == Approx(2.0));
  CHECK(r.ci_low == Approx(2.0));
  CHECK(r.ci_high == Approx(2.0));
}

TEST_CASE("bootstrap median ratio: bitwise determinism") {
  Rng rng(9);
  const std::vector<double> x = random_values(rng, 40);
  const std::vector<double> y = random_values(rng, 35);
  const auto a = stats::bootstrap_median_ratio(x, y, 500, 1234);
  const auto b = stats::bootstrap_median_ratio(x, y, 500, 1234);
  CHECK(a.estimate == b.estimate);
  CHECK(a.ci_low == b.ci_low);
  CHECK(a.ci_high == b.ci_high);
  // a different seed moves the interval
  const auto c = stats::bootstrap_median_ratio(x, y, 500, 1235);
  CHECK((c.ci_low != a.ci_low || c.ci_high != a.ci_high));
}

TEST_CASE("bootstrap median ratio: input validation") {
  const std::vector<double> x{1, 2, 3};
  CHECK_THROWS(stats::bootstrap_median_ratio(x, x, 50, 1));  // B < 100
  CHECK_THROWS(stats::bootstrap_median_ratio({}, x, 200, 1));
  const std::vector<double> zeros(5, 0.0);
  CHECK_THROWS(stats::bootstrap_median_ratio(x, zeros, 200, 1));  // median(y) = 0
}

TEST_CASE("cluster bootstrap: single satellite degenerates to the point estimate") {
  stats::ClusterGroup g;
  g.satellite_id = 1;
  g.illuminated = {2.0, 4.0, 6.0};
  g.eclipsed = {1.0, 2.0, 3.0};
  const auto r = stats::cluster_bootstrap_ratio(std::vector{g}, 200, 7);
  CHECK(r.estimate == Approx(2.0));
  CHECK(r.ci_low == Approx(2.0));
  CHECK(r.ci_high == Approx(2.0));
  CHECK(r.resample_unit == stats::ResampleUnit::Satellite);
}

TEST_CASE("cluster bootstrap: empty-stratum resamples are excluded and counted") {
  std::vector<stats::ClusterGroup> groups(2);
  groups[0].satellite_id = 1;
  groups[0].illuminated = {2.0, 2.0};
  groups[0].eclipsed = {1.0};
  groups[1].satellite_id = 2;
  groups[1].illuminated = {4.0, 4.0};  // no eclipsed detections
  const auto r = stats::cluster_bootstrap_ratio(groups, 400, 3);
  CHECK(r.n_excluded > 0);  // double-draws of satellite 2 have no eclipsed stratum
  CHECK(r.n_excluded < 400);
}

TEST_CASE("interaction test: identical groups are null") {
  std::vector<stats::ClusterGroup> groups;
  Rng rng(4);
  for (int s = 0; s < 12; ++s) {
    stats::ClusterGroup g;
    g.satellite_id = s;
    g.illuminated = random_values(rng, 8);
    g.eclipsed = random_values(rng, 8);
    groups.push_back(std::move(g));
  }
  const auto r = stats::interaction_test(groups, groups, 400, 99);
  CHECK(r.diff == Approx(0.0));
  CHECK(r.ratio_of_ratios == Approx(1.0));
  CHECK(r.p_two_sided >= 0.5);
}

TEST_CASE("interaction test: one-sided resamples hit the 1/B floor") {
  // ratios 0.5 vs 2.0 with no within-group variance, so every resampled
  // difference is negative
  stats::ClusterGroup a, b;
  a.satellite_id = 1;
  a.illuminated = {1.0, 1.0, 1.0};
  a.eclipsed = {2.0, 2.0, 2.0};
  b.satellite_id = 2;
  b.illuminated = {2.0, 2.0, 2.0};
  b.eclipsed = {1.0, 1.0, 1.0};
  const auto r = stats::interaction_test(std::vector{a}, std::vector{b}, 2000, 5);
  CHECK(r.diff == Approx(-1.5));
  CHECK(r.p_two_sided == Approx(1.0 / 2000.0));
}

TEST_CASE("binomial two-sided: pinned examples") {
  CHECK(stats::binom_two_sided(50, 100, 0.5).p == Approx(1.0));
  // 8 equally likely outcomes; only {0,3} sit at or below the observed pmf
  CHECK(stats::binom_two_sided(0, 3, 0.5).p == Approx(0.25));
  CHECK(stats::binom_two_sided(0, 3, 0.5, stats::BinomConvention::MinLikelihood).p ==
        Approx(0.25));
  // far tail stays representable through the log-space sum
  const auto tail = stats::binom_two_sided(2193, 2704, 0.4809);
  CHECK(tail.log10_p == Approx(-274.82).epsilon(0.001));
  CHECK(tail.p > 0.0);
}

TEST_CASE("binomial two-sided: symmetry under (k, p0) -> (n-k, 1-p0)") {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.next_index(200));
    const std::int64_t k = static_cast<std::int64_t>(rng.next_index(n + 1));
    const double p0 = 0.05 + 0.9 * rng.next_unit();
    for (const auto conv :
         {stats::BinomConvention::DoubledTail, stats::BinomConvention::MinLikelihood}) {
      const auto a = stats::binom_two_sided(k, n, p0, conv);
      const auto b = stats::binom_two_sided(n - k, n, 1.0 - p0, conv);
      CHECK(a.log10_p == Approx(b.log10_p).epsilon(1e-9));
    }
  }
}

TEST_CASE("bh-fdr: pinned examples") {
  const std::vector<double> ones(7, 1.0);
  for (const bool f : stats::bh_fdr(ones, 0.05)) CHECK_FALSE(f);

  const std::vector<double> single{0.04};
  CHECK(stats::bh_fdr(single, 0.05)[0]);
}

TEST_CASE("bh-fdr: lowering one p-value never unflags another") {
  Rng rng(88);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> p = random_values(rng, 15);
    const auto before = stats::bh_fdr(p, 0.05);
    const std::size_t idx = rng.next_index(p.size());
    p[idx] *= rng.next_unit();
    const auto after = stats::bh_fdr(p, 0.05);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i == idx) continue;
      if (before[i]) CHECK(after[i]);
    }
  }
}

TEST_CASE("wilson interval: boundary exactness and the pinned channel") {
  CHECK(stats::wilson_interval(0, 10).low == 0.0);
  CHECK(stats::wilson_interval(10, 10).high == 1.0);
  const auto w = stats::wilson_interval(2193, 2704, 1.96);
  CHECK(std::abs(w.low - 0.795) <= 1e-3);
  CHECK(std::abs(w.high - 0.825) <= 1e-3);
}

TEST_CASE("wilson interval: width shrinks monotonically in n at fixed k/n") {
  double last_width = 1.0;
  for (const std::int64_t n : {10, 20, 40, 80, 160, 320, 640}) {
    const std::int64_t k = n * 3 / 10;
    const auto w = stats::wilson_interval(k, n, 1.96);
    const double width = w.high - w.low;
    CHECK(width < last_width);
    last_width = width;
  }
}

TEST_CASE("derive_seed: stability, stream separation, collision scan") {
  CHECK(derive_seed(1, "a", 0) == derive_seed(1, "a", 0));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "b", 0));
  CHECK(derive_seed(1, "a", 0) != derive_seed(2, "a", 0));

  std::set<std::uint64_t> seen;
  for (std::uint64_t c = 0; c < 5000; ++c) seen.insert(derive_seed(9, "scan", c));
  for (std::uint64_t c = 0; c < 5000; ++c) seen.insert(derive_seed(10, "scan", c));
  CHECK(seen.size() == 10000);
}

TEST_CASE("median and quantile conventions") {
  CHECK(stats::median_of(std::vector<double>{1, 2, 3}) == Approx(2.0));
  CHECK(stats::median_of(std::vector<double>{1, 2, 3, 10}) == Approx(2.5));
  CHECK(stats::median_of(std::vector<double>{7}) == Approx(7.0));
  const std::vector<double> sorted{0, 1, 2, 3, 4};
  CHECK(stats::quantile_sorted(sorted, 0.5) == Approx(2.0));
  CHECK(stats::quantile_sorted(sorted, 0.0) == Approx(0.0));
  CHECK(stats::quantile_sorted(sorted, 1.0) == Approx(4.0));
  CHECK(stats::quantile_sorted(sorted, 0.25) == Approx(1.0));
}

TEST_CASE("ks two-sample: identical and disjoint samples") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(stats::ks_two_sample(x, x).d == Approx(0.0));
  CHECK(stats::ks_two_sample(x, x).p == Approx(1.0));
  std::vector<double> y;
  for (double v : x) y.push_back(v + 100.0);
  const auto r = stats::ks_two_sample(x, y);
  CHECK(r.d == Approx(1.0));
  CHECK(r.p < 0.01);
}

TEST_CASE("student t quantile: table anchors") {
  CHECK(stats::student_t_quantile(0.975, 1000000) == Approx(1.96).epsilon(2e-3));
  CHECK(stats::student_t_quantile(0.975, 10) == Approx(2.228).epsilon(1e-3));
  CHECK(std::abs(stats::student_t_quantile(0.5, 7)) < 1e-6);
}

TEST_CASE("bootstrap median ratio: undefined-resample budget enforcement") {
  // median(y) = 0.5 on the original data, but a resample drawing three or
  // more zeros has a zero median; that happens ~31% of the time, far over
  // the 5% budget
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{0, 0, 1, 2};
  CHECK_THROWS(stats::bootstrap_median_ratio(x, y, 400, 11));
}

TEST_CASE("mann-whitney: centred statistic gives p = 1 on both paths") {
  // exact path: swap-symmetric samples
  const std::vector<double> a{1, 4}, b{2, 3};
  const auto exact = stats::mann_whitney(a, b);
  CHECK(exact.u_statistic == Approx(2.0));  // mn/2
  CHECK(exact.p_two_sided == Approx(1.0));

  // normal path (ties force it): centred U must not produce p > 1
  std::vector<double> big_a, big_b;
  for (int i = 0; i < 30; ++i) {
    big_a.push_back(i % 5);
    big_b.push_back(i % 5);
  }
  const auto normal = stats::mann_whitney(big_a, big_b);
  CHECK(normal.method == stats::MwuMethod::Normal);
  CHECK(normal.p_two_sided == Approx(1.0));
}

TEST_CASE("binomial conventions differ off the symmetric point") {
  const auto doubled = stats::binom_two_sided(9, 10, 0.3);
  const auto minlik =
      stats::binom_two_sided(9, 10, 0.3, stats::BinomConvention::MinLikelihood);
  CHECK(doubled.p != minlik.p);
  CHECK(doubled.p > 0.0);
  CHECK(minlik.p > 0.0);
  CHECK(doubled.p <= 1.0);
  CHECK(minlik.p <= 1.0);
}

TEST_CASE("bh-fdr rejects out-of-range p-values") {
  CHECK_THROWS(stats::bh_fdr(std::vector<double>{0.5, 1.5}, 0.05));
  CHECK_THROWS(stats::bh_fdr(std::vector<double>{-0.1}, 0.05));
}
