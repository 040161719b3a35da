#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mcivoice/error.hpp"
#include "mcivoice/selection.hpp"
#include "test_util.hpp"

using namespace mcivoice;

namespace {

// Two-sided p by enumerating every assignment of ranks to group a.
double brute_force_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const std::size_t n = all.size(), na = a.size();
  auto u_of = [&](const std::vector<bool>& in_a) {
    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_a[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (in_a[j]) continue;
        if (all[i] > all[j]) u += 1.0;
        else if (all[i] == all[j]) u += 0.5;
      }
    }
    return u;
  };
  std::vector<bool> observed(n, false);
  for (std::size_t i = 0; i < na; ++i) observed[i] = true;
  const double u_obs = u_of(observed);
  const double u_min = std::min(u_obs, static_cast<double>(na * (n - na)) - u_obs);
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(na), true);
  double total = 0.0, extreme = 0.0;
  do {
    const double u = u_of(mask);
    total += 1.0;
    if (u <= u_min + 1e-9) extreme += 1.0;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return std::min(1.0, 2.0 * extreme / total);
}

}  // namespace

TEST_CASE("mann_whitney_u examples") {
  auto r = mann_whitney_u(std::vector<double>{1, 2}, std::vector<double>{3, 4});
  CHECK(r.u == 0.0);
  CHECK(r.exact);
  CHECK(r.p_two_sided == doctest::Approx(1.0 / 3.0));
  CHECK(r.u_a + r.u_b == 4.0);

  r = mann_whitney_u(std::vector<double>{1, 1}, std::vector<double>{1, 1});
  CHECK(r.p_two_sided == 1.0);

  const auto a = testutil::gaussian(12, 3);
  const auto b = testutil::gaussian(9, 4, 2.0);
  const auto ab = mann_whitney_u(a, b);
  const auto ba = mann_whitney_u(b, a);
  CHECK(ab.u == ba.u);
  CHECK(ab.p_two_sided == ba.p_two_sided);
  CHECK(ab.u_a == ba.u_b);
}

TEST_CASE("mann_whitney_u exact path equals enumeration") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t na = 1 + rng() % 6, nb = 1 + rng() % 6;
    const auto a = testutil::uniform(na, rng());
    const auto b = testutil::uniform(nb, rng());
    const auto r = mann_whitney_u(a, b, UTestMethod::kExact);
    CHECK(r.p_two_sided == doctest::Approx(brute_force_p(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("u null distribution counts sum to the binomial coefficient") {
  const auto counts = u_null_counts(5, 7);
  CHECK(counts.size() == 36);
  CHECK(std::accumulate(counts.begin(), counts.end(), 0.0) == 792.0);
  for (std::size_t u = 0; u < counts.size(); ++u) CHECK(counts[u] == counts[35 - u]);
}

TEST_CASE("rank statistics are invariant under monotone transforms") {
  const auto a = testutil::gaussian(25, 1);
  const auto b = testutil::gaussian(30, 2, 1.5);
  std::vector<double> ta(a.size()), tb(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ta[i] = std::exp(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) tb[i] = std::exp(b[i]);
  const auto r1 = mann_whitney_u(a, b);
  const auto r2 = mann_whitney_u(ta, tb);
  CHECK(r1.u == r2.u);
  CHECK(r1.p_two_sided == r2.p_two_sided);
}

TEST_CASE("u_test_filter") {
  std::vector<int> labels(60);
  for (std::size_t i = 0; i < 60; ++i) labels[i] = i < 30 ? 0 : 1;
  std::vector<double> label_feature(labels.begin(), labels.end());
  const auto noise = testutil::gaussian(60, 5);
  const std::vector<double> constant(60, 2.0);
  const auto ds = testutil::make_dataset({label_feature, noise, constant}, labels);
  const auto [kept, report] = u_test_filter(ds, 0.1);
  REQUIRE(report.entries.size() == 3);
  CHECK(report.entries[0].u_kept);
  CHECK(report.entries[0].p_value < 1e-9);
  CHECK(report.entries[2].p_value == 1.0);
  CHECK_FALSE(report.entries[2].u_kept);
  CHECK(kept.n_features() == report.n_utest);
  for (const auto& e : report.entries) CHECK((e.p_value >= 0.0 && e.p_value <= 1.0));

  SUBCASE("nothing survives") {
    const auto flat = testutil::make_dataset({constant}, labels);
    CHECK_THROWS_AS(u_test_filter(flat, 0.1), Error);
  }
}

TEST_CASE("u_test_filter false-positive rate on noise") {
  std::vector<int> labels(60);
  for (std::size_t i = 0; i < 60; ++i) labels[i] = i < 30 ? 0 : 1;
  std::vector<std::vector<double>> cols;
  for (std::uint64_t j = 0; j < 1000; ++j) cols.push_back(testutil::gaussian(60, 1000 + j));
  const auto [kept, report] = u_test_filter(testutil::make_dataset(cols, labels), 0.1);
  CHECK(report.n_utest >= 70);
  CHECK(report.n_utest <= 130);
}

TEST_CASE("svm_attribute_rank") {
  std::vector<int> labels(40);
  for (std::size_t i = 0; i < 40; ++i) labels[i] = static_cast<int>(i % 2);
  std::vector<double> informative(labels.begin(), labels.end());
  const auto noise = testutil::uniform(40, 8);

  SUBCASE("informative axis ranks first") {
    const auto ds = testutil::make_dataset({noise, informative}, labels);
    const auto rank = svm_attribute_rank(ds);
    CHECK(rank[1] == 1);
    CHECK(rank[0] == 2);
  }
  SUBCASE("duplicated informative axis takes ranks 1 and 2") {
    const auto n2 = testutil::uniform(40, 9);
    const auto ds = testutil::make_dataset({noise, informative, n2, informative}, labels);
    const auto rank = svm_attribute_rank(ds);
    CHECK(std::min(rank[1], rank[3]) == 1);
    CHECK(std::max(rank[1], rank[3]) == 2);
  }
  SUBCASE("ranking is a permutation, with batched elimination") {
    std::vector<std::vector<double>> cols = {informative};
    for (std::uint64_t j = 0; j < 60; ++j) cols.push_back(testutil::uniform(40, 50 + j));
    const auto rank = svm_attribute_rank(testutil::make_dataset(cols, labels));
    auto sorted = rank;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i + 1);
    CHECK(rank[0] == 1);
  }
  SUBCASE("rank-1 axis survives rescaling of the other columns") {
    std::vector<double> scaled(noise.size());
    for (std::size_t i = 0; i < noise.size(); ++i) scaled[i] = 0.3 * noise[i];
    const auto rank = svm_attribute_rank(testutil::make_dataset({scaled, informative}, labels));
    CHECK(rank[1] == 1);
  }
}

TEST_CASE("select_top") {
  const auto ds = testutil::make_dataset({{1, 2}, {3, 4}, {5, 6}}, {0, 1});
  const std::vector<std::size_t> rank = {2, 3, 1};
  CHECK(select_top(ds, rank, 3).x == ds.x);
  const auto one = select_top(ds, rank, 1);
  CHECK(one.feature_names == std::vector<std::string>{"f2"});
  const auto two = select_top(ds, rank, 2);
  CHECK(two.feature_names == std::vector<std::string>{"f0", "f2"});
  CHECK_THROWS_AS(select_top(ds, rank, 4), Error);
}

TEST_CASE("min-max normalisation") {
  const auto train = testutil::make_dataset({{2, 4, 6}, {5, 5, 5}}, {0, 1, 0});
  const auto params = fit_minmax(train);
  const auto out = apply_minmax(train, params);
  CHECK(out.x(0, 0) == 0.0);
  CHECK(out.x(1, 0) == 0.5);
  CHECK(out.x(2, 0) == 1.0);
  CHECK(out.x(0, 1) == 0.0);
  CHECK(out.x(1, 1) == 0.0);
  const auto test = testutil::make_dataset({{8, -1}, {5, 5}}, {0, 1});
  const auto t = apply_minmax(test, params);
  CHECK(t.x(0, 0) == 1.0);
  CHECK(t.x(1, 0) == 0.0);
  for (double v : t.x.data) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("selection report CSV") {
  SelectionReport r;
  r.entries.push_back({"a", 3.0, 0.01, true, 1, true});
  r.entries.push_back({"b", 9.0, 0.5, false, 0, false});
  const auto text = selection_report_csv(r, "abcd");
  CHECK(text.find("feature,u,p,u_kept,svm_rank,final_kept") != std::string::npos);
  CHECK(text.find("# config=abcd") == 0);
}

TEST_CASE("normal approximation at 8/8") {
  // Continuity-corrected normal p against enumeration. The worst case over all
  // U is 0.01091 at U = 24 (and 40), a property of the approximation itself.
  std::mt19937_64 rng(88);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = testutil::uniform(8, rng());
    auto b = testutil::uniform(8, rng());
    for (auto& v : b) v += 0.05 * (trial % 24);
    const auto r = mann_whitney_u(a, b, UTestMethod::kNormal);
    CHECK_FALSE(r.exact);
    const double var = 8.0 * 8.0 * 17.0 / 12.0;
    const double z = std::max(0.0, std::abs(r.u_a - 32.0) - 0.5) / std::sqrt(var);
    CHECK(r.p_two_sided == doctest::Approx(std::min(1.0, std::erfc(z / std::sqrt(2.0)))).epsilon(1e-12));
    worst = std::max(worst, std::abs(r.p_two_sided - brute_force_p(a, b)));
  }
  CHECK(worst < 0.011);
}
