#include <doctest.h>

#include <cmath>

#include "mcivoice/error.hpp"
#include "mcivoice/features_nonlinear.hpp"
#include "test_util.hpp"

using namespace mcivoice;

TEST_CASE("shannon_entropy") {
  CHECK(shannon_entropy(std::vector<double>(50, 0.7)) == 0.0);
  CHECK(std::isnan(shannon_entropy(std::vector<double>{})));
  // Eight equally populated bins: values 0..7 with 8 bins over [0, 7].
  std::vector<double> eight;
  for (int rep = 0; rep < 10; ++rep)
    for (int v = 0; v < 8; ++v) eight.push_back(v);
  CHECK(shannon_entropy(eight, 8) == 3.0);
  const auto u = testutil::uniform(100000, 17);
  CHECK(std::abs(shannon_entropy(u, 64) - 6.0) <= 0.05);
  // Exact for maps that are exact in floating point.
  std::vector<double> scaled(u.size()), affine(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    scaled[i] = 4.0 * u[i];
    affine[i] = -3.0 * u[i] + 2.0;
  }
  CHECK(shannon_entropy(scaled, 64) == shannon_entropy(u, 64));
  CHECK(shannon_entropy(affine, 64) == doctest::Approx(shannon_entropy(u, 64)).epsilon(1e-4));
}

TEST_CASE("higuchi_fd") {
  std::vector<double> line(1000);
  for (std::size_t i = 0; i < line.size(); ++i) line[i] = static_cast<double>(i);
  CHECK(std::abs(higuchi_fd(line) - 1.0) <= 0.05);
  const auto noise = testutil::gaussian(10000, 5);
  const double fd = higuchi_fd(noise);
  CHECK(std::abs(fd - 2.0) <= 0.1);
  CHECK(higuchi_fd(std::vector<double>(500, 3.0)) == 1.0);
  std::vector<double> scaled(noise.size());
  for (std::size_t i = 0; i < noise.size(); ++i) scaled[i] = 7.5 * noise[i];
  CHECK(std::abs(higuchi_fd(scaled) - fd) < 1e-9);
  CHECK_THROWS_AS(higuchi_fd(std::vector<double>(50, 1.0), 10), Error);
}

TEST_CASE("permutation entropy") {
  std::vector<double> ramp(500);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
  CHECK(permutation_entropy(ramp) == 0.0);

  // Every order-3 pattern once, joined so no extra windows straddle them.
  SUBCASE("uniform pattern counts give 1") {
    const std::vector<std::vector<double>> patterns = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                                       {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    std::vector<std::size_t> counts(6, 0);
    for (const auto& p : patterns) ++counts[ordinal_pattern(p, 0, 3, 1)];
    for (auto c : counts) CHECK(c == 1);
  }
  const auto noise = testutil::uniform(10000, 9);
  const double pe = permutation_entropy(noise);
  CHECK(pe >= 0.998);
  std::vector<double> mono(noise.size());
  for (std::size_t i = 0; i < noise.size(); ++i) mono[i] = std::exp(3.0 * noise[i]) - 4.0;
  CHECK(permutation_entropy(mono) == pe);
  CHECK(std::isnan(permutation_entropy(std::vector<double>{1, 2, 3})));

  SUBCASE("ties rank the earlier sample lower") {
    const std::vector<double> tie = {1.0, 1.0, 1.0};
    const std::vector<double> up = {0.0, 1.0, 2.0};
    CHECK(ordinal_pattern(tie, 0, 3, 1) == ordinal_pattern(up, 0, 3, 1));
  }
}

TEST_CASE("multiscale permutation entropy") {
  const auto noise = testutil::gaussian(10000, 44);
  const auto ms = multiscale_pe(noise, 3, 1, 5);
  REQUIRE(ms.values.size() == 5);
  CHECK(ms.values[0] == permutation_entropy(noise));
  CHECK(ms.values[4] <= ms.values[0] + 0.01);
  for (double v : ms.values) CHECK(v >= 0.95);

  std::vector<double> ramp(1000);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.5 * static_cast<double>(i);
  for (double v : multiscale_pe(ramp).values) CHECK(v == 0.0);

  const auto cg = coarse_grain(std::vector<double>{1, 3, 5, 7, 9}, 2);
  REQUIRE(cg.size() == 2);
  CHECK(cg[0] == 2.0);
  CHECK(cg[1] == 6.0);

  SUBCASE("too-short input truncates the scale count") {
    const auto shortx = testutil::gaussian(12, 1);
    const auto r = multiscale_pe(shortx, 3, 1, 5);
    CHECK(r.requested == 5);
    CHECK(r.values.size() < 5);
    const auto summary = nonlinear_summary(shortx);
    CHECK(summary.mspe.size() == 5);
    CHECK(std::isnan(summary.mspe.back()));
  }
}
