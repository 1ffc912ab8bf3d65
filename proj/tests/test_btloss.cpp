#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "seisbt/btloss.hpp"
#include "seisbt/rng.hpp"

using namespace seisbt;

namespace {

std::vector<double> random_matrix(int B, int D, std::uint64_t seed) {
  std::vector<double> z(static_cast<std::size_t>(B) * D);
  Rng rng(seed);
  for (auto& v : z) v = rng.normal();
  return z;
}

}  // namespace

TEST_CASE("self-correlation has unit diagonal", "[btloss]") {
  const int B = 8, D = 5;
  const auto z = random_matrix(B, D, 1);
  const auto cc = cross_correlation(z, z, B, D);
  for (int i = 0; i < D; ++i) REQUIRE(cc.at(i, i) == Catch::Approx(1.0).margin(1e-9));
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      REQUIRE(cc.at(i, j) <= 1.0 + 1e-9);
      REQUIRE(cc.at(i, j) >= -1.0 - 1e-9);
    }
}

TEST_CASE("sign-flipped view gives diagonal -1", "[btloss]") {
  const int B = 6, D = 4;
  const auto z = random_matrix(B, D, 2);
  auto neg = z;
  for (auto& v : neg) v = -v;
  const auto cc = cross_correlation(z, neg, B, D);
  for (int i = 0; i < D; ++i) REQUIRE(cc.at(i, i) == Catch::Approx(-1.0).margin(1e-9));
}

TEST_CASE("hand-computed 4x2 cross correlation", "[btloss]") {
  // columns [1,2,3,4] and [4,3,2,1]; standardized they are exact negatives
  const std::vector<double> z{1, 4, 2, 3, 3, 2, 4, 1};
  const auto cc = cross_correlation(z, z, 4, 2);
  REQUIRE(cc.at(0, 0) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(cc.at(1, 1) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(cc.at(0, 1) == Catch::Approx(-1.0).margin(1e-12));
  REQUIRE(cc.at(1, 0) == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("loss identities at fixed matrices", "[btloss]") {
  std::vector<double> identity{1, 0, 0, 1};
  for (double lambda : {0.0, 5e-3, 1.0}) {
    const auto v = bt_loss(identity, 2, lambda);
    REQUIRE(v.total == 0.0);
  }
  const auto ones = bt_loss(std::vector<double>{1, 1, 1, 1}, 2, 5e-3);
  REQUIRE(ones.total == Catch::Approx(0.01).margin(1e-15));
  const auto zeros = bt_loss(std::vector<double>{0, 0, 0, 0}, 2, 5e-3);
  REQUIRE(zeros.total == Catch::Approx(2.0).margin(1e-15));
}

TEST_CASE("total is affine in lambda with slope = redundancy term", "[btloss]") {
  const int B = 8, D = 4;
  const auto za = random_matrix(B, D, 3);
  const auto zb = random_matrix(B, D, 4);
  const auto cc = cross_correlation(za, zb, B, D);
  const auto v1 = bt_loss(cc, 0.1);
  const auto v2 = bt_loss(cc, 0.7);
  REQUIRE((v2.total - v1.total) / 0.6 == Catch::Approx(v1.redundancy_term).margin(1e-12));
  REQUIRE(v1.total == v1.invariance_term + v1.lambda * v1.redundancy_term);
  REQUIRE(v1.total >= 0.0);
}

TEST_CASE("view swap leaves the total loss unchanged", "[btloss]") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int B = 6, D = 3;
    const auto za = random_matrix(B, D, 2 * seed);
    const auto zb = random_matrix(B, D, 2 * seed + 1);
    const auto v_ab = bt_loss(cross_correlation(za, zb, B, D), 5e-3);
    const auto v_ba = bt_loss(cross_correlation(zb, za, B, D), 5e-3);
    REQUIRE(v_ab.total == Catch::Approx(v_ba.total).margin(1e-12));
  }
}

TEST_CASE("batch permutation leaves C unchanged", "[btloss]") {
  const int B = 7, D = 3;
  const auto za = random_matrix(B, D, 5);
  const auto zb = random_matrix(B, D, 6);
  std::vector<int> perm{3, 0, 6, 1, 5, 2, 4};
  std::vector<double> pa(za.size()), pb(zb.size());
  for (int b = 0; b < B; ++b)
    for (int d = 0; d < D; ++d) {
      pa[static_cast<std::size_t>(b) * D + d] = za[static_cast<std::size_t>(perm[b]) * D + d];
      pb[static_cast<std::size_t>(b) * D + d] = zb[static_cast<std::size_t>(perm[b]) * D + d];
    }
  const auto c1 = cross_correlation(za, zb, B, D);
  const auto c2 = cross_correlation(pa, pb, B, D);
  for (std::size_t i = 0; i < c1.c.size(); ++i)
    REQUIRE(c1.c[i] == Catch::Approx(c2.c[i]).margin(1e-12));
}

TEST_CASE("per-column affine rescaling is absorbed by standardization", "[btloss]") {
  const int B = 9, D = 4;
  const auto za = random_matrix(B, D, 7);
  const auto zb = random_matrix(B, D, 8);
  auto scaled = za;
  for (int b = 0; b < B; ++b) scaled[static_cast<std::size_t>(b) * D + 2] =
      3.5 * za[static_cast<std::size_t>(b) * D + 2] + 10.0;
  const auto c1 = cross_correlation(za, zb, B, D);
  const auto c2 = cross_correlation(scaled, zb, B, D);
  for (std::size_t i = 0; i < c1.c.size(); ++i)
    REQUIRE(c1.c[i] == Catch::Approx(c2.c[i]).margin(1e-10));
}

TEST_CASE("zero-variance column is floored and flagged", "[btloss]") {
  const int B = 5, D = 2;
  auto za = random_matrix(B, D, 9);
  for (int b = 0; b < B; ++b) za[static_cast<std::size_t>(b) * D + 1] = 7.0;
  const auto zb = random_matrix(B, D, 10);
  const auto cc = cross_correlation(za, zb, B, D);
  REQUIRE(cc.degenerate_a[1]);
  REQUIRE_FALSE(cc.degenerate_a[0]);
  for (double v : cc.c) REQUIRE(std::isfinite(v));
}

TEST_CASE("batch below 2 is a usage error", "[btloss]") {
  const auto z = random_matrix(1, 3, 11);
  REQUIRE_THROWS_AS(cross_correlation(z, z, 1, 3), UsageError);
}

TEST_CASE("analytic gradient matches central finite differences", "[btloss]") {
  const int B = 8, D = 4;
  const double lambda = 5e-3;
  auto za = random_matrix(B, D, 12);
  auto zb = random_matrix(B, D, 13);
  const auto g = bt_loss_backward(za, zb, B, D, lambda);
  const double eps = 1e-6;
  auto loss_at = [&](const std::vector<double>& a, const std::vector<double>& b) {
    return bt_loss(cross_correlation(a, b, B, D), lambda).total;
  };
  double max_rel = 0.0;
  for (std::size_t i = 0; i < za.size(); ++i) {
    auto zp = za, zm = za;
    zp[i] += eps;
    zm[i] -= eps;
    const double fd = (loss_at(zp, zb) - loss_at(zm, zb)) / (2 * eps);
    const double denom = std::max({std::abs(fd), std::abs(g.grad_a[i]), 1e-8});
    max_rel = std::max(max_rel, std::abs(fd - g.grad_a[i]) / denom);
  }
  for (std::size_t i = 0; i < zb.size(); ++i) {
    auto zp = zb, zm = zb;
    zp[i] += eps;
    zm[i] -= eps;
    const double fd = (loss_at(za, zp) - loss_at(za, zm)) / (2 * eps);
    const double denom = std::max({std::abs(fd), std::abs(g.grad_b[i]), 1e-8});
    max_rel = std::max(max_rel, std::abs(fd - g.grad_b[i]) / denom);
  }
  REQUIRE(max_rel <= 1e-6);
}
