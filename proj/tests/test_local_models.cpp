#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "reebpa/flow.hpp"
#include "reebpa/int_linalg.hpp"
#include "reebpa/local_models.hpp"

using namespace reebpa;

namespace {

constexpr double kPi = std::numbers::pi;

IntMatrix2 mat(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  IntMatrix2 m;
  m << a, b, c, d;
  return m;
}

// Fixed points of A^k as exact rationals i/N over the grid N = |det(A^k - I)|.
std::int64_t grid_scan_fixed_points(const IntMatrix2& A, int k) {
  IntMatrix2 P = checked_power(A, k);
  const std::int64_t N = std::abs(checked_det(IntMatrix2(P - IntMatrix2::Identity())));
  std::int64_t count = 0;
  for (std::int64_t i = 0; i < N; ++i)
    for (std::int64_t j = 0; j < N; ++j) {
      const std::int64_t u = P(0, 0) * i + P(0, 1) * j - i;
      const std::int64_t v = P(1, 0) * i + P(1, 1) * j - j;
      if (u % N == 0 && v % N == 0) ++count;
    }
  return count;
}

}  // namespace

TEST_CASE("A_lambda examples") {
  CHECK(apply_A_lambda(2.0, Vec2(1, 1)) == Vec2(2, 0.5));
  CHECK(apply_A_lambda(2.0, Vec2(0, 0)) == Vec2(0, 0));
  CHECK(apply_A_lambda(3.0, Vec2(1, 0)) == Vec2(3, 0));
}

TEST_CASE("standard map construction") {
  CHECK_THROWS(StandardPAMap(1, 0, 2.0));
  CHECK_THROWS(StandardPAMap(4, 0, 1.0));
  CHECK(StandardPAMap(4, 5, 2.0).rotation() == 1);
  CHECK(StandardPAMap(4, -1, 2.0).rotation() == 3);
  CHECK(StandardPAMap(3, 1, 2.0)(Vec2::Zero()) == Vec2::Zero());
}

TEST_CASE("two prongs reduce to A_lambda") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const StandardPAMap m(2, 0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p(u(rng), u(rng));
    worst = std::max(worst, (m(p) - apply_A_lambda(2.0, p)).norm());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("prong rays are permuted by the rotation") {
  const StandardPAMap rot(4, 1, 2.0);
  const Polar img = rot.apply({0.3, 0.0});
  CHECK(std::abs(img.theta - kPi / 2) < 1e-12);
  const StandardPAMap fixed(4, 0, 2.0);
  for (int j = 0; j < 4; ++j) {
    const Polar q = fixed.apply({0.3, j * kPi / 2});
    CHECK(std::abs(wrap_angle(q.theta - j * kPi / 2)) < 1e-12);
  }
  for (int n : {3, 5, 6})
    for (int k = 0; k < n; ++k) {
      const StandardPAMap m(n, k, 1.5);
      const Polar q = m.apply({0.5, 0.0});
      CHECK(std::abs(wrap_angle(q.theta - 2 * kPi * k / n)) < 1e-12);
    }
}

TEST_CASE("radius matches the downstairs oracle") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> rr(0.01, 1.0), th(0.0, 2 * kPi);
  for (int n : {3, 4, 5}) {
    const StandardPAMap m(n, 0, 2.0);
    for (int i = 0; i < 200; ++i) {
      const Polar p{rr(rng), th(rng)};
      const double psi = n * p.theta / 2;
      const Vec2 down = apply_A_lambda(2.0, Vec2(p.r * std::cos(psi), p.r * std::sin(psi)));
      CHECK(std::abs(m.apply(p).r - down.norm()) < 1e-12);
    }
  }
}

TEST_CASE("branched cover conjugation, modulo the deck sign") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> rr(0.01, 1.0), th(0.0, 2 * kPi);
  for (int n : {2, 3, 4, 5, 6})
    for (int k = 0; k < n; ++k) {
      const StandardPAMap m(n, k, 1.7);
      for (int i = 0; i < 200; ++i) {
        const Polar p{rr(rng), th(rng)};
        const Vec2 lhs = m.project(m.apply(p));
        const Vec2 rhs = apply_A_lambda(1.7, m.project(p));
        const double err = std::min((lhs - rhs).norm(), (lhs + rhs).norm());
        CHECK(err < 1e-10);
        if (n % 2 == 0 && k % 2 == 0) CHECK((lhs - rhs).norm() < 1e-10);
      }
    }
}

TEST_CASE("inverse undoes the map and the map is continuous across sectors") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> rr(0.01, 1.0), th(0.0, 2 * kPi);
  for (int n : {3, 4, 5})
    for (int k = 0; k < n; ++k) {
      const StandardPAMap m(n, k, 2.0);
      for (int i = 0; i < 100; ++i) {
        const Vec2 p = from_polar({rr(rng), th(rng)});
        CHECK((m.inverse(m(p)) - p).norm() < 1e-12);
      }
      for (int j = 0; j < n; ++j) {
        const double b = 2 * kPi * j / n;
        const Vec2 lo = m(from_polar({0.5, b - 1e-9})), hi = m(from_polar({0.5, b + 1e-9}));
        CHECK((lo - hi).norm() < 1e-6);
      }
    }
}

TEST_CASE("origin is the unique fixed point") {
  const auto seeds = disk_seeds(Vec2::Zero(), 1.0, 20, 25);
  REQUIRE(seeds.size() >= 500);
  for (int n : {3, 4, 5})
    for (int k : {0, 1}) {
      const StandardPAMap m(n, k, 2.0);
      const FixedPointSearch s = newton_fixed_points([m](const Vec2& p) { return m(p); }, seeds);
      for (const auto& fp : s.points) CHECK(fp.point.norm() < 1e-8);
    }
}

TEST_CASE("torus automorphism") {
  CHECK_THROWS(TorusAutomorphism(mat(1, 1, 0, 1)));
  CHECK_THROWS(TorusAutomorphism(mat(2, 0, 0, 1)));
  const TorusAutomorphism A(mat(2, 1, 1, 1));
  CHECK(A.stretch() == doctest::Approx((3 + std::sqrt(5.0)) / 2).epsilon(1e-14));
  const Vec2 p(0.3, 0.9);
  CHECK((A.inverse(A(p)) - p).norm() < 1e-12);
  const Vec2 q = A(p);
  CHECK(q.x() >= 0.0);
  CHECK(q.x() < 1.0);
}

TEST_CASE("fixed point counts") {
  const TorusAutomorphism A(mat(2, 1, 1, 1));
  CHECK(count_fixed_points(A, 1) == 1);
  CHECK(count_fixed_points(A, 2) == 5);
  CHECK(count_fixed_points(A, 3) == 16);
  for (const IntMatrix2& m : {mat(2, 1, 1, 1), mat(3, 1, 2, 1), mat(3, 1, 1, 0), mat(-3, 1, -1, 0)})
    for (int k = 1; k <= 4; ++k) CHECK(count_fixed_points(TorusAutomorphism(m), k) == grid_scan_fixed_points(m, k));
  CHECK_THROWS_AS(count_fixed_points(TorusAutomorphism(mat(1000, 999, 1, 1)), 12), OverflowError);
}

TEST_CASE("suspension flow") {
  const TorusAutomorphism A(mat(2, 1, 1, 1));
  const SuspensionFlow cat(A);
  const Vec2 p(0.2, 0.7);
  auto one = cat.flow({0.0, p}, 1.0);
  CHECK(one.s == 0.0);
  CHECK((one.p - A(p)).norm() < 1e-14);
  auto half = cat.flow({0.0, p}, 0.5);
  CHECK(half.s == 0.5);
  CHECK(half.p == p);
  auto seven = cat.flow({0.0, Vec2::Zero()}, 7.0);
  CHECK(seven.s == 0.0);
  CHECK(seven.p.norm() < 1e-14);
  auto back = cat.flow(cat.flow({0.25, p}, 3.5), -3.5);
  CHECK(back.s == doctest::Approx(0.25));
  CHECK((back.p - p).norm() < 1e-12);

  const StandardPAMap pa(4, 1, 2.0);
  const SuspensionFlow s(pa);
  CHECK((s.flow({0.0, Vec2(0.3, 0.1)}, 1.0).p - pa(Vec2(0.3, 0.1))).norm() < 1e-14);
}

TEST_CASE("smith normal form") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> e(-30, 30);
  for (int i = 0; i < 300; ++i) {
    const IntMatrix2 M = mat(e(rng), e(rng), e(rng), e(rng));
    if (checked_det(M) == 0) continue;
    const auto s = smith_normal_form(M);
    const IntMatrix2 D = s.U * M * s.V;
    CHECK(D(0, 1) == 0);
    CHECK(D(1, 0) == 0);
    CHECK(D(0, 0) == s.d1);
    CHECK(D(1, 1) == s.d2);
    CHECK(s.d1 > 0);
    CHECK(s.d2 % s.d1 == 0);
    CHECK(std::abs(checked_det(s.U)) == 1);
    CHECK(std::abs(checked_det(s.V)) == 1);
    CHECK(std::abs(s.d1 * s.d2) == std::abs(checked_det(M)));
  }
}
