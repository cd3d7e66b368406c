#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "reebpa/chain.hpp"
#include "reebpa/errors.hpp"

using namespace reebpa;

namespace {

const HomotopyClassKey kKey{"fixture", 1, 0, 0};

IntMatrix2 mat(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  IntMatrix2 m;
  m << a, b, c, d;
  return m;
}

OrbitRecord rec(const OrbitType& t, int mult = 1, double period = 1.0, const HomotopyClassKey& key = kKey) {
  return make_record(t, mult, key, key, period);
}

ChainSummary summary_of(std::vector<OrbitRecord> records, double L = 1.0, int kmax = 1) {
  return build_chain_summary(make_census("fixture", kmax, std::move(records)), kKey, L);
}

std::vector<double> integer_cutoffs(int n) {
  std::vector<double> L(n);
  std::iota(L.begin(), L.end(), 1.0);
  return L;
}

}  // namespace

TEST_CASE("chain summary examples") {
  const auto ph = OrbitType::positive_hyperbolic();
  const ChainSummary three = summary_of({rec(ph), rec(ph), rec(ph)});
  CHECK(three.n_odd == 3);
  CHECK(three.n_even == 0);
  CHECK(three.chi() == -3);
  CHECK(three.tag == CaseTag::case_1a);
  CHECK(case_name(three.tag) == "1a");

  const ChainSummary neg = summary_of({rec(OrbitType::negative_hyperbolic())});
  CHECK(neg.n_even == 1);
  CHECK(neg.chi() == 1);
  CHECK(neg.tag == CaseTag::case_1b);

  const ChainSummary rot = summary_of({rec(OrbitType::rotating_singular(4, 1))});
  CHECK(rot.n_even == 1);
  CHECK(rot.tag == CaseTag::case_1c);

  const ChainSummary none = summary_of({});
  CHECK(none.n_even == 0);
  CHECK(none.n_odd == 0);
  CHECK(none.chi() == 0);
  CHECK(none.tag == CaseTag::empty);
}

TEST_CASE("singular generators and bad orbits") {
  const ChainSummary four = summary_of({rec(OrbitType::nonrotating_singular(4))});
  CHECK(four.n_odd == 3);
  CHECK(four.tag == CaseTag::case_1a);
  // The double of a negative hyperbolic orbit is bad and drops out.
  const ChainSummary bad = summary_of({rec(OrbitType::negative_hyperbolic(), 2, 2.0)}, 2.0, 2);
  CHECK(bad.n_even + bad.n_odd == 0);
  // Cutoff filters by action.
  const ChainSummary cut = summary_of({rec(OrbitType::positive_hyperbolic(), 1, 1.0), rec(OrbitType::positive_hyperbolic(), 1, 2.0)}, 1.5, 2);
  CHECK(cut.n_odd == 1);
  CHECK_THROWS_AS(summary_of({}, 3.0, 2), IncompleteCensus);
}

TEST_CASE("classes violating the trichotomy are rejected") {
  CHECK_THROWS_AS(summary_of({rec(OrbitType::negative_hyperbolic()), rec(OrbitType::positive_hyperbolic())}), MixedClass);
  CHECK_THROWS_AS(summary_of({rec(OrbitType::negative_hyperbolic()), rec(OrbitType::negative_hyperbolic())}), MixedClass);
  CHECK_THROWS_AS(summary_of({rec(OrbitType::rotating_singular(3, 1)), rec(OrbitType::nonrotating_singular(3))}), MixedClass);
}

TEST_CASE("Euler identity") {
  const auto ph = OrbitType::positive_hyperbolic();
  const ChainSummary psi = summary_of({rec(ph), rec(ph), rec(ph)});
  const EulerCheck one = euler_identity_check(psi, {rec(OrbitType::nonrotating_singular(4))});
  CHECK(one.pass);
  CHECK(one.chi == -3);
  CHECK(one.prong_sum == 3);
  CHECK(one.lefschetz_sum == -3);

  const ChainSummary two = summary_of({rec(ph), rec(ph)});
  const EulerCheck smooth = euler_identity_check(two, {rec(ph), rec(ph)});
  CHECK(smooth.pass);
  CHECK(smooth.prong_sum == 2);

  const EulerCheck mismatch = euler_identity_check(two, {rec(OrbitType::nonrotating_singular(5))});
  CHECK_FALSE(mismatch.pass);
  CHECK(mismatch.difference == -2);

  CHECK_THROWS_AS(euler_identity_check(summary_of({rec(OrbitType::negative_hyperbolic())}), {}), CaseMismatch);
  CHECK_THROWS_AS(euler_identity_check(psi, {rec(OrbitType::negative_hyperbolic())}), CaseMismatch);
}

TEST_CASE("nonvanishing") {
  const auto ph = OrbitType::positive_hyperbolic();
  const Nonvanishing a = nonvanishing_certificate(summary_of({rec(ph), rec(ph), rec(ph)}));
  CHECK(a.nonzero);
  CHECK(a.rank_lower_bound == 3);
  const Nonvanishing b = nonvanishing_certificate(summary_of({rec(OrbitType::negative_hyperbolic())}));
  CHECK(b.nonzero);
  CHECK(b.rank_lower_bound == 1);
  const Nonvanishing e = nonvanishing_certificate(summary_of({}));
  CHECK_FALSE(e.nonzero);
  CHECK(e.rank_lower_bound == 0);
}

TEST_CASE("unique generators persist under larger cutoffs") {
  for (const OrbitType& t : {OrbitType::negative_hyperbolic(), OrbitType::rotating_singular(5, 2)}) {
    const Census c = make_census("fixture", 6, {rec(t)});
    for (double L : {1.0, 2.0, 3.5, 6.0}) {
      const Nonvanishing nv = nonvanishing_certificate(build_chain_summary(c, kKey, L));
      CHECK(nv.nonzero);
    }
  }
}

TEST_CASE("Euler characteristic is additive over disjoint censuses") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> n(0, 4), p(2, 6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<OrbitRecord> a, b;
    for (int i = n(rng); i > 0; --i) a.push_back(rec(OrbitType::nonrotating_singular(p(rng))));
    for (int i = n(rng); i > 0; --i) b.push_back(rec(OrbitType::nonrotating_singular(p(rng))));
    std::vector<OrbitRecord> both = a;
    both.insert(both.end(), b.begin(), b.end());
    const ChainSummary sa = summary_of(a), sb = summary_of(b), sab = summary_of(both);
    CHECK(sab.n_even == sa.n_even + sb.n_even);
    CHECK(sab.n_odd == sa.n_odd + sb.n_odd);
    CHECK(sab.chi() == sa.chi() + sb.chi());
  }
}

TEST_CASE("hypertightness") {
  for (const IntMatrix2& m : {mat(2, 1, 1, 1), mat(3, 1, 2, 1), mat(-2, -1, -1, -1)}) {
    const HypertightReport r = hypertight_certificate(enumerate_torus_census(TorusAutomorphism(m), 5), 5.0);
    CHECK(r.pass);
    CHECK(r.offenders.empty());
  }
  const HomotopyClassKey zero{"fixture", 0, 0, 0};
  REQUIRE(zero.contractible());
  const Census bad = make_census("fixture", 3, {rec(OrbitType::positive_hyperbolic()),
                                                 make_record(OrbitType::positive_hyperbolic(), 1, zero, zero, 2.0)});
  const HypertightReport r = hypertight_certificate(bad, 3.0);
  CHECK_FALSE(r.pass);
  REQUIRE(r.offenders.size() == 1);
  CHECK(r.offenders.front().key.contractible());
  CHECK(hypertight_certificate(bad, 1.5).pass);
  CHECK_THROWS_AS(hypertight_certificate(bad, 4.0), IncompleteCensus);
}

TEST_CASE("cofinality arithmetic") {
  CofinalSequence good;
  good.C = 1.2;
  good.D = 2.0;
  good.c = {1.0, 1.1, 0.9, 1.05, 1.0};
  for (int i = 1; i <= 5; ++i) good.L.push_back(std::pow(5.0, i));
  const CofinalityReport ok = cofinality_check(good);
  CHECK(ok.pass);
  CHECK(ok.failing_index == 0);
  REQUIRE(ok.bound.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(ok.bound[i] == doctest::Approx(std::pow(1.44 / 2.0, double(i)) * 1.0 / 5.0).epsilon(1e-12));
    CHECK(ok.ratio[i] <= ok.bound[i] * (1 + 1e-12));
  }

  CofinalSequence slow = good;
  slow.D = 1.3;
  const CofinalityReport s = cofinality_check(slow);
  CHECK_FALSE(s.pass);
  CHECK(s.failing_index == 2);
  CHECK(s.bound[1] > s.bound[0]);

  CofinalSequence flat = good;
  flat.L.assign(5, 10.0);
  const CofinalityReport f = cofinality_check(flat);
  CHECK_FALSE(f.pass);
  CHECK(f.failing_index == 2);

  CofinalSequence shortseq = good;
  shortseq.c.resize(2);
  shortseq.L.resize(2);
  CHECK_THROWS(cofinality_check(shortseq));
}

TEST_CASE("torsion tori examples") {
  const auto a = torsion_tori(1, -1, 0);
  REQUIRE(a.size() == 1);
  CHECK(a[0] == doctest::Approx(0.5).epsilon(1e-15));
  const auto b = torsion_tori(1, 0, 1);
  REQUIRE(b.size() == 1);
  CHECK(b[0] == doctest::Approx(0.25).epsilon(1e-15));
  const auto c = torsion_tori(3, -1, 0);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == doctest::Approx(0.5));
  CHECK(c[1] == doctest::Approx(1.5));
  CHECK(c[2] == doctest::Approx(2.5));
  const auto d = torsion_tori(2, 1, 0);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 1.0);
  CHECK_THROWS_AS(torsion_tori(1, 2, 4), NonPrimitive);
  CHECK_THROWS_AS(torsion_tori(1, 0, 0), NonPrimitive);
}

TEST_CASE("torsion tori count and direction for random classes") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> coord(-60, 60);
  int tested = 0;
  while (tested < 200) {
    const std::int64_t m = coord(rng), n = coord(rng);
    if (std::gcd(m, n) != 1) continue;
    ++tested;
    const int k = 1 + tested % 4;
    const auto tori = torsion_tori(k, m, n);
    REQUIRE(tori.size() == static_cast<std::size_t>(k));
    const double norm = std::hypot(double(m), double(n));
    for (double t : tori) {
      CHECK(t >= 0.0);
      CHECK(t < k);
      CHECK(std::cos(2 * std::numbers::pi * t) == doctest::Approx(m / norm).epsilon(1e-12));
      CHECK(std::sin(2 * std::numbers::pi * t) == doctest::Approx(n / norm).epsilon(1e-12));
    }
  }
}

TEST_CASE("torsion rank bound") {
  const TorsionBound one = torsion_rank_bound(1, -1, 0);
  CHECK(one.generators.size() == 2);
  CHECK(one.bound == 2);
  CHECK(one.action == doctest::Approx(1.0));
  CHECK(one.theta == -1);
  CHECK(one.hypothesis_holds);

  const TorsionBound two = torsion_rank_bound(2, 0, -1);
  CHECK(two.generators.size() == 4);
  CHECK(two.bound == 4);
  CHECK(two.action == doctest::Approx(1.0));
  std::set<double> ts;
  for (const auto& g : two.generators) ts.insert(g.t);
  CHECK(ts == std::set<double>{0.75, 1.75});
  for (int j = 0; j < 2; ++j) {
    CHECK(two.generators[2 * j].grading != two.generators[2 * j + 1].grading);
    CHECK(two.generators[2 * j].torus == two.generators[2 * j + 1].torus);
  }

  CHECK(torsion_rank_bound(1, -3, -4).action == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_FALSE(torsion_rank_bound(1, 2, 1).hypothesis_holds);
  CHECK_THROWS_AS(torsion_rank_bound(1, 6, 4), NonPrimitive);
}

TEST_CASE("CH growth on the cat map") {
  const Census c = enumerate_torus_census(TorusAutomorphism(mat(2, 1, 1, 1)), 12);
  const GrowthTable t = ch_growth(c, integer_cutoffs(12));
  REQUIRE(t.CHF.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(t.CHF[i] <= t.GF[i]);
    CHECK(t.CHF[i] == t.GF[i]);
    CHECK(t.GF[i] == growth_function(c, t.L[i]));
  }
  const double entropy = std::log((3 + std::sqrt(5.0)) / 2);
  CHECK(std::abs(t.rate - entropy) / entropy < 0.05);
  CHECK(t.rate == doctest::Approx(growth_rate(c)).epsilon(1e-12));

  // Doubling every action halves the rate.
  std::vector<double> doubled;
  for (double L : t.L) doubled.push_back(2 * L);
  const GrowthTable s = ch_growth(c, doubled, 2.0);
  CHECK(s.rate == doctest::Approx(t.rate / 2).epsilon(1e-9));

  CHECK(std::isnan(ch_growth(c, integer_cutoffs(4)).rate));
  CHECK_THROWS_AS(ch_growth(c, {13.0}), IncompleteCensus);
}

TEST_CASE("CH growth never exceeds GF") {
  const Census c = enumerate_torus_census(TorusAutomorphism(mat(-2, -1, -1, -1)), 8);
  const GrowthTable t = ch_growth(c, integer_cutoffs(8));
  for (std::size_t i = 0; i < t.L.size(); ++i) CHECK(t.CHF[i] <= t.GF[i]);
}
