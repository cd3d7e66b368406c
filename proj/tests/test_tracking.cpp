#include <doctest.h>

#include "reebpa/errors.hpp"
#include "reebpa/tracking.hpp"

using namespace reebpa;

namespace {

IntMatrix2 cat_matrix() {
  IntMatrix2 m;
  m << 2, 1, 1, 1;
  return m;
}

struct BpPair {
  FlowModel phi;
  FlowModel psi;
};

// Phi: Reeb flow of bp in the identity chart; Psi: the smoothed flow. Both glued by PA(4, 0, 2).
BpPair bp_pair(double eps) {
  const ChartContactForm bp = fixture("bp");
  const StandardPAMap pa(4, 0, 2.0);
  const PlaneMap mono = [pa](const Vec2& p) { return pa(p); };
  return {with_monodromy(chart_reeb_model(bp, SmoothingChart::identity(), SmoothingFunction::zero()), mono),
          with_monodromy(chart_reeb_model(bp, SmoothingChart::flattening(1.0), SmoothingFunction::standard().scaled(eps)),
                         mono)};
}

TrackedOrbit core_orbit(const FlowModel& f, std::size_t id = 0) {
  TrackedOrbit o;
  o.id = id;
  o.section = Section::checked(f, 0.0, 0.8, 0.3);
  o.period = 1.0;
  return o;
}

TrackingOptions quick() {
  TrackingOptions o;
  o.field_samples = 500;
  o.tube_samples = 200;
  return o;
}

const HomotopyClassKey kKey{"fixture", 1, 0, 0};

std::vector<OrbitRecord> hyperbolic(int n) {
  std::vector<OrbitRecord> out;
  for (int i = 0; i < n; ++i) out.push_back(make_record(OrbitType::positive_hyperbolic(), 1, kKey, kKey, 1.0));
  return out;
}

}  // namespace

TEST_CASE("a suspension tracks itself") {
  const FlowModel cat = suspension_model(SuspensionFlow(TorusAutomorphism(cat_matrix())));
  TrackedOrbit o;
  o.section = Section{0.0, 0.3, 0.1};
  TrackingOptions opts = quick();
  opts.domain_radius = 0.5;
  const TrackingReport rep = tracking_certificate(cat, cat, {o}, 1.5, opts);
  REQUIRE(rep.orbits.size() == 1);
  const OrbitCheck& c = rep.orbits.front();
  CHECK(rep.pass);
  CHECK(c.fixed_points_in_P == 1);
  CHECK(c.uniqueness_margin > 0.0);
  CHECK(c.field_sup == 0.0);
  CHECK(c.max_return_time == 1.0);
  CHECK(c.mean_return_time == 1.0);
}

TEST_CASE("smoothed bp flow tracks the singular one") {
  const BpPair f = bp_pair(0.5);
  const TrackingReport rep = tracking_certificate(f.phi, f.psi, {core_orbit(f.phi)}, 2.0, quick());
  const OrbitCheck& c = rep.orbits.front();
  CHECK(c.a);
  CHECK(c.b);
  CHECK(c.c);
  CHECK(c.d);
  CHECK(rep.pass);
  CHECK(c.max_return_time <= 2.0);
}

TEST_CASE("slow return violates the period bound") {
  const BpPair f = bp_pair(0.5);
  const FlowModel slow = rescaled(f.psi, 0.25);
  const TrackingReport rep = tracking_certificate(f.phi, slow, {core_orbit(f.phi)}, 2.0, quick());
  const OrbitCheck& c = rep.orbits.front();
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(c.d);
  CHECK(c.max_return_time > 2.0);
  CHECK(c.max_return_time == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("no return fails the period bound with a note") {
  const BpPair f = bp_pair(0.5);
  TrackingOptions opts = quick();
  opts.ret.horizon = 2.0;
  const TrackingReport rep = tracking_certificate(f.phi, rescaled(f.psi, 0.25), {core_orbit(f.phi)}, 3.0, opts);
  const OrbitCheck& c = rep.orbits.front();
  CHECK_FALSE(c.d);
  CHECK_FALSE(c.note.empty());
}

TEST_CASE("different fields fail the agreement check") {
  const BpPair f = bp_pair(0.5);
  const TrackingReport rep = tracking_certificate(f.phi, rescaled(f.phi, 0.5), {core_orbit(f.phi)}, 2.5, quick());
  const OrbitCheck& c = rep.orbits.front();
  CHECK_FALSE(c.c);
  CHECK(c.field_sup > 0.1);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("coincident tubes fail disjointness") {
  const BpPair f = bp_pair(0.5);
  const TrackingReport rep =
      tracking_certificate(f.phi, f.psi, {core_orbit(f.phi, 0), core_orbit(f.phi, 1)}, 2.0, quick());
  REQUIRE(rep.orbits.size() == 2);
  for (const auto& c : rep.orbits) {
    CHECK_FALSE(c.b);
    CHECK(c.tube_distance < 1e-9);
  }
  CHECK_FALSE(rep.pass);
}

TEST_CASE("orbits at or beyond the cutoff are rejected") {
  const BpPair f = bp_pair(0.5);
  TrackedOrbit o = core_orbit(f.phi);
  o.period = 2.0;
  CHECK_THROWS(tracking_certificate(f.phi, f.psi, {o}, 2.0, quick()));
}

TEST_CASE("Lefschetz sums per class") {
  const Census singular =
      make_census("fixture", 2, {make_record(OrbitType::nonrotating_singular(4), 1, kKey, kKey, 1.0)});

  SUBCASE("perturbation into three hyperbolic orbits") {
    const SumCheck s = tracking_sum_check(singular, make_census("fixture", 2, hyperbolic(3)), kKey, 2.0);
    CHECK(s.pass);
    CHECK(s.sum_phi == -3);
    CHECK(s.sum_psi == -3);
    CHECK(s.difference == 0);
    CHECK(s.orbits_phi == 1);
    CHECK(s.orbits_psi == 3);
  }
  SUBCASE("missing orbit") {
    const SumCheck s = tracking_sum_check(singular, make_census("fixture", 2, hyperbolic(2)), kKey, 2.0);
    CHECK_FALSE(s.pass);
    CHECK(s.difference == -1);
    // Psi missing one of Phi's hyperbolic orbits.
    const SumCheck t =
        tracking_sum_check(make_census("fixture", 2, hyperbolic(3)), make_census("fixture", 2, hyperbolic(2)), kKey, 2.0);
    CHECK_FALSE(t.pass);
    CHECK(t.difference == -1);
    const SumCheck u = tracking_sum_check(make_census("fixture", 2, {make_record(OrbitType::negative_hyperbolic(), 1, kKey, kKey, 1.0)}),
                                          make_census("fixture", 2, {}), kKey, 2.0);
    CHECK(u.difference == 1);
  }
  SUBCASE("empty class") {
    const HomotopyClassKey other{"fixture", 1, 1, 0};
    const SumCheck s = tracking_sum_check(singular, make_census("fixture", 2, hyperbolic(3)), other, 2.0);
    CHECK(s.pass);
    CHECK(s.sum_phi == 0);
    CHECK(s.sum_psi == 0);
  }
  SUBCASE("incomplete census") {
    CHECK_THROWS_AS(tracking_sum_check(make_census("fixture", 1, {}), singular, kKey, 2.0), IncompleteCensus);
    CHECK_THROWS_AS(tracking_sum_check(singular, make_census("fixture", 1, {}), kKey, 2.0), IncompleteCensus);
  }
  SUBCASE("iterates are not counted") {
    std::vector<OrbitRecord> recs = hyperbolic(3);
    recs.push_back(make_record(OrbitType::positive_hyperbolic(), 2, kKey, kKey, 2.0));
    const SumCheck s = tracking_sum_check(singular, make_census("fixture", 2, recs), kKey, 2.0);
    CHECK(s.pass);
    CHECK(s.orbits_psi == 3);
  }
}
