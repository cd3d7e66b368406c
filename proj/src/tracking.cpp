#include "reebpa/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "reebpa/parallel.hpp"

namespace reebpa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct FieldComparison {
  double field_sup = 0.0;
  double monodromy_sup = 0.0;
  std::size_t used = 0;
};

// Disks Hol_phi^j(P), approximated by the disk of radius r_P about the image
// of the orbit point.
struct Slice {
  double t0;
  Vec2 center;
  double radius;
};

std::vector<Slice> slices(const FlowModel& phi, const std::vector<TrackedOrbit>& orbits,
                          const ReturnOptions& ropts) {
  std::vector<Slice> out;
  for (const auto& o : orbits) {
    Vec2 c = o.section.center;
    for (int j = 0; j < o.returns; ++j) {
      out.push_back({o.section.t0, c, o.section.r_P});
      if (j + 1 < o.returns) c = return_map(phi, o.section, c, ropts).image;
    }
  }
  return out;
}

FieldComparison compare_fields(const FlowModel& phi, const FlowModel& psi,
                               const std::vector<TrackedOrbit>& orbits, const TrackingOptions& opts) {
  const std::vector<Slice> tubes = slices(phi, orbits, opts.ret);
  const double t0 = orbits.empty() ? 0.0 : orbits.front().section.t0;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<FlowState> samples(opts.field_samples);
  for (auto& s : samples) {
    const double t = t0 + unit(rng);
    const double rad = opts.domain_radius * std::sqrt(unit(rng));
    const double ang = 2.0 * std::numbers::pi * unit(rng);
    s = FlowState(t, rad * std::cos(ang), rad * std::sin(ang));
  }

  struct Item {
    bool outside = false;
    double field = 0.0;
    double glue = 0.0;
  };
  const auto items = parallel_map<Item>(samples.size(), [&](std::size_t i) -> Item {
    const FlowState& x = samples[i];
    FlowState base;
    try {
      base = flow_to_level(phi, x, t0, opts.ret);
    } catch (const Error&) {
      return {true, kInf, 0.0};
    }
    const Vec2 p(base(1), base(2));
    for (const auto& sl : tubes)
      if ((p - sl.center).norm() < sl.radius) return {};
    Item it{true, 0.0, 0.0};
    try {
      it.field = (phi.field(x) - psi.field(x)).cwiseAbs().maxCoeff();
    } catch (const Error&) {
      it.field = kInf;
    }
    const Vec2 q(x(1), x(2));
    it.glue = (phi.glue(q) - psi.glue(q)).cwiseAbs().maxCoeff();
    return it;
  });

  FieldComparison out;
  for (const auto& it : items) {
    if (!it.outside) continue;
    ++out.used;
    out.field_sup = std::max(out.field_sup, it.field);
    out.monodromy_sup = std::max(out.monodromy_sup, it.glue);
  }
  return out;
}

// Points of the flow tube of one orbit under psi, folded into t in [0, 1).
std::vector<FlowState> tube_samples(const FlowModel& psi, const TrackedOrbit& o, const Vec2& core,
                                    double period, std::size_t n) {
  constexpr int kBoundary = 8;
  std::vector<Vec2> starts{core};
  for (int j = 0; j < kBoundary; ++j) {
    const double a = 2.0 * std::numbers::pi * j / kBoundary;
    starts.emplace_back(o.section.center + o.section.r_P * Vec2(std::cos(a), std::sin(a)));
  }
  const std::size_t per = std::max<std::size_t>(2, n / starts.size());
  std::vector<FlowState> out;
  for (const Vec2& s : starts) {
    const Trajectory tr = integrate(psi, FlowState(o.section.t0, s.x(), s.y()), period);
    for (std::size_t i = 0; i < per; ++i) {
      const double tau = period * static_cast<double>(i) / static_cast<double>(per);
      out.push_back(to_fundamental_domain(psi, tr.at(tau)));
    }
  }
  return out;
}

}  // namespace

TrackingReport tracking_certificate(const FlowModel& phi, const FlowModel& psi,
                                    const std::vector<TrackedOrbit>& orbits, double L,
                                    const TrackingOptions& opts) {
  TrackingReport rep;
  rep.L = L;
  std::vector<TrackedOrbit> sorted = orbits;
  std::sort(sorted.begin(), sorted.end(),
            [](const TrackedOrbit& a, const TrackedOrbit& b) { return a.id < b.id; });

  std::vector<Vec2> cores;
  std::vector<double> periods;
  for (const auto& o : sorted) {
    if (!(o.period < L)) throw Error("tracked orbit " + std::to_string(o.id) + " has period >= L");
    OrbitCheck chk;
    chk.id = o.id;
    const Section& sec = o.section;
    const PlaneMap hol = [&](const Vec2& p) { return holonomy_power(psi, sec, p, o.returns, nullptr, opts.ret); };

    // (a) exactly one fixed point of Hol_psi^k in P.
    NewtonOptions nopts;
    nopts.torus = psi.torus_fiber;
    const auto seeds = disk_seeds(sec.center, 0.95 * sec.r_P, opts.uniqueness_rings, opts.uniqueness_per_ring);
    const FixedPointSearch fps = newton_fixed_points(hol, seeds, nopts);
    std::vector<Vec2> inside;
    for (const auto& fp : fps.points)
      if (sec.in_P(fp.point, psi.torus_fiber)) inside.push_back(fp.point);
    chk.fixed_points_in_P = inside.size();
    const Vec2 x = inside.size() == 1 ? inside.front() : sec.center;
    chk.uniqueness_margin = kInf;
    for (const Vec2& y : disk_seeds(sec.center, sec.r_P, opts.uniqueness_rings, opts.uniqueness_per_ring)) {
      const double dist = (y - x).norm();
      if (dist < 1e-6 * sec.r_P) continue;
      try {
        chk.uniqueness_margin = std::min(chk.uniqueness_margin, (hol(y) - y).norm() / dist);
      } catch (const Error&) {
        chk.uniqueness_margin = 0.0;
      }
    }
    chk.a = inside.size() == 1 && chk.uniqueness_margin > 0.0;
    if (!chk.a) chk.note += "fixed points in P: " + std::to_string(inside.size()) + "; ";

    // (d) return time of psi on P.
    double total = 0.0;
    std::size_t probes = 0;
    chk.d = true;
    auto probe_pts = disk_seeds(sec.center, sec.r_P, 3, 16);
    if (probe_pts.size() > static_cast<std::size_t>(opts.return_probes))
      probe_pts.resize(static_cast<std::size_t>(opts.return_probes));
    for (const Vec2& y : probe_pts) {
      try {
        std::vector<double> times;
        holonomy_power(psi, sec, y, o.returns, &times, opts.ret);
        double tau = 0.0;
        for (double t : times) tau += t;
        chk.max_return_time = std::max(chk.max_return_time, tau);
        total += tau;
        ++probes;
      } catch (const NoReturn& e) {
        chk.d = false;
        chk.max_return_time = kInf;
        chk.note += std::string("no return: ") + e.what() + "; ";
        break;
      }
    }
    if (probes > 0) chk.mean_return_time = total / static_cast<double>(probes);
    if (chk.max_return_time > L) {
      chk.d = false;
      chk.note += "return time " + std::to_string(chk.max_return_time) + " exceeds L; ";
    }

    double period = 0.0;
    try {
      std::vector<double> times;
      holonomy_power(psi, sec, x, o.returns, &times, opts.ret);
      for (double t : times) period += t;
    } catch (const Error&) {
      period = o.period;
    }
    cores.push_back(x);
    periods.push_back(period);
    rep.orbits.push_back(std::move(chk));
  }

  // (b) pairwise tube separation.
  std::vector<std::vector<FlowState>> tubes;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    tubes.push_back(tube_samples(psi, sorted[i], cores[i], periods[i], opts.tube_samples));
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      if (i == j) continue;
      for (const auto& p : tubes[i])
        for (const auto& q : tubes[j])
          rep.orbits[i].tube_distance = std::min(rep.orbits[i].tube_distance, (p - q).norm());
    }
    rep.orbits[i].b = rep.orbits[i].tube_distance > opts.tube_margin;
    if (!rep.orbits[i].b) rep.orbits[i].note += "tubes closer than the margin; ";
  }

  // (c) agreement of fields and gluings outside the tubes.
  const FieldComparison cmp = compare_fields(phi, psi, sorted, opts);
  for (auto& chk : rep.orbits) {
    chk.field_sup = cmp.field_sup;
    chk.monodromy_sup = cmp.monodromy_sup;
    chk.field_samples_used = cmp.used;
    chk.c = cmp.field_sup <= opts.field_tol && cmp.monodromy_sup <= opts.field_tol;
    if (!chk.c) chk.note += "fields differ outside the tubes; ";
  }

  rep.pass = std::all_of(rep.orbits.begin(), rep.orbits.end(), [](const OrbitCheck& c) { return c.pass(); });
  return rep;
}

SumCheck tracking_sum_check(const Census& phi, const Census& psi, const HomotopyClassKey& key, double L) {
  if (!phi.complete_up_to(L)) throw IncompleteCensus("first census is not complete up to L");
  if (!psi.complete_up_to(L)) throw IncompleteCensus("second census is not complete up to L");
  SumCheck out;
  for (const auto& r : phi.in_class(key, L))
    if (r.simple()) {
      out.sum_phi += r.lefschetz;
      ++out.orbits_phi;
    }
  for (const auto& r : psi.in_class(key, L))
    if (r.simple()) {
      out.sum_psi += r.lefschetz;
      ++out.orbits_psi;
    }
  out.difference = out.sum_phi - out.sum_psi;
  out.pass = out.difference == 0;
  return out;
}

}  // namespace reebpa
