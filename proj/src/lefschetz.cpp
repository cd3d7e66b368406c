#include "reebpa/lefschetz.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "reebpa/smooth_step.hpp"

namespace reebpa {

namespace {
constexpr double kPi = std::numbers::pi;
}

OrbitType OrbitType::rotating_singular(int p, int k) {
  if (p < 3) throw Error("rotating singular orbits need p >= 3 prongs");
  const int r = ((k % p) + p) % p;
  if (r == 0) throw Error("rotating singular orbit needs rotation k != 0 mod p");
  return {Kind::rotating_singular, p, r};
}

OrbitType OrbitType::nonrotating_singular(int p) {
  if (p < 2) throw Error("prong count must be at least 2");
  if (p == 2) return positive_hyperbolic();
  return {Kind::nonrotating_singular, p, 0};
}

std::string OrbitType::name() const {
  switch (kind) {
    case Kind::positive_hyperbolic:
      return "positive_hyperbolic";
    case Kind::negative_hyperbolic:
      return "negative_hyperbolic";
    case Kind::elliptic:
      return "elliptic";
    case Kind::rotating_singular:
      return "rotating_singular(" + std::to_string(prongs) + "," + std::to_string(rotation) + ")";
    case Kind::nonrotating_singular:
      return "nonrotating_singular(" + std::to_string(prongs) + ")";
  }
  return "unknown";
}

OrbitType iterate_type(const OrbitType& base, int m) {
  if (m < 1) throw Error("iterate multiplicity must be >= 1");
  switch (base.kind) {
    case OrbitType::Kind::negative_hyperbolic:
      return m % 2 == 0 ? OrbitType::positive_hyperbolic() : base;
    case OrbitType::Kind::rotating_singular: {
      const int r = static_cast<int>((static_cast<long long>(base.rotation) * m) % base.prongs);
      return r == 0 ? OrbitType::nonrotating_singular(base.prongs)
                    : OrbitType::rotating_singular(base.prongs, r);
    }
    default:
      return base;
  }
}

int index_table(const OrbitType& type) {
  switch (type.kind) {
    case OrbitType::Kind::positive_hyperbolic:
      return -1;
    case OrbitType::Kind::negative_hyperbolic:
    case OrbitType::Kind::elliptic:
    case OrbitType::Kind::rotating_singular:
      return 1;
    case OrbitType::Kind::nonrotating_singular:
      return 1 - type.prongs;
  }
  return 0;
}

namespace {

struct AngleSum {
  double total = 0.0;
  double min_norm = std::numeric_limits<double>::infinity();
};

AngleSum accumulate_angle(const PlaneMap& m, const Vec2& x, double eps, int n, bool torus) {
  AngleSum out;
  double prev = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double a = 2.0 * kPi * (i % n) / n;
    const Vec2 y = x + eps * Vec2(std::cos(a), std::sin(a));
    Vec2 d = m(y) - y;
    if (torus) d = Vec2(d.x() - std::round(d.x()), d.y() - std::round(d.y()));
    const double norm = d.norm();
    out.min_norm = std::min(out.min_norm, norm);
    if (!(norm > 1e-14 * (1.0 + y.norm())))
      throw DegenerateCircle("displacement vanishes on the circle of radius " + std::to_string(eps));
    const double ang = std::atan2(d.y(), d.x());
    if (i == 0) {
      prev = ang;
      continue;
    }
    double step = ang - prev;
    step -= 2.0 * kPi * std::round(step / (2.0 * kPi));
    out.total += step;
    prev = ang;
  }
  return out;
}

}  // namespace

WindingResult winding(const PlaneMap& m, const Vec2& x, const WindingOptions& opts) {
  if (opts.samples < 64) throw Error("winding needs at least 64 samples");
  double eps = opts.eps;
  for (int shrink = 0; shrink <= opts.max_shrinks; ++shrink, eps *= 0.5) {
    try {
      AngleSum s = accumulate_angle(m, x, eps, opts.samples, opts.torus);
      int prev = static_cast<int>(std::lround(s.total / (2.0 * kPi)));
      for (int n = 2 * opts.samples; n <= opts.max_samples; n *= 2) {
        s = accumulate_angle(m, x, eps, n, opts.torus);
        const int cur = static_cast<int>(std::lround(s.total / (2.0 * kPi)));
        if (cur == prev) return {cur, eps, n, s.min_norm};
        prev = cur;
      }
      throw DegenerateCircle("winding did not stabilise by " + std::to_string(opts.max_samples) +
                             " samples");
    } catch (const DegenerateCircle&) {
      if (shrink == opts.max_shrinks) throw;
    }
  }
  throw DegenerateCircle("winding failed");
}

int nondegenerate_sign(const Eigen::Matrix2d& J) {
  const double d = (J - Eigen::Matrix2d::Identity()).determinant();
  if (std::abs(d) < 1e-12) throw Degenerate("det(J - I) = " + std::to_string(d));
  return d > 0.0 ? 1 : -1;
}

int orbit_index(const FlowModel& f, const Section& s, const Vec2& x, int k, double eps,
                const ReturnOptions& ropts) {
  const PlaneMap hol = [&](const Vec2& p) { return holonomy_power(f, s, p, k, nullptr, ropts); };
  WindingOptions o;
  o.eps = eps;
  o.torus = f.torus_fiber;
  return winding(hol, x, o).index;
}

std::vector<IndexedFixedPoint> indexed_fixed_points(const PlaneMap& m, double K,
                                                    const RelLefschetzOptions& opts) {
  const FixedPointSearch search = newton_fixed_points(m, disk_seeds(Vec2::Zero(), K, opts.rings, opts.per_ring));
  std::vector<Vec2> pts;
  for (const auto& fp : search.points)
    if (fp.point.norm() <= K) pts.push_back(fp.point);
  std::vector<IndexedFixedPoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) nearest = std::min(nearest, (pts[i] - pts[j]).norm());
    const double eps = std::min(0.1 * K, 0.3 * nearest);
    WindingOptions o;
    o.eps = eps;
    out.push_back({pts[i], winding(m, pts[i], o).index, eps});
  }
  return out;
}

RelLefschetzReport rel_lefschetz_check(const PlaneMap& m1, const PlaneMap& m2, double K,
                                       const RelLefschetzOptions& opts) {
  if (!(K > 0.0)) throw Error("relative Lefschetz radius must be positive");
  RelLefschetzReport rep;
  for (int i = 0; i <= 4; ++i) {
    const double rad = K * (1.0 + 0.25 * i);
    for (int j = 0; j < 256; ++j) {
      const double a = 2.0 * kPi * j / 256;
      const Vec2 y(rad * std::cos(a), rad * std::sin(a));
      rep.outside_gap = std::max(rep.outside_gap, (m1(y) - m2(y)).norm());
    }
  }
  rep.agree_outside = rep.outside_gap <= opts.agree_tol;
  rep.fixed1 = indexed_fixed_points(m1, K, opts);
  rep.fixed2 = indexed_fixed_points(m2, K, opts);
  for (const auto& f : rep.fixed1) rep.sum1 += f.index;
  for (const auto& f : rep.fixed2) rep.sum2 += f.index;
  WindingOptions big;
  big.eps = K;
  rep.degree1 = winding(m1, Vec2::Zero(), big).index;
  rep.degree2 = winding(m2, Vec2::Zero(), big).index;
  rep.pass = rep.agree_outside && rep.sum1 == rep.sum2;
  return rep;
}

PlaneMap perturbed_standard_map(const StandardPAMap& phi, const Vec2& c, double support) {
  return [phi, c, support](const Vec2& p) -> Vec2 {
    return phi(p) + smooth_bump(p.norm() / support) * c;
  };
}

Vec2 default_push() { return 0.01 * Vec2(std::cos(0.3), std::sin(0.3)); }

PlaneMap cancelling_pair_map() {
  return [](const Vec2& p) -> Vec2 {
    const double b = smooth_bump((p - Vec2(0.5, 0.0)).norm() / 0.2);
    return apply_A_lambda<double>(2.0, p) - 0.6 * b * Vec2(1.0, 0.0);
  };
}

}  // namespace reebpa
