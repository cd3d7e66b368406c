#pragma once

// Fixed-point indices of planar maps by winding numbers, and the closed-form
// index of each orbit type.

#include <Eigen/Core>
#include <string>
#include <vector>

#include "reebpa/flow.hpp"
#include "reebpa/local_models.hpp"

namespace reebpa {

struct OrbitType {
  enum class Kind { positive_hyperbolic, negative_hyperbolic, elliptic, rotating_singular, nonrotating_singular };

  Kind kind = Kind::positive_hyperbolic;
  int prongs = 2;
  int rotation = 0;

  static OrbitType positive_hyperbolic() { return {Kind::positive_hyperbolic, 2, 0}; }
  static OrbitType negative_hyperbolic() { return {Kind::negative_hyperbolic, 2, 1}; }
  static OrbitType elliptic() { return {Kind::elliptic, 2, 0}; }
  /// p >= 3; k taken mod p and must be non-zero.
  static OrbitType rotating_singular(int p, int k);
  /// p >= 2; p = 2 is the smooth positive hyperbolic type.
  static OrbitType nonrotating_singular(int p);

  bool rotating() const { return kind == Kind::elliptic || kind == Kind::rotating_singular; }
  bool singular() const { return kind == Kind::rotating_singular || kind == Kind::nonrotating_singular; }
  std::string name() const;

  friend bool operator==(const OrbitType&, const OrbitType&) = default;
};

/// Type of the m-th iterate of an orbit of type `base`.
OrbitType iterate_type(const OrbitType& base, int m);

/// -1 positive hyperbolic, +1 negative hyperbolic, +1 rotating, 1 - p non-rotating p-prong.
int index_table(const OrbitType& type);

struct WindingOptions {
  double eps = 0.1;
  int samples = 64;
  int max_samples = 8192;
  int max_shrinks = 6;
  bool torus = false;  // wrap displacements to [-1/2, 1/2)
};

struct WindingResult {
  int index = 0;
  double eps_used = 0.0;
  int samples_used = 0;
  double min_displacement = 0.0;
};

/// Degree of y -> (m(y) - y) / |m(y) - y| on the circle |y - x| = eps, by
/// accumulated angle, doubling the sample count until two resolutions agree.
WindingResult winding(const PlaneMap& m, const Vec2& x, const WindingOptions& opts = {});

inline int winding_index(const PlaneMap& m, const Vec2& x, double eps, int samples = 64) {
  WindingOptions o;
  o.eps = eps;
  o.samples = samples;
  return winding(m, x, o).index;
}

/// sign det(J - I); throws Degenerate when |det(J - I)| < 1e-12.
int nondegenerate_sign(const Eigen::Matrix2d& J);

/// Index of the closed orbit through a fixed point x of Hol^k.
int orbit_index(const FlowModel& f, const Section& s, const Vec2& x, int k, double eps = 0.05,
                const ReturnOptions& ropts = {});

struct IndexedFixedPoint {
  Vec2 point;
  int index = 0;
  double eps = 0.0;
};

struct RelLefschetzReport {
  bool pass = false;
  bool agree_outside = false;
  double outside_gap = 0.0;  // sup |m1 - m2| on sampled annuli outside K
  std::vector<IndexedFixedPoint> fixed1;
  std::vector<IndexedFixedPoint> fixed2;
  int sum1 = 0;
  int sum2 = 0;
  int degree1 = 0;  // winding of the displacement on |y| = K
  int degree2 = 0;
};

struct RelLefschetzOptions {
  int rings = 16;
  int per_ring = 32;
  double agree_tol = 1e-12;
};

RelLefschetzReport rel_lefschetz_check(const PlaneMap& m1, const PlaneMap& m2, double K,
                                       const RelLefschetzOptions& opts = {});

/// Finds the fixed points of m in the disk of radius K and their indices.
std::vector<IndexedFixedPoint> indexed_fixed_points(const PlaneMap& m, double K,
                                                    const RelLefschetzOptions& opts = {});

/// phi + bump(|p| / support) c: a compactly supported push of the standard map.
PlaneMap perturbed_standard_map(const StandardPAMap& phi, const Vec2& c, double support = 0.9);
/// The default push c = 0.01 (cos 0.3, sin 0.3).
Vec2 default_push();
/// A_2 minus a bump at (0.5, 0) of width 0.2 pushing by 0.6 in -x: two extra
/// fixed points of opposite index.
PlaneMap cancelling_pair_map();

}  // namespace reebpa
