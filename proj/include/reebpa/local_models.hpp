#pragma once

// Standard pseudo-Anosov maps and flows, and hyperbolic torus automorphisms.

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <variant>

#include "reebpa/int_linalg.hpp"

namespace reebpa {

template <class Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;
using Vec2 = Eigen::Vector2d;

/// A_lambda(x, y) = (lambda x, y / lambda).
template <class Scalar>
Point2<Scalar> apply_A_lambda(Scalar lambda, const Point2<Scalar>& p) {
  return {lambda * p.x(), p.y() / lambda};
}

struct Polar {
  double r = 0.0;
  double theta = 0.0;  // [0, 2 pi)
};

Polar to_polar(const Vec2& p);
Vec2 from_polar(const Polar& p);
/// Angle reduced to [0, 2 pi).
double wrap_angle(double theta);

/// The lift of A_lambda through the n-fold branched cover z -> z^(n/2),
/// composed with rotation by 2 pi k / n.
///
/// Sector j is theta in [2 pi j / n, 2 pi (j+1) / n). It is opened to the
/// upper half plane by psi = n (theta - 2 pi j / n) / 2, A_lambda is applied
/// there, and the image angle psi' in [0, pi] is placed in sector j + k.
/// Tracking sectors rather than angles keeps the lift single valued for odd n.
class StandardPAMap {
 public:
  StandardPAMap(int n, int k, double lambda);

  int prongs() const { return n_; }
  int rotation() const { return k_; }
  double stretch() const { return lambda_; }

  Polar apply(const Polar& p) const;
  Vec2 operator()(const Vec2& p) const { return from_polar(apply(to_polar(p))); }

  Polar apply_inverse(const Polar& p) const;
  Vec2 inverse(const Vec2& p) const { return from_polar(apply_inverse(to_polar(p))); }

  int sector(double theta) const;

  /// pi_n(r, theta) = (r, n theta / 2), as a point of the plane.
  Vec2 project(const Polar& p) const;

 private:
  static Polar lift(int n, int shift, double lambda, const Polar& p);

  int n_;
  int k_;
  double lambda_;
};

inline Vec2 apply_standard_pa(const StandardPAMap& m, const Polar& p) {
  return from_polar(m.apply(p));
}

/// Hyperbolic element of GL(2, Z) acting on R^2 / Z^2.
class TorusAutomorphism {
 public:
  explicit TorusAutomorphism(const IntMatrix2& a);

  const IntMatrix2& matrix() const { return a_; }
  std::int64_t trace() const { return a_.trace(); }
  std::int64_t det() const { return a_(0, 0) * a_(1, 1) - a_(0, 1) * a_(1, 0); }
  /// Eigenvalue of largest modulus, as |lambda| > 1.
  double stretch() const;

  /// Action on the torus, reduced to [0, 1)^2.
  Vec2 operator()(const Vec2& p) const;
  Vec2 inverse(const Vec2& p) const;
  /// Linear action on the universal cover.
  Vec2 lift(const Vec2& p) const { return a_.cast<double>() * p; }

 private:
  IntMatrix2 a_;
  IntMatrix2 inv_;
};

Vec2 wrap_torus(const Vec2& p);

/// |det(A^k - I)|, the number of fixed points of A^k on the torus.
std::int64_t count_fixed_points(const TorusAutomorphism& a, int k);

/// Suspension of a plane or torus map with roof 1.
class SuspensionFlow {
 public:
  using Base = std::variant<StandardPAMap, TorusAutomorphism>;

  struct State {
    double s = 0.0;  // [0, 1)
    Vec2 p = Vec2::Zero();
  };

  explicit SuspensionFlow(Base base) : base_(std::move(base)) {}

  const Base& base() const { return base_; }
  Vec2 base_map(const Vec2& p) const;
  Vec2 base_inverse(const Vec2& p) const;

  State flow(const State& x, double T) const;

 private:
  Base base_;
};

inline SuspensionFlow::State suspension_flow(const SuspensionFlow& f, const SuspensionFlow::State& x,
                                             double T) {
  return f.flow(x, T);
}

}  // namespace reebpa
