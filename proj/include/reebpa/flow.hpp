#pragma once

// Flows on mapping tori, integrated in cover coordinates (t, x, y) with the
// gluing (t + 1, p) ~ (t, phi(p)) applied when a trajectory returns.

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "reebpa/expr.hpp"
#include "reebpa/local_models.hpp"
#include "reebpa/singular_contact.hpp"

namespace reebpa {

using FlowState = Eigen::Vector3d;  // (t, x, y)
using VectorField = std::function<Eigen::Vector3d(const FlowState&)>;
using PlaneMap = std::function<Vec2(const Vec2&)>;

struct FlowModel {
  std::string kind;
  VectorField field;
  PlaneMap monodromy;             // empty means the identity gluing
  bool torus_fiber = false;       // fiber is R^2 / Z^2 rather than the plane
  bool unit_translation = false;  // field is exactly d/dt

  Vec2 glue(const Vec2& p) const;
};

FlowModel suspension_model(const SuspensionFlow& s);
/// Reeb field of alpha_chi in Cartesian fiber coordinates; r is floored at 1e-9.
FlowModel chart_reeb_model(const ChartContactForm& form, const SmoothingChart& chart,
                           const SmoothingFunction& chi);
/// Reeb field (0, cos 2 pi t, sin 2 pi t) of cos(2 pi t) dx + sin(2 pi t) dy.
FlowModel torsion_model();
/// Field components as expressions in t, x, y (r and th are also bound).
FlowModel user_model(const Expression& ft, const Expression& fx, const Expression& fy);

FlowModel with_monodromy(FlowModel model, PlaneMap monodromy);
/// The same orbits traversed at `speed` times the original rate.
FlowModel rescaled(FlowModel model, double speed);

/// Reduce t into [0, 1), applying the gluing once per crossed unit.
FlowState to_fundamental_domain(const FlowModel& model, const FlowState& x);

struct IntegrationOptions {
  double tol = 1e-10;
  double h_initial = 1e-2;
  double h_min = 1e-12;
  double h_max = 0.25;
  std::size_t max_steps = 2'000'000;
};

/// Accepted steps of an adaptive Dormand-Prince 5(4) solve with cubic Hermite
/// dense output between them.
class Trajectory {
 public:
  void push(double s, const FlowState& x, const Eigen::Vector3d& dx);

  const std::vector<double>& times() const { return s_; }
  const std::vector<FlowState>& states() const { return x_; }
  const std::vector<Eigen::Vector3d>& derivatives() const { return dx_; }
  double end_time() const { return s_.empty() ? 0.0 : s_.back(); }
  const FlowState& back() const { return x_.back(); }

  FlowState at(double s) const;
  double arc_length() const;

 private:
  std::vector<double> s_;
  std::vector<FlowState> x_;
  std::vector<Eigen::Vector3d> dx_;
};

Trajectory integrate(const FlowModel& f, const FlowState& x0, double T, const IntegrationOptions& opts = {});

struct Section {
  double t0 = 0.0;
  double r_max = 1.0;
  double r_P = 0.5;
  Vec2 center = Vec2::Zero();

  /// Builds the section after checking dt(field) > 0 on sampled points of the disk.
  static Section checked(const FlowModel& f, double t0, double r_max, double r_P,
                         const Vec2& center = Vec2::Zero());
  bool in_P(const Vec2& p, bool torus) const;
};

struct ReturnMapResult {
  Vec2 image = Vec2::Zero();
  double time = 0.0;
  double arc_length = 0.0;
  double section_error = 0.0;  // |t(tau) - (t0 + 1)| before gluing
  bool success = false;
};

struct ReturnOptions {
  double horizon = 50.0;
  IntegrationOptions integration;
};

/// Flows from x (forward or backward) to the first point with t = t_target.
/// Throws NoReturn if the level is not reached within the horizon.
FlowState flow_to_level(const FlowModel& f, const FlowState& x, double t_target,
                        const ReturnOptions& opts = {}, double* time = nullptr,
                        double* arc_length = nullptr);

ReturnMapResult return_map(const FlowModel& f, const Section& s, const Vec2& x, const ReturnOptions& opts = {});

/// k-fold holonomy; `times` receives the k intermediate return times.
Vec2 holonomy_power(const FlowModel& f, const Section& s, const Vec2& x, int k,
                    std::vector<double>* times = nullptr, const ReturnOptions& opts = {});

struct NewtonOptions {
  double tol = 1e-11;
  int max_iter = 60;
  int max_halvings = 30;
  bool torus = false;
  double dedup = 1e-8;
  int workers = 0;
};

struct FixedPoint {
  Vec2 point;
  std::vector<std::size_t> converged_from;  // seed indices
};

struct FixedPointSearch {
  std::vector<FixedPoint> points;  // lexicographic order
  std::size_t failures = 0;
};

/// Damped Newton on m(x) - x from each seed, central-difference Jacobian with
/// h = 1e-6 (1 + |x|). On the torus the displacement is wrapped to [-1/2, 1/2).
FixedPointSearch newton_fixed_points(const PlaneMap& m, const std::vector<Vec2>& seeds,
                                     const NewtonOptions& opts = {});

struct PeriodicOrbit {
  Vec2 point;
  int k = 1;
  double period = 0.0;
  std::vector<double> return_times;
  std::vector<std::size_t> converged_from;
};

struct PeriodicOrbitReport {
  std::vector<PeriodicOrbit> orbits;
  std::size_t non_converged = 0;
};

PeriodicOrbitReport find_periodic_orbits(const FlowModel& f, const Section& s,
                                         const std::vector<Vec2>& seeds, int k,
                                         const ReturnOptions& ropts = {},
                                         NewtonOptions nopts = {});

/// Uniform n x n seeds on [0, 1)^2, offset by half a cell.
std::vector<Vec2> torus_seeds(int n);
/// Seeds on a polar grid inside the disk of radius r around c.
std::vector<Vec2> disk_seeds(const Vec2& c, double r, int rings, int per_ring);

}  // namespace reebpa
