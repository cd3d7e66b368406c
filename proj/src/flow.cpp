#include "reebpa/flow.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "reebpa/parallel.hpp"

namespace reebpa {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Dormand-Prince 5(4) tableau; the fields are autonomous, so the nodes c_i are unused.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepResult {
  FlowState x;
  Eigen::Vector3d dx;  // field at the new point (FSAL)
  double err = 0.0;    // scaled error norm
};

StepResult dp_step(const VectorField& f, const FlowState& x, const Eigen::Vector3d& k1, double h,
                   double tol) {
  const Eigen::Vector3d k2 = f(x + h * a21 * k1);
  const Eigen::Vector3d k3 = f(x + h * (a31 * k1 + a32 * k2));
  const Eigen::Vector3d k4 = f(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Eigen::Vector3d k5 = f(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Eigen::Vector3d k6 = f(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  const FlowState y = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Eigen::Vector3d k7 = f(y);
  const Eigen::Vector3d e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  double err = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double scale = tol * (1.0 + std::max(std::abs(x(i)), std::abs(y(i))));
    err = std::max(err, std::abs(e(i)) / scale);
  }
  if (!std::isfinite(err)) err = 1e300;
  return {y, k7, err};
}

FlowState hermite(double s0, const FlowState& x0, const Eigen::Vector3d& d0, double s1,
                  const FlowState& x1, const Eigen::Vector3d& d1, double s) {
  const double h = s1 - s0;
  if (h == 0.0) return x0;
  const double u = (s - s0) / h;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * x0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * x1 +
         (u3 - u2) * h * d1;
}

// Adaptive integration over signed time T; `stop` sees each accepted step and
// ends the run early when it returns true.
template <class Stop>
Trajectory run(const FlowModel& model, const FlowState& x0, double T,
               const IntegrationOptions& opts, Stop&& stop) {
  if (!(opts.tol > 0.0)) throw Error("integration tolerance must be positive");
  if (!std::isfinite(T)) throw DomainError("integration time must be finite");
  const double dir = T < 0.0 ? -1.0 : 1.0;
  const double span = std::abs(T);
  const VectorField& f = model.field;

  Trajectory traj;
  Eigen::Vector3d d = f(x0);
  traj.push(0.0, x0, d);
  FlowState x = x0;
  double s = 0.0;
  double h = std::min(opts.h_initial, opts.h_max);
  std::size_t steps = 0;
  while (s < span) {
    if (++steps > opts.max_steps) throw StepFailure("step budget exhausted");
    h = std::min(h, span - s);
    StepResult st;
    bool ok = true;
    try {
      st = dp_step(f, x, d, dir * h, opts.tol);
    } catch (const NonContactPoint&) {
      ok = false;
    }
    if (!ok || st.err > 1.0) {
      h *= ok ? std::max(0.2, 0.9 * std::pow(st.err, -0.2)) : 0.25;
      if (h < opts.h_min) throw StepFailure("step size underflow at s = " + std::to_string(dir * s));
      continue;
    }
    s += h;
    if (span - s < 1e-15 * std::max(1.0, span)) s = span;
    x = st.x;
    d = st.dx;
    traj.push(dir * s, x, d);
    if (stop(traj)) break;
    const double grow = st.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(st.err, -0.2), 0.2, 5.0);
    h = std::min(h * grow, opts.h_max);
  }
  return traj;
}

Vec2 wrap_displacement(const Vec2& d) {
  return {d.x() - std::round(d.x()), d.y() - std::round(d.y())};
}

}  // namespace

Vec2 FlowModel::glue(const Vec2& p) const {
  const Vec2 q = monodromy ? monodromy(p) : p;
  return torus_fiber ? wrap_torus(q) : q;
}

FlowModel suspension_model(const SuspensionFlow& s) {
  FlowModel m;
  m.kind = "suspension";
  m.field = [](const FlowState&) { return Eigen::Vector3d(1.0, 0.0, 0.0); };
  m.monodromy = [s](const Vec2& p) { return s.base_map(p); };
  m.torus_fiber = std::holds_alternative<TorusAutomorphism>(s.base());
  m.unit_translation = true;
  return m;
}

FlowModel chart_reeb_model(const ChartContactForm& form, const SmoothingChart& chart,
                           const SmoothingFunction& chi) {
  FlowModel m;
  m.kind = "chart_reeb";
  m.field = [form, chart, chi](const FlowState& x) {
    const double r = std::max(std::hypot(x(1), x(2)), 1e-9);
    double th = std::atan2(x(2), x(1));
    if (th < 0.0) th += kTwoPi;
    const Eigen::Vector3d R = reeb_vector(form, chart, chi, ChartPoint(x(0), r, th));
    const double c = std::cos(th), s = std::sin(th);
    return Eigen::Vector3d(R(0), R(1) * c - r * R(2) * s, R(1) * s + r * R(2) * c);
  };
  return m;
}

FlowModel torsion_model() {
  FlowModel m;
  m.kind = "torsion";
  m.field = [](const FlowState& x) {
    return Eigen::Vector3d(0.0, std::cos(kTwoPi * x(0)), std::sin(kTwoPi * x(0)));
  };
  m.torus_fiber = true;
  return m;
}

FlowModel user_model(const Expression& ft, const Expression& fx, const Expression& fy) {
  FlowModel m;
  m.kind = "user";
  m.field = [ft, fx, fy](const FlowState& x) {
    Binding b;
    double th = std::atan2(x(2), x(1));
    if (th < 0.0) th += kTwoPi;
    b.set(Var::t, x(0)).set(Var::x, x(1)).set(Var::y, x(2));
    b.set(Var::r, std::hypot(x(1), x(2))).set(Var::th, th);
    return Eigen::Vector3d(ft.eval(b), fx.eval(b), fy.eval(b));
  };
  return m;
}

FlowModel with_monodromy(FlowModel model, PlaneMap monodromy) {
  model.monodromy = std::move(monodromy);
  return model;
}

FlowModel rescaled(FlowModel model, double speed) {
  if (!(speed > 0.0)) throw Error("rescaling speed must be positive");
  VectorField inner = std::move(model.field);
  model.field = [inner, speed](const FlowState& x) -> Eigen::Vector3d { return speed * inner(x); };
  model.unit_translation = model.unit_translation && speed == 1.0;
  model.kind += "_rescaled";
  return model;
}

FlowState to_fundamental_domain(const FlowModel& model, const FlowState& x) {
  const double turns = std::floor(x(0));
  Vec2 p(x(1), x(2));
  const auto n = static_cast<long long>(turns);
  if (n < 0 && model.monodromy) throw Error("backward gluing needs an inverse monodromy");
  for (long long i = 0; i < n; ++i) p = model.glue(p);
  if (model.torus_fiber) p = wrap_torus(p);
  return {x(0) - turns, p.x(), p.y()};
}

void Trajectory::push(double s, const FlowState& x, const Eigen::Vector3d& dx) {
  s_.push_back(s);
  x_.push_back(x);
  dx_.push_back(dx);
}

FlowState Trajectory::at(double s) const {
  if (s_.empty()) throw Error("empty trajectory");
  if (s_.size() == 1) return x_[0];
  const bool ascending = s_.back() >= s_.front();
  auto it = ascending ? std::upper_bound(s_.begin(), s_.end(), s)
                      : std::upper_bound(s_.begin(), s_.end(), s, std::greater<>());
  std::size_t i = static_cast<std::size_t>(std::distance(s_.begin(), it));
  i = std::clamp<std::size_t>(i, 1, s_.size() - 1);
  return hermite(s_[i - 1], x_[i - 1], dx_[i - 1], s_[i], x_[i], dx_[i], s);
}

double Trajectory::arc_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < x_.size(); ++i) len += (x_[i] - x_[i - 1]).norm();
  return len;
}

Trajectory integrate(const FlowModel& f, const FlowState& x0, double T, const IntegrationOptions& opts) {
  return run(f, x0, T, opts, [](const Trajectory&) { return false; });
}

Section Section::checked(const FlowModel& f, double t0, double r_max, double r_P, const Vec2& center) {
  if (!(r_P > 0.0 && r_P < r_max)) throw Error("section needs 0 < r_P < r_max");
  Section s{t0, r_max, r_P, center};
  constexpr int kRings = 4, kPerRing = 16;
  for (int i = 0; i <= kRings; ++i) {
    const double rad = r_max * i / kRings;
    for (int j = 0; j < (i == 0 ? 1 : kPerRing); ++j) {
      const double a = kTwoPi * j / kPerRing;
      const FlowState x(t0, center.x() + rad * std::cos(a), center.y() + rad * std::sin(a));
      double ft = 0.0;
      try {
        ft = f.field(x)(0);
      } catch (const NonContactPoint&) {
        ft = 0.0;
      }
      if (!(ft > 0.0))
        throw NotTransverse("dt(field) = " + std::to_string(ft) + " at (" + std::to_string(x(1)) +
                            ", " + std::to_string(x(2)) + ") on the section t = " +
                            std::to_string(t0));
    }
  }
  return s;
}

bool Section::in_P(const Vec2& p, bool torus) const {
  const Vec2 d = torus ? wrap_displacement(p - center) : Vec2(p - center);
  return d.norm() < r_P;
}

FlowState flow_to_level(const FlowModel& f, const FlowState& x, double t_target,
                        const ReturnOptions& opts, double* time, double* arc_length) {
  if (x(0) == t_target) {
    if (time) *time = 0.0;
    if (arc_length) *arc_length = 0.0;
    return x;
  }
  const double side = t_target > x(0) ? 1.0 : -1.0;
  if (f.unit_translation) {
    const double tau = t_target - x(0);
    if (time) *time = tau;
    if (arc_length) *arc_length = std::abs(tau);
    return {t_target, x(1), x(2)};
  }
  // Integrate forward in time when the level lies ahead along the flow of a
  // field with dt > 0, backward otherwise.
  const double dir = f.field(x)(0) * side >= 0.0 ? 1.0 : -1.0;
  auto reached = [&](const FlowState& s) { return side * (s(0) - t_target) >= 0.0; };
  bool crossed = false;
  const Trajectory traj = run(f, x, dir * opts.horizon, opts.integration, [&](const Trajectory& tr) {
    crossed = reached(tr.back());
    return crossed;
  });
  if (!crossed) throw NoReturn(opts.horizon);

  const std::size_t n = traj.times().size();
  const double s0 = traj.times()[n - 2];
  const FlowState& xa = traj.states()[n - 2];
  const Eigen::Vector3d& da = traj.derivatives()[n - 2];
  double lo = s0, hi = traj.times()[n - 1];
  for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (reached(traj.at(mid)))
      hi = mid;
    else
      lo = mid;
  }
  // Land on the level with one direct step from the last accepted point, then
  // polish tau by Newton on t(tau) = t_target.
  double tau = 0.5 * (lo + hi);
  FlowState xe = traj.at(tau);
  for (int it = 0; it < 3; ++it) {
    xe = dp_step(f.field, xa, da, tau - s0, opts.integration.tol).x;
    const double dt = f.field(xe)(0);
    const double miss = xe(0) - t_target;
    if (std::abs(miss) < 1e-14 || dt == 0.0) break;
    tau -= miss / dt;
  }
  if (time) *time = tau;
  if (arc_length) *arc_length = traj.arc_length();
  return xe;
}

ReturnMapResult return_map(const FlowModel& f, const Section& sec, const Vec2& x,
                           const ReturnOptions& opts) {
  ReturnMapResult res;
  const double target = sec.t0 + 1.0;
  if (f.unit_translation) {
    res.image = f.glue(x);
    res.time = 1.0;
    res.arc_length = 1.0;
    res.success = true;
    return res;
  }
  const FlowState x0(sec.t0, x.x(), x.y());
  if (!(f.field(x0)(0) > 0.0)) throw NoReturn(opts.horizon);
  const FlowState xe = flow_to_level(f, x0, target, opts, &res.time, &res.arc_length);
  res.section_error = std::abs(xe(0) - target);
  res.image = f.glue(Vec2(xe(1), xe(2)));
  res.success = true;
  return res;
}

Vec2 holonomy_power(const FlowModel& f, const Section& s, const Vec2& x, int k,
                    std::vector<double>* times, const ReturnOptions& opts) {
  Vec2 p = x;
  for (int i = 0; i < k; ++i) {
    const ReturnMapResult r = return_map(f, s, p, opts);
    if (times) times->push_back(r.time);
    p = r.image;
  }
  return p;
}

FixedPointSearch newton_fixed_points(const PlaneMap& m, const std::vector<Vec2>& seeds,
                                     const NewtonOptions& opts) {
  auto residual = [&](const Vec2& x) -> Vec2 {
    const Vec2 d = m(x) - x;
    return opts.torus ? wrap_displacement(d) : d;
  };
  struct Outcome {
    bool ok = false;
    Vec2 x = Vec2::Zero();
  };
  const auto outcomes = parallel_map<Outcome>(
      seeds.size(),
      [&](std::size_t i) -> Outcome {
        Vec2 x = seeds[i];
        try {
          Vec2 F = residual(x);
          for (int it = 0; it < opts.max_iter; ++it) {
            if (F.norm() < opts.tol) return {true, opts.torus ? wrap_torus(x) : x};
            Eigen::Matrix2d J;
            for (int c = 0; c < 2; ++c) {
              const double h = 1e-6 * (1.0 + x.norm());
              Vec2 e = Vec2::Zero();
              e(c) = h;
              Vec2 diff = residual(x + e) - residual(x - e);
              if (opts.torus) diff = wrap_displacement(diff);
              J.col(c) = diff / (2.0 * h);
            }
            if (std::abs(J.determinant()) < 1e-300) return {};
            const Vec2 step = J.partialPivLu().solve(-F);
            double damp = 1.0;
            bool improved = false;
            for (int k = 0; k <= opts.max_halvings; ++k, damp *= 0.5) {
              const Vec2 trial = x + damp * step;
              const Vec2 Ft = residual(trial);
              if (Ft.norm() < F.norm()) {
                x = trial;
                F = Ft;
                improved = true;
                break;
              }
            }
            if (!improved) return {F.norm() < 1e3 * opts.tol, opts.torus ? wrap_torus(x) : x};
          }
          return {F.norm() < opts.tol, opts.torus ? wrap_torus(x) : x};
        } catch (const Error&) {
          return {};
        }
      },
      opts.workers);

  FixedPointSearch out;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok) {
      ++out.failures;
      continue;
    }
    const Vec2& x = outcomes[i].x;
    auto same = [&](const FixedPoint& fp) {
      const Vec2 d = opts.torus ? wrap_displacement(fp.point - x) : Vec2(fp.point - x);
      return d.norm() < opts.dedup;
    };
    auto it = std::find_if(out.points.begin(), out.points.end(), same);
    if (it == out.points.end())
      out.points.push_back({x, {i}});
    else
      it->converged_from.push_back(i);
  }
  std::sort(out.points.begin(), out.points.end(), [](const FixedPoint& a, const FixedPoint& b) {
    return std::pair(a.point.x(), a.point.y()) < std::pair(b.point.x(), b.point.y());
  });
  return out;
}

PeriodicOrbitReport find_periodic_orbits(const FlowModel& f, const Section& s,
                                         const std::vector<Vec2>& seeds, int k,
                                         const ReturnOptions& ropts, NewtonOptions nopts) {
  if (k < 1) throw Error("find_periodic_orbits needs k >= 1");
  nopts.torus = f.torus_fiber;
  const PlaneMap hol = [&](const Vec2& x) { return holonomy_power(f, s, x, k, nullptr, ropts); };
  const FixedPointSearch search = newton_fixed_points(hol, seeds, nopts);
  PeriodicOrbitReport rep;
  rep.non_converged = search.failures;
  for (const FixedPoint& fp : search.points) {
    PeriodicOrbit o;
    o.point = fp.point;
    o.k = k;
    o.converged_from = fp.converged_from;
    holonomy_power(f, s, fp.point, k, &o.return_times, ropts);
    for (double t : o.return_times) o.period += t;
    rep.orbits.push_back(std::move(o));
  }
  return rep;
}

std::vector<Vec2> torus_seeds(int n) {
  std::vector<Vec2> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.emplace_back((i + 0.5) / n, (j + 0.5) / n);
  return out;
}

std::vector<Vec2> disk_seeds(const Vec2& c, double r, int rings, int per_ring) {
  std::vector<Vec2> out{c};
  for (int i = 1; i <= rings; ++i) {
    const double rad = r * i / rings;
    for (int j = 0; j < per_ring; ++j) {
      const double a = kTwoPi * (j + 0.5 * (i % 2)) / per_ring;
      out.emplace_back(c.x() + rad * std::cos(a), c.y() + rad * std::sin(a));
    }
  }
  return out;
}

}  // namespace reebpa
