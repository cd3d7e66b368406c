#include "reebpa/singular_contact.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "reebpa/parallel.hpp"
#include "reebpa/smooth_step.hpp"

namespace reebpa {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSpliceStart = 0.8;
constexpr double kSpliceWidth = 0.1;

Binding chart_binding(const ChartPoint& q) {
  Binding b;
  b.set(Var::t, q(0)).set(Var::r, q(1)).set(Var::th, q(2));
  return b;
}

// num_deriv, retrying the r stencil inside the half line r > 0 when it leaves
// the domain of the expression.
double partial(const Expression& e, Var v, const Binding& b, double h) {
  try {
    return num_deriv(e, v, b, h);
  } catch (const DomainError&) {
    const double r = b.get(Var::r);
    if (v != Var::r || !(r > 0.0) || h <= 0.25 * r) throw;
    return num_deriv(e, v, b, 0.25 * r);
  }
}

// Partial derivative of a vector-valued field along coordinate i.
Components field_partial(const FormField& f, const ChartPoint& p, int i, double h) {
  auto at = [&](double s) {
    ChartPoint q = p;
    q(i) += s;
    return f(q);
  };
  const Components d_full = (at(h) - at(-h)) / (2.0 * h);
  const double half = 0.5 * h;
  const Components d_half = (at(half) - at(-half)) / (2.0 * half);
  return (4.0 * d_half - d_full) / 3.0;
}

double sup_norm(const Components& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

ChartContactForm ChartContactForm::parse(std::string name, std::string_view u, std::string_view a,
                                         std::string_view b, std::optional<double> lipschitz) {
  return {std::move(name), reebpa::parse(u), reebpa::parse(a), reebpa::parse(b), lipschitz};
}

Components ChartContactForm::at(const ChartPoint& p) const {
  const Binding bind = chart_binding(p);
  return {u.eval(bind), a.eval(bind), b.eval(bind)};
}

SmoothingChart SmoothingChart::flattening(double c) {
  if (!(c > 0.0)) throw Error("flattening exponent c must be positive");
  return SmoothingChart(c);
}

double SmoothingChart::g(double r) const {
  if (r < 0.0) return -g(-r);
  if (is_identity() || r >= kSpliceStart + kSpliceWidth) return r;
  if (r == 0.0) return 0.0;
  const double gc = r * std::exp(1.0 - std::pow(r, -c_));
  const double sigma = smooth_step((r - kSpliceStart) / kSpliceWidth);
  return (1.0 - sigma) * gc + sigma * r;
}

double SmoothingChart::dg(double r) const {
  if (r < 0.0) return dg(-r);
  if (is_identity() || r >= kSpliceStart + kSpliceWidth) return 1.0;
  if (r == 0.0) return 0.0;
  const double rc = std::pow(r, -c_);
  const double e = std::exp(1.0 - rc);
  const double gc = r * e;
  const double dgc = e * (1.0 + c_ * rc);
  const double s = (r - kSpliceStart) / kSpliceWidth;
  const double sigma = smooth_step(s);
  const double dsigma = smooth_step_derivative(s) / kSpliceWidth;
  return (1.0 - sigma) * dgc + sigma + dsigma * (r - gc);
}

SmoothingFunction::SmoothingFunction(double amplitude, double eps_in, double eps_out)
    : amplitude_(amplitude), eps_in_(eps_in), eps_out_(eps_out) {
  if (!(amplitude >= 0.0)) throw Error("smoothing amplitude must be non-negative");
  if (!(eps_in > 0.0) || !(eps_out >= 0.0) || !(eps_in + eps_out < 1.0))
    throw Error("smoothing radii need eps_in > 0, eps_out >= 0, eps_in + eps_out < 1");
}

SmoothingFunction SmoothingFunction::quadratic(double amplitude) {
  if (!(amplitude >= 0.0)) throw Error("smoothing amplitude must be non-negative");
  SmoothingFunction f;
  f.amplitude_ = amplitude;
  f.quadratic_ = true;
  return f;
}

SmoothingFunction SmoothingFunction::scaled(double factor) const {
  SmoothingFunction f = *this;
  f.amplitude_ *= factor;
  return f;
}

double SmoothingFunction::chi(double r) const {
  const double core = amplitude_ * r * r;
  if (quadratic_) return core;
  const double width = 1.0 - eps_out_ - eps_in_;
  return core * (1.0 - smooth_step((r - eps_in_) / width));
}

double SmoothingFunction::dchi(double r) const {
  if (quadratic_) return 2.0 * amplitude_ * r;
  const double width = 1.0 - eps_out_ - eps_in_;
  const double s = (r - eps_in_) / width;
  return 2.0 * amplitude_ * r * (1.0 - smooth_step(s)) -
         amplitude_ * r * r * smooth_step_derivative(s) / width;
}

double SmoothingFunction::max_value() const {
  double best = 0.0;
  for (int i = 0; i <= 4000; ++i) best = std::max(best, chi(i / 4000.0));
  return best;
}

PulledBackJet pullback_jet(const ChartContactForm& form, const SmoothingChart& chart,
                           const ChartPoint& p, double h) {
  const ChartPoint q = chart.rho(p);
  const Binding b = chart_binding(q);
  const double u = form.u.eval(b);
  const double a = form.a.eval(b);
  const double bb = form.b.eval(b);
  const double w_tr = partial(form.a, Var::t, b, h) - partial(form.u, Var::r, b, h);
  const double w_tth = partial(form.b, Var::t, b, h) - partial(form.u, Var::th, b, h);
  const double w_rth = partial(form.b, Var::r, b, h) - partial(form.a, Var::th, b, h);
  const double gp = chart.dg(p(1));
  return {Components(u, gp * a, bb), TwoForm{gp * w_tr, w_tth, gp * w_rth}};
}

Components pullback_components(const ChartContactForm& form, const SmoothingChart& chart,
                               const ChartPoint& p) {
  Components c = form.at(chart.rho(p));
  c(1) *= chart.dg(p(1));
  return c;
}

VolumeDecomposition volume_decomposition(const ChartContactForm& form,
                                         const SmoothingChart& chart,
                                         const SmoothingFunction& chi, const ChartPoint& p) {
  const PulledBackJet jet = pullback_jet(form, chart, p);
  const double r = p(1);
  return {contact_density(jet.alpha, jet.d), chi.dchi(r) * jet.alpha(0) + chi.chi(r) * jet.d.tr};
}

Components smoothed_form(const ChartContactForm& form, const SmoothingChart& chart,
                         const SmoothingFunction& chi, const ChartPoint& p) {
  Components c = pullback_components(form, chart, p);
  c(2) += chi.chi(p(1));
  return c;
}

Eigen::Vector3d reeb_vector(const ChartContactForm& form, const SmoothingChart& chart,
                            const SmoothingFunction& chi, const ChartPoint& p) {
  const PulledBackJet jet = pullback_jet(form, chart, p);
  const double r = p(1);
  const double c = chi.chi(r);
  const double dc = chi.dchi(r);
  const double density = contact_density(jet.alpha, jet.d) + dc * jet.alpha(0) + c * jet.d.tr;
  if (!(density > 0.0))
    throw NonContactPoint("alpha_chi ^ d alpha_chi = " + std::to_string(density) + " at r = " +
                          std::to_string(r));
  return Eigen::Vector3d(jet.d.rth + dc, -jet.d.tth, jet.d.tr) / density;
}

ReebField reeb_field(const ChartContactForm& form, const SmoothingChart& chart,
                     const SmoothingFunction& chi, const ChartPoint& p) {
  ReebField out;
  out.R = reeb_vector(form, chart, chi, p);
  out.density = volume_decomposition(form, chart, chi, p).density();

  const SmoothedForm sf{form, chart, chi};
  const Components alpha = sf(p);
  out.alpha_residual = std::abs(alpha.dot(out.R) - 1.0);

  const TwoForm w = exterior_derivative(sf, p);
  const Eigen::Vector3d& R = out.R;
  const Components contraction(-R(1) * w.tr - R(2) * w.tth, R(0) * w.tr - R(2) * w.rth,
                               R(0) * w.tth + R(1) * w.rth);
  out.dalpha_residual = sup_norm(contraction);
  return out;
}

TwoForm exterior_derivative(const FormField& alpha, const ChartPoint& p, double h) {
  double hr = h;
  if (p(1) > 0.0 && p(1) < 2.0 * h) hr = 0.5 * p(1);
  const Components d_t = field_partial(alpha, p, 0, h);
  const Components d_r = field_partial(alpha, p, 1, hr);
  const Components d_th = field_partial(alpha, p, 2, h);
  return {d_t(1) - d_r(0), d_t(2) - d_th(0), d_r(2) - d_th(1)};
}

std::vector<ChartPoint> grid_points(const GridSpec& grid) {
  if (grid.nt < 1 || grid.nr < 2 || grid.nth < 1) throw Error("grid needs nt >= 1, nr >= 2, nth >= 1");
  std::vector<ChartPoint> pts;
  pts.reserve(static_cast<std::size_t>(grid.nt) * grid.nr * grid.nth);
  for (int i = 0; i < grid.nt; ++i)
    for (int j = 0; j < grid.nr; ++j)
      for (int k = 0; k < grid.nth; ++k)
        pts.emplace_back(double(i) / grid.nt,
                         grid.r_min + (grid.r_max - grid.r_min) * j / (grid.nr - 1),
                         kTwoPi * k / grid.nth);
  return pts;
}

namespace {

std::vector<ChartPoint> axis_points(const GridSpec& grid) {
  std::vector<ChartPoint> pts;
  const double ratio = grid.delta / grid.axis_r_min;
  for (int i = 0; i < grid.nt; ++i)
    for (int j = 0; j < grid.n_axis; ++j)
      for (int k = 0; k < grid.nth; ++k)
        pts.emplace_back(double(i) / grid.nt,
                         grid.axis_r_min * std::pow(ratio, double(j) / grid.n_axis),
                         kTwoPi * k / grid.nth);
  return pts;
}

void check_grid(const GridSpec& grid) {
  if (grid.nt < 8 || grid.nr < 8 || grid.nth < 8)
    throw Error("verification grid needs at least 8 samples per axis");
  if (!(grid.axis_r_min > 0.0 && grid.axis_r_min < grid.delta && grid.delta < grid.r_max))
    throw Error("grid radii need 0 < axis_r_min < delta < r_max");
}

}  // namespace

ContactReport verify_contact(const ChartContactForm& form, const SmoothingChart& chart,
                             const SmoothingFunction& chi, const GridSpec& grid,
                             bool with_residuals) {
  check_grid(grid);
  GridSpec main = grid;
  main.r_min = std::max(grid.r_min, grid.delta);
  const std::vector<ChartPoint> pts = grid_points(main);
  const auto dens = parallel_map<double>(pts.size(), [&](std::size_t i) {
    return volume_decomposition(form, chart, chi, pts[i]).density();
  });

  ContactReport rep;
  rep.samples = pts.size();
  rep.min_density = dens.empty() ? 0.0 : dens[0];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (dens[i] < rep.min_density || i == 0) {
      rep.min_density = dens[i];
      rep.argmin = pts[i];
    }
    if (!(dens[i] > 0.0)) {
      ++rep.failing_count;
      if (rep.failing.size() < kMaxListedCells) rep.failing.push_back({pts[i], dens[i]});
    }
  }

  const std::vector<ChartPoint> axis = axis_points(grid);
  const auto slopes = parallel_map<double>(axis.size(), [&](std::size_t i) {
    return volume_decomposition(form, chart, chi, axis[i]).density() / axis[i](1);
  });
  rep.samples += axis.size();
  rep.axis_slope = slopes.empty() ? 0.0 : *std::min_element(slopes.begin(), slopes.end());
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!(slopes[i] > 0.0)) {
      ++rep.failing_count;
      if (rep.failing.size() < kMaxListedCells)
        rep.failing.push_back({axis[i], slopes[i] * axis[i](1)});
    }
  }
  rep.pass = rep.failing_count == 0 && rep.min_density > 0.0 && rep.axis_slope > 0.0;

  if (with_residuals && rep.pass) {
    const auto res = parallel_map<double>(pts.size(), [&](std::size_t i) {
      const ReebField rf = reeb_field(form, chart, chi, pts[i]);
      return std::max(rf.alpha_residual, rf.dalpha_residual);
    });
    rep.residual_sup = *std::max_element(res.begin(), res.end());
  }
  return rep;
}

EpsilonCertificate find_epsilon(const ChartContactForm& form, const SmoothingChart& chart,
                                const SmoothingFunction& profile, const GridSpec& grid) {
  for (int i = 1; i <= 40; ++i) {
    const double eps = std::ldexp(1.0, -i);
    ContactReport rep = verify_contact(form, chart, profile.scaled(eps), grid);
    if (rep.pass) return {eps, i, std::move(rep)};
  }
  throw NoEpsilonFound("no epsilon in 2^-1 .. 2^-40 makes " + form.name + " contact");
}

VolumeInequalityReport volume_inequality_check(const ChartContactForm& form,
                                               const SmoothingChart& chart,
                                               const SmoothingFunction& chi, double C,
                                               const GridSpec& grid) {
  if (!(C > 0.0 && C < 1.0)) throw Error("volume inequality constant must lie in (0, 1)");
  const std::vector<ChartPoint> pts = grid_points(grid);
  const auto margins = parallel_map<double>(pts.size(), [&](std::size_t i) {
    const VolumeDecomposition v = volume_decomposition(form, chart, chi, pts[i]);
    return v.density() - C * v.G;
  });
  VolumeInequalityReport rep;
  rep.C = C;
  rep.worst_margin = margins.empty() ? 0.0 : *std::min_element(margins.begin(), margins.end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (margins[i] < 0.0) {
      ++rep.violation_count;
      if (rep.violations.size() < kMaxListedCells) rep.violations.push_back({pts[i], margins[i]});
    }
  }
  rep.pass = rep.violation_count == 0;
  return rep;
}

double annulus_flux(const ChartContactForm& form, double t0, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error("annulus radius must lie in (0, 1)");
  constexpr int kNodes = 256;
  double sum = 0.0;
  for (int i = 0; i < kNodes; ++i) sum += form.at({t0, eps, kTwoPi * i / kNodes})(2);
  return sum * kTwoPi / kNodes;
}

FluxFit flux_exponent(const ChartContactForm& form, double t0, const std::vector<double>& eps) {
  if (eps.size() < 2) throw Error("flux fit needs at least two radii");
  FluxFit fit;
  fit.eps = eps;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double e : eps) {
    const double f = annulus_flux(form, t0, e);
    fit.flux.push_back(f);
    if (f == 0.0) throw DomainError("zero flux has no log-log exponent");
    const double x = std::log(e);
    const double y = std::log(std::abs(f));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(eps.size());
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

WhitneyDistance whitney_distance(const FormField& f1, const FormField& f2, const GridSpec& grid) {
  const std::vector<ChartPoint> pts = grid_points(grid);
  const auto vals = parallel_map<std::array<double, 2>>(pts.size(), [&](std::size_t i) {
    const TwoForm w1 = exterior_derivative(f1, pts[i]);
    const TwoForm w2 = exterior_derivative(f2, pts[i]);
    const double dw = std::max({std::abs(w1.tr - w2.tr), std::abs(w1.tth - w2.tth),
                                std::abs(w1.rth - w2.rth)});
    return std::array<double, 2>{sup_norm(f1(pts[i]) - f2(pts[i])), dw};
  });
  WhitneyDistance d;
  for (const auto& v : vals) {
    d.form = std::max(d.form, v[0]);
    d.dform = std::max(d.dform, v[1]);
  }
  return d;
}

double gray_bound(const ChartContactForm& form, const SmoothingChart& chart, const GridSpec& grid) {
  const std::vector<ChartPoint> pts = grid_points(grid);
  const SmoothingFunction none = SmoothingFunction::zero();
  const auto vals = parallel_map<double>(pts.size(), [&](std::size_t i) {
    return 4.0 * std::abs(reeb_vector(form, chart, none, pts[i])(2));
  });
  return vals.empty() ? 0.0 : *std::max_element(vals.begin(), vals.end());
}

double estimate_lipschitz(const ChartContactForm& form, int n) {
  if (n < 4) throw Error("lipschitz estimate needs n >= 4");
  const double hstep = 2.0 / (n - 1);
  auto cartesian = [&](double t, double x, double y) -> std::optional<Components> {
    const double r = std::hypot(x, y);
    if (r > 1.0 || r < 1e-12) return std::nullopt;
    const double th = std::atan2(y, x);
    const Components c = form.at({t, r, th < 0.0 ? th + kTwoPi : th});
    return Components(c(0), c(1) * x / r - c(2) * y / (r * r), c(1) * y / r + c(2) * x / (r * r));
  };
  double lip = 0.0;
  for (int it = 0; it < 8; ++it) {
    const double t = it / 8.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double x = -1.0 + i * hstep;
        const double y = -1.0 + j * hstep;
        const auto c0 = cartesian(t, x, y);
        if (!c0) continue;
        for (const auto& [dx, dy] : {std::pair{hstep, 0.0}, std::pair{0.0, hstep}}) {
          if (const auto c1 = cartesian(t, x + dx, y + dy))
            lip = std::max(lip, sup_norm(*c1 - *c0) / hstep);
        }
        if (const auto c1 = cartesian(t + 1.0 / 8.0, x, y))
          lip = std::max(lip, sup_norm(*c1 - *c0) * 8.0);
      }
  }
  return lip;
}

}  // namespace reebpa
