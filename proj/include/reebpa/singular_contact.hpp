#pragma once

// Contact forms on the tubular chart R/Z x D in coordinates (t, r, th),
// the flattening chart rho(t, r, th) = (t, g(r), th), and the smoothing
//   alpha_chi = rho^* alpha + chi(r) dth.

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reebpa/expr.hpp"

namespace reebpa {

using ChartPoint = Eigen::Vector3d;  // (t, r, th)
using Components = Eigen::Vector3d;  // coefficients of (dt, dr, dth)

inline constexpr double kDerivStep = 1e-4;

/// Entries of a 2-form w_tr dt^dr + w_tth dt^dth + w_rth dr^dth.
struct TwoForm {
  double tr = 0.0;
  double tth = 0.0;
  double rth = 0.0;
};

/// Density of alpha ^ d alpha against dt ^ dr ^ dth.
inline double contact_density(const Components& a, const TwoForm& w) {
  return a(0) * w.rth - a(1) * w.tth + a(2) * w.tr;
}

/// alpha = u dt + a dr + b dth with components in t, r, th.
struct ChartContactForm {
  std::string name;
  Expression u;
  Expression a;
  Expression b;
  std::optional<double> lipschitz;

  static ChartContactForm parse(std::string name, std::string_view u, std::string_view a,
                                std::string_view b, std::optional<double> lipschitz = {});

  Components at(const ChartPoint& p) const;
};

/// Catalogued forms: "std", "bp", "bp_pert", "bp_shear", "neg_axis".
ChartContactForm fixture(std::string_view name);
std::vector<std::string> fixture_names();

/// Flattening g_c(r) = r exp(1 - r^-c) on (0, 0.8], blended into the identity
/// over [0.8, 0.9] with a smooth step; g(r) = r beyond 0.9.
class SmoothingChart {
 public:
  static SmoothingChart identity() { return SmoothingChart(0.0); }
  static SmoothingChart flattening(double c);

  double c() const { return c_; }
  bool is_identity() const { return c_ == 0.0; }

  double g(double r) const;
  double dg(double r) const;
  ChartPoint rho(const ChartPoint& p) const { return {p(0), g(p(1)), p(2)}; }

 private:
  explicit SmoothingChart(double c) : c_(c) {}
  double c_;
};

/// chi(r) = A r^2 (1 - sigma((r - eps_in) / (1 - eps_out - eps_in))).
/// A quadratic profile drops the cutoff and is A r^2 everywhere.
class SmoothingFunction {
 public:
  SmoothingFunction(double amplitude, double eps_in, double eps_out);
  static SmoothingFunction standard() { return {0.1, 0.2, 0.1}; }
  static SmoothingFunction quadratic(double amplitude);
  static SmoothingFunction zero() { return quadratic(0.0); }

  SmoothingFunction scaled(double factor) const;

  double amplitude() const { return amplitude_; }
  double eps_in() const { return eps_in_; }
  double eps_out() const { return eps_out_; }
  bool is_quadratic() const { return quadratic_; }

  double chi(double r) const;
  double dchi(double r) const;
  /// max over r in [0, 1] of chi, sampled.
  double max_value() const;

 private:
  SmoothingFunction() = default;
  double amplitude_ = 0.0;
  double eps_in_ = 0.0;
  double eps_out_ = 0.0;
  bool quadratic_ = false;
};

/// rho^* alpha and rho^* d alpha at a point.
struct PulledBackJet {
  Components alpha;
  TwoForm d;
};

PulledBackJet pullback_jet(const ChartContactForm& form, const SmoothingChart& chart,
                           const ChartPoint& p, double h = kDerivStep);
Components pullback_components(const ChartContactForm& form, const SmoothingChart& chart,
                               const ChartPoint& p);

struct VolumeDecomposition {
  double G = 0.0;
  double H = 0.0;
  double density() const { return G + H; }
};

VolumeDecomposition volume_decomposition(const ChartContactForm& form,
                                         const SmoothingChart& chart,
                                         const SmoothingFunction& chi, const ChartPoint& p);

Components smoothed_form(const ChartContactForm& form, const SmoothingChart& chart,
                         const SmoothingFunction& chi, const ChartPoint& p);

/// The triple (form, chart, chi) as one object.
struct SmoothedForm {
  ChartContactForm form;
  SmoothingChart chart = SmoothingChart::identity();
  SmoothingFunction chi = SmoothingFunction::zero();

  Components operator()(const ChartPoint& p) const { return smoothed_form(form, chart, chi, p); }
};

/// R_chi = (F_t, F_r, F_th) / (G + H_chi). Throws NonContactPoint if G + H_chi <= 0.
Eigen::Vector3d reeb_vector(const ChartContactForm& form, const SmoothingChart& chart,
                            const SmoothingFunction& chi, const ChartPoint& p);

struct ReebField {
  Eigen::Vector3d R;
  double density = 0.0;
  double alpha_residual = 0.0;   // |alpha_chi(R) - 1|
  double dalpha_residual = 0.0;  // sup over coordinate slots of |d alpha_chi(R, .)|
};

/// Reeb field with residuals from an independent numeric derivative of alpha_chi.
ReebField reeb_field(const ChartContactForm& form, const SmoothingChart& chart,
                     const SmoothingFunction& chi, const ChartPoint& p);

using FormField = std::function<Components(const ChartPoint&)>;

/// Numeric exterior derivative; the r stencil shrinks near the axis.
TwoForm exterior_derivative(const FormField& alpha, const ChartPoint& p, double h = kDerivStep);

struct GridSpec {
  int nt = 16;
  int nr = 16;
  int nth = 16;
  double r_min = 0.05;
  double r_max = 1.0;
  double delta = 0.1;        // verify_contact: main grid r >= delta, axis grid r < delta
  double axis_r_min = 1e-3;
  int n_axis = 8;
};

/// t in [0, 1), r in [r_min, r_max] (endpoints included), th in [0, 2 pi).
std::vector<ChartPoint> grid_points(const GridSpec& grid);

struct GridCell {
  ChartPoint p;
  double value = 0.0;
};

struct ContactReport {
  double min_density = 0.0;
  ChartPoint argmin = ChartPoint::Zero();
  double axis_slope = 0.0;
  bool pass = false;
  std::size_t failing_count = 0;
  std::vector<GridCell> failing;  // first kMaxListedCells offenders in grid order
  std::optional<double> residual_sup;
  std::size_t samples = 0;
};

inline constexpr std::size_t kMaxListedCells = 64;

ContactReport verify_contact(const ChartContactForm& form, const SmoothingChart& chart,
                             const SmoothingFunction& chi, const GridSpec& grid,
                             bool with_residuals = false);

struct EpsilonCertificate {
  double epsilon = 0.0;
  int ladder_step = 0;  // epsilon = 2^-ladder_step
  ContactReport report;
};

EpsilonCertificate find_epsilon(const ChartContactForm& form, const SmoothingChart& chart,
                                const SmoothingFunction& profile, const GridSpec& grid);

struct VolumeInequalityReport {
  bool pass = false;
  double C = 0.0;
  double worst_margin = 0.0;  // min over samples of (G + H) - C G
  std::size_t violation_count = 0;
  std::vector<GridCell> violations;
};

VolumeInequalityReport volume_inequality_check(const ChartContactForm& form,
                                               const SmoothingChart& chart,
                                               const SmoothingFunction& chi, double C,
                                               const GridSpec& grid);

/// Integral of alpha over the circle r = eps in the disk t = t0 (256 nodes).
double annulus_flux(const ChartContactForm& form, double t0, double eps);

struct FluxFit {
  std::vector<double> eps;
  std::vector<double> flux;
  double exponent = 0.0;  // least-squares slope of log|flux| against log eps
};

FluxFit flux_exponent(const ChartContactForm& form, double t0, const std::vector<double>& eps);

struct WhitneyDistance {
  double form = 0.0;
  double dform = 0.0;
};

WhitneyDistance whitney_distance(const FormField& f1, const FormField& f2, const GridSpec& grid);

/// max over the grid of 4 |th-component of the Reeb field of rho^* alpha|.
double gray_bound(const ChartContactForm& form, const SmoothingChart& chart, const GridSpec& grid);

/// Max of componentwise difference quotients of the Cartesian components
/// (alpha_t, alpha_x, alpha_y) between neighbouring samples of a square grid.
double estimate_lipschitz(const ChartContactForm& form, int n = 24);

}  // namespace reebpa
