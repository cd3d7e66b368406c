#include "reebpa/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "reebpa/chain.hpp"
#include "reebpa/census.hpp"
#include "reebpa/errors.hpp"
#include "reebpa/flow.hpp"
#include "reebpa/lefschetz.hpp"
#include "reebpa/local_models.hpp"
#include "reebpa/parallel.hpp"
#include "reebpa/singular_contact.hpp"
#include "reebpa/tracking.hpp"

#ifndef REEBPA_VERSION
#define REEBPA_VERSION "0.0.0"
#endif

namespace reebpa {

using nlohmann::json;

namespace {

// Typed access to one JSON object that remembers which keys were read, so
// anything left over can be rejected with its pointer.
class Reader {
 public:
  Reader(const json& j, std::string pointer) : j_(j), pointer_(std::move(pointer)) {
    if (!j_.is_object()) throw ConfigError(pointer_.empty() ? "/" : pointer_, "expected an object");
  }

  std::string path(const std::string& key) const { return pointer_ + "/" + key; }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path(key), "missing required key");
    return j_.at(key);
  }

  template <class T>
  T require(const std::string& key) {
    return convert<T>(raw(key), path(key));
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    return has(key) ? convert<T>(j_.at(key), path(key)) : fallback;
  }

  Reader child(const std::string& key) { return Reader(raw(key), path(key)); }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) throw ConfigError(path(key), "unknown key");
  }

  template <class T>
  static T convert(const json& v, const std::string& where) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where, "expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(where, "expected an integer");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where, "expected a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where, "expected a string");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where, e.what());
    }
  }

 private:
  const json& j_;
  std::string pointer_;
  std::set<std::string> used_;
};

Vec2 read_vec2(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(where, "expected [x, y]");
  return {Reader::convert<double>(v[0], where + "/0"), Reader::convert<double>(v[1], where + "/1")};
}

std::vector<Vec2> read_points(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where, "expected an array of points");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_vec2(v[i], where + "/" + std::to_string(i)));
  return out;
}

Eigen::Matrix2d read_real_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(where, "expected [[a, b], [c, d]]");
  Eigen::Matrix2d m;
  for (int i = 0; i < 2; ++i) {
    const Vec2 row = read_vec2(v[static_cast<std::size_t>(i)], where + "/" + std::to_string(i));
    m.row(i) = row.transpose();
  }
  return m;
}

IntMatrix2 read_int_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(where, "expected [[a, b], [c, d]]");
  IntMatrix2 m;
  for (std::size_t i = 0; i < 2; ++i) {
    const std::string row = where + "/" + std::to_string(i);
    if (!v[i].is_array() || v[i].size() != 2) throw ConfigError(row, "expected [a, b]");
    for (std::size_t j = 0; j < 2; ++j)
      m(static_cast<int>(i), static_cast<int>(j)) = Reader::convert<std::int64_t>(v[i][j], row + "/" + std::to_string(j));
  }
  return m;
}

json to_json(const Vec2& p) { return json::array({p.x(), p.y()}); }
json to_json(const Eigen::Vector3d& p) { return json::array({p(0), p(1), p(2)}); }

json to_json(const HomotopyClassKey& k) {
  return {{"substrate", k.substrate}, {"k", k.k}, {"a", k.a}, {"b", k.b}, {"label", k.to_string()}};
}

json to_json(const OrbitRecord& r) {
  return {{"period", r.period},
          {"level", r.level},
          {"multiplicity", r.multiplicity},
          {"type", r.type.name()},
          {"primitive_type", r.primitive_type.name()},
          {"class", r.key.to_string()},
          {"root", r.root.to_string()},
          {"lefschetz", r.lefschetz},
          {"grading", r.grading},
          {"good", r.good},
          {"point", to_json(r.point)}};
}

json to_json(const ContactReport& r) {
  json failing = json::array();
  for (const auto& c : r.failing) failing.push_back({{"point", to_json(c.p)}, {"density", c.value}});
  json out = {{"pass", r.pass},
              {"min_density", r.min_density},
              {"argmin", to_json(r.argmin)},
              {"axis_slope", r.axis_slope},
              {"failing_count", r.failing_count},
              {"failing", failing},
              {"samples", r.samples}};
  out["residual_sup"] = r.residual_sup ? json(*r.residual_sup) : json(nullptr);
  return out;
}

// Form, chart and profile blocks shared by smooth, verify and track.
struct FormSpec {
  ChartContactForm form;
  SmoothingChart chart = SmoothingChart::flattening(1.0);
  SmoothingFunction profile = SmoothingFunction::standard();
  std::optional<double> epsilon = 1.0;  // empty means search the ladder
};

ChartContactForm read_form(Reader& r) {
  if (r.has("fixture")) {
    if (r.has("form")) throw ConfigError(r.path("form"), "give either fixture or form");
    const auto name = r.require<std::string>("fixture");
    try {
      return fixture(name);
    } catch (const Error& e) {
      throw ConfigError(r.path("fixture"), e.what());
    }
  }
  Reader f = r.child("form");
  const auto u = f.require<std::string>("u");
  const auto a = f.require<std::string>("a");
  const auto b = f.require<std::string>("b");
  const auto name = f.get<std::string>("name", "user");
  const bool has_lip = f.has("lipschitz");
  const double lip = has_lip ? f.require<double>("lipschitz") : 0.0;
  f.finish();
  try {
    ChartContactForm out = ChartContactForm::parse(name, u, a, b);
    if (has_lip) out.lipschitz = lip;
    return out;
  } catch (const ParseError& e) {
    throw ConfigError(r.path("form"), e.what());
  }
}

FormSpec read_form_spec(Reader& r) {
  FormSpec s;
  s.form = read_form(r);
  if (r.has("chart")) {
    Reader c = r.child("chart");
    const double gc = c.get<double>("g_c", 1.0);
    c.finish();
    if (gc < 0.0) throw ConfigError(c.path("g_c"), "must be >= 0");
    s.chart = gc == 0.0 ? SmoothingChart::identity() : SmoothingChart::flattening(gc);
  }
  if (r.has("chi")) {
    Reader c = r.child("chi");
    const double A = c.get<double>("A", 0.1);
    const double ein = c.get<double>("eps_in", 0.2);
    const double eout = c.get<double>("eps_out", 0.1);
    c.finish();
    try {
      s.profile = SmoothingFunction(A, ein, eout);
    } catch (const Error& e) {
      throw ConfigError(r.path("chi"), e.what());
    }
  }
  if (r.has("epsilon")) {
    const json& e = r.raw("epsilon");
    if (e.is_string() && e.get<std::string>() == "auto") s.epsilon.reset();
    else s.epsilon = Reader::convert<double>(e, r.path("epsilon"));
  }
  return s;
}

GridSpec read_grid(Reader& r) {
  GridSpec g;
  if (!r.has("grid")) return g;
  Reader c = r.child("grid");
  g.nt = c.get<int>("nt", g.nt);
  g.nr = c.get<int>("nr", g.nr);
  g.nth = c.get<int>("nth", g.nth);
  g.r_min = c.get<double>("r_min", g.r_min);
  g.r_max = c.get<double>("r_max", g.r_max);
  g.delta = c.get<double>("delta", g.delta);
  g.axis_r_min = c.get<double>("axis_r_min", g.axis_r_min);
  g.n_axis = c.get<int>("n_axis", g.n_axis);
  c.finish();
  return g;
}

StandardPAMap read_pa(Reader& r) {
  const int n = r.require<int>("n");
  const int k = r.get<int>("k", 0);
  const double lambda = r.get<double>("lambda", 2.0);
  try {
    return StandardPAMap(n, k, lambda);
  } catch (const Error& e) {
    throw ConfigError(r.path("n"), e.what());
  }
}

TorusAutomorphism read_torus(Reader& r) {
  const IntMatrix2 m = read_int_matrix(r.raw("matrix"), r.path("matrix"));
  try {
    return TorusAutomorphism(m);
  } catch (const Error& e) {
    throw ConfigError(r.path("matrix"), e.what());
  }
}

std::optional<PlaneMap> read_monodromy(Reader& r, bool default_pa) {
  if (!r.has("monodromy")) {
    if (!default_pa) return std::nullopt;
    const StandardPAMap pa(4, 0, 2.0);
    return PlaneMap([pa](const Vec2& p) { return pa(p); });
  }
  Reader m = r.child("monodromy");
  const StandardPAMap pa = read_pa(m);
  m.finish();
  return PlaneMap([pa](const Vec2& p) { return pa(p); });
}

// "model" block for commands that integrate a flow.
FlowModel read_flow_model(Reader& r) {
  const auto kind = r.require<std::string>("model");
  if (kind == "standard_pa") return suspension_model(SuspensionFlow(read_pa(r)));
  if (kind == "torus_aut" || kind == "torus") return suspension_model(SuspensionFlow(read_torus(r)));
  if (kind == "torsion") return torsion_model();
  if (kind == "reeb") {
    FormSpec s = read_form_spec(r);
    if (!s.epsilon) throw ConfigError(r.path("epsilon"), "a flow model needs a numeric epsilon");
    FlowModel f = chart_reeb_model(s.form, s.chart, s.profile.scaled(*s.epsilon));
    if (auto m = read_monodromy(r, true)) f = with_monodromy(std::move(f), *m);
    return f;
  }
  if (kind == "user") {
    const json& field = r.raw("field");
    if (!field.is_array() || field.size() != 3) throw ConfigError(r.path("field"), "expected [ft, fx, fy]");
    std::vector<Expression> e;
    for (std::size_t i = 0; i < 3; ++i) {
      const std::string where = r.path("field") + "/" + std::to_string(i);
      try {
        e.push_back(parse(Reader::convert<std::string>(field[i], where)));
      } catch (const ParseError& err) {
        throw ConfigError(where, err.what());
      }
    }
    FlowModel f = user_model(e[0], e[1], e[2]);
    if (auto m = read_monodromy(r, false)) f = with_monodromy(std::move(f), *m);
    return f;
  }
  throw ConfigError(r.path("model"), "unknown model '" + kind + "'");
}

struct SectionSpec {
  double t0 = 0.0;
  double r_max = 0.8;
  double r_P = 0.3;
  Vec2 center = Vec2::Zero();
};

SectionSpec read_section(Reader& r) {
  SectionSpec s;
  if (!r.has("section")) return s;
  Reader c = r.child("section");
  s.t0 = c.get<double>("t0", s.t0);
  s.r_max = c.get<double>("r_max", s.r_max);
  s.r_P = c.get<double>("r_P", s.r_P);
  if (c.has("center")) s.center = read_vec2(c.raw("center"), c.path("center"));
  c.finish();
  return s;
}

// Each handler reads its whole config before computing anything, so a bad key
// never costs a run.

CliResult cmd_model(Reader& r) {
  const auto kind = r.require<std::string>("model");
  std::vector<Vec2> points{{0.5, 0.0}, {0.0, 0.5}, {-0.3, 0.2}};
  if (r.has("points")) points = read_points(r.raw("points"), r.path("points"));
  const bool has_time = r.has("time");
  const double T = has_time ? r.require<double>("time") : 0.0;
  json result = {{"model", kind}};
  json images = json::array();

  if (kind == "standard_pa") {
    const StandardPAMap pa = read_pa(r);
    r.finish();
    result["n"] = pa.prongs();
    result["k"] = pa.rotation();
    result["lambda"] = pa.stretch();
    for (const Vec2& p : points) {
      const Polar q = to_polar(p);
      images.push_back({{"point", to_json(p)},
                        {"sector", pa.sector(q.theta)},
                        {"image", to_json(pa(p))},
                        {"inverse", to_json(pa.inverse(p))}});
    }
    if (has_time) {
      const SuspensionFlow s(pa);
      json flowed = json::array();
      for (const Vec2& p : points) {
        const auto st = s.flow({0.0, p}, T);
        flowed.push_back({{"s", st.s}, {"p", to_json(st.p)}});
      }
      result["flow"] = flowed;
    }
  } else if (kind == "torus_aut" || kind == "torus") {
    const TorusAutomorphism A = read_torus(r);
    const int kmax = r.get<int>("kmax", 5);
    r.finish();
    result["trace"] = A.trace();
    result["det"] = A.det();
    result["stretch"] = A.stretch();
    result["log_stretch"] = std::log(A.stretch());
    json counts = json::array();
    for (int k = 1; k <= kmax; ++k) counts.push_back(count_fixed_points(A, k));
    result["fixed_point_counts"] = counts;
    for (const Vec2& p : points)
      images.push_back({{"point", to_json(p)}, {"image", to_json(A(p))}, {"inverse", to_json(A.inverse(p))}});
    if (has_time) {
      const SuspensionFlow s(A);
      json flowed = json::array();
      for (const Vec2& p : points) {
        const auto st = s.flow({0.0, p}, T);
        flowed.push_back({{"s", st.s}, {"p", to_json(st.p)}});
      }
      result["flow"] = flowed;
    }
  } else {
    throw ConfigError(r.path("model"), "model must be standard_pa or torus_aut");
  }
  result["points"] = images;
  return {exit_pass, result, {}};
}

CliResult cmd_smooth(Reader& r) {
  FormSpec s = read_form_spec(r);
  std::vector<ChartPoint> points{{0.0, 0.5, 0.0}, {0.25, 0.3, 1.0}, {0.5, 0.05, 2.0}};
  if (r.has("points")) {
    const json& v = r.raw("points");
    if (!v.is_array()) throw ConfigError(r.path("points"), "expected an array of [t, r, th]");
    points.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string where = r.path("points") + "/" + std::to_string(i);
      if (!v[i].is_array() || v[i].size() != 3) throw ConfigError(where, "expected [t, r, th]");
      points.emplace_back(Reader::convert<double>(v[i][0], where + "/0"), Reader::convert<double>(v[i][1], where + "/1"),
                          Reader::convert<double>(v[i][2], where + "/2"));
    }
  }
  const bool want_gray = r.get<bool>("gray_bound", false);
  const GridSpec grid = read_grid(r);
  r.finish();
  if (!s.epsilon) throw ConfigError("/epsilon", "smooth needs a numeric epsilon");
  const SmoothingFunction chi = s.profile.scaled(*s.epsilon);

  json rows = json::array();
  for (const auto& p : points) {
    json row = {{"point", to_json(p)},
                {"pullback", to_json(pullback_components(s.form, s.chart, p))},
                {"smoothed", to_json(smoothed_form(s.form, s.chart, chi, p))}};
    const VolumeDecomposition v = volume_decomposition(s.form, s.chart, chi, p);
    row["G"] = v.G;
    row["H"] = v.H;
    try {
      const ReebField rf = reeb_field(s.form, s.chart, chi, p);
      row["reeb"] = to_json(rf.R);
      row["alpha_residual"] = rf.alpha_residual;
      row["dalpha_residual"] = rf.dalpha_residual;
    } catch (const NonContactPoint& e) {
      row["reeb"] = nullptr;
      row["error"] = e.what();
    }
    rows.push_back(row);
  }
  json result = {{"form", s.form.name}, {"g_c", s.chart.c()}, {"epsilon", *s.epsilon},
                 {"chi_max", chi.max_value()}, {"points", rows}};
  if (want_gray) result["gray_bound"] = gray_bound(s.form, s.chart, grid);
  return {exit_pass, result, {}};
}

CliResult cmd_verify(Reader& r) {
  FormSpec s = read_form_spec(r);
  const GridSpec grid = read_grid(r);
  const bool residuals = r.get<bool>("residuals", false);
  const bool has_C = r.has("volume_C");
  const double C = has_C ? r.require<double>("volume_C") : 0.0;
  std::vector<double> flux_eps;
  if (r.has("flux_eps")) flux_eps = Reader::convert<std::vector<double>>(r.raw("flux_eps"), r.path("flux_eps"));
  r.finish();

  json result = {{"form", s.form.name}, {"g_c", s.chart.c()}};
  double eps = 0.0;
  bool pass = true;
  if (s.epsilon) {
    eps = *s.epsilon;
  } else {
    try {
      const EpsilonCertificate cert = find_epsilon(s.form, s.chart, s.profile, grid);
      eps = cert.epsilon;
      result["ladder_step"] = cert.ladder_step;
    } catch (const NoEpsilonFound& e) {
      result["epsilon"] = nullptr;
      result["pass"] = false;
      result["error"] = e.what();
      // Offending cells at the top of the ladder.
      result["contact"] = to_json(verify_contact(s.form, s.chart, s.profile.scaled(0.5), grid));
      return {exit_certified_fail, result, {}};
    }
  }
  result["epsilon"] = eps;
  const SmoothingFunction chi = s.profile.scaled(eps);
  const ContactReport rep = verify_contact(s.form, s.chart, chi, grid, residuals);
  result["contact"] = to_json(rep);
  pass = rep.pass;
  if (has_C) {
    const VolumeInequalityReport v = volume_inequality_check(s.form, s.chart, chi, C, grid);
    json viol = json::array();
    for (const auto& c : v.violations) viol.push_back({{"point", to_json(c.p)}, {"margin", c.value}});
    result["volume"] = {{"pass", v.pass}, {"C", v.C}, {"worst_margin", v.worst_margin},
                        {"violation_count", v.violation_count}, {"violations", viol}};
    pass = pass && v.pass;
  }
  if (!flux_eps.empty()) {
    const FluxFit fit = flux_exponent(s.form, 0.0, flux_eps);
    result["flux"] = {{"eps", fit.eps}, {"flux", fit.flux}, {"exponent", fit.exponent}};
  }
  result["pass"] = pass;
  return {pass ? exit_pass : exit_certified_fail, result, {}};
}

CliResult cmd_orbits(Reader& r) {
  const FlowModel f = read_flow_model(r);
  const SectionSpec sec = read_section(r);
  const int k = r.get<int>("k", 1);
  const bool indices = r.get<bool>("indices", true);
  const double horizon = r.get<double>("horizon", 50.0);
  std::vector<Vec2> seeds;
  if (r.has("seeds")) seeds = read_points(r.raw("seeds"), r.path("seeds"));
  const int grid = r.get<int>("seed_grid", 8);
  r.finish();
  if (seeds.empty())
    seeds = f.torus_fiber ? torus_seeds(grid) : disk_seeds(sec.center, sec.r_P, 4, 16);

  ReturnOptions ropts;
  ropts.horizon = horizon;
  const Section s = Section::checked(f, sec.t0, sec.r_max, sec.r_P, sec.center);
  const PeriodicOrbitReport rep = find_periodic_orbits(f, s, seeds, k, ropts);
  json orbits = json::array();
  for (const auto& o : rep.orbits) {
    json row = {{"point", to_json(o.point)}, {"k", o.k}, {"period", o.period},
                {"return_times", o.return_times}, {"converged_from", o.converged_from}};
    if (indices) {
      try {
        row["index"] = orbit_index(f, s, o.point, k, 0.05, ropts);
      } catch (const Error& e) {
        row["index"] = nullptr;
        row["index_error"] = e.what();
      }
    }
    orbits.push_back(row);
  }
  json result = {{"model", f.kind}, {"k", k}, {"orbits", orbits}, {"non_converged", rep.non_converged},
                 {"seeds", seeds.size()}};
  return {exit_pass, result, {}};
}

json to_json(const std::vector<IndexedFixedPoint>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back({{"point", to_json(p.point)}, {"index", p.index}, {"eps", p.eps}});
  return out;
}

CliResult cmd_lefschetz(Reader& r) {
  const auto kind = r.require<std::string>("model");
  PlaneMap m;
  bool torus = false;
  std::optional<int> expected;
  std::optional<StandardPAMap> pa;
  std::optional<int> sign;
  if (kind == "standard_pa" || kind == "perturbed") {
    pa = read_pa(r);
    const StandardPAMap base = *pa;
    if (kind == "standard_pa") {
      m = [base](const Vec2& p) { return base(p); };
      expected = index_table(base.rotation() == 0 ? OrbitType::nonrotating_singular(base.prongs())
                                                  : OrbitType::rotating_singular(base.prongs(), base.rotation()));
    } else {
      m = perturbed_standard_map(base, default_push());
    }
  } else if (kind == "linear") {
    const Eigen::Matrix2d J = read_real_matrix(r.raw("matrix"), r.path("matrix"));
    m = [J](const Vec2& p) -> Vec2 { return J * p; };
    try {
      sign = nondegenerate_sign(J);
    } catch (const Degenerate& e) {
      throw ConfigError(r.path("matrix"), e.what());
    }
  } else if (kind == "torus_aut" || kind == "torus") {
    const TorusAutomorphism A = read_torus(r);
    m = [A](const Vec2& p) { return A(p); };
    torus = true;
  } else if (kind == "cancelling_pair") {
    m = cancelling_pair_map();
  } else {
    throw ConfigError(r.path("model"), "unknown model '" + kind + "'");
  }
  const Vec2 point = r.has("point") ? read_vec2(r.raw("point"), r.path("point")) : Vec2::Zero();
  WindingOptions wopts;
  wopts.eps = r.get<double>("eps", wopts.eps);
  wopts.samples = r.get<int>("samples", wopts.samples);
  wopts.torus = torus;
  const double K = r.get<double>("K", 1.0);
  const bool relative = r.get<bool>("relative", false);
  r.finish();

  json result = {{"model", kind}};
  bool pass = true;
  if (kind == "perturbed" || kind == "cancelling_pair") {
    const auto pts = indexed_fixed_points(m, K);
    int sum = 0;
    for (const auto& p : pts) sum += p.index;
    result["fixed_points"] = to_json(pts);
    result["index_sum"] = sum;
  } else {
    const WindingResult w = winding(m, point, wopts);
    result["point"] = to_json(point);
    result["index"] = w.index;
    result["eps_used"] = w.eps_used;
    result["samples_used"] = w.samples_used;
    result["min_displacement"] = w.min_displacement;
    if (expected) {
      result["index_table"] = *expected;
      pass = w.index == *expected;
    }
    if (sign) {
      result["nondegenerate_sign"] = *sign;
      pass = w.index == *sign;
    }
  }
  if (relative) {
    if (torus) throw ConfigError("/relative", "relative check needs a planar model");
    PlaneMap other;
    if (kind == "standard_pa") {
      other = perturbed_standard_map(*pa, default_push());
    } else if (kind == "perturbed") {
      const StandardPAMap base = *pa;
      other = [base](const Vec2& p) { return base(p); };
    } else if (kind == "cancelling_pair") {
      other = [](const Vec2& p) { return apply_A_lambda(2.0, p); };
    } else {
      other = m;
    }
    const RelLefschetzReport rel = rel_lefschetz_check(m, other, K);
    result["relative"] = {{"pass", rel.pass}, {"agree_outside", rel.agree_outside}, {"outside_gap", rel.outside_gap},
                          {"sum1", rel.sum1}, {"sum2", rel.sum2}, {"degree1", rel.degree1}, {"degree2", rel.degree2},
                          {"fixed1", to_json(rel.fixed1)}, {"fixed2", to_json(rel.fixed2)}};
    pass = pass && rel.pass;
  }
  result["pass"] = pass;
  return {pass ? exit_pass : exit_certified_fail, result, {}};
}

CliResult cmd_track(Reader& r) {
  FormSpec s = read_form_spec(r);
  const auto mono = read_monodromy(r, true);
  const double L = r.get<double>("L", 2.0);
  const double speed = r.get<double>("speed", 1.0);
  const std::uint64_t seed = r.get<std::uint64_t>("seed", 1);
  std::vector<TrackedOrbit> orbits;
  if (r.has("orbits")) {
    const json& v = r.raw("orbits");
    if (!v.is_array()) throw ConfigError(r.path("orbits"), "expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      Reader o(v[i], r.path("orbits") + "/" + std::to_string(i));
      TrackedOrbit t;
      t.id = o.get<std::size_t>("id", i);
      t.section.t0 = o.get<double>("t0", 0.0);
      t.section.r_max = o.get<double>("r_max", 0.8);
      t.section.r_P = o.get<double>("r_P", 0.3);
      if (o.has("center")) t.section.center = read_vec2(o.raw("center"), o.path("center"));
      t.returns = o.get<int>("returns", 1);
      t.period = o.get<double>("period", 1.0);
      o.finish();
      orbits.push_back(t);
    }
  } else {
    TrackedOrbit t;
    t.section = {0.0, 0.8, 0.3, Vec2::Zero()};
    orbits.push_back(t);
  }
  TrackingOptions opts;
  opts.seed = seed;
  if (r.has("options")) {
    Reader o = r.child("options");
    opts.field_samples = o.get<std::size_t>("field_samples", opts.field_samples);
    opts.tube_samples = o.get<std::size_t>("tube_samples", opts.tube_samples);
    opts.tube_margin = o.get<double>("tube_margin", opts.tube_margin);
    opts.field_tol = o.get<double>("field_tol", opts.field_tol);
    opts.domain_radius = o.get<double>("domain_radius", opts.domain_radius);
    opts.return_probes = o.get<int>("return_probes", opts.return_probes);
    opts.ret.horizon = o.get<double>("horizon", opts.ret.horizon);
    o.finish();
  }
  r.finish();

  double eps = 0.0;
  if (s.epsilon) {
    eps = *s.epsilon;
  } else {
    eps = find_epsilon(s.form, s.chart, s.profile, GridSpec{}).epsilon;
  }
  FlowModel phi = chart_reeb_model(s.form, SmoothingChart::identity(), SmoothingFunction::zero());
  FlowModel psi = chart_reeb_model(s.form, s.chart, s.profile.scaled(eps));
  if (mono) {
    phi = with_monodromy(std::move(phi), *mono);
    psi = with_monodromy(std::move(psi), *mono);
  }
  if (speed != 1.0) psi = rescaled(std::move(psi), speed);
  for (auto& o : orbits) {
    o.section = Section::checked(phi, o.section.t0, o.section.r_max, o.section.r_P, o.section.center);
    Section::checked(psi, o.section.t0, o.section.r_max, o.section.r_P, o.section.center);
  }

  const TrackingReport rep = tracking_certificate(phi, psi, orbits, L, opts);
  json checks = json::array();
  int sum_phi = 0, sum_psi = 0;
  for (std::size_t i = 0; i < rep.orbits.size(); ++i) {
    const OrbitCheck& c = rep.orbits[i];
    json row = {{"id", c.id}, {"a", c.a}, {"b", c.b}, {"c", c.c}, {"d", c.d}, {"pass", c.pass()},
                {"fixed_points_in_P", c.fixed_points_in_P}, {"uniqueness_margin", c.uniqueness_margin},
                {"tube_distance", std::isinf(c.tube_distance) ? json(nullptr) : json(c.tube_distance)},
                {"field_sup", std::isinf(c.field_sup) ? json(nullptr) : json(c.field_sup)},
                {"monodromy_sup", c.monodromy_sup}, {"field_samples_used", c.field_samples_used},
                {"max_return_time", std::isinf(c.max_return_time) ? json(nullptr) : json(c.max_return_time)},
                {"mean_return_time", c.mean_return_time}, {"note", c.note}};
    const auto it = std::find_if(orbits.begin(), orbits.end(), [&](const TrackedOrbit& o) { return o.id == c.id; });
    try {
      const int ip = orbit_index(phi, it->section, it->section.center, it->returns);
      const int iq = orbit_index(psi, it->section, it->section.center, it->returns);
      row["lefschetz_phi"] = ip;
      row["lefschetz_psi"] = iq;
      sum_phi += ip;
      sum_psi += iq;
    } catch (const Error& e) {
      row["lefschetz_error"] = e.what();
    }
    checks.push_back(row);
  }
  json result = {{"form", s.form.name}, {"epsilon", eps}, {"L", L}, {"speed", speed}, {"pass", rep.pass},
                 {"orbits", checks}, {"lefschetz_sum", {{"phi", sum_phi}, {"psi", sum_psi}, {"pass", sum_phi == sum_psi}}}};
  return {rep.pass ? exit_pass : exit_certified_fail, result, {}};
}

CliResult cmd_census(Reader& r) {
  // Validate before enumerating.
  const TorusAutomorphism A = read_torus(r);
  const int kmax = r.get<int>("kmax", 4);
  const bool checks = r.get<bool>("checks", true);
  r.finish();
  if (kmax < 1 || kmax > 20) throw ConfigError("/kmax", "must lie in [1, 20]");
  if (A.det() != 1) throw ConfigError("/matrix", "census needs det = +1");
  const Census c = enumerate_torus_census(A, kmax);

  json simple = json::array(), iterates = json::array();
  for (const auto& rec : c.records) (rec.simple() ? simple : iterates).push_back(to_json(rec));
  json per_level = json::array();
  for (int k = 1; k <= kmax; ++k) {
    std::int64_t points = 0;
    for (const auto& rec : c.records)
      if (rec.level == k) points += rec.primitive_period;
    per_level.push_back({{"k", k}, {"fixed_points", points}, {"expected", count_fixed_points(A, k)}});
  }
  json result = {{"substrate", c.substrate}, {"kmax", kmax}, {"records", simple}, {"iterates", iterates},
                 {"levels", per_level}};
  bool pass = true;
  if (checks) {
    const CensusPropertyReport p = census_property_checks(c);
    result["properties"] = {{"pass", p.pass}, {"roots_ok", p.roots_ok}, {"trichotomy_ok", p.trichotomy_ok},
                            {"powers_checked", p.powers_checked}, {"violations", p.violations}};
    pass = p.pass;
  }
  result["pass"] = pass;
  return {pass ? exit_pass : exit_certified_fail, result, {}};
}

CliResult cmd_growth(Reader& r) {
  const TorusAutomorphism A = read_torus(r);
  const int kmax = r.get<int>("kmax", 12);
  const double scale = r.get<double>("action_scale", 1.0);
  r.finish();
  if (kmax < 8 || kmax > 20) throw ConfigError("/kmax", "growth needs kmax in [8, 20]");
  if (A.det() != 1) throw ConfigError("/matrix", "census needs det = +1");
  if (!(scale > 0.0)) throw ConfigError("/action_scale", "must be positive");
  const Census c = enumerate_torus_census(A, kmax);
  std::vector<double> L;
  for (int k = 1; k <= kmax; ++k) L.push_back(scale * k);
  const GrowthTable t = ch_growth(c, L, scale);
  const double gr = growth_rate(c);

  std::ostringstream csv;
  csv << "L,GF,CHF\n";
  for (std::size_t i = 0; i < L.size(); ++i) csv << L[i] << ',' << t.GF[i] << ',' << t.CHF[i] << '\n';
  json result = {{"substrate", c.substrate}, {"kmax", kmax}, {"action_scale", scale}, {"L", L}, {"GF", t.GF},
                 {"CHF", t.CHF}, {"growth_rate", gr}, {"ch_growth_rate", t.rate},
                 {"log_stretch", std::log(A.stretch())}};
  return {exit_pass, result, csv.str()};
}

json to_json(const ChainSummary& s) {
  const Nonvanishing nv = nonvanishing_certificate(s);
  return {{"class", to_json(s.key)}, {"L", s.L}, {"n_even", s.n_even}, {"n_odd", s.n_odd}, {"chi", s.chi()},
          {"case", case_name(s.tag)}, {"nonzero", nv.nonzero}, {"rank_lower_bound", nv.rank_lower_bound}};
}

CliResult cmd_chain(Reader& r) {
  const TorusAutomorphism A = read_torus(r);
  const int kmax = r.get<int>("kmax", 6);
  const double L = r.get<double>("L", static_cast<double>(kmax));
  std::optional<std::array<std::int64_t, 3>> cls;
  if (r.has("class")) {
    Reader c = r.child("class");
    cls = std::array<std::int64_t, 3>{c.require<std::int64_t>("k"), c.get<std::int64_t>("a", 0),
                                      c.get<std::int64_t>("b", 0)};
    c.finish();
  }
  std::optional<CofinalSequence> cof;
  if (r.has("cofinal")) {
    Reader c = r.child("cofinal");
    CofinalSequence seq;
    seq.C = c.require<double>("C");
    seq.D = c.require<double>("D");
    seq.c = Reader::convert<std::vector<double>>(c.raw("c"), c.path("c"));
    seq.L = Reader::convert<std::vector<double>>(c.raw("L"), c.path("L"));
    c.finish();
    if (seq.c.size() < 3 || seq.c.size() != seq.L.size())
      throw ConfigError(c.path("c"), "needs at least 3 entries, matching L");
    cof = seq;
  }
  r.finish();
  if (kmax < 1 || kmax > 20) throw ConfigError("/kmax", "must lie in [1, 20]");
  if (A.det() != 1) throw ConfigError("/matrix", "census needs det = +1");
  const Census c = enumerate_torus_census(A, kmax);

  std::vector<HomotopyClassKey> keys;
  if (cls) {
    keys.push_back({c.substrate, static_cast<int>((*cls)[0]), (*cls)[1], (*cls)[2]});
  } else {
    std::set<HomotopyClassKey> seen;
    for (const auto& rec : c.records)
      if (rec.period <= L + 1e-9) seen.insert(rec.key);
    keys.assign(seen.begin(), seen.end());
  }
  const auto summaries = parallel_map<ChainSummary>(
      keys.size(), [&](std::size_t i) { return build_chain_summary(c, keys[i], L); });
  json rows = json::array();
  for (const auto& s : summaries) rows.push_back(to_json(s));

  const HypertightReport ht = hypertight_certificate(c, L);
  json offenders = json::array();
  for (const auto& rec : ht.offenders) offenders.push_back(to_json(rec));
  bool pass = ht.pass;
  json result = {{"substrate", c.substrate}, {"L", L}, {"summaries", rows},
                 {"hypertight", {{"pass", ht.pass}, {"offenders", offenders}}}};
  if (cof) {
    const CofinalityReport cr = cofinality_check(*cof);
    result["cofinality"] = {{"pass", cr.pass}, {"failing_index", cr.failing_index}, {"reason", cr.reason},
                            {"ratio", cr.ratio}, {"bound", cr.bound}};
    pass = pass && cr.pass;
  }
  result["pass"] = pass;
  return {pass ? exit_pass : exit_certified_fail, result, {}};
}

CliResult cmd_torsion(Reader& r) {
  const int k = r.get<int>("k", 1);
  const json& cls = r.raw("class");
  if (!cls.is_array() || cls.size() != 2) throw ConfigError(r.path("class"), "expected [m, n]");
  const auto m = Reader::convert<std::int64_t>(cls[0], r.path("class") + "/0");
  const auto n = Reader::convert<std::int64_t>(cls[1], r.path("class") + "/1");
  r.finish();
  if (k < 1) throw ConfigError("/k", "must be >= 1");
  TorsionBound tb;
  try {
    tb = torsion_rank_bound(k, m, n);
  } catch (const NonPrimitive& e) {
    throw ConfigError("/class", e.what());
  }
  json gens = json::array();
  for (const auto& g : tb.generators)
    gens.push_back({{"label", g.label}, {"torus", g.torus}, {"t", g.t}, {"grading", g.grading}, {"action", g.action}});
  std::vector<double> tori;
  for (const auto& g : tb.generators)
    if (g.grading == 0) tori.push_back(g.t);
  json result = {{"k", k}, {"class", {m, n}}, {"tori", tori}, {"generators", gens}, {"bound", tb.bound},
                 {"action", tb.action}, {"theta", tb.theta}, {"hypothesis_theta_nonpositive", tb.hypothesis_holds}};
  return {exit_pass, result, {}};
}

using Handler = CliResult (*)(Reader&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"model", cmd_model},   {"smooth", cmd_smooth}, {"verify", cmd_verify},   {"orbits", cmd_orbits},
      {"lefschetz", cmd_lefschetz}, {"track", cmd_track},   {"census", cmd_census}, {"growth", cmd_growth},
      {"chain", cmd_chain},   {"torsion", cmd_torsion}};
  return table;
}

}  // namespace

std::vector<std::string> command_names() {
  std::vector<std::string> out;
  for (const auto& [name, h] : handlers()) out.push_back(name);
  return out;
}

std::string config_hash(const json& cfg) {
  json canon = cfg;
  if (canon.is_object())
    for (const char* k : {"workers", "out", "csv"}) canon.erase(k);
  const std::string text = canon.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CliResult dispatch(const json& cfg) {
  Reader r(cfg, "");
  const auto cmd = r.require<std::string>("cmd");
  const auto it = handlers().find(cmd);
  if (it == handlers().end()) throw ConfigError("/cmd", "unknown command '" + cmd + "'");
  if (r.has("workers")) {
    const int w = r.require<int>("workers");
    if (w < 1) throw ConfigError("/workers", "must be >= 1");
    set_default_workers(w);
  }
  r.has("out");
  r.has("csv");
  // Only track draws random numbers; everywhere else the seed is accepted and recorded.
  if (cmd != "track" && r.has("seed")) r.require<std::uint64_t>("seed");

  CliResult res = it->second(r);
  json result = std::move(res.report);
  bool pass = res.exit_code == exit_pass;
  res.report = {{"schema", kReportSchema}, {"version", REEBPA_VERSION}, {"config_hash", config_hash(cfg)},
                {"command", cmd}, {"pass", pass}, {"result", std::move(result)}};
  return res;
}

namespace {

IntMatrix2 parse_matrix_flag(const std::string& s) {
  std::vector<std::int64_t> v;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      v.push_back(std::stoll(tok));
    } catch (const std::exception&) {
      throw ConfigError("/matrix", "--matrix expects four comma-separated integers");
    }
  }
  if (v.size() != 4) throw ConfigError("/matrix", "--matrix expects four comma-separated integers");
  IntMatrix2 m;
  m << v[0], v[1], v[2], v[3];
  return m;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"reebpa: pseudo-Anosov flows, singular contact forms and orbit censuses"};
  std::string config_path, out_path, csv_path, command, matrix;
  std::optional<int> workers, kmax;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "Command; overrides \"cmd\" in the config");
  app.add_option("--config", config_path, "JSON config file ('-' for stdin)");
  app.add_option("--out", out_path, "Write the JSON report here instead of stdout");
  app.add_option("--csv", csv_path, "Write the growth table (L, GF, CHF) here");
  app.add_option("--workers", workers, "Worker threads (default: REEBPA_WORKERS or all cores)");
  app.add_option("--seed", seed, "Random seed for sampled checks");
  app.add_option("--kmax", kmax, "Census depth");
  app.add_option("--matrix", matrix, "Torus matrix as a,b,c,d");
  app.set_version_flag("--version", std::string(REEBPA_VERSION));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_pass : exit_error;
  }

  try {
    json cfg = json::object();
    if (!config_path.empty()) {
      try {
        if (config_path == "-") {
          cfg = json::parse(std::cin);
        } else {
          std::ifstream in(config_path);
          if (!in) throw ConfigError("/", "cannot open " + config_path);
          cfg = json::parse(in);
        }
      } catch (const json::parse_error& e) {
        throw ConfigError("/", std::string("invalid JSON: ") + e.what());
      }
      if (!cfg.is_object()) throw ConfigError("/", "config must be a JSON object");
    }
    if (!command.empty()) cfg["cmd"] = command;
    if (workers) cfg["workers"] = *workers;
    if (seed) cfg["seed"] = *seed;
    if (kmax) cfg["kmax"] = *kmax;
    if (!matrix.empty()) {
      const IntMatrix2 m = parse_matrix_flag(matrix);
      cfg["matrix"] = {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}};
    }
    if (out_path.empty() && cfg.contains("out") && cfg["out"].is_string()) out_path = cfg["out"];
    if (csv_path.empty() && cfg.contains("csv") && cfg["csv"].is_string()) csv_path = cfg["csv"];
    if (!cfg.contains("cmd")) throw ConfigError("/cmd", "no command given");

    const CliResult res = dispatch(cfg);
    const std::string text = res.report.dump(2) + "\n";
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path);
      if (!out) throw Error("cannot write " + out_path);
      out << text;
    }
    if (!csv_path.empty() && !res.csv.empty()) {
      std::ofstream out(csv_path);
      if (!out) throw Error("cannot write " + csv_path);
      out << res.csv;
    }
    return res.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", "config"}, {"pointer", e.pointer()}, {"message", e.what()}}.dump() << "\n";
    return exit_error;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "runtime"}, {"message", e.what()}}.dump() << "\n";
    return exit_error;
  }
}

}  // namespace reebpa
