#include "reebpa/chain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include "reebpa/parallel.hpp"

namespace reebpa {

namespace {

constexpr double kCutoffSlack = 1e-9;

void require_complete(const Census& c, double period_cutoff) {
  if (!c.complete_up_to(period_cutoff))
    throw IncompleteCensus("census of " + c.substrate + " is not complete up to period " +
                           std::to_string(period_cutoff));
}

}  // namespace

std::string case_name(CaseTag tag) {
  switch (tag) {
    case CaseTag::case_1a: return "1a";
    case CaseTag::case_1b: return "1b";
    case CaseTag::case_1c: return "1c";
    case CaseTag::empty: return "empty";
  }
  return "empty";
}

namespace {

template <class Records>
ChainSummary summarize(const Records& records, const HomotopyClassKey& key, double L, double action_scale) {
  ChainSummary s;
  s.key = key;
  s.L = L;
  int negative = 0, rotating = 0, plain = 0;
  for (const OrbitRecord& r : records) {
    if (r.key != key || !r.good || r.period * action_scale > L + kCutoffSlack) continue;
    using K = OrbitType::Kind;
    switch (r.type.kind) {
      case K::nonrotating_singular:
        s.n_odd += r.type.prongs - 1;
        ++plain;
        break;
      case K::rotating_singular:
        ++s.n_even;
        ++rotating;
        break;
      default:
        (r.grading == 0 ? s.n_even : s.n_odd) += 1;
        if (r.type.kind == K::negative_hyperbolic) ++negative;
        else if (r.type.kind == K::elliptic) ++rotating;
        else ++plain;
    }
  }
  if (negative + rotating + plain == 0) s.tag = CaseTag::empty;
  else if (negative == 1 && rotating == 0 && plain == 0) s.tag = CaseTag::case_1b;
  else if (rotating == 1 && negative == 0 && plain == 0) s.tag = CaseTag::case_1c;
  else if (negative == 0 && rotating == 0) s.tag = CaseTag::case_1a;
  else
    throw MixedClass("class " + key.to_string() + " has " + std::to_string(negative) + " negative hyperbolic, " +
                     std::to_string(rotating) + " rotating and " + std::to_string(plain) + " other orbits");
  return s;
}

}  // namespace

ChainSummary build_chain_summary(const Census& c, const HomotopyClassKey& key, double L,
                                 double action_scale) {
  if (!(action_scale > 0.0)) throw Error("action scale must be positive");
  require_complete(c, L / action_scale);
  return summarize(c.records, key, L, action_scale);
}

EulerCheck euler_identity_check(const ChainSummary& psi, const std::vector<OrbitRecord>& phi_orbits) {
  if (psi.tag != CaseTag::case_1a) throw CaseMismatch("summary is case " + case_name(psi.tag) + ", not 1a");
  EulerCheck out;
  for (const auto& r : phi_orbits) {
    const auto kind = r.type.kind;
    if (kind != OrbitType::Kind::positive_hyperbolic && kind != OrbitType::Kind::nonrotating_singular)
      throw CaseMismatch("orbit of type " + r.type.name() + " in a case 1a class");
    out.prong_sum += r.type.prongs - 1;
    out.lefschetz_sum += r.lefschetz;
  }
  out.chi = psi.chi();
  out.difference = std::abs(out.chi) - out.prong_sum;
  out.pass = out.difference == 0;
  return out;
}

Nonvanishing nonvanishing_certificate(const ChainSummary& s) {
  switch (s.tag) {
    case CaseTag::empty: return {false, 0};
    case CaseTag::case_1b:
    case CaseTag::case_1c: return {true, 1};
    case CaseTag::case_1a: {
      const int chi = std::abs(s.chi());
      return {chi >= 1, chi};
    }
  }
  return {};
}

HypertightReport hypertight_certificate(const Census& c, double L) {
  require_complete(c, L);
  HypertightReport rep;
  rep.L = L;
  for (const auto& r : c.records)
    if (r.key.contractible() && r.period <= L + kCutoffSlack) rep.offenders.push_back(r);
  rep.pass = rep.offenders.empty();
  return rep;
}

CofinalityReport cofinality_check(const CofinalSequence& seq) {
  CofinalityReport rep;
  const std::size_t n = seq.c.size();
  auto fail = [&](std::size_t i, std::string why) {
    rep.pass = false;
    rep.failing_index = i;
    rep.reason = std::move(why);
    return rep;
  };
  if (n < 3 || seq.L.size() != n) throw Error("cofinal sequence needs at least 3 matching (c_i, L_i)");
  if (!(seq.C > 1.0 && seq.D > seq.C)) return fail(0, "constants must satisfy D > C > 1");

  const double decay = seq.C * seq.C / seq.D;
  for (std::size_t i = 0; i < n; ++i) {
    rep.ratio.push_back(seq.c[i] / seq.L[i]);
    rep.bound.push_back(std::pow(decay, static_cast<double>(i)) * seq.c[0] / seq.L[0]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (seq.c[i] < 1.0 / seq.C || seq.c[i] > seq.C) return fail(i + 1, "c_i outside [1/C, C]");
    if (!(seq.L[i] > 0.0)) return fail(i + 1, "L_i must be positive");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(seq.L[i] > seq.D * seq.D * seq.L[i - 1])) return fail(i + 1, "L_{i+1} > D^2 L_i violated");
    if (seq.c[i] > seq.C * seq.C * seq.c[i - 1]) return fail(i + 1, "c_{i+1} <= C^2 c_i violated");
    if (!(rep.ratio[i] < rep.ratio[i - 1])) return fail(i + 1, "c_i / L_i is not decreasing");
    if (!(rep.bound[i] < rep.bound[i - 1])) return fail(i + 1, "domination bound does not decrease (D <= C^2)");
    if (rep.ratio[i] > rep.bound[i] * (1.0 + 1e-12)) return fail(i + 1, "c_i / L_i exceeds the domination bound");
  }
  rep.pass = true;
  return rep;
}

std::vector<double> torsion_tori(int k, std::int64_t m, std::int64_t n) {
  if (k < 1) throw Error("torsion k must be >= 1");
  if (std::gcd(m, n) != 1) throw NonPrimitive("class (" + std::to_string(m) + ", " + std::to_string(n) + ") is not primitive");
  double t = std::atan2(static_cast<double>(n), static_cast<double>(m)) / (2.0 * std::numbers::pi);
  t -= std::floor(t);
  if (t >= 1.0) t = 0.0;
  std::vector<double> out;
  for (int j = 0; j < k; ++j) out.push_back(t + j);
  return out;
}

TorsionBound torsion_rank_bound(int k, std::int64_t m, std::int64_t n) {
  TorsionBound out;
  out.k = k;
  out.m = m;
  out.n = n;
  out.action = std::hypot(static_cast<double>(m), static_cast<double>(n));
  out.theta = m;
  out.hypothesis_holds = m <= 0;
  const auto tori = torsion_tori(k, m, n);
  for (std::size_t j = 0; j < tori.size(); ++j) {
    const int idx = static_cast<int>(j);
    out.generators.push_back({"hat_" + std::to_string(j), idx, tori[j], 0, out.action});
    out.generators.push_back({"check_" + std::to_string(j), idx, tori[j], 1, out.action});
  }
  out.bound = static_cast<int>(out.generators.size());
  return out;
}

GrowthTable ch_growth(const Census& c, const std::vector<double>& L_values, double action_scale) {
  if (!(action_scale > 0.0)) throw Error("action scale must be positive");
  GrowthTable out;
  out.L = L_values;
  for (double L : L_values) {
    const double cutoff = L / action_scale;
    require_complete(c, cutoff);
    out.GF.push_back(growth_function(c, cutoff));

    std::map<HomotopyClassKey, std::set<HomotopyClassKey>> roots;
    std::map<HomotopyClassKey, std::vector<std::reference_wrapper<const OrbitRecord>>> by_key;
    for (const auto& r : c.records) {
      if (r.period * action_scale > L + kCutoffSlack) continue;
      roots[r.key].insert(r.root);
      by_key[r.key].push_back(std::cref(r));
    }
    std::set<HomotopyClassKey> all_roots;
    for (const auto& [key, rs] : roots) all_roots.insert(rs.begin(), rs.end());
    const std::vector<HomotopyClassKey> root_list(all_roots.begin(), all_roots.end());
    const auto certified = parallel_map<char>(root_list.size(), [&](std::size_t i) -> char {
      const auto it = by_key.find(root_list[i]);
      if (it == by_key.end()) return 0;
      return nonvanishing_certificate(summarize(it->second, root_list[i], L, action_scale)).nonzero;
    });
    std::set<HomotopyClassKey> good_roots;
    for (std::size_t i = 0; i < root_list.size(); ++i)
      if (certified[i]) good_roots.insert(root_list[i]);

    std::int64_t count = 0;
    for (const auto& [key, rs] : roots)
      if (std::any_of(rs.begin(), rs.end(), [&](const auto& r) { return good_roots.count(r) > 0; })) ++count;
    out.CHF.push_back(count);
  }
  if (L_values.size() >= 8 && out.CHF.back() > 0) {
    std::vector<double> counts(out.CHF.begin(), out.CHF.end());
    out.rate = growth_fit(L_values, counts);
  }
  return out;
}

}  // namespace reebpa
