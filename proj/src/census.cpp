#include "reebpa/census.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "reebpa/parallel.hpp"

namespace reebpa {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw OverflowError("coset arithmetic exceeds 64 bits");
  return static_cast<std::int64_t>(v);
}

i128 mod128(i128 a, std::int64_t m) {
  i128 r = a % m;
  return r < 0 ? r + m : r;
}

bool trichotomy_holds(const std::vector<OrbitType>& types) {
  std::size_t neg = 0, rot = 0;
  for (const auto& t : types) {
    if (t.kind == OrbitType::Kind::negative_hyperbolic) ++neg;
    if (t.rotating()) ++rot;
  }
  if (neg > 0) return neg == 1 && types.size() == 1;
  if (rot > 0) return rot == 1 && types.size() == 1;
  return true;
}

OrbitType smooth_type(const IntMatrix2& power) {
  const std::int64_t tr = power.trace();
  if (tr > 2) return OrbitType::positive_hyperbolic();
  if (tr < -2) return OrbitType::negative_hyperbolic();
  throw Error("iterate is not hyperbolic (|trace| <= 2)");
}

}  // namespace

std::string HomotopyClassKey::to_string() const {
  return substrate + "|k=" + std::to_string(k) + "|(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

OrbitRecord make_record(const OrbitType& primitive, int multiplicity, HomotopyClassKey key,
                        HomotopyClassKey root, double period, int level) {
  if (multiplicity < 1) throw Error("multiplicity must be >= 1");
  OrbitRecord r;
  r.period = period;
  r.multiplicity = multiplicity;
  r.level = level > 0 ? level : key.k;
  r.primitive_period = r.level / multiplicity;
  r.primitive_type = primitive;
  r.type = iterate_type(primitive, multiplicity);
  r.key = std::move(key);
  r.root = std::move(root);
  r.lefschetz = index_table(r.type);
  r.grading = r.lefschetz == 1 ? 0 : 1;
  r.good = !(primitive.kind == OrbitType::Kind::negative_hyperbolic && multiplicity % 2 == 0);
  return r;
}

bool Census::complete_up_to(double L) const {
  if (L < 1.0) return true;
  const auto K = static_cast<int>(std::floor(L + 1e-9));
  if (K > kmax) return false;
  for (int k = 1; k <= K; ++k)
    if (k >= static_cast<int>(complete.size()) || !complete[k]) return false;
  return true;
}

std::vector<OrbitRecord> Census::in_class(const HomotopyClassKey& key, double L) const {
  std::vector<OrbitRecord> out;
  for (const auto& r : records)
    if (r.key == key && r.period <= L + 1e-9) out.push_back(r);
  return out;
}

Census make_census(std::string substrate, int kmax, std::vector<OrbitRecord> records) {
  Census c;
  c.substrate = std::move(substrate);
  c.kmax = kmax;
  c.records = std::move(records);
  c.complete.assign(static_cast<std::size_t>(kmax) + 1, true);
  c.complete[0] = false;
  return c;
}

IntVector2 CosetStructure::coset(const IntVector2& v) const {
  const i128 w0 = i128(snf.U(0, 0)) * v(0) + i128(snf.U(0, 1)) * v(1);
  const i128 w1 = i128(snf.U(1, 0)) * v(0) + i128(snf.U(1, 1)) * v(1);
  return {narrow(mod128(w0, snf.d1)), narrow(mod128(w1, snf.d2))};
}

IntVector2 CosetStructure::act(const IntVector2& w) const {
  const i128 x0 = i128(B(0, 0)) * w(0) + i128(B(0, 1)) * w(1);
  const i128 x1 = i128(B(1, 0)) * w(0) + i128(B(1, 1)) * w(1);
  return {narrow(mod128(x0, snf.d1)), narrow(mod128(x1, snf.d2))};
}

IntVector2 CosetStructure::canonical(const IntVector2& w) const {
  IntVector2 best = w;
  IntVector2 cur = act(w);
  while (cur != w) {
    if (std::pair(cur(0), cur(1)) < std::pair(best(0), best(1))) best = cur;
    cur = act(cur);
  }
  return best;
}

CosetStructure coset_structure(const TorusAutomorphism& A, int k) {
  if (k < 1) throw Error("class keys need winding k >= 1");
  CosetStructure cs;
  cs.k = k;
  cs.M = checked_power(A.matrix(), k) - IntMatrix2::Identity();
  cs.snf = smith_normal_form(cs.M);
  if (cs.snf.d1 == 0) throw Error("A^k - I is singular");
  const IntMatrix2 Uinv = unimodular_inverse(cs.snf.U);
  // B = U A U^-1 with row 0 reduced mod d1 and row 1 mod d2.
  for (int i = 0; i < 2; ++i) {
    const std::int64_t m = i == 0 ? cs.snf.d1 : cs.snf.d2;
    for (int j = 0; j < 2; ++j) {
      i128 acc = 0;
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
          acc += mod128(i128(cs.snf.U(i, p)) * A.matrix()(p, q) % m * Uinv(q, j), m);
      cs.B(i, j) = narrow(mod128(acc, m));
    }
  }
  return cs;
}

std::string substrate_name(const TorusAutomorphism& A) {
  const IntMatrix2& a = A.matrix();
  return "torus[[" + std::to_string(a(0, 0)) + "," + std::to_string(a(0, 1)) + "],[" +
         std::to_string(a(1, 0)) + "," + std::to_string(a(1, 1)) + "]]";
}

HomotopyClassKey class_key(const IntVector2& v, int k, const TorusAutomorphism& A) {
  const CosetStructure cs = coset_structure(A, k);
  const IntVector2 c = cs.canonical(cs.coset(v));
  return {substrate_name(A), k, c(0), c(1)};
}

Census enumerate_torus_census(const TorusAutomorphism& A, int kmax) {
  if (kmax < 1 || kmax > 20) throw Error("census needs 1 <= kmax <= 20");
  if (A.det() != 1) throw Error("orbit types need an orientation-preserving automorphism (det +1)");
  const std::string sub = substrate_name(A);

  auto level = [&](std::size_t idx) {
    const int k = static_cast<int>(idx) + 1;
    const CosetStructure cs = coset_structure(A, k);
    const std::int64_t d1 = cs.d1(), d2 = cs.d2();
    std::vector<bool> seen(static_cast<std::size_t>(cs.size()), false);
    std::vector<OrbitRecord> out;
    for (std::int64_t id = 0; id < cs.size(); ++id) {
      if (seen[static_cast<std::size_t>(id)]) continue;
      const IntVector2 start(id / d2, id % d2);
      IntVector2 best = start;
      IntVector2 cur = start;
      int d = 0;
      do {
        seen[static_cast<std::size_t>(cur(0) * d2 + cur(1))] = true;
        if (std::pair(cur(0), cur(1)) < std::pair(best(0), best(1))) best = cur;
        cur = cs.act(cur);
        ++d;
      } while (cur != start);
      if (k % d != 0) throw Error("orbit length does not divide the level");

      // Fixed point of A^k with Smith coordinates `best`: x = V (i/d1, j/d2),
      // kept as the integer numerator n over d2.
      const IntMatrix2& V = cs.snf.V;
      const i128 ni = i128(best(0)) * (d2 / d1);
      const i128 n0 = i128(V(0, 0)) * ni + i128(V(0, 1)) * best(1);
      const i128 n1 = i128(V(1, 0)) * ni + i128(V(1, 1)) * best(1);
      const Vec2 point = wrap_torus(Vec2(static_cast<double>(mod128(n0, d2)) / double(d2),
                                         static_cast<double>(mod128(n1, d2)) / double(d2)));

      HomotopyClassKey key{sub, k, best(0), best(1)};
      HomotopyClassKey root = key;
      if (d < k) {
        const IntMatrix2 Md = checked_power(A.matrix(), d) - IntMatrix2::Identity();
        const i128 v0 = i128(Md(0, 0)) * n0 + i128(Md(0, 1)) * n1;
        const i128 v1 = i128(Md(1, 0)) * n0 + i128(Md(1, 1)) * n1;
        if (v0 % d2 != 0 || v1 % d2 != 0) throw Error("iterate root is not a lattice vector");
        root = class_key(IntVector2(narrow(v0 / d2), narrow(v1 / d2)), d, A);
      }
      const OrbitType prim = smooth_type(checked_power(A.matrix(), d));
      OrbitRecord rec = make_record(prim, k / d, std::move(key), std::move(root), double(k), k);
      rec.point = point;
      out.push_back(std::move(rec));
    }
    std::sort(out.begin(), out.end(),
              [](const OrbitRecord& x, const OrbitRecord& y) { return x.key < y.key; });
    return out;
  };

  const auto levels = parallel_map<std::vector<OrbitRecord>>(static_cast<std::size_t>(kmax), level);
  std::vector<OrbitRecord> all;
  for (const auto& l : levels) all.insert(all.end(), l.begin(), l.end());
  Census c = make_census(sub, kmax, std::move(all));
  c.matrix = A.matrix();
  return c;
}

std::int64_t growth_function(const Census& c, double L) {
  if (!c.complete_up_to(L)) throw IncompleteCensus("census is not complete up to L = " + std::to_string(L));
  std::set<HomotopyClassKey> keys;
  for (const auto& r : c.records)
    if (r.period <= L + 1e-9) keys.insert(r.key);
  return static_cast<std::int64_t>(keys.size());
}

double growth_fit(const std::vector<double>& L, const std::vector<double>& counts) {
  if (L.size() != counts.size()) throw Error("growth fit needs matching L and count arrays");
  const std::size_t n = L.size();
  if (n < 8) throw IncompleteCensus("growth fit needs at least 8 cutoffs");
  const std::size_t start = n / 2 - 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = start; i < n; ++i) {
    if (!(counts[i] > 0.0)) throw DomainError("growth fit needs positive counts");
    const double y = std::log(L[i] * counts[i]);
    sx += L[i];
    sy += y;
    sxx += L[i] * L[i];
    sxy += L[i] * y;
  }
  const double m = static_cast<double>(n - start);
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double growth_rate(const Census& c) {
  if (c.kmax < 8) throw IncompleteCensus("growth rate needs a census through k >= 8 (insufficient range)");
  if (!c.complete_up_to(c.kmax)) throw IncompleteCensus("census is not complete");
  std::vector<double> L, counts;
  for (int k = 1; k <= c.kmax; ++k) {
    L.push_back(k);
    counts.push_back(static_cast<double>(growth_function(c, k)));
  }
  return growth_fit(L, counts);
}

CensusPropertyReport census_property_checks(const Census& c) {
  if (!c.complete_up_to(c.kmax)) throw IncompleteCensus("census is not complete");
  CensusPropertyReport rep;
  std::set<HomotopyClassKey> occupied;
  for (const auto& r : c.records) occupied.insert(r.key);

  if (c.matrix && !c.records.empty()) {
    const TorusAutomorphism A(*c.matrix);
    std::set<int> levels;
    for (const auto& r : c.records) levels.insert(r.key.k);
    for (int k : levels) {
      for (int j = 1; j < k; ++j) {
        if (k % j != 0) continue;
        const int m = k / j;
        const CosetStructure cj = coset_structure(A, j);
        const IntMatrix2 Uinv = unimodular_inverse(cj.snf.U);
        const IntMatrix2 Aj = checked_power(A.matrix(), j);
        IntMatrix2 N = IntMatrix2::Zero();
        IntMatrix2 P = IntMatrix2::Identity();
        for (int i = 0; i < m; ++i) {
          N += P;
          P = checked_product(P, Aj);
        }
        const CosetStructure ck = coset_structure(A, k);
        std::set<std::pair<std::int64_t, std::int64_t>> done;
        for (std::int64_t a = 0; a < cj.d1(); ++a) {
          for (std::int64_t b = 0; b < cj.d2(); ++b) {
            const IntVector2 w = cj.canonical(IntVector2(a, b));
            if (!done.insert({w(0), w(1)}).second) continue;
            const IntVector2 v = checked_apply(Uinv, w);
            const IntVector2 pw = ck.canonical(ck.coset(checked_apply(N, v)));
            const HomotopyClassKey power{c.substrate, k, pw(0), pw(1)};
            if (!occupied.count(power)) continue;
            ++rep.powers_checked;
            const HomotopyClassKey root{c.substrate, j, w(0), w(1)};
            if (!occupied.count(root)) {
              rep.roots_ok = false;
              rep.violations.push_back("class " + power.to_string() + " is a power of unoccupied " +
                                       root.to_string());
            }
          }
        }
      }
    }
  }

  std::map<HomotopyClassKey, std::vector<OrbitType>> simple;
  for (const auto& r : c.records)
    if (r.simple()) simple[r.key].push_back(r.type);
  for (const auto& [key, types] : simple) {
    if (!trichotomy_holds(types)) {
      rep.trichotomy_ok = false;
      std::string desc;
      for (const auto& t : types) desc += (desc.empty() ? "" : ", ") + t.name();
      rep.violations.push_back("class " + key.to_string() + " mixes types {" + desc + "}");
    }
  }
  rep.pass = rep.roots_ok && rep.trichotomy_ok;
  return rep;
}

}  // namespace reebpa
