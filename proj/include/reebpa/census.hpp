#pragma once

// Closed orbits of suspensions of hyperbolic torus automorphisms, labelled by
// free homotopy class in the mapping-torus group Z^2 x|_A Z.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reebpa/int_linalg.hpp"
#include "reebpa/lefschetz.hpp"
#include "reebpa/local_models.hpp"

namespace reebpa {

/// (v, k) up to conjugacy: winding k and the lexicographically least coset of
/// v in Z^2 / (A^k - I) Z^2 along its A-orbit, in Smith coordinates.
struct HomotopyClassKey {
  std::string substrate;
  int k = 0;
  std::int64_t a = 0;
  std::int64_t b = 0;

  bool contractible() const { return k == 0 && a == 0 && b == 0; }
  std::string to_string() const;

  friend auto operator<=>(const HomotopyClassKey&, const HomotopyClassKey&) = default;
};

struct OrbitRecord {
  double period = 0.0;
  int level = 1;            // returns to the section
  int primitive_period = 1;
  int multiplicity = 1;     // level / primitive_period
  OrbitType type;           // type of this (possibly iterated) orbit
  OrbitType primitive_type;
  HomotopyClassKey key;
  HomotopyClassKey root;    // class of the underlying simple orbit
  int lefschetz = -1;
  int grading = 1;          // 0 iff lefschetz = +1
  bool good = true;
  Vec2 point = Vec2::Zero();

  bool simple() const { return multiplicity == 1; }
};

/// Record of the m-th iterate of a simple orbit of type `primitive`.
OrbitRecord make_record(const OrbitType& primitive, int multiplicity, HomotopyClassKey key,
                        HomotopyClassKey root, double period, int level = 0);

struct Census {
  std::string substrate;
  int kmax = 0;
  std::optional<IntMatrix2> matrix;
  std::vector<OrbitRecord> records;  // sorted by (level, key)
  std::vector<bool> complete;        // complete[k] for 1 <= k <= kmax; index 0 unused

  bool complete_up_to(double L) const;
  std::vector<OrbitRecord> in_class(const HomotopyClassKey& key, double L) const;
};

/// A census from explicit records, complete through level kmax.
Census make_census(std::string substrate, int kmax, std::vector<OrbitRecord> records);

/// Smith data of M = A^k - I and the induced action B = U A U^-1 on cosets.
struct CosetStructure {
  int k = 0;
  IntMatrix2 M;
  SmithForm<std::int64_t> snf;
  IntMatrix2 B;

  std::int64_t d1() const { return snf.d1; }
  std::int64_t d2() const { return snf.d2; }
  std::int64_t size() const { return snf.d1 * snf.d2; }
  IntVector2 coset(const IntVector2& v) const;
  IntVector2 act(const IntVector2& w) const;
  IntVector2 canonical(const IntVector2& w) const;
};

CosetStructure coset_structure(const TorusAutomorphism& A, int k);
std::string substrate_name(const TorusAutomorphism& A);

HomotopyClassKey class_key(const IntVector2& v, int k, const TorusAutomorphism& A);

/// Every closed orbit through level kmax, iterates included. Needs det A = +1.
Census enumerate_torus_census(const TorusAutomorphism& A, int kmax);

/// Number of distinct classes among records of period <= L.
std::int64_t growth_function(const Census& c, double L);

/// Least-squares slope of log(L * count) against L over the upper half of the
/// samples (from index n/2 - 1). Counts must be positive; n >= 8.
double growth_fit(const std::vector<double>& L, const std::vector<double>& counts);

/// growth_fit over GF(1), ..., GF(kmax); needs kmax >= 8.
double growth_rate(const Census& c);

struct CensusPropertyReport {
  bool pass = true;
  bool roots_ok = true;
  bool trichotomy_ok = true;
  std::size_t powers_checked = 0;
  std::vector<std::string> violations;
};

/// (i) every occupied class that is a power of a lower-level class has its root
/// occupied; (ii) each primitive class is one negative hyperbolic orbit, one
/// rotating orbit, or only positive hyperbolic / non-rotating singular orbits.
CensusPropertyReport census_property_checks(const Census& c);

}  // namespace reebpa
