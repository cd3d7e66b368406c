#pragma once

// Generator-count bookkeeping for contact homology in a free homotopy class:
// graded counts of good orbits, the Euler identity against a pseudo-Anosov
// census, nonvanishing and hypertightness certificates, cofinality arithmetic,
// the Giroux torsion domain and the CH growth function.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "reebpa/census.hpp"

namespace reebpa {

enum class CaseTag { case_1a, case_1b, case_1c, empty };

std::string case_name(CaseTag tag);

struct ChainSummary {
  HomotopyClassKey key;
  double L = 0.0;
  int n_even = 0;
  int n_odd = 0;
  CaseTag tag = CaseTag::empty;

  int chi() const { return n_even - n_odd; }
};

/// Good records of the class with action period * action_scale <= L. A
/// non-rotating p-prong record stands for p - 1 odd generators, a rotating
/// singular one for a single even generator.
ChainSummary build_chain_summary(const Census& c, const HomotopyClassKey& key, double L,
                                 double action_scale = 1.0);

struct EulerCheck {
  bool pass = false;
  int chi = 0;          // signed, as stored in the summary
  int prong_sum = 0;    // sum of p - 1 over the orbits of Phi
  int lefschetz_sum = 0;
  int difference = 0;   // |chi| - prong_sum
};

EulerCheck euler_identity_check(const ChainSummary& psi, const std::vector<OrbitRecord>& phi_orbits);

struct Nonvanishing {
  bool nonzero = false;
  int rank_lower_bound = 0;
};

Nonvanishing nonvanishing_certificate(const ChainSummary& s);

struct HypertightReport {
  bool pass = true;
  double L = 0.0;
  std::vector<OrbitRecord> offenders;
};

HypertightReport hypertight_certificate(const Census& c, double L);

/// Scalar shadow of a strongly cofinal sequence: c_i * beta <= alpha_i <= C beta.
struct CofinalSequence {
  double C = 1.2;
  double D = 2.0;
  std::vector<double> c;
  std::vector<double> L;
};

struct CofinalityReport {
  bool pass = false;
  std::size_t failing_index = 0;  // 1-based; 0 when passing
  std::string reason;
  std::vector<double> bound;      // (C^2 / D)^(i-1) * c_1 / L_1
  std::vector<double> ratio;      // c_i / L_i
};

CofinalityReport cofinality_check(const CofinalSequence& seq);

/// Parameters t* in [0, k) where the Reeb direction of cos(2 pi t) dx + sin(2 pi t) dy
/// is positively proportional to (m, n).
std::vector<double> torsion_tori(int k, std::int64_t m, std::int64_t n);

struct TorsionGenerator {
  std::string label;  // "hat_j" or "check_j"
  int torus = 0;
  double t = 0.0;
  int grading = 0;
  double action = 0.0;
};

struct TorsionBound {
  int k = 0;
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::vector<TorsionGenerator> generators;
  int bound = 0;
  double action = 0.0;
  std::int64_t theta = 0;      // first coordinate of the class
  bool hypothesis_holds = false;  // theta <= 0
};

TorsionBound torsion_rank_bound(int k, std::int64_t m, std::int64_t n);

struct GrowthTable {
  std::vector<double> L;
  std::vector<std::int64_t> GF;
  std::vector<std::int64_t> CHF;
  double rate = std::numeric_limits<double>::quiet_NaN();  // needs >= 8 cutoffs
};

/// CHF(L): classes with a record of action <= L whose primitive root carries a
/// nonvanishing certificate at cutoff L. The rate uses growth_fit.
GrowthTable ch_growth(const Census& c, const std::vector<double>& L_values, double action_scale = 1.0);

}  // namespace reebpa
