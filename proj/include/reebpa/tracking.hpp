#pragma once

// Numerical certificate that a flow Psi tracks the simple orbits of a flow Phi
// up to period L, and the resulting equality of Lefschetz sums per class.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "reebpa/census.hpp"
#include "reebpa/flow.hpp"

namespace reebpa {

struct TrackedOrbit {
  std::size_t id = 0;
  Section section;  // centre on the orbit, P of radius r_P inside Q of radius r_max
  int returns = 1;
  double period = 1.0;
};

struct TrackingOptions {
  int uniqueness_rings = 4;
  int uniqueness_per_ring = 16;
  std::size_t tube_samples = 1000;
  double tube_margin = 0.0;
  std::size_t field_samples = 10000;
  double field_tol = 1e-9;
  double domain_radius = 1.0;  // field samples are drawn from [0, 1) x disk(domain_radius)
  int return_probes = 64;
  std::uint64_t seed = 1;
  ReturnOptions ret;
};

struct OrbitCheck {
  std::size_t id = 0;
  bool a = false, b = false, c = false, d = false;
  std::size_t fixed_points_in_P = 0;
  double uniqueness_margin = 0.0;  // min |Hol(y) - y| / |y - x| over probes of P
  double tube_distance = std::numeric_limits<double>::infinity();
  double field_sup = 0.0;
  double monodromy_sup = 0.0;
  std::size_t field_samples_used = 0;
  double max_return_time = 0.0;
  double mean_return_time = 0.0;
  std::string note;

  bool pass() const { return a && b && c && d; }
};

struct TrackingReport {
  double L = 0.0;
  bool pass = false;
  std::vector<OrbitCheck> orbits;  // by id
};

TrackingReport tracking_certificate(const FlowModel& phi, const FlowModel& psi,
                                    const std::vector<TrackedOrbit>& orbits, double L,
                                    const TrackingOptions& opts = {});

struct SumCheck {
  bool pass = false;
  int sum_phi = 0;
  int sum_psi = 0;
  int difference = 0;  // sum_phi - sum_psi
  std::size_t orbits_phi = 0;
  std::size_t orbits_psi = 0;
};

/// Compares Lefschetz sums over simple orbits of period <= L in one class.
SumCheck tracking_sum_check(const Census& phi, const Census& psi, const HomotopyClassKey& key, double L);

}  // namespace reebpa
