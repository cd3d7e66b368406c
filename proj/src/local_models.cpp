#include "reebpa/local_models.hpp"

#include <numbers>
#include <string>

namespace reebpa {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_angle(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

Polar to_polar(const Vec2& p) { return {p.norm(), wrap_angle(std::atan2(p.y(), p.x()))}; }

Vec2 from_polar(const Polar& p) { return {p.r * std::cos(p.theta), p.r * std::sin(p.theta)}; }

StandardPAMap::StandardPAMap(int n, int k, double lambda) : n_(n), k_(0), lambda_(lambda) {
  if (n < 2) throw Error("standard PA map needs n >= 2 prongs, got " + std::to_string(n));
  if (!(lambda > 1.0)) throw Error("standard PA map needs stretch lambda > 1");
  k_ = ((k % n) + n) % n;
}

int StandardPAMap::sector(double theta) const {
  const int j = static_cast<int>(std::floor(wrap_angle(theta) * n_ / kTwoPi));
  return std::min(std::max(j, 0), n_ - 1);
}

Polar StandardPAMap::lift(int n, int shift, double lambda, const Polar& p) {
  if (p.r == 0.0) return {0.0, 0.0};
  const double theta = wrap_angle(p.theta);
  int j = static_cast<int>(std::floor(theta * n / kTwoPi));
  j = std::min(std::max(j, 0), n - 1);
  const double psi = 0.5 * n * (theta - kTwoPi * j / n);
  const Vec2 w = apply_A_lambda<double>(lambda, Vec2(std::cos(psi), std::sin(psi)));
  const double psi_image = std::atan2(std::max(w.y(), 0.0), w.x());
  return {p.r * w.norm(), wrap_angle(kTwoPi * (j + shift) / n + 2.0 * psi_image / n)};
}

Polar StandardPAMap::apply(const Polar& p) const { return lift(n_, k_, lambda_, p); }

Polar StandardPAMap::apply_inverse(const Polar& p) const {
  return lift(n_, n_ - k_, 1.0 / lambda_, p);
}

Vec2 StandardPAMap::project(const Polar& p) const {
  const double half = 0.5 * n_ * p.theta;
  return {p.r * std::cos(half), p.r * std::sin(half)};
}

TorusAutomorphism::TorusAutomorphism(const IntMatrix2& a) : a_(a) {
  const std::int64_t d = checked_det(a);
  if (d != 1 && d != -1) throw Error("torus automorphism must have det +-1");
  const std::int64_t tr = a.trace();
  if (std::abs(tr) <= 2)
    throw Error("torus automorphism is not hyperbolic (|tr| <= 2)");
  inv_ = unimodular_inverse(a);
}

double TorusAutomorphism::stretch() const {
  const double tr = static_cast<double>(trace());
  const double dt = static_cast<double>(det());
  const double disc = std::sqrt(tr * tr - 4.0 * dt);
  return 0.5 * (std::abs(tr) + disc);
}

Vec2 wrap_torus(const Vec2& p) {
  Vec2 w(p.x() - std::floor(p.x()), p.y() - std::floor(p.y()));
  for (int i = 0; i < 2; ++i)
    if (w(i) >= 1.0) w(i) = 0.0;
  return w;
}

Vec2 TorusAutomorphism::operator()(const Vec2& p) const { return wrap_torus(lift(p)); }

Vec2 TorusAutomorphism::inverse(const Vec2& p) const {
  return wrap_torus(inv_.cast<double>() * p);
}

std::int64_t count_fixed_points(const TorusAutomorphism& a, int k) {
  if (k < 1) throw Error("count_fixed_points needs k >= 1");
  const IntMatrix2 m = checked_power(a.matrix(), k) - IntMatrix2::Identity();
  return std::abs(checked_det(m));
}

Vec2 SuspensionFlow::base_map(const Vec2& p) const {
  return std::visit([&](const auto& m) -> Vec2 { return m(p); }, base_);
}

Vec2 SuspensionFlow::base_inverse(const Vec2& p) const {
  return std::visit([&](const auto& m) -> Vec2 { return m.inverse(p); }, base_);
}

SuspensionFlow::State SuspensionFlow::flow(const State& x, double T) const {
  if (!std::isfinite(T)) throw DomainError("suspension flow time must be finite");
  const double total = x.s + T;
  const double turns = std::floor(total);
  State out{total - turns, x.p};
  if (out.s >= 1.0) out.s = 0.0;
  const auto n = static_cast<long long>(turns);
  for (long long i = 0; i < n; ++i) out.p = base_map(out.p);
  for (long long i = 0; i > n; --i) out.p = base_inverse(out.p);
  return out;
}

}  // namespace reebpa
