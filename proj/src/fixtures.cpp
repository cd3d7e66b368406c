#include <string>

#include "reebpa/singular_contact.hpp"

namespace reebpa {

namespace {

struct FixtureText {
  const char* name;
  const char* u;
  const char* a;
  const char* b;
};

// bp is the pullback of dt + r^2 dth through the 2:1 cover of a 4-prong
// model; it is Lipschitz but not C^1 at r = 0 and has d alpha = 2r dr ^ dth.
constexpr FixtureText kFixtures[] = {
    {"std", "1", "0", "r^2"},
    {"bp", "1", "(r/2)*sin(4*th)", "2*r^2*cos(2*th)^2"},
    {"bp_pert", "1", "(r/2)*sin(4*th)", "2*r^2*cos(2*th)^2 + 0.01*sin(2*pi*t)*r^2"},
    {"bp_shear", "1", "(r/2)*sin(4*th) + 0.01*sin(2*pi*t)*r^2", "2*r^2*cos(2*th)^2"},
    {"neg_axis", "r - 0.05", "0", "r^2"},
};

}  // namespace

ChartContactForm fixture(std::string_view name) {
  for (const auto& f : kFixtures)
    if (name == f.name) return ChartContactForm::parse(f.name, f.u, f.a, f.b);
  throw Error("unknown fixture '" + std::string(name) + "'");
}

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& f : kFixtures) out.emplace_back(f.name);
  return out;
}

}  // namespace reebpa
