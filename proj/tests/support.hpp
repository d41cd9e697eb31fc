#pragma once

#include "returnwalk/lattice_model.hpp"
#include "returnwalk/rational.hpp"

#include <initializer_list>
#include <string>
#include <utility>

namespace rwtest {

// Exact finite law from (point, "num/den") pairs.
inline rw::StepLaw exact_law(int dim, std::initializer_list<std::pair<rw::Point, const char*>> atoms) {
  rw::RawLaw raw{dim, rw::Family::FiniteAtoms, {}, 0.0};
  for (const auto& [x, q] : atoms) raw.atoms.push_back({x, rw::parse_rational(q)});
  return rw::validate_law(raw);
}

inline rw::StepLaw float_law(int dim, std::initializer_list<std::pair<rw::Point, double>> atoms) {
  rw::RawLaw raw{dim, rw::Family::FiniteAtoms, {}, 0.0};
  for (const auto& [x, q] : atoms) raw.atoms.push_back({x, q});
  return rw::validate_law(raw);
}

inline rw::StepLaw deterministic_e1(int dim) {
  rw::Point e(static_cast<std::size_t>(dim), 0);
  e[0] = 1;
  return exact_law(dim, {{e, "1"}});
}

inline rw::StepLaw drifted() { return rw::drifted_walk(rw::Rational(4, 5)); }

}  // namespace rwtest
