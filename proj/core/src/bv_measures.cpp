#include "cml/bv_measures.hpp"

namespace cml {

std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "zero_extension"; }

Boundary boundary_from_string(const std::string& name) {
  if (name == "zero_extension") return Boundary::zero_extension;
  if (name == "periodic") return Boundary::periodic;
  throw std::invalid_argument("unknown boundary '" + name + "' (expected zero_extension or periodic)");
}

}  // namespace cml
