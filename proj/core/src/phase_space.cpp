#include "cml/phase_space.hpp"

namespace cml {

std::string to_string(Topology t) { return t == Topology::circle ? "circle" : "interval"; }

Topology topology_from_string(const std::string& name) {
  if (name == "interval") return Topology::interval;
  if (name == "circle") return Topology::circle;
  throw std::invalid_argument("unknown topology '" + name + "' (expected interval or circle)");
}

}  // namespace cml
