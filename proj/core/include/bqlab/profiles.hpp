#pragma once

#include <string>

#include "bqlab/field.hpp"

namespace bqlab {

/// Parametric initial profile.
///   zero      0
///   gaussian  a exp(-|x-c|^2 / (2 w^2))
///   packet    gaussian envelope times cos(xi0 (x - c)) along axis 0
///   mode      a cos(xi0 x) with xi0 on the lattice
struct ProfileSpec {
  std::string kind = "zero";
  double amplitude = 0.0;
  double width = 1.0;
  double center = 0.0;
  double frequency = 0.0;
};

Field make_profile(const Grid& g, const ProfileSpec& spec);

}  // namespace bqlab
