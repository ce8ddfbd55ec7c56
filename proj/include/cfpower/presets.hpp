#pragma once

#include "cfpower/model.hpp"

namespace cfpower::presets {

inline EquationCoefficients unit_equation() { return EquationCoefficients({1, 1}); }

// Two users with small asymmetric gain alphabets.
inline DiscreteChannelModel example1() {
  return DiscreteChannelModel({
      Marginal{{1.0, 3.0}, {0.6, 0.4}},
      Marginal{{0.5, 2.0}, {0.8, 0.2}},
  });
}

// Two i.i.d. users on a three-point alphabet.
inline DiscreteChannelModel example2() {
  Marginal m{{0.5, 1.0, 2.5}, {0.1175, 0.2760, 0.6065}};
  return DiscreteChannelModel({m, m});
}

// Two i.i.d. users on a ten-point alphabet.
inline DiscreteChannelModel example3() {
  Marginal m{{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0},
             {0.0308, 0.0867, 0.1277, 0.1483, 0.1487, 0.1332, 0.1893, 0.0914, 0.0328, 0.0111}};
  return DiscreteChannelModel({m, m});
}

// Two i.i.d. users on a symmetric two-point alphabet.
inline DiscreteChannelModel remark() {
  Marginal m{{0.5, 1.0}, {0.5, 0.5}};
  return DiscreteChannelModel({m, m});
}

}  // namespace cfpower::presets
