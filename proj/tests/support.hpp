#pragma once

#include <cmath>
#include <random>

#include "mecoff/scenario.hpp"

namespace testing_support {

using namespace mecoff;

inline ComplexMatrix random_complex(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = Complex(n(gen), n(gen));
  return m;
}

inline Scenario scenario(int devices, std::uint64_t seed, ScenarioConfig base = {}) {
  base.num_devices = devices;
  base.seed = seed;
  return generate_scenario(base);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace testing_support
