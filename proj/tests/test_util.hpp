#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "vcrit/field.hpp"

namespace testutil {

inline double max_abs_diff(const vcrit::VectorField3D& a, const vcrit::VectorField3D& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  return m;
}

inline double max_abs(const vcrit::VectorField3D& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::fabs(v));
  return m;
}

inline vcrit::VectorField3D random_field(const vcrit::GridSpec& g, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  vcrit::VectorField3D f(g);
  for (double& v : f.data()) v = nd(rng);
  return f;
}

inline std::vector<std::uint8_t> random_mask(std::size_t cells, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution b(p);
  std::vector<std::uint8_t> m(cells);
  for (auto& x : m) x = b(rng) ? 1 : 0;
  return m;
}

}  // namespace testutil
