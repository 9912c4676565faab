#pragma once

#include "betheforge/scalar.hpp"

#include <algorithm>
#include <vector>

namespace betheforge {

/// One Bethe condition lhs = rhs with its relative scale.
template <class S>
struct Residual {
  S lhs;
  S rhs;
  S raw;
  double scale;

  double relative() const { return ScalarTraits<S>::magnitude(raw) / scale; }
};

template <class S>
Residual<S> make_residual(const S& lhs, const S& rhs) {
  double scale = std::max({ScalarTraits<S>::magnitude(lhs), ScalarTraits<S>::magnitude(rhs), 1.0});
  return Residual<S>{lhs, rhs, S(lhs - rhs), scale};
}

template <class S>
double max_relative(const std::vector<Residual<S>>& rs) {
  double m = 0.0;
  for (const auto& r : rs) m = std::max(m, r.relative());
  return m;
}

}  // namespace betheforge
