#pragma once

#include <Eigen/Dense>

// Bitwise equality for dense Eigen expressions (determinism checks). NaN
// entries compare unequal, which is what a byte-identity test wants.
template <typename A, typename B>
bool same_bits(const A& a, const B& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!(a(i, j) == b(i, j))) return false;
  return true;
}
