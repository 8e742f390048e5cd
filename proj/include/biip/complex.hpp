#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iosfwd>
#include <map>
#include <tuple>
#include <vector>

#include "biip/forms.hpp"
#include "biip/graph.hpp"

namespace biip {

// Signed incidence between consecutive clique levels, kept as integer
// triplets so exactness checks can run in exact arithmetic. Row r, column c
// carries the orientation sign of the c-th k-clique as a face of the r-th
// (k+1)-clique.
struct SignedIncidence {
  int rows = 0;
  int cols = 0;
  std::vector<std::tuple<int, int, int>> entries;  // (row, col, sign), row-major order

  Eigen::SparseMatrix<double> matrix() const;
  void dump(std::ostream& os) const;  // "row col value" lines, for golden files
};

// Cliques of the graph up to tuples of max_level + 1 nodes, each stored as a
// strictly increasing node tuple (the dictionary orientation) and listed in
// dictionary order. Level k holds the (k+1)-node cliques; levels above 3 are
// never built.
class OrientedCliqueComplex {
 public:
  static constexpr int kMaxLevel = 3;

  explicit OrientedCliqueComplex(const GraphWithBoundary& g, int max_level = kMaxLevel);

  int max_level() const { return max_level_; }
  int size(int k) const;
  const std::vector<std::vector<int>>& cliques(int k) const;
  // Index of a strictly increasing tuple at level k, or -1 when absent.
  int index_of(int k, const std::vector<int>& clique) const;

  const Eigen::VectorXd& weights(int k) const;
  void set_weights(int k, Eigen::VectorXd w);  // strictly positive, resets caches

  // Coboundary delta_k: level-k forms -> level-(k+1) forms, alternating-sign
  // sum over omitted vertices. Empty (0 x size(k)) when level k+1 is empty.
  const SignedIncidence& coboundary(int k) const;

  // Adjoint with respect to the weighted inner products:
  // delta_k^* = W_k^{-1} delta_k^T W_{k+1}.
  Eigen::SparseMatrix<double> adjoint(int k) const;

  // Hodge Laplacian delta_{k-1} delta_{k-1}^* + delta_k^* delta_k; missing
  // levels contribute zero.
  const Eigen::SparseMatrix<double>& hodge_laplacian(int k) const;

  // <f, g>_k = sum_i w_i f_i g_i.
  double inner_product(int k, const KForm& f, const KForm& g) const;

 private:
  void check_level(int k) const;

  int max_level_;
  std::vector<std::vector<std::vector<int>>> cliques_;       // [k][i] -> node tuple
  std::vector<std::map<std::vector<int>, int>> index_;       // tuple -> position
  std::vector<Eigen::VectorXd> weights_;
  std::vector<SignedIncidence> coboundaries_;                // [k]: level k -> k+1
  mutable std::vector<Eigen::SparseMatrix<double>> laplacian_cache_;
  mutable std::vector<bool> laplacian_ready_;
};

// All (k+1)-node cliques of g in dictionary order; the building block of the
// complex, exposed separately for tests.
std::vector<std::vector<int>> enumerate_cliques(const GraphWithBoundary& g, int k);

}  // namespace biip
