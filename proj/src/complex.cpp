#include "biip/complex.hpp"

#include <algorithm>
#include <ostream>

#include "biip/errors.hpp"

namespace biip {

Eigen::SparseMatrix<double> SignedIncidence::matrix() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(entries.size());
  for (const auto& [r, c, s] : entries) trips.emplace_back(r, c, static_cast<double>(s));
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

void SignedIncidence::dump(std::ostream& os) const {
  for (const auto& [r, c, s] : entries) os << r << ' ' << c << ' ' << s << '\n';
}

std::vector<std::vector<int>> enumerate_cliques(const GraphWithBoundary& g, int k) {
  if (k < 0 || k > OrientedCliqueComplex::kMaxLevel)
    throw SpecError("clique level must be in [0, 3]");

  std::vector<std::vector<int>> out;
  if (k == 0) {
    out.reserve(g.node_count);
    for (int v = 0; v < g.node_count; ++v) out.push_back({v});
    return out;
  }
  if (k == 1) {
    out.reserve(g.edges.size());
    for (const auto& [u, v] : g.edges) out.push_back({u, v});
    return out;  // g.edges is already lexicographically sorted
  }

  const auto adj = g.adjacency();
  const auto common_above = [&adj](const std::vector<int>& clique, int above) {
    // Nodes > `above` adjacent to every member of `clique`.
    std::vector<int> cands;
    for (int w : adj[clique[0]])
      if (w > above) cands.push_back(w);
    for (std::size_t i = 1; i < clique.size(); ++i) {
      std::vector<int> next;
      std::set_intersection(cands.begin(), cands.end(), adj[clique[i]].begin(),
                            adj[clique[i]].end(), std::back_inserter(next));
      cands = std::move(next);
    }
    return cands;
  };

  std::vector<std::vector<int>> frontier = enumerate_cliques(g, k - 1);
  for (const auto& clique : frontier)
    for (int w : common_above(clique, clique.back())) {
      std::vector<int> bigger = clique;
      bigger.push_back(w);
      out.push_back(std::move(bigger));
    }
  std::sort(out.begin(), out.end());
  return out;
}

OrientedCliqueComplex::OrientedCliqueComplex(const GraphWithBoundary& g, int max_level)
    : max_level_(max_level) {
  if (max_level < 0 || max_level > kMaxLevel)
    throw SpecError("complex max_level must be in [0, 3]");

  cliques_.resize(max_level_ + 1);
  index_.resize(max_level_ + 1);
  weights_.resize(max_level_ + 1);
  for (int k = 0; k <= max_level_; ++k) {
    cliques_[k] = enumerate_cliques(g, k);
    for (int i = 0; i < static_cast<int>(cliques_[k].size()); ++i)
      index_[k][cliques_[k][i]] = i;
    weights_[k] = Eigen::VectorXd::Ones(static_cast<int>(cliques_[k].size()));
  }

  // delta_k rows: each (k+1)-clique against its k-faces with alternating
  // signs, (delta f)(i_0..i_{k+1}) = sum_j (-1)^j f(.. omit i_j ..).
  coboundaries_.resize(max_level_ + 1);
  for (int k = 0; k < max_level_; ++k) {
    SignedIncidence inc;
    inc.rows = size(k + 1);
    inc.cols = size(k);
    for (int r = 0; r < inc.rows; ++r) {
      const auto& sigma = cliques_[k + 1][r];
      int sign = 1;
      for (std::size_t j = 0; j < sigma.size(); ++j, sign = -sign) {
        std::vector<int> face;
        face.reserve(sigma.size() - 1);
        for (std::size_t i = 0; i < sigma.size(); ++i)
          if (i != j) face.push_back(sigma[i]);
        const int c = index_[k].at(face);  // faces of a clique are cliques
        inc.entries.emplace_back(r, c, sign);
      }
    }
    // Faces come out ordered by omitted vertex, not by column id; restore the
    // documented row-major entry order.
    std::sort(inc.entries.begin(), inc.entries.end());
    coboundaries_[k] = std::move(inc);
  }
  // Top level: no (max_level_+1)-cliques are enumerated, so delta at the top
  // maps into an empty space.
  coboundaries_[max_level_] = SignedIncidence{0, size(max_level_), {}};

  laplacian_cache_.resize(max_level_ + 1);
  laplacian_ready_.assign(max_level_ + 1, false);
}

void OrientedCliqueComplex::check_level(int k) const {
  if (k < 0 || k > max_level_)
    throw SpecError("level " + std::to_string(k) + " outside [0, " +
                    std::to_string(max_level_) + "]");
}

int OrientedCliqueComplex::size(int k) const {
  check_level(k);
  return static_cast<int>(cliques_[k].size());
}

const std::vector<std::vector<int>>& OrientedCliqueComplex::cliques(int k) const {
  check_level(k);
  return cliques_[k];
}

int OrientedCliqueComplex::index_of(int k, const std::vector<int>& clique) const {
  check_level(k);
  const auto it = index_[k].find(clique);
  return it == index_[k].end() ? -1 : it->second;
}

const Eigen::VectorXd& OrientedCliqueComplex::weights(int k) const {
  check_level(k);
  return weights_[k];
}

void OrientedCliqueComplex::set_weights(int k, Eigen::VectorXd w) {
  check_level(k);
  if (w.size() != size(k)) throw SpecError("weight vector size mismatch");
  if ((w.array() <= 0.0).any()) throw SpecError("weights must be strictly positive");
  weights_[k] = std::move(w);
  laplacian_ready_.assign(max_level_ + 1, false);
}

const SignedIncidence& OrientedCliqueComplex::coboundary(int k) const {
  check_level(k);
  return coboundaries_[k];
}

Eigen::SparseMatrix<double> OrientedCliqueComplex::adjoint(int k) const {
  check_level(k);
  const SignedIncidence& inc = coboundaries_[k];
  Eigen::SparseMatrix<double> m(inc.cols, inc.rows);
  if (inc.rows == 0) return m;  // top level: adjoint of the zero map
  // W_k^{-1} delta_k^T W_{k+1}, assembled entrywise.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(inc.entries.size());
  for (const auto& [r, c, s] : inc.entries)
    trips.emplace_back(c, r, s * weights_[k + 1](r) / weights_[k](c));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

const Eigen::SparseMatrix<double>& OrientedCliqueComplex::hodge_laplacian(int k) const {
  check_level(k);
  if (!laplacian_ready_[k]) {
    Eigen::SparseMatrix<double> lap(size(k), size(k));
    if (k > 0 && size(k - 1) > 0) {
      const Eigen::SparseMatrix<double> down = coboundaries_[k - 1].matrix();
      lap = lap + Eigen::SparseMatrix<double>(down * adjoint(k - 1));
    }
    if (size(k) > 0 && coboundaries_[k].rows > 0) {
      const Eigen::SparseMatrix<double> up = coboundaries_[k].matrix();
      lap = lap + Eigen::SparseMatrix<double>(adjoint(k) * up);
    }
    laplacian_cache_[k] = std::move(lap);
    laplacian_ready_[k] = true;
  }
  return laplacian_cache_[k];
}

double OrientedCliqueComplex::inner_product(int k, const KForm& f, const KForm& g) const {
  check_level(k);
  if (f.level != k || g.level != k) throw SpecError("inner_product: form level mismatch");
  if (f.values.size() != size(k) || g.values.size() != size(k))
    throw SpecError("inner_product: form size mismatch");
  return (weights_[k].array() * f.values.array() * g.values.array()).sum();
}

}  // namespace biip
