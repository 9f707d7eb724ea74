#include "nplab/linalg.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace nplab::linalg {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  }
};

}  // namespace

std::vector<std::vector<Index>> block_components(const Eigen::MatrixXcd& A) {
  const Index n = A.rows();
  UnionFind uf(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i != j && A(i, j) != std::complex<double>(0.0)) uf.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  std::map<std::size_t, std::vector<Index>> groups;
  for (Index i = 0; i < n; ++i) groups[uf.find(static_cast<std::size_t>(i))].push_back(i);
  std::vector<std::vector<Index>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

std::vector<std::vector<std::size_t>> overlap_components(const std::vector<std::vector<Index>>& supports) {
  UnionFind uf(supports.size());
  std::map<Index, std::size_t> owner;
  for (std::size_t s = 0; s < supports.size(); ++s) {
    for (Index i : supports[s]) {
      auto [it, inserted] = owner.emplace(i, s);
      if (!inserted) uf.unite(s, it->second);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t s = 0; s < supports.size(); ++s) groups[uf.find(s)].push_back(s);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

std::vector<EigenBlock> hermitian_eig_blocks(const Eigen::MatrixXcd& A) {
  std::vector<EigenBlock> out;
  for (auto& block : block_components(A)) {
    const auto m = static_cast<Index>(block.size());
    EigenBlock eb;
    if (m == 1) {
      eb.values = Eigen::VectorXd::Constant(1, A(block[0], block[0]).real());
      eb.vectors = Eigen::MatrixXcd::Identity(1, 1);
    } else {
      Eigen::MatrixXcd sub(m, m);
      for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) sub(i, j) = A(block[static_cast<std::size_t>(i)], block[static_cast<std::size_t>(j)]);
      }
      sub = 0.5 * (sub + sub.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sub);
      eb.values = es.eigenvalues();
      eb.vectors = es.eigenvectors();
    }
    eb.indices = std::move(block);
    out.push_back(std::move(eb));
  }
  return out;
}

HermitianEigen hermitian_eig_blocked(const Eigen::MatrixXcd& A) {
  const Index n = A.rows();
  HermitianEigen out;
  out.values.resize(n);
  out.vectors = Eigen::MatrixXcd::Zero(n, n);
  Index col = 0;
  for (const auto& eb : hermitian_eig_blocks(A)) {
    for (Index k = 0; k < eb.values.size(); ++k) {
      out.values[col] = eb.values[k];
      for (std::size_t i = 0; i < eb.indices.size(); ++i) {
        out.vectors(eb.indices[i], col) = eb.vectors(static_cast<Index>(i), k);
      }
      ++col;
    }
  }
  return out;
}

Orthonormalized orthonormalize_cgs2(const Eigen::MatrixXcd& candidates, double rel_tol) {
  const Index n = candidates.rows();
  Orthonormalized out;
  out.basis.resize(n, std::min(n, candidates.cols()));
  Index r = 0;
  for (Index j = 0; j < candidates.cols(); ++j) {
    Eigen::VectorXcd v = candidates.col(j);
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (int pass = 0; pass < 2 && r > 0; ++pass) {
      const Eigen::VectorXcd h = out.basis.leftCols(r).adjoint() * v;
      v -= out.basis.leftCols(r) * h;
    }
    const double res = v.norm();
    if (res <= rel_tol * norm0 || r == n) continue;
    out.basis.col(r++) = v / res;
    out.kept.push_back(static_cast<std::size_t>(j));
  }
  out.basis.conservativeResize(n, r);
  return out;
}

Eigen::MatrixXcd canonical_range_basis(const Eigen::MatrixXcd& V, double residual_tol) {
  const Index n = V.rows(), rank = V.cols();
  if (rank == 0) return Eigen::MatrixXcd(n, 0);
  for (double tol : {residual_tol, residual_tol * 1e-3, residual_tol * 1e-6}) {
    Eigen::MatrixXcd Q(n, rank);
    Index r = 0;
    for (Index j = 0; j < n && r < rank; ++j) {
      // Column j of V V*.
      Eigen::VectorXcd v = V * V.row(j).adjoint();
      for (int pass = 0; pass < 2 && r > 0; ++pass) {
        const Eigen::VectorXcd h = Q.leftCols(r).adjoint() * v;
        v -= Q.leftCols(r) * h;
      }
      const double res = v.norm();
      if (res <= tol) continue;
      Q.col(r++) = v / res;
    }
    if (r == rank) return Q;
  }
  return V;
}

}  // namespace nplab::linalg
