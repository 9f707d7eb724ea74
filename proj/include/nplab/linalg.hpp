#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace nplab::linalg {

using Index = Eigen::Index;

/// Connected components of the graph with an edge i-j whenever A(i,j) or
/// A(j,i) is nonzero. Components are sorted by smallest index, and each
/// component lists its indices in increasing order.
std::vector<std::vector<Index>> block_components(const Eigen::MatrixXcd& A);

/// Components of index sets: sets sharing an index are merged. Returns,
/// for each component, the member set positions in increasing order.
std::vector<std::vector<std::size_t>> overlap_components(const std::vector<std::vector<Index>>& supports);

/// Eigenpairs of one diagonal block of a Hermitian matrix.
struct EigenBlock {
  std::vector<Index> indices;  ///< rows/columns of the block, increasing
  Eigen::VectorXd values;      ///< ascending
  Eigen::MatrixXcd vectors;    ///< local coordinates, one column per value
};

/// Eigendecomposition along the exact sparsity pattern of A.
std::vector<EigenBlock> hermitian_eig_blocks(const Eigen::MatrixXcd& A);

struct HermitianEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;  ///< columns, full length
};

/// Eigendecomposition of a Hermitian matrix, block by block along its
/// exact sparsity pattern. Eigenvalues are in block order, ascending within
/// each block.
HermitianEigen hermitian_eig_blocked(const Eigen::MatrixXcd& A);

struct Orthonormalized {
  Eigen::MatrixXcd basis;           ///< orthonormal columns
  std::vector<std::size_t> kept;    ///< candidate column kept for each basis column
};

/// Greedy classical Gram-Schmidt with reorthogonalization, in column order.
/// A candidate is kept when its residual exceeds rel_tol times its norm.
Orthonormalized orthonormalize_cgs2(const Eigen::MatrixXcd& candidates, double rel_tol);

/// Deterministic orthonormal basis of range(V V*) for V with orthonormal
/// columns: greedy Gram-Schmidt over the projector's columns in index
/// order. Independent of the particular V spanning the range.
Eigen::MatrixXcd canonical_range_basis(const Eigen::MatrixXcd& V, double residual_tol = 1e-3);

}  // namespace nplab::linalg
