#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nplab/kernel_spec.hpp"

namespace nplab::kernelspace {

/// Exponent vector k = (k_1, ..., k_d).
struct MultiIndex {
  std::vector<int> exps;

  int total() const noexcept;
  std::size_t size() const noexcept { return exps.size(); }
  int operator[](std::size_t i) const { return exps[i]; }
  /// k! = k_1! ... k_d!, as log.
  double log_factorial() const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// Graded lexicographic order: total degree first, then larger leading
/// exponents first, so (1,0) < (0,1) and (2,0) < (1,1) < (0,2).
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

std::string to_string(const MultiIndex& k);

/// Truncation of H(k) (or H(k, D) with dim D = fiber_dim) to the monomials
/// of total degree <= N, in graded lexicographic order.
///
/// Vector layout: coordinate index = monomial_index * fiber_dim + fiber.
class TruncatedSpace {
 public:
  TruncatedSpace(KernelSpec spec, int degree, int fiber_dim);

  const KernelSpec& spec() const noexcept { return spec_; }
  int d() const noexcept { return spec_.dim(); }
  int degree() const noexcept { return degree_; }
  int fiber_dim() const noexcept { return fiber_dim_; }
  std::size_t monomial_count() const noexcept { return basis_.size(); }
  std::size_t dim() const noexcept { return basis_.size() * static_cast<std::size_t>(fiber_dim_); }

  const MultiIndex& monomial(std::size_t i) const { return basis_[i]; }
  const std::vector<MultiIndex>& basis() const noexcept { return basis_; }
  /// Monomials of total degree n occupy [degree_begin(n), degree_begin(n+1)).
  std::size_t degree_begin(int n) const;
  int monomial_degree(std::size_t i) const { return basis_[i].total(); }

  /// Index of k in the basis, if |k| <= N.
  std::optional<std::size_t> index_of(const MultiIndex& k) const;
  /// Index of basis[i] + basis[j] exponents, if within the truncation of
  /// `target` (which must share d).
  std::optional<std::size_t> index_of_sum(const MultiIndex& a, const MultiIndex& b) const;

  /// ||z^k||^2 = k! / (a_|k| |k|!).
  double weight(std::size_t i) const { return weight_[i]; }
  double sqrt_weight(std::size_t i) const { return sqrt_weight_[i]; }
  double log_weight(std::size_t i) const { return log_weight_[i]; }
  /// Kernel coefficients a_0..a_N used by this space.
  const std::vector<double>& a() const noexcept { return a_; }

  /// Values z^k for every basis monomial.
  Eigen::VectorXcd monomial_values(const Point& z) const;

 private:
  KernelSpec spec_;
  int degree_;
  int fiber_dim_;
  std::vector<MultiIndex> basis_;
  std::vector<std::size_t> degree_begin_;
  std::vector<double> a_;
  std::vector<double> weight_;
  std::vector<double> sqrt_weight_;
  std::vector<double> log_weight_;
  // binom_[n][j] = C(n, j) for graded-lex ranking.
  std::vector<std::vector<std::size_t>> binom_;

  std::size_t count_with_degree(int n, int vars) const;
};

using SpacePtr = std::shared_ptr<const TruncatedSpace>;

/// Truncated space of degree N. Rejects kernels with fewer than N+1
/// coefficients.
SpacePtr build_space(const KernelSpec& spec, int N, int fiber_dim = 1);

/// C(N+d, d).
std::size_t monomial_count(int d, int N);

}  // namespace nplab::kernelspace
