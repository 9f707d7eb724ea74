#pragma once

#include <Eigen/Dense>

#include "nplab/truncated_space.hpp"

namespace nplab::kernelspace {

/// A fiber-valued polynomial in a truncated space, stored by raw monomial
/// coefficients (not scaled by the norm weights).
class PolyFn {
 public:
  explicit PolyFn(SpacePtr space);
  PolyFn(SpacePtr space, Eigen::VectorXcd coeffs);

  /// From coordinates in the orthonormal basis z^k / ||z^k||.
  static PolyFn from_onb(SpacePtr space, const Eigen::VectorXcd& onb);
  static PolyFn constant(SpacePtr space, Complex c, int fiber = 0);
  static PolyFn monomial(SpacePtr space, const MultiIndex& k, Complex c = 1.0, int fiber = 0);

  const TruncatedSpace& space() const noexcept { return *space_; }
  const SpacePtr& space_ptr() const noexcept { return space_; }

  const Eigen::VectorXcd& coeffs() const noexcept { return coeffs_; }
  Complex coeff(std::size_t monomial, int fiber = 0) const;
  void set_coeff(std::size_t monomial, int fiber, Complex c);
  void add_to_coeff(std::size_t monomial, int fiber, Complex c);

  /// Largest |k| carrying a nonzero coefficient; -1 for the zero function.
  int degree() const;
  bool is_zero() const { return degree() < 0; }

  /// Coordinates in the orthonormal basis.
  Eigen::VectorXcd onb() const;

  /// Degree-n homogeneous part.
  PolyFn homogeneous_part(int n) const;
  /// The same function in `target` (same kernel and fiber). Fails if the
  /// degree does not fit rather than truncating.
  PolyFn embed(const SpacePtr& target) const;

  PolyFn& operator+=(const PolyFn& other);
  PolyFn& operator-=(const PolyFn& other);
  PolyFn& operator*=(Complex s);

 private:
  SpacePtr space_;
  Eigen::VectorXcd coeffs_;

  void require_same_space(const PolyFn& other) const;
};

PolyFn operator+(PolyFn a, const PolyFn& b);
PolyFn operator-(PolyFn a, const PolyFn& b);
PolyFn operator*(Complex s, PolyFn a);

/// Sum over monomials of w_k <p_k, q_k>_D. Linear in p, conjugate-linear in q.
Complex poly_inner(const PolyFn& p, const PolyFn& q);
double poly_norm(const PolyFn& p);
/// p(lambda) as a vector of length fiber_dim.
Eigen::VectorXcd point_eval(const PolyFn& p, const Point& lambda);

/// Product phi * f with phi scalar, computed exactly in `target`, whose
/// degree must be >= deg phi + deg f. Fails loudly otherwise.
PolyFn multiply(const PolyFn& phi, const PolyFn& f, const SpacePtr& target);

/// Same kernel check used by the binary operations.
bool same_kernel(const TruncatedSpace& a, const TruncatedSpace& b);

}  // namespace nplab::kernelspace
