#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nplab/kernelspace.hpp"

namespace nplab::subspace {

using kernelspace::PolyFn;
using kernelspace::SpacePtr;
using kernelspace::TruncatedSpace;

/// Truncation M_N of an invariant subspace, as orthonormal columns in the
/// orthonormal monomial coordinates of the space, plus the projection.
class SubspaceModel {
 public:
  enum class Encoding { generators, point_zero };

  SubspaceModel(SpacePtr space, Encoding encoding, std::vector<PolyFn> generators,
                std::optional<Point> point_zero, Eigen::MatrixXcd basis, Eigen::MatrixXcd projection);

  const TruncatedSpace& space() const noexcept { return *space_; }
  const SpacePtr& space_ptr() const noexcept { return space_; }
  Encoding encoding() const noexcept { return encoding_; }
  const std::vector<PolyFn>& generators() const noexcept { return generators_; }
  const std::optional<Point>& point_zero() const noexcept { return point_zero_; }
  const Eigen::MatrixXcd& basis() const noexcept { return basis_; }
  const Eigen::MatrixXcd& projection() const noexcept { return projection_; }
  Eigen::Index rank() const noexcept { return basis_.cols(); }

 private:
  SpacePtr space_;
  Encoding encoding_;
  std::vector<PolyFn> generators_;
  std::optional<Point> point_zero_;
  Eigen::MatrixXcd basis_;
  Eigen::MatrixXcd projection_;
};

/// Relative tolerance of the orthonormalization in build_submodule.
inline constexpr double kRankTolerance = 1e-10;

/// M_N = span{z^k g : g a generator, |k| + deg g <= N}. Candidates are
/// taken in graded-lex order of k, then generator order, and kept greedily.
SubspaceModel build_submodule(const SpacePtr& space, std::vector<PolyFn> generators,
                              double rel_tol = kRankTolerance);

/// {f in H_N : f(z0) = 0}, the orthocomplement of k_{z0} D. z0 may lie on
/// the boundary when the kernel is summable there.
SubspaceModel build_point_zero(const SpacePtr& space, const Point& z0);

struct RatioValue {
  double value = 0.0;
  /// Relative kernel tail sum_{n>N} a_n |lambda|^{2n} / k_lambda(lambda).
  double tail_bound = 0.0;
};

/// ||P_M k_lambda||^2 / ||k_lambda||^2. For fiber_dim > 1 the largest value
/// over unit fiber vectors is returned.
RatioValue ratio(const SubspaceModel& model, const Point& lambda);
/// ||P_M (k_lambda x)||^2 / ||k_lambda x||^2.
RatioValue ratio(const SubspaceModel& model, const Point& lambda, const Eigen::VectorXcd& x);

struct RadialSample {
  double t = 0.0;
  double ratio = 0.0;
  double tail_bound = 0.0;
};

/// Default limit on the relative kernel tail accepted by radial_scan.
inline constexpr double kRadialTailTolerance = 1e-6;

/// ratio(t z) along a unit direction z. Throws when the tail bound at some
/// t exceeds tail_tol.
std::vector<RadialSample> radial_scan(const SubspaceModel& model, const Point& z,
                                      const std::vector<double>& t_grid,
                                      double tail_tol = kRadialTailTolerance);

void write_radial_csv(std::ostream& out, const std::vector<RadialSample>& samples);

struct ClosedFormValue {
  double value = 0.0;
  double error_bound = 0.0;
};

/// 1 - |k_w(z)|^2 / (k_w(w) k_z(z)) for a d = 1 kernel summable on the
/// boundary, from partial sums through degree N with rigorous tails.
ClosedFormValue counterexample_closed_form(const kernelspace::KernelSpec& spec, Complex z, Complex w,
                                           int N = 100000);

/// P_M 1 / sqrt((P_M 1)(0)). Throws when (P_M 1)(0) <= 1e-12.
PolyFn extremal_solution(const SubspaceModel& model);

/// Largest distance from a basis column of `small` to the range of `big`,
/// after embedding. Zero when M_small is contained in M_big.
double containment_residual(const SubspaceModel& small, const SubspaceModel& big);

/// Residual max(||P^2 - P||, ||P* - P||), entrywise.
double projection_defect(const SubspaceModel& model);

}  // namespace nplab::subspace
