#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "nplab/subspace.hpp"

namespace nplab::innermt {

using subspace::SubspaceModel;
using ModelPtr = std::shared_ptr<const SubspaceModel>;

struct QMapResult {
  Eigen::MatrixXcd matrix;
  /// sum_{n>N} b_n, the b-mass of the dropped terms |k| > N.
  double omitted_mass = 0.0;
  /// Number of multi-indices k with b_|k| != 0 that contributed.
  std::size_t terms = 0;
};

/// Q(A) = sum_k c_k M_{z^k} A M_{z^k}^*, c_k = b_|k| |k|!/k!, compressed to
/// the truncated space (orthonormal coordinates). Entries are exact for
/// the included terms.
QMapResult q_map(const kernelspace::TruncatedSpace& space, const Eigen::MatrixXcd& A);

inline constexpr double kClampTolerance = 1e-9;
inline constexpr double kAbortTolerance = 1e-6;
inline constexpr double kRangeTolerance = 1e-10;

struct ClampReport {
  std::size_t clamped = 0;     ///< negative eigenvalues set to 0
  /// Of those, how many lay in [-1e-6, -1e-9): tolerated but suspicious.
  std::size_t beyond_clamp_band = 0;
  double most_negative = 0.0;  ///< smallest eigenvalue before clamping
};

/// Truncated inner multiplier: S = (P_M - Q(P_M))^{1/2}, E = range S.
class InnerMultiplier {
 public:
  InnerMultiplier(ModelPtr model, Eigen::MatrixXcd S, Eigen::MatrixXcd ebasis, Eigen::VectorXd eigenvalues,
                  ClampReport clamp, double omitted_mass);

  const SubspaceModel& model() const noexcept { return *model_; }
  const ModelPtr& model_ptr() const noexcept { return model_; }
  const Eigen::MatrixXcd& S() const noexcept { return S_; }
  /// Orthonormal basis of E, canonical for the range.
  const Eigen::MatrixXcd& ebasis() const noexcept { return ebasis_; }
  /// S e_j for the basis vectors e_j of E.
  const Eigen::MatrixXcd& s_ebasis() const noexcept { return s_ebasis_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  const ClampReport& clamp_report() const noexcept { return clamp_; }
  double omitted_mass() const noexcept { return omitted_mass_; }
  Eigen::Index dim_e() const noexcept { return ebasis_.cols(); }
  int fiber_dim() const noexcept { return model_->space().fiber_dim(); }

 private:
  ModelPtr model_;
  Eigen::MatrixXcd S_;
  Eigen::MatrixXcd ebasis_;
  Eigen::MatrixXcd s_ebasis_;
  Eigen::VectorXd eigenvalues_;
  ClampReport clamp_;
  double omitted_mass_;
};

/// Requires a certified NP kernel and a nonzero model. Throws
/// NumericalContractError when an eigenvalue of P - Q(P) is below -1e-6.
InnerMultiplier construct_inner(ModelPtr model);
InnerMultiplier construct_inner(const SubspaceModel& model);

/// phi(lambda): E -> D, entry (i, j) = (S e_j)_i(lambda).
Eigen::MatrixXcd phi_matrix(const InnerMultiplier& inner, const Point& lambda);

struct ReproductionCheck {
  Complex lhs;     ///< k_lambda(mu) <phi(mu) phi(lambda)^* x, y>
  Complex rhs;     ///< <P_M (k_lambda x), k_mu y>
  double residual = 0.0;
  double tolerance = 0.0;
  bool ok() const { return residual <= tolerance; }
};

ReproductionCheck projection_reproduction_check(const InnerMultiplier& inner, const Point& lambda,
                                                const Point& mu, const Eigen::VectorXcd& x,
                                                const Eigen::VectorXcd& y);

inline constexpr double kDefaultSvdTolerance = 1e-7;

struct RankProfile {
  int m = 0;
  std::vector<int> ranks;
  /// A singular value fell in [svd_tol/10, 10 svd_tol].
  std::vector<bool> ambiguous;
  /// Rank below m.
  std::vector<bool> submaximal;
};

RankProfile rank_profile(const InnerMultiplier& inner, const std::vector<Point>& points,
                         double svd_tol = kDefaultSvdTolerance);

struct IsometrySample {
  double t = 0.0;
  std::vector<double> sigma;  ///< descending, min(fiber_dim, dim E) values
  /// Relative kernel tail at t z, a diagnostic only: phi is evaluated
  /// exactly for the truncated model.
  double tail_bound = 0.0;
};

/// Default largest radius accepted by the phi scans.
inline constexpr double kDefaultMaxT = 0.999;

std::vector<IsometrySample> boundary_isometry_scan(const InnerMultiplier& inner, const Point& z,
                                                   const std::vector<double>& t_grid,
                                                   double max_t = kDefaultMaxT);

void write_isometry_csv(std::ostream& out, const std::vector<IsometrySample>& samples);

/// Dense matrix text format:
///   nplab-matrix 1
///   rows <R> cols <C>
///   basis <label_0> ... <label_{R-1}>
///   then R lines of C entries "re,im", separated by single spaces.
/// Labels are "(k_1,...,k_d)/fiber" in graded-lex order.
void write_matrix(std::ostream& out, const Eigen::MatrixXcd& M, const kernelspace::TruncatedSpace& space);
Eigen::MatrixXcd read_matrix(std::istream& in);

}  // namespace nplab::innermt
