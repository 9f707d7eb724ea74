#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nplab/kernel_spec.hpp"
#include "nplab/polyfn.hpp"
#include "nplab/truncated_space.hpp"

namespace nplab::kernelspace {

struct KernelValue {
  Complex value;
  /// Bound on the omitted tail sum a_n |<z,lambda>|^n; 0 for closed forms.
  double tail_bound = 0.0;
  bool closed_form = false;
};

/// Default partial-sum degree for kernels without a closed form.
inline constexpr int kDefaultKernelDegree = 4000;

/// k_lambda(z). Closed form for Szego and alpha in {0, 1}; otherwise the
/// partial sum through degree N with a tail bound. Boundary points
/// (|<z,lambda>| = 1) are accepted only when sum a_n converges.
KernelValue kernel_eval(const KernelSpec& spec, const Point& lambda, const Point& z,
                        int N = kDefaultKernelDegree);

/// Truncation of k_lambda (times the fiber vector x, default e_0 when the
/// fiber is scalar). <f, kvec(lambda) x> = <f(lambda), x> for deg f <= N.
PolyFn kvec(const SpacePtr& space, const Point& lambda);
PolyFn kvec(const SpacePtr& space, const Point& lambda, const Eigen::VectorXcd& x);

/// One point extremal function (1 - k_lambda/k_lambda(lambda)) /
/// sqrt(1 - 1/k_lambda(lambda)), truncated to the space degree.
PolyFn extremal_one_point(const SpacePtr& space, const Point& lambda);
PolyFn extremal_one_point(const KernelSpec& spec, const Point& lambda, int N);

struct ContractiveReport {
  double max_ratio = 0.0;
  bool contractive = true;  ///< max_ratio <= 1 + 1e-9
  std::size_t worst_index = 0;
};

/// max ||phi f|| / ||f|| over the test functions, products taken exactly in
/// a space of degree N (which must hold deg phi + deg f for every f).
ContractiveReport contractive_multiplier_check(const PolyFn& phi,
                                               const std::vector<PolyFn>& test_fns, int N);

struct KernelChainBounds {
  double point_value = 0.0;    ///< ||f(lambda)||^2
  double middle = 0.0;         ///< ||k_lambda f||^2 / ||k_lambda||^2
  double upper = 0.0;          ///< 2 Re <f, k_lambda f> - ||f||^2
  /// Relative size of the kernel tail beyond the truncation, a guide to
  /// how far the middle value may move.
  double tail = 0.0;
  bool chain_holds(double tol = 1e-9) const {
    return point_value <= middle + tol && middle <= upper + tol;
  }
};

/// k_lambda is truncated at degree N >= deg f; products are exact.
KernelChainBounds lemma22_bounds(const PolyFn& f, const Point& lambda, int N);

/// sum_{j<=n} (1 - j/(n+1)) phi_j, the mass-one Fejer mean.
PolyFn fejer_means(const PolyFn& phi, int n);

/// ||p||^2 in H^2 of the sphere: sum |c_k|^2 (d-1)! k! / (d-1+|k|)!.
double hardy_sphere_norm_sq(const PolyFn& p);
double hardy_sphere_norm(const PolyFn& p);

/// Largest singular value of f -> phi f from degree <= N into degree
/// <= N + deg phi. A lower bound for the multiplier norm.
double multiplier_norm_lower(const PolyFn& phi, int N);

struct PsdReport {
  bool psd = false;
  double min_eigenvalue = 0.0;
  Eigen::MatrixXcd gram;  ///< 1 - 1/k_{lambda_j}(lambda_i)
};

/// Positivity of 1 - 1/k on the sample points.
PsdReport np_psd_check(const KernelSpec& spec, const std::vector<Point>& points, double tol = 1e-12,
                       int N = kDefaultKernelDegree);

struct ShiftDefectIdentity {
  double lhs = 0.0;  ///< sum_i ||z_i p||^2 - ||p||^2
  double rhs = 0.0;  ///< ((a_n/a_{n+1}) (n+d)/(n+1) - 1) ||p||^2
};

/// Requires p homogeneous of degree n with n + 1 available in the kernel.
ShiftDefectIdentity shift_defect_identity(const PolyFn& p);

/// Bounds on sum_n b_n from the first N kernel coefficients.
struct MassBounds {
  double lower = 0.0;  ///< sum_{n<=N} b_n
  double upper = 1.0;  ///< 1 - 1/(sum_{n<=N} a_n + tail), 1 when divergent
  /// satisfied: sum b_n = 1 is known (divergent k(1)); violated: the
  /// upper bound is below 1; unverified otherwise.
  HypothesisStatus sum_equals_one = HypothesisStatus::unverified;
};

MassBounds bn_mass_bounds(const KernelSpec& spec, int N);

}  // namespace nplab::kernelspace
