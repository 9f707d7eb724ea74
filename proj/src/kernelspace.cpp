#include "nplab/kernelspace.hpp"

#include <cmath>
#include <limits>
#include <map>

#include <Eigen/SVD>

#include "nplab/errors.hpp"

namespace nplab::kernelspace {

namespace {

constexpr double kBoundaryTol = 1e-14;

bool is_geometric(const KernelSpec& spec) {
  return spec.closed_form() == ClosedForm::szego ||
         (spec.closed_form() == ClosedForm::dirichlet_alpha && spec.alpha_fraction().first == 0);
}

bool is_log_kernel(const KernelSpec& spec) {
  return spec.closed_form() == ClosedForm::dirichlet_alpha && spec.alpha_fraction() == std::pair<long, long>{1, 1};
}

}  // namespace

KernelValue kernel_eval(const KernelSpec& spec, const Point& lambda, const Point& z, int N) {
  if (lambda.size() != spec.dim() || z.size() != spec.dim()) {
    throw ValidationError("kernel_eval: point dimension does not match d = " + std::to_string(spec.dim()));
  }
  if (N < 0) throw ValidationError("kernel_eval: degree must be >= 0");
  const Complex x = inner_d(z, lambda);
  const double r = std::abs(x);
  if (r > 1.0 + 1e-12) throw ValidationError("kernel_eval: |<z, lambda>| > 1, outside the closed ball");
  const bool boundary = r >= 1.0 - kBoundaryTol;
  if (boundary && !spec.boundary_summable()) {
    throw ValidationError("kernel_eval: kernel '" + spec.name() +
                          "' does not converge on the boundary (needs sum a_n < infinity)");
  }

  if (is_geometric(spec)) return {1.0 / (1.0 - x), 0.0, true};
  if (is_log_kernel(spec)) {
    if (r < 1e-6) return {1.0 + x / 2.0 + x * x / 3.0 + x * x * x / 4.0, 0.0, true};
    return {-std::log(1.0 - x) / x, 0.0, true};
  }

  std::size_t top = static_cast<std::size_t>(N);
  if (auto md = spec.max_degree()) top = std::min(top, *md);
  Complex sum = 0.0, power = 1.0;
  for (std::size_t n = 0; n <= top; ++n) {
    sum += spec.coeff(n) * power;
    power *= x;
  }
  return {sum, spec.tail_bound(top, std::min(r, 1.0)), false};
}

PolyFn kvec(const SpacePtr& space, const Point& lambda) {
  if (space->fiber_dim() != 1) throw ValidationError("kvec: fiber vector required for fiber_dim > 1");
  return kvec(space, lambda, Eigen::VectorXcd::Ones(1));
}

PolyFn kvec(const SpacePtr& space, const Point& lambda, const Eigen::VectorXcd& x) {
  if (x.size() != space->fiber_dim()) throw ValidationError("kvec: fiber vector has wrong length");
  const Eigen::VectorXcd mono = space->monomial_values(lambda);
  PolyFn out(space);
  for (std::size_t m = 0; m < space->monomial_count(); ++m) {
    const Complex c = std::conj(mono[static_cast<Eigen::Index>(m)]) / space->weight(m);
    for (int j = 0; j < space->fiber_dim(); ++j) out.set_coeff(m, j, c * x[j]);
  }
  return out;
}

PolyFn extremal_one_point(const SpacePtr& space, const Point& lambda) {
  if (space->fiber_dim() != 1) throw ValidationError("extremal_one_point: scalar space required");
  if (lambda.norm() == 0.0) throw ValidationError("extremal_one_point: lambda must be nonzero");
  if (lambda.norm() >= 1.0) throw ValidationError("extremal_one_point: lambda must lie in the open ball");
  const double K = kernel_eval(space->spec(), lambda, lambda).value.real();
  PolyFn phi = PolyFn::constant(space, 1.0) - Complex(1.0 / K) * kvec(space, lambda);
  phi *= 1.0 / std::sqrt(1.0 - 1.0 / K);
  return phi;
}

PolyFn extremal_one_point(const KernelSpec& spec, const Point& lambda, int N) {
  return extremal_one_point(build_space(spec, N), lambda);
}

ContractiveReport contractive_multiplier_check(const PolyFn& phi, const std::vector<PolyFn>& test_fns,
                                               int N) {
  ContractiveReport rep;
  std::map<int, SpacePtr> targets;
  for (std::size_t i = 0; i < test_fns.size(); ++i) {
    const PolyFn& f = test_fns[i];
    const double fn = poly_norm(f);
    if (fn == 0.0) continue;
    auto& target = targets[f.space().fiber_dim()];
    if (!target) target = build_space(phi.space().spec(), N, f.space().fiber_dim());
    const double ratio = poly_norm(multiply(phi, f, target)) / fn;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.worst_index = i;
    }
  }
  rep.contractive = rep.max_ratio <= 1.0 + 1e-9;
  return rep;
}

KernelChainBounds lemma22_bounds(const PolyFn& f, const Point& lambda, int N) {
  const int df = std::max(f.degree(), 0);
  if (N < df) throw ValidationError("lemma22_bounds: kernel truncation below deg f");
  const auto& spec = f.space().spec();
  const SpacePtr kspace = build_space(spec, N);
  const PolyFn k = kvec(kspace, lambda);
  const SpacePtr target = build_space(spec, N + df, f.space().fiber_dim());
  const PolyFn kf = multiply(k, f, target);
  const PolyFn f_big = f.embed(target);

  KernelChainBounds out;
  out.point_value = point_eval(f, lambda).squaredNorm();
  const double kk = poly_norm(k);
  out.middle = poly_norm(kf) * poly_norm(kf) / (kk * kk);
  const double fn = poly_norm(f);
  out.upper = 2.0 * poly_inner(f_big, kf).real() - fn * fn;
  const double lam2 = lambda.squaredNorm();
  out.tail = spec.tail_bound(static_cast<std::size_t>(N), lam2) / (kk * kk);
  return out;
}

PolyFn fejer_means(const PolyFn& phi, int n) {
  if (n < 0) throw ValidationError("fejer_means: order must be >= 0");
  PolyFn out(phi.space_ptr());
  const int top = std::min(n, phi.space().degree());
  for (int j = 0; j <= top; ++j) {
    const double w = 1.0 - static_cast<double>(j) / static_cast<double>(n + 1);
    out += Complex(w) * phi.homogeneous_part(j);
  }
  return out;
}

double hardy_sphere_norm_sq(const PolyFn& p) {
  const auto& sp = p.space();
  if (sp.fiber_dim() != 1) throw ValidationError("hardy_sphere_norm: scalar fiber required");
  const int d = sp.d();
  double s = 0.0;
  for (std::size_t m = 0; m < sp.monomial_count(); ++m) {
    const Complex c = p.coeff(m);
    if (c == Complex(0.0)) continue;
    const int n = sp.monomial_degree(m);
    const double lw = std::lgamma(static_cast<double>(d)) + sp.monomial(m).log_factorial() -
                      std::lgamma(static_cast<double>(d + n));
    s += std::norm(c) * std::exp(lw);
  }
  return s;
}

double hardy_sphere_norm(const PolyFn& p) { return std::sqrt(hardy_sphere_norm_sq(p)); }

double multiplier_norm_lower(const PolyFn& phi, int N) {
  if (N < 0) throw ValidationError("multiplier_norm_lower: N must be >= 0");
  if (phi.space().fiber_dim() != 1) throw ValidationError("multiplier_norm_lower: scalar symbol required");
  const int dphi = phi.degree();
  if (dphi < 0) return 0.0;
  const auto& spec = phi.space().spec();
  const SpacePtr src = build_space(spec, N);
  const SpacePtr dst = build_space(spec, N + dphi);
  const auto rows = static_cast<Eigen::Index>(dst->dim());
  const auto cols = static_cast<Eigen::Index>(src->dim());
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(rows, cols);
  const std::size_t nphi = phi.space().degree_begin(dphi + 1);
  for (std::size_t i = 0; i < nphi; ++i) {
    const Complex c = phi.coeff(i);
    if (c == Complex(0.0)) continue;
    for (std::size_t j = 0; j < src->monomial_count(); ++j) {
      const auto t = *dst->index_of_sum(phi.space().monomial(i), src->monomial(j));
      M(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) +=
          c * dst->sqrt_weight(t) / src->sqrt_weight(j);
    }
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
  return svd.singularValues()(0);
}

PsdReport np_psd_check(const KernelSpec& spec, const std::vector<Point>& points, double tol, int N) {
  if (points.empty()) throw ValidationError("np_psd_check: need at least one point");
  const auto n = static_cast<Eigen::Index>(points.size());
  PsdReport rep;
  rep.gram.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (points[static_cast<std::size_t>(i)].norm() >= 1.0) {
      throw ValidationError("np_psd_check: sample points must lie in the open ball");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const Complex k = kernel_eval(spec, points[static_cast<std::size_t>(j)], points[static_cast<std::size_t>(i)], N).value;
      if (k == Complex(0.0)) throw NumericalContractError("np_psd_check: kernel value is zero", 0.0);
      rep.gram(i, j) = 1.0 - 1.0 / k;
    }
  }
  const Eigen::MatrixXcd H = 0.5 * (rep.gram + rep.gram.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues()(0);
  rep.psd = rep.min_eigenvalue >= -tol;
  return rep;
}

ShiftDefectIdentity shift_defect_identity(const PolyFn& p) {
  const auto& sp = p.space();
  const int n = p.degree();
  if (n < 0) return {};
  if (!(p - p.homogeneous_part(n)).is_zero()) throw ValidationError("shift_defect_identity: p must be homogeneous");
  const auto& spec = sp.spec();
  const SpacePtr target = build_space(spec, n + 1, sp.fiber_dim());
  const SpacePtr coord_space = build_space(spec, 1);
  const double pn = poly_norm(p);
  double sum = 0.0;
  for (int i = 0; i < sp.d(); ++i) {
    std::vector<int> e(static_cast<std::size_t>(sp.d()), 0);
    e[static_cast<std::size_t>(i)] = 1;
    const PolyFn zi = PolyFn::monomial(coord_space, MultiIndex{e});
    const double v = poly_norm(multiply(zi, p, target));
    sum += v * v;
  }
  const double an = spec.coeff(static_cast<std::size_t>(n));
  const double an1 = spec.coeff(static_cast<std::size_t>(n + 1));
  ShiftDefectIdentity out;
  out.lhs = sum - pn * pn;
  out.rhs = ((an / an1) * static_cast<double>(n + sp.d()) / static_cast<double>(n + 1) - 1.0) * pn * pn;
  return out;
}

MassBounds bn_mass_bounds(const KernelSpec& spec, int N) {
  if (N < 1) throw ValidationError("bn_mass_bounds: N must be >= 1");
  if (auto md = spec.max_degree()) N = std::min(N, static_cast<int>(*md));
  MassBounds out;
  const auto b = spec.b_coeffs(static_cast<std::size_t>(N));
  for (std::size_t n = 1; n < b.size(); ++n) out.lower += b[n];
  if (!spec.boundary_summable() && spec.closed_form() != ClosedForm::none) {
    // k(1) = sum a_n diverges, so sum b_n = 1 - 1/k(1) = 1.
    out.upper = 1.0;
    out.sum_equals_one = HypothesisStatus::satisfied;
    return out;
  }
  const double tail = spec.tail_bound(static_cast<std::size_t>(N), 1.0);
  if (!std::isfinite(tail)) return out;
  double A = 0.0;
  for (int n = 0; n <= N; ++n) A += spec.coeff(static_cast<std::size_t>(n));
  out.upper = 1.0 - 1.0 / (A + tail);
  if (spec.tail_bound_rigorous() && out.upper < 1.0 - 1e-9) out.sum_equals_one = HypothesisStatus::violated;
  return out;
}

}  // namespace nplab::kernelspace
