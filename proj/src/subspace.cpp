#include "nplab/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "nplab/errors.hpp"
#include "nplab/linalg.hpp"

namespace nplab::subspace {

using Eigen::Index;
using kernelspace::kernel_eval;
using kernelspace::kvec;

SubspaceModel::SubspaceModel(SpacePtr space, Encoding encoding, std::vector<PolyFn> generators,
                             std::optional<Point> point_zero, Eigen::MatrixXcd basis,
                             Eigen::MatrixXcd projection)
    : space_(std::move(space)),
      encoding_(encoding),
      generators_(std::move(generators)),
      point_zero_(std::move(point_zero)),
      basis_(std::move(basis)),
      projection_(std::move(projection)) {}

namespace {

using SparseVec = std::vector<std::pair<Index, Complex>>;

Index slot(std::size_t monomial, int fiber, int fd) {
  return static_cast<Index>(monomial * static_cast<std::size_t>(fd) + static_cast<std::size_t>(fiber));
}

}  // namespace

SubspaceModel build_submodule(const SpacePtr& space, std::vector<PolyFn> generators, double rel_tol) {
  const int fd = space->fiber_dim();
  const int N = space->degree();
  bool any_nonzero = false;
  for (const auto& g : generators) {
    if (!kernelspace::same_kernel(g.space(), *space)) {
      throw ValidationError("build_submodule: generator lives in a different space");
    }
    if (g.degree() > N) {
      throw ValidationError("build_submodule: generator degree " + std::to_string(g.degree()) +
                            " exceeds truncation " + std::to_string(N));
    }
    any_nonzero = any_nonzero || !g.is_zero();
  }
  if (!any_nonzero) throw ValidationError("build_submodule: all generators are zero");

  // Candidates z^k g in orthonormal coordinates, sparse.
  std::vector<SparseVec> cands;
  std::vector<std::vector<Index>> supports;
  for (std::size_t m = 0; m < space->monomial_count(); ++m) {
    const auto& k = space->monomial(m);
    for (const auto& g : generators) {
      const int dg = g.degree();
      if (dg < 0 || k.total() + dg > N) continue;
      std::map<Index, Complex> acc;
      const auto& gs = g.space();
      for (std::size_t i = 0; i < gs.degree_begin(dg + 1); ++i) {
        for (int r = 0; r < fd; ++r) {
          const Complex c = g.coeff(i, r);
          if (c == Complex(0.0)) continue;
          const std::size_t t = *space->index_of_sum(k, gs.monomial(i));
          acc[slot(t, r, fd)] += c * space->sqrt_weight(t);
        }
      }
      SparseVec v(acc.begin(), acc.end());
      std::vector<Index> sup;
      for (const auto& [i, c] : v) sup.push_back(i);
      cands.push_back(std::move(v));
      supports.push_back(std::move(sup));
    }
  }

  const auto dim = static_cast<Index>(space->dim());
  struct Kept {
    std::size_t cand;
    std::vector<Index> rows;
    Eigen::VectorXcd values;
  };
  std::vector<Kept> kept;
  for (const auto& group : linalg::overlap_components(supports)) {
    std::vector<Index> rows;
    for (std::size_t c : group) rows.insert(rows.end(), supports[c].begin(), supports[c].end());
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::map<Index, Index> local;
    for (std::size_t i = 0; i < rows.size(); ++i) local[rows[i]] = static_cast<Index>(i);
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(static_cast<Index>(rows.size()), static_cast<Index>(group.size()));
    for (std::size_t j = 0; j < group.size(); ++j) {
      for (const auto& [i, v] : cands[group[j]]) C(local[i], static_cast<Index>(j)) = v;
    }
    const auto orth = linalg::orthonormalize_cgs2(C, rel_tol);
    for (std::size_t j = 0; j < orth.kept.size(); ++j) {
      kept.push_back({group[orth.kept[j]], rows, orth.basis.col(static_cast<Index>(j))});
    }
  }
  std::sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) { return a.cand < b.cand; });

  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(dim, static_cast<Index>(kept.size()));
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto& kc = kept[j];
    for (std::size_t a = 0; a < kc.rows.size(); ++a) {
      const Complex va = kc.values[static_cast<Index>(a)];
      B(kc.rows[a], static_cast<Index>(j)) = va;
      if (va == Complex(0.0)) continue;
      for (std::size_t b = 0; b < kc.rows.size(); ++b) {
        P(kc.rows[a], kc.rows[b]) += va * std::conj(kc.values[static_cast<Index>(b)]);
      }
    }
  }
  return SubspaceModel(space, SubspaceModel::Encoding::generators, std::move(generators), std::nullopt,
                       std::move(B), std::move(P));
}

SubspaceModel build_point_zero(const SpacePtr& space, const Point& z0) {
  if (z0.size() != space->d()) throw ValidationError("build_point_zero: point dimension does not match d");
  if (z0.norm() > 1.0 + 1e-12) throw ValidationError("build_point_zero: point outside the closed ball");
  if (z0.norm() >= 1.0 - 1e-14 && !space->spec().boundary_summable()) {
    throw ValidationError("build_point_zero: boundary point needs a kernel summable on the boundary");
  }
  const int fd = space->fiber_dim();
  const auto dim = static_cast<Index>(space->dim());
  Eigen::MatrixXcd K(dim, fd);
  for (int r = 0; r < fd; ++r) {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(fd);
    x[r] = 1.0;
    K.col(r) = kvec(space, z0, x).onb();
  }
  // The fiber copies of k_{z0} are mutually orthogonal with equal norms.
  const double kk = K.col(0).squaredNorm();
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(dim, dim) - (K * K.adjoint()) / kk;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(K);
  const Eigen::MatrixXcd Qfull = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, dim);
  Eigen::MatrixXcd B = Qfull.rightCols(dim - fd);
  return SubspaceModel(space, SubspaceModel::Encoding::point_zero, {}, z0, std::move(B), std::move(P));
}

namespace {

void check_interior(const Point& lambda, int d) {
  if (lambda.size() != d) throw ValidationError("point dimension does not match d");
  if (!(lambda.norm() < 1.0)) throw ValidationError("point lies outside the open ball");
}

double relative_tail(const TruncatedSpace& space, const Point& lambda, double k_ll) {
  const double t = space.spec().tail_bound(static_cast<std::size_t>(space.degree()), lambda.squaredNorm());
  return t / k_ll;
}

}  // namespace

RatioValue ratio(const SubspaceModel& model, const Point& lambda, const Eigen::VectorXcd& x) {
  const auto& sp = model.space();
  check_interior(lambda, sp.d());
  if (x.size() != sp.fiber_dim() || x.norm() == 0.0) throw ValidationError("ratio: bad fiber vector");
  const Eigen::VectorXcd v = kvec(model.space_ptr(), lambda, x).onb();
  const double num = (model.projection() * v).squaredNorm();
  const double k_ll = kernel_eval(sp.spec(), lambda, lambda).value.real();
  return {num / (k_ll * x.squaredNorm()), relative_tail(sp, lambda, k_ll)};
}

RatioValue ratio(const SubspaceModel& model, const Point& lambda) {
  const auto& sp = model.space();
  const int fd = sp.fiber_dim();
  if (fd == 1) return ratio(model, lambda, Eigen::VectorXcd::Ones(1));
  check_interior(lambda, sp.d());
  Eigen::MatrixXcd V(static_cast<Index>(sp.dim()), fd);
  for (int r = 0; r < fd; ++r) {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(fd);
    x[r] = 1.0;
    V.col(r) = kvec(model.space_ptr(), lambda, x).onb();
  }
  const Eigen::MatrixXcd PV = model.projection() * V;
  const Eigen::MatrixXcd G = PV.adjoint() * PV;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
  const double k_ll = kernel_eval(sp.spec(), lambda, lambda).value.real();
  return {es.eigenvalues()[fd - 1] / k_ll, relative_tail(sp, lambda, k_ll)};
}

std::vector<RadialSample> radial_scan(const SubspaceModel& model, const Point& z,
                                      const std::vector<double>& t_grid, double tail_tol) {
  if (z.size() != model.space().d()) throw ValidationError("radial_scan: direction dimension does not match d");
  if (std::abs(z.norm() - 1.0) > 1e-12) throw ValidationError("radial_scan: direction must be a unit vector");
  std::vector<RadialSample> out;
  for (double t : t_grid) {
    if (!(t >= 0.0 && t < 1.0)) throw ValidationError("radial_scan: t must lie in [0, 1)");
    const Point lambda = t * z;
    const RatioValue r = ratio(model, lambda);
    if (r.tail_bound > tail_tol) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "radial_scan: t = %.17g beyond truncation budget (tail %.3g > %.3g)", t,
                    r.tail_bound, tail_tol);
      throw ValidationError(buf);
    }
    out.push_back({t, r.value, r.tail_bound});
  }
  return out;
}

void write_radial_csv(std::ostream& out, const std::vector<RadialSample>& samples) {
  out << "t,ratio,tail_bound\n";
  char buf[96];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.t, s.ratio, s.tail_bound);
    out << buf;
  }
}

ClosedFormValue counterexample_closed_form(const kernelspace::KernelSpec& spec, Complex z, Complex w, int N) {
  if (spec.dim() != 1) throw ValidationError("counterexample_closed_form: requires d = 1");
  if (!spec.boundary_summable()) {
    throw ValidationError("counterexample_closed_form: requires a kernel summable on the boundary (alpha > 1)");
  }
  if (std::abs(z) > 1.0 + 1e-12 || std::abs(w) > 1.0 + 1e-12) {
    throw ValidationError("counterexample_closed_form: points must lie in the closed disc");
  }
  Point zp(1), wp(1);
  zp[0] = z;
  wp[0] = w;
  auto A = kernel_eval(spec, wp, zp, N);
  auto B = kernel_eval(spec, wp, wp, N);
  auto C = kernel_eval(spec, zp, zp, N);
  const bool power_law = spec.closed_form() == kernelspace::ClosedForm::dirichlet_alpha;
  // Diagonal tails are nonnegative; on the circle the power-law tail also
  // has the integral lower bound (N+2)^(1-alpha)/(alpha-1). Shift to the
  // middle of the enclosure.
  auto centre = [&](kernelspace::KernelValue& v, double r) {
    double lo = 0.0;
    if (power_law && r >= 1.0) lo = std::pow(N + 2.0, 1.0 - spec.alpha()) / (spec.alpha() - 1.0);
    const double hi = v.tail_bound;
    v.value += 0.5 * (lo + hi);
    v.tail_bound = 0.5 * (hi - lo);
  };
  centre(B, std::norm(w));
  centre(C, std::norm(z));
  const Complex x = z * std::conj(w);
  if (power_law && std::abs(x - 1.0) < 1e-15) {
    centre(A, 1.0);
  } else if (power_law) {
    // Abel summation with decreasing a_n: |sum_{n>N} a_n x^n| <= 2 a_{N+1} |x|^{N+1} / |1 - x|.
    const double abel = 2.0 * spec.coeff(static_cast<std::size_t>(N) + 1) * std::pow(std::abs(x), N + 1.0) /
                        std::abs(1.0 - x);
    A.tail_bound = std::min(A.tail_bound, abel);
  }
  // Partial sums in double carry a relative rounding error of about N eps.
  const double round = 4.0 * static_cast<double>(N + 1) * 1.1102230246251565e-16;
  const double eA = A.tail_bound + round * std::abs(A.value) + 1e-300;
  const double eB = B.tail_bound + round * B.value.real();
  const double eC = C.tail_bound + round * C.value.real();
  const double a = std::abs(A.value), b = B.value.real(), c = C.value.real();
  const double value = 1.0 - a * a / (b * c);
  const double num_lo = std::pow(std::max(0.0, a - eA), 2), num_hi = std::pow(a + eA, 2);
  const double den_lo = std::max(b - eB, 1e-300) * std::max(c - eC, 1e-300), den_hi = (b + eB) * (c + eC);
  const double g_lo = 1.0 - num_hi / den_lo, g_hi = 1.0 - num_lo / den_hi;
  return {value, std::max(value - g_lo, g_hi - value)};
}

PolyFn extremal_solution(const SubspaceModel& model) {
  const Eigen::VectorXcd p1 = model.projection().col(0);
  const double p0 = p1[0].real();
  if (!(p0 > 1e-12)) {
    throw ValidationError("extremal_solution: (P_M 1)(0) vanishes; every function in M_N vanishes at 0");
  }
  return PolyFn::from_onb(model.space_ptr(), p1 / std::sqrt(p0));
}

double containment_residual(const SubspaceModel& small, const SubspaceModel& big) {
  if (!kernelspace::same_kernel(small.space(), big.space()) || small.space().degree() > big.space().degree()) {
    throw ValidationError("containment_residual: incompatible models");
  }
  const Index n_big = static_cast<Index>(big.space().dim());
  Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(n_big, small.rank());
  // Graded-lex order is prefix-stable, so coordinates embed as a prefix.
  E.topRows(small.basis().rows()) = small.basis();
  const Eigen::MatrixXcd R = E - big.projection() * E;
  double worst = 0.0;
  for (Index j = 0; j < R.cols(); ++j) worst = std::max(worst, R.col(j).norm());
  return worst;
}

double projection_defect(const SubspaceModel& model) {
  const auto& P = model.projection();
  const Eigen::MatrixXcd P2 = P * P;
  return std::max((P2 - P).cwiseAbs().maxCoeff(), (P.adjoint() - P).cwiseAbs().maxCoeff());
}

}  // namespace nplab::subspace
