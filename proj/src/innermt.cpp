#include "nplab/innermt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "nplab/errors.hpp"
#include "nplab/linalg.hpp"

namespace nplab::innermt {

using Eigen::Index;
using kernelspace::TruncatedSpace;

QMapResult q_map(const TruncatedSpace& space, const Eigen::MatrixXcd& A) {
  const auto dim = static_cast<Index>(space.dim());
  if (A.rows() != dim || A.cols() != dim) throw ValidationError("q_map: matrix size does not match the space");
  const int N = space.degree();
  const int fd = space.fiber_dim();
  const auto& spec = space.spec();
  const std::vector<double> b = spec.b_coeffs(static_cast<std::size_t>(N));

  QMapResult out;
  out.matrix = Eigen::MatrixXcd::Zero(dim, dim);
  const auto mass = kernelspace::bn_mass_bounds(spec, std::max(N, 1));
  out.omitted_mass = std::max(0.0, mass.upper - mass.lower);

  std::vector<Index> src, dst;
  std::vector<double> scale;
  for (std::size_t km = 1; km < space.monomial_count(); ++km) {
    const auto& k = space.monomial(km);
    const int n = k.total();
    const double bn = b[static_cast<std::size_t>(n)];
    if (bn == 0.0) continue;
    ++out.terms;
    const double ck = bn * std::exp(std::lgamma(n + 1.0) - k.log_factorial());
    // M_{z^k} e_p = sqrt(w_{p+k} / w_p) e_{p+k} for |p| + |k| <= N.
    src.clear();
    dst.clear();
    scale.clear();
    for (std::size_t p = 0; p < space.degree_begin(N - n + 1); ++p) {
      const std::size_t t = *space.index_of_sum(k, space.monomial(p));
      const double s = std::exp(0.5 * (space.log_weight(t) - space.log_weight(p)));
      for (int r = 0; r < fd; ++r) {
        src.push_back(static_cast<Index>(p) * fd + r);
        dst.push_back(static_cast<Index>(t) * fd + r);
        scale.push_back(s);
      }
    }
    for (std::size_t j = 0; j < src.size(); ++j) {
      for (std::size_t i = 0; i < src.size(); ++i) {
        const Complex a = A(src[i], src[j]);
        if (a == Complex(0.0)) continue;
        out.matrix(dst[i], dst[j]) += ck * scale[i] * scale[j] * a;
      }
    }
  }
  return out;
}

InnerMultiplier::InnerMultiplier(ModelPtr model, Eigen::MatrixXcd S, Eigen::MatrixXcd ebasis,
                                 Eigen::VectorXd eigenvalues, ClampReport clamp, double omitted_mass)
    : model_(std::move(model)),
      S_(std::move(S)),
      ebasis_(std::move(ebasis)),
      eigenvalues_(std::move(eigenvalues)),
      clamp_(clamp),
      omitted_mass_(omitted_mass) {
  s_ebasis_ = S_ * ebasis_;
}

InnerMultiplier construct_inner(ModelPtr model) {
  if (!model) throw ValidationError("construct_inner: null model");
  const auto& space = model->space();
  if (!space.spec().certified_np()) {
    throw ValidationError("construct_inner: kernel '" + space.spec().name() + "' is not certified NP");
  }
  if (model->rank() == 0) throw ValidationError("construct_inner: the subspace is {0}");

  const auto& P = model->projection();
  const QMapResult q = q_map(space, P);
  const Eigen::MatrixXcd D = P - q.matrix;
  const auto dim = static_cast<Index>(space.dim());

  ClampReport clamp;
  std::vector<double> all_values;
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<Eigen::VectorXcd> range_vecs;
  for (const auto& blk : linalg::hermitian_eig_blocks(D)) {
    const auto m = static_cast<Index>(blk.indices.size());
    Eigen::VectorXd root(m);
    for (Index k = 0; k < m; ++k) {
      double v = blk.values[k];
      all_values.push_back(v);
      clamp.most_negative = std::min(clamp.most_negative, v);
      if (v < -kAbortTolerance) {
        throw NumericalContractError("construct_inner: P_M - Q(P_M) has eigenvalue " + std::to_string(v) +
                                         " below -1e-6; NP certification or truncation is inadequate",
                                     v);
      }
      if (v < 0.0) {
        ++clamp.clamped;
        if (v < -kClampTolerance) ++clamp.beyond_clamp_band;
        v = 0.0;
      }
      root[k] = std::sqrt(v);
      if (v > kRangeTolerance) {
        Eigen::VectorXcd full = Eigen::VectorXcd::Zero(dim);
        for (Index i = 0; i < m; ++i) full[blk.indices[static_cast<std::size_t>(i)]] = blk.vectors(i, k);
        range_vecs.push_back(std::move(full));
      }
    }
    const Eigen::MatrixXcd Sb = blk.vectors * root.asDiagonal() * blk.vectors.adjoint();
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) S(blk.indices[static_cast<std::size_t>(i)], blk.indices[static_cast<std::size_t>(j)]) = Sb(i, j);
    }
  }
  Eigen::MatrixXcd V(dim, static_cast<Index>(range_vecs.size()));
  for (std::size_t j = 0; j < range_vecs.size(); ++j) V.col(static_cast<Index>(j)) = range_vecs[j];
  Eigen::MatrixXcd E = linalg::canonical_range_basis(V);
  std::sort(all_values.begin(), all_values.end());
  const Eigen::VectorXd values = Eigen::Map<const Eigen::VectorXd>(all_values.data(), static_cast<Index>(all_values.size()));
  return InnerMultiplier(std::move(model), std::move(S), std::move(E), values, clamp, q.omitted_mass);
}

InnerMultiplier construct_inner(const SubspaceModel& model) {
  return construct_inner(std::make_shared<const SubspaceModel>(model));
}

namespace {

/// lambda^k / ||z^k|| for every basis monomial: the orthonormal-coordinate
/// evaluation functional.
Eigen::VectorXcd eval_functional(const TruncatedSpace& space, const Point& lambda) {
  Eigen::VectorXcd u = space.monomial_values(lambda);
  for (std::size_t m = 0; m < space.monomial_count(); ++m) u[static_cast<Index>(m)] /= space.sqrt_weight(m);
  return u;
}

double relative_tail(const TruncatedSpace& space, int degree, const Point& lambda) {
  const double r = lambda.squaredNorm();
  const double k = kernelspace::kernel_eval(space.spec(), lambda, lambda).value.real();
  return space.spec().tail_bound(static_cast<std::size_t>(std::max(degree, 0)), r) / k;
}

}  // namespace

Eigen::MatrixXcd phi_matrix(const InnerMultiplier& inner, const Point& lambda) {
  const auto& space = inner.model().space();
  if (lambda.size() != space.d()) throw ValidationError("phi_matrix: point dimension does not match d");
  if (!(lambda.norm() <= 1.0 + 1e-12)) throw ValidationError("phi_matrix: point outside the closed ball");
  const int fd = space.fiber_dim();
  const Eigen::VectorXcd u = eval_functional(space, lambda);
  const Eigen::MatrixXcd& F = inner.s_ebasis();
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(fd, F.cols());
  for (std::size_t m = 0; m < space.monomial_count(); ++m) {
    const Complex um = u[static_cast<Index>(m)];
    for (int r = 0; r < fd; ++r) phi.row(r) += um * F.row(static_cast<Index>(m) * fd + r);
  }
  return phi;
}

ReproductionCheck projection_reproduction_check(const InnerMultiplier& inner, const Point& lambda,
                                                const Point& mu, const Eigen::VectorXcd& x,
                                                const Eigen::VectorXcd& y) {
  const auto& model = inner.model();
  const auto& space = model.space();
  const auto& spec = space.spec();
  if (x.size() != space.fiber_dim() || y.size() != space.fiber_dim()) {
    throw ValidationError("projection_reproduction_check: fiber vectors have wrong length");
  }
  if (!(lambda.norm() < 1.0) || !(mu.norm() < 1.0)) {
    throw ValidationError("projection_reproduction_check: points must lie in the open ball");
  }
  const Complex k_lm = kernelspace::kernel_eval(spec, lambda, mu).value;
  const Eigen::MatrixXcd pl = phi_matrix(inner, lambda), pm = phi_matrix(inner, mu);
  ReproductionCheck out;
  out.lhs = k_lm * y.dot(pm * (pl.adjoint() * x));
  const Eigen::VectorXcd vl = kernelspace::kvec(model.space_ptr(), lambda, x).onb();
  const Eigen::VectorXcd vm = kernelspace::kvec(model.space_ptr(), mu, y).onb();
  out.rhs = vm.dot(model.projection() * vl);
  out.residual = std::abs(out.lhs - out.rhs);

  const int half = space.degree() / 2;
  const double k_ll = kernelspace::kernel_eval(spec, lambda, lambda).value.real();
  const double k_mm = kernelspace::kernel_eval(spec, mu, mu).value.real();
  const double r = std::abs(inner_d(mu, lambda));
  const double scale = std::abs(k_lm) * std::sqrt(k_ll * k_mm) * x.norm() * y.norm();
  const double trunc = std::sqrt(relative_tail(space, half, lambda)) + std::sqrt(relative_tail(space, half, mu)) +
                       2.0 * std::pow(r, half + 1) + inner.omitted_mass();
  out.tolerance = 10.0 * scale * trunc + 1e-12 * (1.0 + scale);
  return out;
}

RankProfile rank_profile(const InnerMultiplier& inner, const std::vector<Point>& points, double svd_tol) {
  if (points.empty()) throw ValidationError("rank_profile: need at least one sample point");
  RankProfile out;
  for (const auto& p : points) {
    int rank = 0;
    bool amb = false;
    if (inner.dim_e() > 0) {
      const Eigen::MatrixXcd phi = phi_matrix(inner, p);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(phi);
      for (Index i = 0; i < svd.singularValues().size(); ++i) {
        const double s = svd.singularValues()[i];
        if (s > svd_tol) ++rank;
        if (s >= svd_tol / 10.0 && s <= svd_tol * 10.0) amb = true;
      }
    }
    out.ranks.push_back(rank);
    out.ambiguous.push_back(amb);
    out.m = std::max(out.m, rank);
  }
  for (int r : out.ranks) out.submaximal.push_back(r < out.m);
  return out;
}

std::vector<IsometrySample> boundary_isometry_scan(const InnerMultiplier& inner, const Point& z,
                                                   const std::vector<double>& t_grid, double max_t) {
  const auto& space = inner.model().space();
  if (z.size() != space.d()) throw ValidationError("boundary_isometry_scan: direction dimension does not match d");
  if (std::abs(z.norm() - 1.0) > 1e-12) throw ValidationError("boundary_isometry_scan: direction must be a unit vector");
  const auto count = static_cast<std::size_t>(std::min<Index>(space.fiber_dim(), inner.dim_e()));
  std::vector<IsometrySample> out;
  for (double t : t_grid) {
    if (!(t >= 0.0 && t <= max_t)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "boundary_isometry_scan: t = %.17g outside [0, %.17g]", t, max_t);
      throw ValidationError(buf);
    }
    const Point lambda = t * z;
    IsometrySample s;
    s.t = t;
    if (count > 0) {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(phi_matrix(inner, lambda));
      for (std::size_t i = 0; i < count; ++i) s.sigma.push_back(svd.singularValues()[static_cast<Index>(i)]);
    }
    s.tail_bound = relative_tail(space, space.degree(), lambda);
    out.push_back(std::move(s));
  }
  return out;
}

void write_isometry_csv(std::ostream& out, const std::vector<IsometrySample>& samples) {
  const std::size_t r = samples.empty() ? 0 : samples.front().sigma.size();
  out << "t";
  for (std::size_t i = 1; i <= r; ++i) out << ",sigma_" << i;
  out << ",tail_bound\n";
  char buf[32];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.t);
    out << buf;
    for (double v : s.sigma) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g\n", s.tail_bound);
    out << buf;
  }
}

void write_matrix(std::ostream& out, const Eigen::MatrixXcd& M, const TruncatedSpace& space) {
  if (M.rows() != static_cast<Index>(space.dim())) throw ValidationError("write_matrix: row count does not match the space");
  out << "nplab-matrix 1\n";
  out << "rows " << M.rows() << " cols " << M.cols() << "\n";
  out << "basis";
  for (std::size_t m = 0; m < space.monomial_count(); ++m) {
    for (int r = 0; r < space.fiber_dim(); ++r) out << ' ' << kernelspace::to_string(space.monomial(m)) << '/' << r;
  }
  out << "\n";
  char buf[64];
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%.17g,%.17g", j ? " " : "", M(i, j).real(), M(i, j).imag());
      out << buf;
    }
    out << "\n";
  }
}

Eigen::MatrixXcd read_matrix(std::istream& in) {
  std::string line, word;
  if (!std::getline(in, line) || line != "nplab-matrix 1") throw ValidationError("read_matrix: missing header");
  Index rows = 0, cols = 0;
  {
    if (!std::getline(in, line)) throw ValidationError("read_matrix: missing size line");
    std::istringstream ls(line);
    std::string r, c;
    if (!(ls >> r >> rows >> c >> cols) || r != "rows" || c != "cols" || rows < 0 || cols < 0) {
      throw ValidationError("read_matrix: bad size line");
    }
  }
  if (!std::getline(in, line) || line.rfind("basis", 0) != 0) throw ValidationError("read_matrix: missing basis line");
  Eigen::MatrixXcd M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw ValidationError("read_matrix: truncated data at row " + std::to_string(i));
    std::istringstream ls(line);
    for (Index j = 0; j < cols; ++j) {
      if (!(ls >> word)) throw ValidationError("read_matrix: short row " + std::to_string(i));
      const auto comma = word.find(',');
      if (comma == std::string::npos) throw ValidationError("read_matrix: entry without ',' in row " + std::to_string(i));
      M(i, j) = Complex(std::stod(word.substr(0, comma)), std::stod(word.substr(comma + 1)));
    }
  }
  return M;
}

}  // namespace nplab::innermt
