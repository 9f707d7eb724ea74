#include "nplab/curvature.hpp"

#include <cmath>
#include <numbers>

#include "json.hpp"

#include "nplab/errors.hpp"
#include "nplab/linalg.hpp"

namespace nplab::curvature {

using Eigen::Index;

std::string to_string(Quadrature q) {
  return q == Quadrature::circle_trapezoid ? "circle-trapezoid" : "sphere-montecarlo";
}

double defect_trace(const InnerMultiplier& inner, const Point& lambda) {
  const double fd = inner.fiber_dim();
  if (inner.dim_e() == 0) return fd;
  return fd - innermt::phi_matrix(inner, lambda).squaredNorm();
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

Point sample_sphere(std::mt19937_64& rng, int d) {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  Point z(d);
  for (;;) {
    for (int i = 0; i < d; ++i) {
      const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * scale;  // (0, 1]
      const double u2 = static_cast<double>(rng() >> 11) * scale;          // [0, 1)
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double a = 2.0 * std::numbers::pi * u2;
      z[i] = Complex(r * std::cos(a), r * std::sin(a));
    }
    const double n = z.norm();
    if (n > 0.0) return z / n;
  }
}

namespace {

CurvatureEstimate finish(std::vector<double>& values, double t, Quadrature q) {
  CurvatureEstimate est;
  const auto n = values.size();
  est.t = t;
  est.quadrature = q;
  est.sample_count = n;
  est.value = pairwise_sum(values.data(), n) / static_cast<double>(n);
  if (q == Quadrature::sphere_montecarlo && n > 1) {
    for (double& v : values) v = (v - est.value) * (v - est.value);
    const double var = pairwise_sum(values.data(), n) / static_cast<double>(n - 1);
    est.statistical_error = std::sqrt(var / static_cast<double>(n));
  }
  est.nearest_integer = std::lround(est.value);
  est.gap = std::abs(est.value - static_cast<double>(est.nearest_integer));
  return est;
}

}  // namespace

CurvatureEstimate curvature_estimate(const InnerMultiplier& inner, double t, const QuadratureConfig& cfg,
                                     double max_t) {
  if (!(t >= 0.0 && t <= max_t)) {
    throw ValidationError("curvature_estimate: t = " + std::to_string(t) + " outside [0, " + std::to_string(max_t) + "]");
  }
  const int d = inner.model().space().d();
  std::vector<double> values;
  if (d == 1) {
    if (cfg.circle_points == 0) throw ValidationError("curvature_estimate: circle_points must be positive");
    values.reserve(cfg.circle_points);
    Point lambda(1);
    for (std::size_t j = 0; j < cfg.circle_points; ++j) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(cfg.circle_points);
      lambda[0] = std::polar(t, a);
      values.push_back(defect_trace(inner, lambda));
    }
    return finish(values, t, Quadrature::circle_trapezoid);
  }
  if (cfg.samples < 2) throw ValidationError("curvature_estimate: need at least 2 Monte Carlo samples");
  std::mt19937_64 rng(cfg.seed);
  values.reserve(cfg.samples);
  for (std::size_t j = 0; j < cfg.samples; ++j) values.push_back(defect_trace(inner, t * sample_sphere(rng, d)));
  CurvatureEstimate est = finish(values, t, Quadrature::sphere_montecarlo);
  est.seed = cfg.seed;
  return est;
}

IntegralityReport integrality_report(const InnerMultiplier& inner, const std::vector<double>& t_grid,
                                     const QuadratureConfig& cfg, const std::string& model_label) {
  if (t_grid.empty()) throw ValidationError("integrality_report: empty t grid");
  IntegralityReport rep;
  rep.model = model_label;
  rep.t_grid = t_grid;
  rep.fiber_dim = inner.fiber_dim();
  const auto& spec = inner.model().space().spec();
  const auto hyp = spec.diagonal_hypotheses();
  if (hyp != kernelspace::HypothesisStatus::satisfied) {
    rep.applicable = false;
    rep.reason = "kernel '" + spec.name() + "': diagonal hypotheses " + kernelspace::to_string(hyp) +
                 " (needs k_lambda(lambda) -> infinity and a_n/a_{n+1} -> 1)";
  }
  for (double t : t_grid) rep.estimates.push_back(curvature_estimate(inner, t, cfg));

  // Generic interior points for the rank profile, from a stream derived
  // from the quadrature seed.
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const int d = inner.model().space().d();
  std::vector<Point> pts;
  for (std::size_t i = 0; i < kRankSamplePoints; ++i) {
    const double r = 0.3 + 0.6 * static_cast<double>(rng() >> 11) / 9007199254740992.0;
    pts.push_back(r * sample_sphere(rng, d));
  }
  rep.rank_points = pts.size();
  rep.m = innermt::rank_profile(inner, pts).m;
  rep.candidate = rep.fiber_dim - rep.m;
  std::size_t top = 0;
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (t_grid[i] > t_grid[top]) top = i;
  }
  rep.residual = std::abs(rep.estimates[top].value - static_cast<double>(rep.candidate));
  return rep;
}

std::string to_json(const IntegralityReport& report) {
  nlohmann::ordered_json j;
  j["model"] = report.model;
  j["applicable"] = report.applicable;
  j["reason"] = report.reason;
  j["tGrid"] = report.t_grid;
  std::vector<double> est, err;
  for (const auto& e : report.estimates) {
    est.push_back(e.value);
    err.push_back(e.statistical_error);
  }
  j["estimates"] = est;
  j["mcError"] = err;
  j["m"] = report.m;
  j["candidate"] = report.candidate;
  j["residual"] = report.residual;
  j["fiberDim"] = report.fiber_dim;
  j["rankPoints"] = report.rank_points;
  if (!report.estimates.empty()) {
    const auto& e = report.estimates.front();
    j["quadrature"] = to_string(e.quadrature);
    j["samples"] = e.sample_count;
    j["seed"] = e.seed;
  }
  return j.dump(2);
}

DirectCurvature module_curvature_direct(const SubspaceModel& model, const Point& lambda) {
  const auto& space = model.space();
  if (space.spec().closed_form() != kernelspace::ClosedForm::szego) {
    throw ValidationError("module_curvature_direct: requires the Szego kernel");
  }
  if (lambda.size() != space.d() || !(lambda.norm() < 1.0)) {
    throw ValidationError("module_curvature_direct: lambda must lie in the open ball");
  }
  const auto dim = static_cast<Index>(space.dim());
  const int fd = space.fiber_dim();
  const int d = space.d();
  const int N = space.degree();

  // Orthonormal basis W of H_N minus M_N.
  const Eigen::MatrixXcd C = Eigen::MatrixXcd::Identity(dim, dim) - model.projection();
  std::vector<Eigen::VectorXcd> cols;
  for (const auto& blk : linalg::hermitian_eig_blocks(C)) {
    for (Index k = 0; k < blk.values.size(); ++k) {
      if (blk.values[k] <= 0.5) continue;
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
      for (std::size_t i = 0; i < blk.indices.size(); ++i) v[blk.indices[i]] = blk.vectors(static_cast<Index>(i), k);
      cols.push_back(std::move(v));
    }
  }
  const auto h = static_cast<Index>(cols.size());
  DirectCurvature out;
  out.module_dim = h;
  out.F = Eigen::MatrixXcd::Zero(h, h);
  if (h == 0) return out;
  Eigen::MatrixXcd W(dim, h);
  for (Index j = 0; j < h; ++j) W.col(j) = cols[static_cast<std::size_t>(j)];

  std::vector<Eigen::MatrixXcd> T;
  for (int i = 0; i < d; ++i) {
    std::vector<int> e(static_cast<std::size_t>(d), 0);
    e[static_cast<std::size_t>(i)] = 1;
    const kernelspace::MultiIndex ei{e};
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(dim, h);
    for (std::size_t p = 0; p < space.degree_begin(N); ++p) {
      const std::size_t t = *space.index_of_sum(ei, space.monomial(p));
      const double s = std::exp(0.5 * (space.log_weight(t) - space.log_weight(p)));
      for (int r = 0; r < fd; ++r) Y.row(static_cast<Index>(t) * fd + r) += s * W.row(static_cast<Index>(p) * fd + r);
    }
    T.push_back(W.adjoint() * Y);
  }
  Eigen::MatrixXcd defect = Eigen::MatrixXcd::Identity(h, h);
  for (const auto& Ti : T) defect -= Ti * Ti.adjoint();
  defect = 0.5 * (defect + defect.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(defect);
  Eigen::VectorXd root(h);
  for (Index k = 0; k < h; ++k) {
    const double v = es.eigenvalues()[k];
    if (v < -innermt::kAbortTolerance) {
      throw NumericalContractError("module_curvature_direct: 1 - sum T_i T_i^* has eigenvalue " + std::to_string(v), v);
    }
    root[k] = std::sqrt(std::max(v, 0.0));
    if (v > innermt::kRangeTolerance) ++out.rank;
  }
  const Eigen::MatrixXcd Delta = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();

  Eigen::MatrixXcd Tl = Eigen::MatrixXcd::Zero(h, h);
  for (int i = 0; i < d; ++i) Tl += std::conj(lambda[i]) * T[static_cast<std::size_t>(i)];
  const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(h, h) - Tl;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) throw NumericalContractError("module_curvature_direct: 1 - T(lambda) is singular", rc);
  const Eigen::MatrixXcd X = lu.solve(Delta);
  out.F = (1.0 - lambda.squaredNorm()) * (X.adjoint() * X);
  out.trace = out.F.trace().real();
  return out;
}

}  // namespace nplab::curvature
