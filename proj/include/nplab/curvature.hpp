#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nplab/innermt.hpp"

namespace nplab::curvature {

using innermt::InnerMultiplier;
using subspace::SubspaceModel;

enum class Quadrature { circle_trapezoid, sphere_montecarlo };

std::string to_string(Quadrature q);

struct QuadratureConfig {
  std::size_t circle_points = 2048;   ///< d = 1
  std::size_t samples = 20000;        ///< d >= 2
  std::uint64_t seed = 1;             ///< std::mt19937_64 seed, d >= 2
};

struct CurvatureEstimate {
  double value = 0.0;
  long nearest_integer = 0;
  double gap = 0.0;
  double t = 0.0;
  Quadrature quadrature = Quadrature::circle_trapezoid;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  double statistical_error = 0.0;  ///< standard error, Monte Carlo only
};

/// trace(1_D - phi(lambda) phi(lambda)^*).
double defect_trace(const InnerMultiplier& inner, const Point& lambda);

/// Average of defect_trace over the sphere of radius t: trapezoid rule on
/// the circle for d = 1, Monte Carlo over the uniform sphere measure for
/// d >= 2. Throws when t exceeds max_t.
CurvatureEstimate curvature_estimate(const InnerMultiplier& inner, double t, const QuadratureConfig& cfg = {},
                                     double max_t = innermt::kDefaultMaxT);

/// Uniform point on the unit sphere of C^d: normalized vector of
/// independent standard complex Gaussians (Box-Muller on 53-bit uniforms).
Point sample_sphere(std::mt19937_64& rng, int d);

/// Sum in a fixed pairwise order.
double pairwise_sum(const double* x, std::size_t n);

struct IntegralityReport {
  std::string model;
  bool applicable = true;
  std::string reason;
  std::vector<double> t_grid;
  std::vector<CurvatureEstimate> estimates;
  int fiber_dim = 1;
  int m = 0;
  long candidate = 0;  ///< fiber_dim - m
  double residual = 0.0;  ///< |estimate at the largest t - candidate|
  std::size_t rank_points = 0;
};

/// Number of interior points used for the rank profile in the report.
inline constexpr std::size_t kRankSamplePoints = 64;

IntegralityReport integrality_report(const InnerMultiplier& inner, const std::vector<double>& t_grid,
                                     const QuadratureConfig& cfg = {}, const std::string& model_label = "");

/// JSON text with keys model, applicable, reason, tGrid, estimates,
/// mcError, m, candidate, residual, quadrature, seed, samples.
std::string to_json(const IntegralityReport& report);

struct DirectCurvature {
  Eigen::MatrixXcd F;  ///< on H, zero off Delta H
  double trace = 0.0;
  Eigen::Index module_dim = 0;  ///< dim H
  Eigen::Index rank = 0;        ///< rank Delta
};

/// F(lambda) = (1 - |lambda|^2) Delta (1 - T(lambda)^*)^{-1} (1 - T(lambda))^{-1} Delta
/// for H = H_N minus M_N over the Szego kernel, with T_i the compressions
/// of M_{z_i} and T(lambda) = sum conj(lambda_i) T_i.
DirectCurvature module_curvature_direct(const SubspaceModel& model, const Point& lambda);

}  // namespace nplab::curvature
