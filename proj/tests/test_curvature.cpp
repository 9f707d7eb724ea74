#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "nplab/curvature.hpp"
#include "nplab/errors.hpp"
#include "nplab/polynomial_parser.hpp"

using namespace nplab;
using namespace nplab::kernelspace;
using namespace nplab::subspace;
using namespace nplab::innermt;
using namespace nplab::curvature;

namespace {

Point pt(std::initializer_list<Complex> xs) {
  Point z(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (auto x : xs) z[i++] = x;
  return z;
}

ModelPtr model(const KernelSpec& spec, int N, const std::string& gens) {
  const auto s = build_space(spec, N);
  std::vector<PolyFn> g;
  for (const auto& p : parse_generator_list(gens, spec.dim())) g.push_back(to_polyfn(p, s));
  return std::make_shared<const SubspaceModel>(build_submodule(s, std::move(g)));
}

// Circle average of 1 - |b|^2 for b(z) = (z - 1/2) / (1 - z/2), by a fine
// midpoint rule.
double blaschke_defect_average(double t) {
  const int n = 200000;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const Complex z = std::polar(t, 2.0 * M_PI * (j + 0.5) / n);
    sum += 1.0 - std::norm((z - 0.5) / (1.0 - 0.5 * z));
  }
  return sum / n;
}

}  // namespace

TEST_CASE("defect traces") {
  const auto p0 = construct_inner(model(KernelSpec::szego(2), 8, "z1, z2"));
  std::mt19937_64 rng(3);
  for (int j = 0; j < 10; ++j) {
    const Point l = testing::ball_point(rng, 2, 0.95);
    CHECK(std::abs(defect_trace(p0, l) - (1.0 - l.squaredNorm())) < 1e-12);
  }
  const auto s = build_space(KernelSpec::szego(1), 4);
  const auto n = static_cast<Eigen::Index>(s->dim());
  const InnerMultiplier zero(model(KernelSpec::szego(1), 4, "z"), Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd(n, 0),
                             Eigen::VectorXd::Zero(n), {}, 0.0);
  CHECK(defect_trace(zero, pt({0.5})) == 1.0);
}

TEST_CASE("circle quadrature") {
  SUBCASE("z H^2") {
    const auto inner = construct_inner(model(KernelSpec::szego(1), 20, "z"));
    const auto e = curvature_estimate(inner, 0.9);
    CHECK(std::abs(e.value - 0.19) < 1e-13);
    CHECK(e.quadrature == Quadrature::circle_trapezoid);
    CHECK(e.sample_count == 2048);
    CHECK(e.statistical_error == 0.0);
  }
  SUBCASE("Blaschke factor") {
    const auto inner = construct_inner(model(KernelSpec::szego(1), 100, "z - 1/2"));
    const auto e = curvature_estimate(inner, 0.99);
    CHECK(e.nearest_integer == 0);
    CHECK(std::abs(e.value) < 0.05);
    CHECK(e.gap == doctest::Approx(std::abs(e.value)));
    CHECK(std::abs(e.value - blaschke_defect_average(0.99)) < 1e-6);
    CHECK(std::abs(curvature_estimate(inner, 0.5).value - blaschke_defect_average(0.5)) < 1e-10);
  }
  SUBCASE("radius limits") {
    const auto inner = construct_inner(model(KernelSpec::szego(1), 20, "z"));
    CHECK_THROWS_AS(curvature_estimate(inner, 0.9995), ValidationError);
    CHECK_THROWS_AS(curvature_estimate(inner, -0.1), ValidationError);
  }
}

TEST_CASE("sphere Monte Carlo") {
  SUBCASE("constant defect on P_0") {
    const auto inner = construct_inner(model(KernelSpec::szego(2), 6, "z1, z2"));
    const auto e = curvature_estimate(inner, 0.99, {.samples = 2000});
    CHECK(std::abs(e.value - (1.0 - 0.99 * 0.99)) < 1e-12);
    CHECK(e.statistical_error < 1e-12);
    CHECK(e.quadrature == Quadrature::sphere_montecarlo);
    CHECK(e.seed == 1);
  }
  SUBCASE("z1 H^2_2") {
    // The complement is H^2 in z2, so the defect is (1 - |l|^2) / (1 - |l_2|^2);
    // |u_2|^2 is uniform on [0, 1] over the sphere.
    const auto inner = construct_inner(model(KernelSpec::szego(2), 40, "z1"));
    const double t2 = 0.64;
    const double exact = (1.0 - t2) * std::log(1.0 / (1.0 - t2)) / t2;
    const auto e = curvature_estimate(inner, 0.8, {.samples = 5000, .seed = 7});
    CHECK(e.statistical_error > 0.0);
    CHECK(std::abs(e.value - exact) < 5.0 * e.statistical_error);
    std::mt19937_64 rng(2);
    for (int j = 0; j < 5; ++j) {
      const Point l = testing::ball_point(rng, 2, 0.8);
      CHECK(std::abs(defect_trace(inner, l) - (1.0 - l.squaredNorm()) / (1.0 - std::norm(l[1]))) < 1e-6);
    }
    const auto again = curvature_estimate(inner, 0.8, {.samples = 5000, .seed = 7});
    CHECK(again.value == e.value);
    CHECK(again.statistical_error == e.statistical_error);
    const auto other = curvature_estimate(inner, 0.8, {.samples = 5000, .seed = 8});
    CHECK(other.value != e.value);
    CHECK_THROWS_AS(curvature_estimate(inner, 0.8, {.samples = 1}), ValidationError);
  }
  SUBCASE("sample_sphere") {
    std::mt19937_64 rng(5);
    double mean = 0.0;
    const int n = 40000;
    for (int j = 0; j < n; ++j) {
      const Point z = sample_sphere(rng, 3);
      CHECK(std::abs(z.norm() - 1.0) < 1e-14);
      mean += std::norm(z[0]);
    }
    // |z_1|^2 is Beta(1, 2) with mean 1/3 and variance 1/18.
    CHECK(std::abs(mean / n - 1.0 / 3.0) < 5.0 * std::sqrt(1.0 / 18.0 / n));
  }
}

TEST_CASE("pairwise sums") {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + 1);
  CHECK(pairwise_sum(x.data(), x.size()) == 500500.0);
  CHECK(pairwise_sum(x.data(), 0) == 0.0);
  CHECK(pairwise_sum(x.data(), 3) == 6.0);
  std::vector<double> small(1 << 20, 0.1);
  CHECK(std::abs(pairwise_sum(small.data(), small.size()) - 0.1 * small.size()) < 1e-8);
}

TEST_CASE("integrality reports") {
  SUBCASE("P_0") {
    const auto inner = construct_inner(model(KernelSpec::szego(2), 6, "z1, z2"));
    const auto r = integrality_report(inner, {0.9, 0.95, 0.99}, {.samples = 2000}, "P0");
    CHECK(r.applicable);
    CHECK(r.m == 1);
    CHECK(r.candidate == 0);
    CHECK(r.residual <= 0.05);
    CHECK(r.estimates.size() == 3);
    CHECK(r.rank_points == kRankSamplePoints);
    for (std::size_t i = 1; i < r.estimates.size(); ++i) CHECK(r.estimates[i].value < r.estimates[i - 1].value);
    const auto j = nlohmann::json::parse(to_json(r));
    for (const char* key : {"model", "applicable", "reason", "tGrid", "estimates", "mcError", "m", "candidate", "residual",
                            "quadrature", "seed", "samples"}) {
      CHECK_MESSAGE(j.contains(key), key);
    }
    CHECK(j["candidate"] == 0);
    CHECK(j["quadrature"] == "sphere-montecarlo");
    CHECK(j["model"] == "P0");
  }
  SUBCASE("Blaschke factor") {
    const auto inner = construct_inner(model(KernelSpec::szego(1), 100, "z - 1/2"));
    const auto r = integrality_report(inner, {0.99});
    CHECK(r.candidate == 0);
    CHECK(r.residual <= 0.05);
    CHECK(nlohmann::json::parse(to_json(r))["quadrature"] == "circle-trapezoid");
  }
  SUBCASE("outside the hypothesis") {
    const auto inner = construct_inner(model(KernelSpec::dirichlet(1, 2), 40, "z - 1/2"));
    const auto r = integrality_report(inner, {0.9});
    CHECK_FALSE(r.applicable);
    CHECK_FALSE(r.reason.empty());
    CHECK(nlohmann::json::parse(to_json(r))["applicable"] == false);
  }
  SUBCASE("determinism") {
    const auto inner = construct_inner(model(KernelSpec::szego(2), 6, "z1^2, z2"));
    CHECK(to_json(integrality_report(inner, {0.9}, {.samples = 500, .seed = 3})) ==
          to_json(integrality_report(inner, {0.9}, {.samples = 500, .seed = 3})));
  }
}

TEST_CASE("direct curvature matches the defect trace") {
  std::mt19937_64 rng(11);
  struct Case {
    int d;
    int N;
    std::string gens;
  };
  for (const Case& c : {Case{1, 120, "z - 1/2"}, Case{1, 120, "z^2"}, Case{2, 8, "z1, z2"}, Case{2, 30, "z1^2, z1*z2, z2^2"},
                        Case{2, 30, "z1"}}) {
    CAPTURE(c.gens);
    const auto m = model(KernelSpec::szego(c.d), c.N, c.gens);
    const auto inner = construct_inner(m);
    for (int j = 0; j < 10; ++j) {
      const Point l = testing::ball_point(rng, c.d, 0.8);
      const auto direct = module_curvature_direct(*m, l);
      CHECK(std::abs(direct.trace - defect_trace(inner, l)) < 1e-6);
    }
  }
  CHECK_THROWS_AS(module_curvature_direct(*model(KernelSpec::dirichlet(1, 1), 10, "z"), pt({0.1})), ValidationError);
  CHECK_THROWS_AS(module_curvature_direct(*model(KernelSpec::szego(1), 10, "z"), pt({1.0})), ValidationError);
}
