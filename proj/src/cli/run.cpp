#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nplab/cli.hpp"
#include "nplab/curvature.hpp"
#include "nplab/errors.hpp"
#include "nplab/innermt.hpp"
#include "nplab/kernelspace.hpp"
#include "nplab/polynomial_parser.hpp"
#include "nplab/subspace.hpp"

namespace nplab::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Point parse_point(const std::vector<std::string>& coords) {
  Point z(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) z[static_cast<Eigen::Index>(i)] = parse_complex(coords[i]);
  return z;
}

ordered_json point_json(const Point& z) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < z.size(); ++i) a.push_back({z[i].real(), z[i].imag()});
  return a;
}

class Artifacts {
 public:
  Artifacts(const JobConfig& cfg) : dir_(cfg.output), stem_(artifact_stem(cfg)) {
    fs::create_directories(dir_);
  }

  std::ofstream open(const std::string& ext) {
    const std::string name = stem_ + ext;
    names_.push_back(name);
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + (dir_ / name).string() + "'");
    return out;
  }

  void write(const std::string& ext, const std::string& text) {
    auto out = open(ext);
    out << text;
  }

  const std::vector<std::string>& names() const { return names_; }
  fs::path path(const std::string& name) const { return dir_ / name; }
  const std::string& stem() const { return stem_; }

 private:
  fs::path dir_;
  std::string stem_;
  std::vector<std::string> names_;
};

std::shared_ptr<const subspace::SubspaceModel> build_model(const JobConfig& cfg, std::string& label) {
  const auto spec = kernelspace::parse_spec(cfg.spec, cfg.d);
  const auto space = kernelspace::build_space(spec, *cfg.N, cfg.fiber_dim);
  if (!cfg.point_zero.empty()) {
    const Point z0 = parse_point(cfg.point_zero);
    label = "point-zero";
    for (const auto& c : cfg.point_zero) label += " " + c;
    return std::make_shared<const subspace::SubspaceModel>(subspace::build_point_zero(space, z0));
  }
  std::string joined;
  for (const auto& g : cfg.generators) joined += (joined.empty() ? "" : ",") + g;
  std::vector<kernelspace::PolyFn> gens;
  label = "generators";
  for (const auto& p : kernelspace::parse_generator_list(joined, cfg.d)) {
    gens.push_back(kernelspace::to_polyfn(p, space));
    label += " " + kernelspace::to_text(p);
  }
  return std::make_shared<const subspace::SubspaceModel>(subspace::build_submodule(space, std::move(gens)));
}

Point unit_direction(const JobConfig& cfg) {
  const Point z = parse_point(cfg.direction);
  return z / z.norm();
}

void run_series(const JobConfig& cfg, Artifacts& art, ordered_json& m) {
  const auto spec = kernelspace::parse_spec(cfg.spec, cfg.d);
  series::CoeffSeq a = spec.coeff_seq(static_cast<std::size_t>(*cfg.N));
  if (cfg.exact && !a.is_exact()) {
    throw ValidationError("field 'exact': kernel '" + spec.name() + "' has irrational coefficients");
  }
  if (!cfg.exact) a = a.as_floating();
  const series::CoeffSeq b = series::reciprocal_coeffs(a);
  auto out = art.open(".csv");
  out << "n,a,b\n";
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (a.is_exact()) {
      out << n << ',' << a.rational()[n].get_str() << ',' << b.rational()[n].get_str() << '\n';
    } else {
      out << n << ',' << fmt(a.value(n)) << ',' << fmt(b.value(n)) << '\n';
    }
  }
  const auto rt = series::ratio_tail(a);
  m["results"] = {{"mode", a.is_exact() ? "exact" : "floating"}, {"ratioTail", rt.tail_estimate}};
  m["tolerances"] = {{"floatSign", cfg.exact ? 0.0 : series::kFloatTolerance}};
}

void run_npcheck(const JobConfig& cfg, Artifacts& art, ordered_json& m) {
  const auto spec = kernelspace::parse_spec(cfg.spec, cfg.d);
  const auto N = static_cast<std::size_t>(*cfg.N);
  series::NPCertificate cert;
  std::string input;
  if (cfg.exact && spec.closed_form() == kernelspace::ClosedForm::dirichlet_alpha && spec.alpha_fraction().second != 1) {
    const auto [p, q] = spec.alpha_fraction();
    cert = series::np_certify(series::power_law_enclosure(static_cast<unsigned>(p), static_cast<unsigned>(q), N), N);
    input = "enclosure";
  } else {
    series::CoeffSeq a = spec.coeff_seq(N);
    if (cfg.exact && !a.is_exact()) throw ValidationError("field 'exact': kernel coefficients are not rational");
    if (!cfg.exact) a = a.as_floating();
    cert = series::np_certify(a, N);
    input = a.is_exact() ? "exact" : "floating";
  }
  ordered_json j;
  j["spec"] = spec.to_text();
  j["degree"] = cert.degree;
  j["input"] = input;
  j["mode"] = cert.mode == series::Mode::exact ? "exact" : "floating";
  j["method"] = series::to_string(cert.method);
  j["status"] = series::to_string(cert.status);
  j["firstNegativeIndex"] = cert.first_negative_index ? ordered_json(*cert.first_negative_index) : ordered_json(nullptr);
  j["firstUndecidedIndex"] =
      cert.first_undecided_index ? ordered_json(*cert.first_undecided_index) : ordered_json(nullptr);
  j["minCoefficient"] = cert.min_coefficient;
  art.write(".json", j.dump(2) + "\n");
  m["results"] = {{"status", series::to_string(cert.status)}};
  m["tolerances"] = {{"floatSign", cfg.exact ? 0.0 : series::kFloatTolerance}};
}

void run_extremal(const JobConfig& cfg, Artifacts& art, ordered_json& m) {
  std::string label;
  const auto model = build_model(cfg, label);
  const auto f = subspace::extremal_solution(*model);
  const auto& space = model->space();
  ordered_json terms = ordered_json::array();
  for (std::size_t k = 0; k < space.monomial_count(); ++k) {
    for (int r = 0; r < space.fiber_dim(); ++r) {
      const Complex c = f.coeff(k, r);
      if (c == Complex(0.0)) continue;
      terms.push_back({{"k", space.monomial(k).exps}, {"fiber", r}, {"re", c.real()}, {"im", c.imag()}});
    }
  }
  ordered_json j;
  j["model"] = label;
  j["rank"] = model->rank();
  j["valueAtZero"] = point_eval(f, Point::Zero(space.d()))[0].real();
  j["norm"] = poly_norm(f);
  j["terms"] = terms;
  art.write(".json", j.dump(2) + "\n");
  m["results"] = {{"rank", model->rank()}, {"projectionDefect", subspace::projection_defect(*model)}};
  m["tolerances"] = {{"rank", subspace::kRankTolerance}};
}

void run_ratio_scan(const JobConfig& cfg, Artifacts& art, ordered_json& m) {
  std::string label;
  const auto model = build_model(cfg, label);
  const Point z = unit_direction(cfg);
  const auto samples = subspace::radial_scan(*model, z, cfg.t_grid);
  {
    auto out = art.open(".csv");
    subspace::write_radial_csv(out, samples);
  }
  double max_tail = 0.0;
  for (const auto& s : samples) max_tail = std::max(max_tail, s.tail_bound);
  ordered_json res;
  res["model"] = label;
  res["rank"] = model->rank();
  res["direction"] = point_json(z);
  res["ratioAtTmax"] = samples.back().ratio;
  const auto& spec = model->space().spec();
  if (model->point_zero() && cfg.d == 1 && spec.boundary_summable()) {
    const double t = samples.back().t;
    const auto cf = subspace::counterexample_closed_form(spec, (*model->point_zero())[0], t * z[0]);
    res["closedFormAtTmax"] = cf.value;
    res["closedFormError"] = cf.error_bound;
  }
  m["results"] = res;
  m["tolerances"] = {{"rank", subspace::kRankTolerance}, {"radialTail", subspace::kRadialTailTolerance}};
  m["tailBounds"] = {{"maxRelativeKernelTail", max_tail}};
  if (model->point_zero()) {
    const double r = std::min(1.0, model->point_zero()->squaredNorm());
    m["tailBounds"]["pointZeroKernelTail"] = spec.tail_bound(static_cast<std::size_t>(*cfg.N), r);
  }
}

ordered_json inner_summary(const innermt::InnerMultiplier& inner) {
  ordered_json j;
  j["dimE"] = inner.dim_e();
  j["fiberDim"] = inner.fiber_dim();
  std::vector<double> ev(inner.eigenvalues().data(), inner.eigenvalues().data() + inner.eigenvalues().size());
  j["eigenvalues"] = ev;
  j["clamped"] = inner.clamp_report().clamped;
  j["beyondClampBand"] = inner.clamp_report().beyond_clamp_band;
  j["mostNegative"] = inner.clamp_report().most_negative;
  j["omittedMass"] = inner.omitted_mass();
  return j;
}

ordered_json inner_tolerances() {
  return {{"rank", subspace::kRankTolerance},       {"clamp", innermt::kClampTolerance},
          {"abort", innermt::kAbortTolerance},      {"range", innermt::kRangeTolerance},
          {"svd", innermt::kDefaultSvdTolerance},   {"maxT", innermt::kDefaultMaxT}};
}

void run_inner(const JobConfig& cfg, Artifacts& art, ordered_json& m) {
  std::string label;
  const auto model = build_model(cfg, label);
  const auto inner = innermt::construct_inner(model);
  const auto samples = innermt::boundary_isometry_scan(inner, unit_direction(cfg), cfg.t_grid);
  {
    auto out = art.open(".csv");
    innermt::write_isometry_csv(out, samples);
  }
  {
    auto out = art.open(".matrix");
    innermt::write_matrix(out, inner.S(), model->space());
  }
  ordered_json summary = inner_summary(inner);
  summary["model"] = label;
  art.write(".json", summary.dump(2) + "\n");
  double max_tail = 0.0;
  for (const auto& s : samples) max_tail = std::max(max_tail, s.tail_bound);
  m["results"] = {{"dimE", inner.dim_e()}, {"rank", model->rank()}};
  m["tolerances"] = inner_tolerances();
  m["tailBounds"] = {{"omittedMass", inner.omitted_mass()}, {"maxRelativeKernelTail", max_tail}};
}

void run_curvature(const JobConfig& cfg, Artifacts& art, ordered_json& m) {
  std::string label;
  const auto model = build_model(cfg, label);
  const auto inner = innermt::construct_inner(model);
  curvature::QuadratureConfig q;
  q.circle_points = cfg.circle_points;
  q.samples = cfg.samples;
  q.seed = cfg.seed;
  const auto rep = curvature::integrality_report(inner, cfg.t_grid, q, label);
  art.write(".json", curvature::to_json(rep) + "\n");
  m["results"] = {{"applicable", rep.applicable}, {"candidate", rep.candidate}, {"residual", rep.residual},
                  {"dimE", inner.dim_e()}};
  auto tol = inner_tolerances();
  tol["rankPoints"] = curvature::kRankSamplePoints;
  m["tolerances"] = tol;
  m["tailBounds"] = {{"omittedMass", inner.omitted_mass()}};
}

void run_conjecture45(const JobConfig& cfg, Artifacts& art, ordered_json& m) {
  std::mt19937_64 rng(cfg.seed);
  double worst = 0.0;
  {
    auto out = art.open(".csv");
    out << "trial,support,mass,ratio_at_n,deviation\n";
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto b = random_unit_mass_b(rng);
      const auto probe = series::conjecture_probe(b, cfg.horizon);
      worst = std::max(worst, probe.deviation);
      out << i << ',' << b.degree() << ',' << fmt(probe.mass) << ',' << fmt(probe.ratio_at_n) << ','
          << fmt(probe.deviation) << '\n';
    }
  }
  const auto spec = kernelspace::parse_spec(cfg.spec, cfg.d);
  const auto mb = kernelspace::bn_mass_bounds(spec, *cfg.N);
  ordered_json j;
  j["trials"] = cfg.trials;
  j["horizon"] = cfg.horizon;
  j["maxDeviation"] = worst;
  j["spec"] = spec.to_text();
  j["massLower"] = mb.lower;
  j["massUpper"] = mb.upper;
  j["sumEqualsOne"] = kernelspace::to_string(mb.sum_equals_one);
  j["insideHypothesis"] = mb.sum_equals_one == kernelspace::HypothesisStatus::satisfied;
  art.write(".json", j.dump(2) + "\n");
  m["results"] = {{"maxDeviation", worst}, {"sumEqualsOne", kernelspace::to_string(mb.sum_equals_one)}};
  m["tailBounds"] = {{"massGap", mb.upper - mb.lower}};
}

}  // namespace

void run(const JobConfig& cfg, std::ostream& log) {
  Artifacts art(cfg);
  ordered_json m;
  m["tool"] = "nplab";
  m["version"] = kVersion;
  m["config"] = ordered_json::parse(canonical_json(cfg));
  const auto& c = cfg.command;
  if (c == "series") run_series(cfg, art, m);
  else if (c == "npcheck") run_npcheck(cfg, art, m);
  else if (c == "extremal") run_extremal(cfg, art, m);
  else if (c == "ratio-scan") run_ratio_scan(cfg, art, m);
  else if (c == "inner") run_inner(cfg, art, m);
  else if (c == "curvature") run_curvature(cfg, art, m);
  else if (c == "conjecture45") run_conjecture45(cfg, art, m);
  else throw ValidationError("field 'command': unknown command '" + c + "'");
  m["outputs"] = art.names();
  const std::string manifest = art.stem() + ".manifest.json";
  {
    std::ofstream out(art.path(manifest), std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + art.path(manifest).string() + "'");
    out << m.dump(2) << "\n";
  }
  for (const auto& n : art.names()) log << art.path(n).string() << "\n";
  log << art.path(manifest).string() << "\n";
}

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"Experiments on complete Nevanlinna-Pick kernel spaces", "nplab"};
  app.set_version_flag("--version", std::string(kVersion));
  std::string command, job, spec, generators, point_zero, direction, tgrid, output;
  int d = 1, N = 0, fiber = 1, steps = 20;
  double tmax = 0.0;
  std::uint64_t seed = 1;
  std::size_t samples = 0, circle = 0, trials = 0, horizon = 0;
  bool exact = false;
  std::string names;
  for (const auto& n : commands()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("command", command, "One of: " + names);
  app.add_option("--job", job, "JSON job file; flags override its fields");
  app.add_option("--spec", spec, "szego, dirichlet:<alpha> or file:<csv>");
  app.add_option("--d", d, "Ball dimension");
  app.add_option("--N,--degree", N, "Truncation degree");
  app.add_option("--fiber-dim", fiber, "Fiber dimension");
  app.add_flag("--exact", exact, "Exact rational arithmetic");
  app.add_option("--generators", generators, "Comma separated generator polynomials");
  app.add_option("--point-zero", point_zero, "Comma separated coordinates of the common zero");
  app.add_option("--direction,--scan-direction", direction, "Comma separated scan direction");
  app.add_option("--tgrid", tgrid, "Comma separated radii");
  app.add_option("--tmax", tmax, "Largest radius of the default grid");
  app.add_option("--steps", steps, "Intervals of the default grid");
  app.add_option("--seed", seed, "Monte Carlo / harness seed");
  app.add_option("--samples", samples, "Monte Carlo samples (d >= 2)");
  app.add_option("--circle-points", circle, "Trapezoid points (d = 1)");
  app.add_option("--trials", trials, "conjecture45 trials");
  app.add_option("--horizon", horizon, "conjecture45 recursion length");
  app.add_option("--output", output, "Output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    JobConfig cfg;
    if (!job.empty()) {
      std::ifstream in(job);
      if (!in) throw ValidationError("cannot open job file '" + job + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      cfg = parse_job_json(ss.str());
    }
    auto given = [&](const char* name) { return app.get_option(name)->count() > 0; };
    if (given("command")) cfg.command = command;
    if (given("--spec")) cfg.spec = spec;
    if (given("--d")) cfg.d = d;
    if (given("--N")) cfg.N = N;
    if (given("--fiber-dim")) cfg.fiber_dim = fiber;
    if (given("--exact")) cfg.exact = exact;
    if (given("--generators")) cfg.generators = {generators};
    if (given("--point-zero")) cfg.point_zero = split_commas(point_zero);
    if (given("--direction")) cfg.direction = split_commas(direction);
    if (given("--tgrid")) {
      cfg.t_grid.clear();
      for (const auto& t : split_commas(tgrid)) {
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (t.empty() || *end != '\0') throw ValidationError("field 'tGrid': malformed number '" + t + "'");
        cfg.t_grid.push_back(v);
      }
    }
    if (given("--tmax")) cfg.tmax = tmax;
    if (given("--steps")) cfg.steps = steps;
    if (given("--seed")) cfg.seed = seed;
    if (given("--samples")) cfg.samples = samples;
    if (given("--circle-points")) cfg.circle_points = circle;
    if (given("--trials")) cfg.trials = trials;
    if (given("--horizon")) cfg.horizon = horizon;
    if (given("--output")) cfg.output = output;
    if (cfg.command.empty()) throw ValidationError("field 'command': missing (give it as the first argument)");
    validate(cfg);
    run(cfg, std::cout);
    return 0;
  } catch (const NumericalContractError& e) {
    std::cerr << "numerical contract violated: " << e.what() << " (value " << fmt(e.value()) << ")\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace nplab::cli
