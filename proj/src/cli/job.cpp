#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nplab/cli.hpp"
#include "nplab/errors.hpp"
#include "nplab/kernel_spec.hpp"
#include "nplab/polynomial_parser.hpp"
#include "nplab/truncated_space.hpp"

namespace nplab::cli {

using nlohmann::json;

namespace {

// Cap on monomials per model, to keep dense n x n work bounded.
constexpr std::size_t kMaxMonomials = 6000;
// Relative kernel tails targeted when ratio-scan picks N itself: at the
// scan radius, and at the common zero of a point-zero model.
constexpr double kScanTailBudget = 1e-6;
constexpr double kPointZeroTailBudget = 1e-3;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ValidationError("field '" + field + "': " + msg);
}

template <class T>
T get_number(const json& v, const std::string& key) {
  if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  } else {
    if (!v.is_number_integer()) fail(key, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned()) return v.get<T>();
      if (v.get<long long>() < 0) fail(key, "must be nonnegative");
      return static_cast<T>(v.get<long long>());
    } else {
      return v.get<T>();
    }
  }
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

// Strings, numbers or a single comma-separated string.
std::vector<std::string> get_coords(const json& v, const std::string& key) {
  std::vector<std::string> out;
  auto one = [&](const json& e) {
    if (e.is_string()) {
      out.push_back(e.get<std::string>());
    } else if (e.is_number()) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", e.get<double>());
      out.emplace_back(buf);
    } else {
      fail(key, "entries must be numbers or complex strings");
    }
  };
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
  } else if (v.is_array()) {
    for (const auto& e : v) one(e);
  } else {
    fail(key, "expected an array");
  }
  return out;
}

double parse_real(const std::string& s, const std::string& whole) {
  if (s.empty()) throw ValidationError("malformed complex number '" + whole + "'");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ValidationError("malformed complex number '" + whole + "'");
  }
  return v;
}

double parse_point_norm(const std::vector<std::string>& coords) {
  double s = 0.0;
  for (const auto& c : coords) s += std::norm(parse_complex(c));
  return std::min(1.0, std::sqrt(s));
}

bool is_model_command(const std::string& c) {
  return c == "extremal" || c == "ratio-scan" || c == "inner" || c == "curvature";
}

int default_degree(const std::string& command, int d) {
  if (command == "series") return 100;
  if (command == "npcheck") return 200;
  if (command == "conjecture45") return 200;
  if (d == 1) return 100;
  if (d == 2) return 30;
  return 12;
}

// Smallest N whose relative kernel tail at radius t is at most tol.
int auto_degree(const kernelspace::KernelSpec& spec, double t, double tol) {
  const double r = t * t;
  double partial = 0.0;
  for (int N = 0; N <= 200000; ++N) {
    partial += spec.coeff(static_cast<std::size_t>(N)) * std::pow(r, N);
    const double tail = spec.tail_bound(static_cast<std::size_t>(N), r);
    if (tail <= tol * partial) return N;
    if (spec.max_degree() && static_cast<std::size_t>(N) >= *spec.max_degree()) break;
  }
  throw ValidationError("field 'N': no degree meets the kernel tail budget at t = " + std::to_string(t) +
                        "; set N explicitly");
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(ss.str())));
  return buf;
}

}  // namespace

std::complex<double> parse_complex(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw ValidationError("malformed complex number '" + text + "'");
  if (s.back() != 'i') return {parse_real(s, text), 0.0};
  s.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t p = s.size(); p-- > 1;) {
    if ((s[p] == '+' || s[p] == '-') && s[p - 1] != 'e' && s[p - 1] != 'E') {
      split = p;
      break;
    }
  }
  auto imag = [&](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return parse_real(t, text);
  };
  if (split == std::string::npos) return {0.0, imag(s)};
  return {parse_real(s.substr(0, split), text), imag(s.substr(split))};
}

JobConfig parse_job_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ValidationError("job file line " + std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError("job file: top level must be an object");
  JobConfig cfg;
  for (const auto& [key, v] : j.items()) {
    if (key == "command") {
      cfg.command = get_string(v, key);
    } else if (key == "spec") {
      cfg.spec = get_string(v, key);
    } else if (key == "d") {
      cfg.d = get_number<int>(v, key);
    } else if (key == "N") {
      cfg.N = get_number<int>(v, key);
    } else if (key == "fiberDim") {
      cfg.fiber_dim = get_number<int>(v, key);
    } else if (key == "exact") {
      if (!v.is_boolean()) fail(key, "expected true or false");
      cfg.exact = v.get<bool>();
    } else if (key == "generators") {
      if (v.is_string()) {
        cfg.generators = {v.get<std::string>()};
      } else if (v.is_array()) {
        for (const auto& g : v) cfg.generators.push_back(get_string(g, key));
      } else {
        fail(key, "expected an array of polynomial strings");
      }
    } else if (key == "pointZero") {
      cfg.point_zero = get_coords(v, key);
    } else if (key == "direction") {
      cfg.direction = get_coords(v, key);
    } else if (key == "tGrid") {
      if (!v.is_array()) fail(key, "expected an array of numbers");
      for (const auto& t : v) cfg.t_grid.push_back(get_number<double>(t, key));
    } else if (key == "tmax") {
      cfg.tmax = get_number<double>(v, key);
    } else if (key == "steps") {
      cfg.steps = get_number<int>(v, key);
    } else if (key == "seed") {
      cfg.seed = get_number<std::uint64_t>(v, key);
    } else if (key == "samples") {
      cfg.samples = get_number<std::size_t>(v, key);
    } else if (key == "circlePoints") {
      cfg.circle_points = get_number<std::size_t>(v, key);
    } else if (key == "trials") {
      cfg.trials = get_number<std::size_t>(v, key);
    } else if (key == "horizon") {
      cfg.horizon = get_number<std::size_t>(v, key);
    } else if (key == "output") {
      cfg.output = get_string(v, key);
    } else {
      throw ValidationError("job file: unknown key '" + key + "'");
    }
  }
  return cfg;
}

void validate(JobConfig& cfg) {
  const auto& names = commands();
  if (std::find(names.begin(), names.end(), cfg.command) == names.end()) {
    fail("command", "unknown command '" + cfg.command + "'");
  }
  if (cfg.d < 1 || cfg.d > 8) fail("d", "must lie in 1..8");
  if (cfg.fiber_dim < 1 || cfg.fiber_dim > 16) fail("fiberDim", "must lie in 1..16");
  if (cfg.N && (*cfg.N < 0 || *cfg.N > 200000)) fail("N", "must lie in 0..200000");
  if (cfg.steps < 1 || cfg.steps > 100000) fail("steps", "must lie in 1..100000");
  if (cfg.output.empty()) fail("output", "must not be empty");
  kernelspace::KernelSpec spec = [&] {
    try {
      return kernelspace::parse_spec(cfg.spec, cfg.d);
    } catch (const ValidationError& e) {
      fail("spec", e.what());
    }
  }();

  if (cfg.command == "conjecture45") {
    if (cfg.trials < 1 || cfg.trials > 100000) fail("trials", "must lie in 1..100000");
    if (cfg.horizon < 2 || cfg.horizon > 100000) fail("horizon", "must lie in 2..100000");
  }
  if (!is_model_command(cfg.command)) {
    if (!cfg.N) cfg.N = default_degree(cfg.command, cfg.d);
    if (spec.max_degree() && static_cast<std::size_t>(*cfg.N) > *spec.max_degree()) {
      fail("N", "exceeds the degree of the coefficient file (" + std::to_string(*spec.max_degree()) + ")");
    }
    return;
  }

  // Model commands.
  const bool has_gens = !cfg.generators.empty();
  const bool has_zero = !cfg.point_zero.empty();
  if (has_gens == has_zero) fail("generators", "give exactly one of generators and pointZero");
  if (has_zero) {
    if (static_cast<int>(cfg.point_zero.size()) != cfg.d) fail("pointZero", "needs d coordinates");
    Point z0(cfg.d);
    for (int i = 0; i < cfg.d; ++i) z0[i] = parse_complex(cfg.point_zero[static_cast<std::size_t>(i)]);
    const double n = z0.norm();
    if (n > 1.0 + 1e-14) fail("pointZero", "must lie in the closed unit ball");
    if (n > 1.0 - 1e-14 && !spec.boundary_summable()) {
      fail("pointZero", "boundary point needs a kernel summable on the sphere");
    }
  } else {
    std::string joined;
    for (const auto& g : cfg.generators) joined += (joined.empty() ? "" : ",") + g;
    std::vector<kernelspace::Polynomial> polys;
    try {
      polys = kernelspace::parse_generator_list(joined, cfg.d);
    } catch (const ValidationError& e) {
      fail("generators", e.what());
    }
    for (const auto& p : polys) {
      if (p.fiber_dim() != cfg.fiber_dim) {
        fail("generators", "fiber dimension " + std::to_string(p.fiber_dim()) + " differs from fiberDim " +
                               std::to_string(cfg.fiber_dim));
      }
    }
  }

  const bool scans = cfg.command == "ratio-scan" || cfg.command == "inner";
  const double limit = cfg.command == "ratio-scan" ? 1.0 : 0.999;
  if (scans) {
    if (static_cast<int>(cfg.direction.size()) != cfg.d) fail("direction", "needs d coordinates");
    Point z(cfg.d);
    for (int i = 0; i < cfg.d; ++i) z[i] = parse_complex(cfg.direction[static_cast<std::size_t>(i)]);
    if (z.norm() == 0.0) fail("direction", "must be nonzero");
  }
  if (cfg.command == "extremal") {
    if (!cfg.t_grid.empty() || cfg.tmax) fail("tGrid", "not used by extremal");
  }
  if (cfg.command == "curvature") {
    if (cfg.t_grid.empty()) cfg.t_grid = cfg.tmax ? std::vector<double>{*cfg.tmax} : std::vector<double>{0.9, 0.95, 0.99};
    if (cfg.samples < 2 || cfg.samples > 10000000) fail("samples", "must lie in 2..10000000");
    if (cfg.circle_points < 1 || cfg.circle_points > 10000000) fail("circlePoints", "must lie in 1..10000000");
  }
  if (scans && cfg.t_grid.empty()) {
    const double tmax = cfg.tmax.value_or(cfg.command == "ratio-scan" ? 0.95 : 0.99);
    if (!(tmax > 0.0 && tmax < limit) && !(cfg.command == "inner" && tmax == limit)) {
      fail("tmax", "must lie in (0, " + std::to_string(limit) + ")");
    }
    cfg.tmax = tmax;
    for (int j = 0; j <= cfg.steps; ++j) cfg.t_grid.push_back(tmax * j / cfg.steps);
  }
  for (double t : cfg.t_grid) {
    if (!(t >= 0.0 && (t < limit || (limit < 1.0 && t == limit)))) {
      fail("tGrid", "values must lie in [0, " + std::to_string(limit) + (limit < 1.0 ? "]" : ")"));
    }
  }
  if (!cfg.N) {
    const double tmax = cfg.t_grid.empty() ? 0.0 : *std::max_element(cfg.t_grid.begin(), cfg.t_grid.end());
    if (cfg.command == "ratio-scan") {
      int n = auto_degree(spec, tmax, kScanTailBudget);
      if (has_zero) n = std::max(n, auto_degree(spec, parse_point_norm(cfg.point_zero), kPointZeroTailBudget));
      cfg.N = n;
    } else {
      cfg.N = default_degree(cfg.command, cfg.d);
    }
  }
  if (spec.max_degree() && static_cast<std::size_t>(*cfg.N) > *spec.max_degree()) {
    fail("N", "exceeds the degree of the coefficient file (" + std::to_string(*spec.max_degree()) + ")");
  }
  if (kernelspace::monomial_count(cfg.d, *cfg.N) > kMaxMonomials) {
    fail("N", "C(N+d, d) = " + std::to_string(kernelspace::monomial_count(cfg.d, *cfg.N)) + " exceeds " +
                  std::to_string(kMaxMonomials) + " monomials");
  }
  if ((cfg.command == "inner" || cfg.command == "curvature") && !spec.certified_np()) {
    fail("spec", "kernel '" + spec.name() + "' is not certified NP");
  }
}

std::string canonical_json(const JobConfig& cfg) {
  nlohmann::ordered_json j;
  j["command"] = cfg.command;
  j["spec"] = cfg.spec;
  if (cfg.spec.rfind("file:", 0) == 0) j["specFileDigest"] = file_digest(cfg.spec.substr(5));
  j["d"] = cfg.d;
  j["N"] = cfg.N ? json(*cfg.N) : json(nullptr);
  j["fiberDim"] = cfg.fiber_dim;
  j["exact"] = cfg.exact;
  j["generators"] = cfg.generators;
  j["pointZero"] = cfg.point_zero;
  j["direction"] = cfg.direction;
  j["tGrid"] = cfg.t_grid;
  j["tmax"] = cfg.tmax ? json(*cfg.tmax) : json(nullptr);
  j["steps"] = cfg.steps;
  j["seed"] = cfg.seed;
  j["samples"] = cfg.samples;
  j["circlePoints"] = cfg.circle_points;
  j["trials"] = cfg.trials;
  j["horizon"] = cfg.horizon;
  return j.dump();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string artifact_stem(const JobConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_json(cfg))));
  return cfg.command + "-" + buf;
}

series::CoeffSeq random_unit_mass_b(std::mt19937_64& rng, int max_support) {
  if (max_support < 1) throw ValidationError("random_unit_mass_b: max_support must be positive");
  constexpr double scale = 1.0 / 9007199254740992.0;
  auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 1.0) * scale; };
  // Index 1 always carries mass; the others join with probability 1/2.
  std::vector<double> b(static_cast<std::size_t>(max_support) + 1, 0.0);
  std::vector<double> w(b.size(), 0.0);
  double total = 0.0;
  for (int n = 1; n <= max_support; ++n) {
    if (n == 1 || (rng() >> 63) != 0) {
      w[static_cast<std::size_t>(n)] = uniform();
      total += w[static_cast<std::size_t>(n)];
    }
  }
  for (std::size_t n = 1; n < b.size(); ++n) b[n] = 0.9 * w[n] / total;
  b[1] += 0.1;
  while (b.size() > 2 && b.back() == 0.0) b.pop_back();
  return series::CoeffSeq::floating(std::move(b));
}

}  // namespace nplab::cli
