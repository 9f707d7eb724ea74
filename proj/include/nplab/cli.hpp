#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nplab/series.hpp"

namespace nplab::cli {

inline constexpr const char* kVersion = "1.0.0";

/// One experiment. Optional fields left empty take per-command defaults in
/// validate().
struct JobConfig {
  std::string command;
  std::string spec = "szego";
  int d = 1;
  std::optional<int> N;
  int fiber_dim = 1;
  bool exact = false;
  std::vector<std::string> generators;
  /// Coordinates as text, each "x", "yi", "x+yi" or "x-yi".
  std::vector<std::string> point_zero;
  std::vector<std::string> direction;
  std::vector<double> t_grid;
  std::optional<double> tmax;
  int steps = 20;
  std::uint64_t seed = 1;
  std::size_t samples = 20000;
  std::size_t circle_points = 2048;
  std::size_t trials = 20;
  std::size_t horizon = 500;
  std::string output = ".";
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"series",  "npcheck",   "extremal",    "ratio-scan",
                                              "inner",   "curvature", "conjecture45"};
  return names;
}

/// Parses a JSON job file. Unknown keys and ill-typed values throw
/// ValidationError naming the field; syntax errors name the line.
JobConfig parse_job_json(const std::string& text);

/// Checks every field for the chosen command and fills defaults (N, the
/// t grid). Throws ValidationError.
void validate(JobConfig& cfg);

/// Canonical JSON of the fields that determine the results (output
/// directory excluded), keys in fixed order.
std::string canonical_json(const JobConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);
/// "<command>-<16 hex digits of fnv1a64(canonical_json)>".
std::string artifact_stem(const JobConfig& cfg);

/// Parses "x", "yi", "x+yi", "x-yi" (also "i", "-i").
std::complex<double> parse_complex(const std::string& text);

/// Runs a validated job. Writes artifacts into cfg.output and a log to
/// `log`. Exceptions propagate.
void run(const JobConfig& cfg, std::ostream& log);

/// Entry point: flags and optional --job file, flags overriding the file.
/// Returns 0 on success, 1 on validation errors, 2 on numerical-contract
/// violations.
int main_entry(int argc, char** argv);

/// Random finitely supported b with b_0 = 0, b_1 >= 0.1, support within
/// 1..max_support and sum b_n = 1 up to rounding.
series::CoeffSeq random_unit_mass_b(std::mt19937_64& rng, int max_support = 8);

}  // namespace nplab::cli
