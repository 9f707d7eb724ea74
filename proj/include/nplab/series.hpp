#pragma once

// Coefficient sequences {a_n}, {b_n} of a U-invariant kernel
//   k(x) = sum a_n x^n = 1 / (1 - sum_{n>=1} b_n x^n),
// with exact (GMP rational) and floating arithmetic, NP certification and
// the ratio-tail explorer.

#include <gmpxx.h>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nplab::series {

using Rational = mpq_class;

enum class Mode { exact, floating };

/// Degree bound below which exact arithmetic is the default.
inline constexpr std::size_t kExactDefaultMaxDegree = 500;
/// Sign tolerance used in floating mode.
inline constexpr double kFloatTolerance = 1e-12;

class CoeffSeq {
 public:
  CoeffSeq() = default;

  static CoeffSeq exact(std::vector<Rational> coeffs);
  static CoeffSeq floating(std::vector<double> coeffs);

  Mode mode() const noexcept;
  bool is_exact() const noexcept { return mode() == Mode::exact; }
  std::size_t size() const noexcept;
  /// N, where the sequence holds indices 0..N. Requires a nonempty sequence.
  std::size_t degree() const;

  double value(std::size_t n) const;
  const std::vector<Rational>& rational() const;
  const std::vector<double>& real() const;
  std::vector<double> to_double() const;

  /// Indices 0..n (n <= degree()).
  CoeffSeq truncated(std::size_t n) const;
  /// Floating copy; identity on floating sequences.
  CoeffSeq as_floating() const;

 private:
  std::variant<std::vector<Rational>, std::vector<double>> data_;
};

bool operator==(const CoeffSeq& lhs, const CoeffSeq& rhs);

/// Closed rational interval [lo, hi].
struct Interval {
  Rational lo;
  Rational hi;
};

/// Rigorous rational enclosures of a sequence whose terms are not rational,
/// e.g. a_n = (n+1)^(-1/2).
struct EnclosedSeq {
  std::vector<Interval> terms;
  std::size_t degree() const { return terms.size() - 1; }
};

enum class CertStatus { certified, refuted, inconclusive };
enum class CertMethod { hardy_criterion, direct_reciprocal };

std::string to_string(CertStatus s);
std::string to_string(CertMethod m);

struct NPCertificate {
  CertStatus status = CertStatus::inconclusive;
  std::optional<std::size_t> first_negative_index;
  /// Smallest coefficient inspected (b_n for n >= 1, or a-ratio for Hardy).
  double min_coefficient = 0.0;
  CertMethod method = CertMethod::direct_reciprocal;
  std::size_t degree = 0;
  Mode mode = Mode::exact;
  /// Index of the first enclosure straddling zero (enclosed inputs only).
  std::optional<std::size_t> first_undecided_index;
};

/// b with sum b_n x^n = 1 - 1/(sum a_n x^n) through degree N. Requires a[0] = 1.
CoeffSeq reciprocal_coeffs(const CoeffSeq& a);

/// a with a[0] = 1 and a[n] = sum_{k=1}^{n} b[k] a[n-k] for n <= N.
/// Requires b[0] = 0. Entries of b beyond its degree are taken as zero.
CoeffSeq forward_coeffs(const CoeffSeq& b, std::size_t N);

/// Sufficient condition: a[n+1]/a[n] nondecreasing with final ratio <= 1.
/// Never refutes.
NPCertificate hardy_check(const CoeffSeq& a);

/// Direct sign test of reciprocal_coeffs(a) through degree N. Exact mode
/// ignores tol.
NPCertificate np_certify(const CoeffSeq& a, std::size_t N,
                         double tol = kFloatTolerance);

/// Rigorous sign test on enclosures, using exact rational interval
/// arithmetic with outward dyadic rounding to 2^-precision_bits.
NPCertificate np_certify(const EnclosedSeq& a, std::size_t N,
                         unsigned precision_bits = 512);

/// Enclosures of b = reciprocal of the enclosed a.
std::vector<Interval> reciprocal_enclosure(const EnclosedSeq& a,
                                           std::size_t N,
                                           unsigned precision_bits = 512);

struct RatioTail {
  std::vector<double> ratios;  ///< a[n]/a[n+1], n < N
  double tail_estimate = 0.0;  ///< last ratio, no extrapolation
};

RatioTail ratio_tail(const CoeffSeq& a);

/// Partial sum b[1] + ... + b[N]. Rejects negative entries.
double bn_mass(const CoeffSeq& b);
/// Exact partial sum; requires exact mode.
Rational bn_mass_exact(const CoeffSeq& b);

/// a_n = (n+1)^(-alpha) for a nonnegative integer alpha, exact.
CoeffSeq power_law_exact(unsigned alpha, std::size_t N);
/// a_n = (n+1)^(-alpha) in double precision.
CoeffSeq power_law_float(double alpha, std::size_t N);
/// Enclosures of a_n = (n+1)^(-p/q), width about 2^-precision_bits.
/// Terms are exact points whenever (n+1)^p is a perfect q-th power.
EnclosedSeq power_law_enclosure(unsigned p, unsigned q, std::size_t N,
                                unsigned precision_bits = 512);

/// Point enclosure of an exact sequence.
EnclosedSeq enclose(const CoeffSeq& exact_seq);

/// CSV lines `index,numerator,denominator` (exact) or `index,value` (float,
/// 17 significant digits).
void write_csv(std::ostream& out, const CoeffSeq& seq);
/// Reads either CSV form; blank lines and lines starting with '#' are
/// skipped. Indices must run 0,1,2,...
CoeffSeq read_csv(std::istream& in);

/// Ratio of consecutive forward coefficients after n steps.
struct ConjectureProbe {
  double mass = 0.0;            ///< sum b_n
  double ratio_at_n = 0.0;      ///< a[n-1]/a[n]
  double deviation = 0.0;       ///< |ratio_at_n - 1|
  std::size_t n = 0;
};

/// Runs forward_coeffs(b, n) and reports the last ratio a[n-1]/a[n].
ConjectureProbe conjecture_probe(const CoeffSeq& b, std::size_t n);

}  // namespace nplab::series
