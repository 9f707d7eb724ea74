#include "nplab/series.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "nplab/errors.hpp"

namespace nplab::series {

CoeffSeq CoeffSeq::exact(std::vector<Rational> coeffs) {
  for (auto& c : coeffs) c.canonicalize();
  CoeffSeq s;
  s.data_ = std::move(coeffs);
  return s;
}

CoeffSeq CoeffSeq::floating(std::vector<double> coeffs) {
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw ValidationError("non-finite coefficient");
  }
  CoeffSeq s;
  s.data_ = std::move(coeffs);
  return s;
}

Mode CoeffSeq::mode() const noexcept {
  return std::holds_alternative<std::vector<Rational>>(data_) ? Mode::exact
                                                              : Mode::floating;
}

std::size_t CoeffSeq::size() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, data_);
}

std::size_t CoeffSeq::degree() const {
  if (size() == 0) throw ValidationError("empty coefficient sequence");
  return size() - 1;
}

double CoeffSeq::value(std::size_t n) const {
  if (n >= size()) throw std::out_of_range("coefficient index out of range");
  if (is_exact()) return rational()[n].get_d();
  return real()[n];
}

const std::vector<Rational>& CoeffSeq::rational() const {
  if (!is_exact()) throw ValidationError("sequence is not in exact mode");
  return std::get<std::vector<Rational>>(data_);
}

const std::vector<double>& CoeffSeq::real() const {
  if (is_exact()) throw ValidationError("sequence is not in floating mode");
  return std::get<std::vector<double>>(data_);
}

std::vector<double> CoeffSeq::to_double() const {
  if (!is_exact()) return real();
  std::vector<double> out;
  out.reserve(size());
  for (const auto& q : rational()) out.push_back(q.get_d());
  return out;
}

CoeffSeq CoeffSeq::truncated(std::size_t n) const {
  if (n >= size()) throw ValidationError("truncation beyond available degree");
  if (is_exact()) {
    const auto& q = rational();
    return exact({q.begin(), q.begin() + static_cast<std::ptrdiff_t>(n + 1)});
  }
  const auto& r = real();
  return floating({r.begin(), r.begin() + static_cast<std::ptrdiff_t>(n + 1)});
}

CoeffSeq CoeffSeq::as_floating() const { return floating(to_double()); }

bool operator==(const CoeffSeq& lhs, const CoeffSeq& rhs) {
  if (lhs.mode() != rhs.mode() || lhs.size() != rhs.size()) return false;
  if (lhs.is_exact()) return lhs.rational() == rhs.rational();
  return lhs.real() == rhs.real();
}

std::string to_string(CertStatus s) {
  switch (s) {
    case CertStatus::certified: return "certified";
    case CertStatus::refuted: return "refuted";
    case CertStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(CertMethod m) {
  return m == CertMethod::hardy_criterion ? "hardy-criterion"
                                          : "direct-reciprocal";
}

namespace {

void require_normalized(const CoeffSeq& a) {
  if (a.size() == 0) throw ValidationError("empty coefficient sequence");
  const bool ok = a.is_exact() ? a.rational()[0] == 1 : a.real()[0] == 1.0;
  if (!ok) throw ValidationError("kernel not normalized: a[0] must equal 1");
}

template <class T>
std::vector<T> reciprocal_impl(const std::vector<T>& a) {
  const std::size_t n_max = a.size() - 1;
  std::vector<T> b(a.size(), T(0));
  for (std::size_t n = 1; n <= n_max; ++n) {
    T acc = a[n];
    for (std::size_t k = 1; k < n; ++k) acc -= b[k] * a[n - k];
    b[n] = acc;
  }
  return b;
}

template <class T>
std::vector<T> forward_impl(const std::vector<T>& b, std::size_t N) {
  std::vector<T> a(N + 1, T(0));
  a[0] = T(1);
  const std::size_t kb = b.size() - 1;
  for (std::size_t n = 1; n <= N; ++n) {
    T acc(0);
    const std::size_t kmax = std::min(n, kb);
    for (std::size_t k = 1; k <= kmax; ++k) {
      if (b[k] == 0) continue;
      acc += b[k] * a[n - k];
    }
    a[n] = acc;
  }
  return a;
}

// Outward rounding of q to the dyadic grid 2^-bits.
Rational round_down(const Rational& q, unsigned bits) {
  mpz_class scaled = q.get_num();
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), bits);
  mpz_class out;
  mpz_fdiv_q(out.get_mpz_t(), scaled.get_mpz_t(), q.get_den_mpz_t());
  Rational r(out);
  mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), bits);
  return r;
}

Rational round_up(const Rational& q, unsigned bits) {
  mpz_class scaled = q.get_num();
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), bits);
  mpz_class out;
  mpz_cdiv_q(out.get_mpz_t(), scaled.get_mpz_t(), q.get_den_mpz_t());
  Rational r(out);
  mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), bits);
  return r;
}

Interval mul(const Interval& x, const Interval& y) {
  if (x.lo >= 0 && y.lo >= 0) return {x.lo * y.lo, x.hi * y.hi};
  Rational c[4] = {x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

}  // namespace

CoeffSeq reciprocal_coeffs(const CoeffSeq& a) {
  require_normalized(a);
  if (a.is_exact()) return CoeffSeq::exact(reciprocal_impl(a.rational()));
  return CoeffSeq::floating(reciprocal_impl(a.real()));
}

CoeffSeq forward_coeffs(const CoeffSeq& b, std::size_t N) {
  if (b.size() == 0) throw ValidationError("empty coefficient sequence");
  const bool zero = b.is_exact() ? b.rational()[0] == 0 : b.real()[0] == 0.0;
  if (!zero) throw ValidationError("b[0] must equal 0");
  if (b.is_exact()) return CoeffSeq::exact(forward_impl(b.rational(), N));
  return CoeffSeq::floating(forward_impl(b.real(), N));
}

NPCertificate hardy_check(const CoeffSeq& a) {
  NPCertificate cert;
  cert.method = CertMethod::hardy_criterion;
  cert.mode = a.mode();
  cert.degree = a.degree();
  const std::size_t N = a.degree();
  for (std::size_t n = 0; n <= N; ++n) {
    const bool positive = a.is_exact() ? a.rational()[n] > 0 : a.real()[n] > 0;
    if (!positive) throw ValidationError("hardy_check needs positive coefficients");
  }
  if (N == 0) {
    cert.status = CertStatus::certified;
    cert.min_coefficient = a.value(0);
    return cert;
  }

  bool monotone = true;
  bool final_ok = true;
  double min_ratio = std::numeric_limits<double>::infinity();
  if (a.is_exact()) {
    const auto& q = a.rational();
    Rational prev = q[1] / q[0];
    min_ratio = prev.get_d();
    for (std::size_t n = 1; n < N; ++n) {
      Rational r = q[n + 1] / q[n];
      if (r < prev) monotone = false;
      min_ratio = std::min(min_ratio, r.get_d());
      prev = r;
    }
    final_ok = prev <= 1;
  } else {
    // Relative slack of a few ulps so that rounding cannot break an exactly
    // constant ratio sequence.
    constexpr double slack = 4.0 * std::numeric_limits<double>::epsilon();
    const auto& x = a.real();
    double prev = x[1] / x[0];
    min_ratio = prev;
    for (std::size_t n = 1; n < N; ++n) {
      const double r = x[n + 1] / x[n];
      if (r < prev * (1.0 - slack)) monotone = false;
      min_ratio = std::min(min_ratio, r);
      prev = r;
    }
    final_ok = prev <= 1.0 + slack;
  }
  cert.min_coefficient = min_ratio;
  cert.status = (monotone && final_ok) ? CertStatus::certified
                                       : CertStatus::inconclusive;
  return cert;
}

NPCertificate np_certify(const CoeffSeq& a, std::size_t N, double tol) {
  require_normalized(a);
  if (N > a.degree()) throw ValidationError("np_certify: degree exceeds available coefficients");
  NPCertificate cert;
  cert.method = CertMethod::direct_reciprocal;
  cert.mode = a.mode();
  cert.degree = N;
  const CoeffSeq b = reciprocal_coeffs(a.truncated(N));
  cert.status = CertStatus::certified;
  if (N == 0) return cert;

  double min_coef = std::numeric_limits<double>::infinity();
  if (b.is_exact()) {
    const auto& q = b.rational();
    const Rational* min_q = &q[1];
    for (std::size_t n = 1; n <= N; ++n) {
      if (q[n] < *min_q) min_q = &q[n];
      if (q[n] < 0 && !cert.first_negative_index) cert.first_negative_index = n;
    }
    min_coef = min_q->get_d();
  } else {
    const auto& x = b.real();
    for (std::size_t n = 1; n <= N; ++n) {
      min_coef = std::min(min_coef, x[n]);
      if (x[n] < -tol && !cert.first_negative_index) cert.first_negative_index = n;
    }
  }
  cert.min_coefficient = min_coef;
  if (cert.first_negative_index) cert.status = CertStatus::refuted;
  return cert;
}

std::vector<Interval> reciprocal_enclosure(const EnclosedSeq& a, std::size_t N,
                                           unsigned precision_bits) {
  if (a.terms.empty()) throw ValidationError("empty enclosure");
  if (N > a.degree()) throw ValidationError("degree exceeds available enclosures");
  if (a.terms[0].lo != 1 || a.terms[0].hi != 1) {
    throw ValidationError("kernel not normalized: a[0] must equal 1");
  }
  std::vector<Interval> b(N + 1, Interval{Rational(0), Rational(0)});
  for (std::size_t n = 1; n <= N; ++n) {
    Rational s_lo(0), s_hi(0);
    for (std::size_t k = 1; k < n; ++k) {
      const Interval p = mul(b[k], a.terms[n - k]);
      s_lo += p.lo;
      s_hi += p.hi;
    }
    Interval r{a.terms[n].lo - s_hi, a.terms[n].hi - s_lo};
    if (r.lo != r.hi) {
      r.lo = round_down(r.lo, precision_bits);
      r.hi = round_up(r.hi, precision_bits);
    }
    b[n] = std::move(r);
  }
  return b;
}

NPCertificate np_certify(const EnclosedSeq& a, std::size_t N,
                         unsigned precision_bits) {
  NPCertificate cert;
  cert.method = CertMethod::direct_reciprocal;
  cert.mode = Mode::exact;
  cert.degree = N;
  const auto b = reciprocal_enclosure(a, N, precision_bits);
  cert.status = CertStatus::certified;
  double min_coef = N == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= N; ++n) {
    min_coef = std::min(min_coef, b[n].lo.get_d());
    if (b[n].hi < 0 && !cert.first_negative_index) cert.first_negative_index = n;
    if (b[n].lo < 0 && b[n].hi >= 0 && !cert.first_undecided_index) {
      cert.first_undecided_index = n;
    }
  }
  cert.min_coefficient = min_coef;
  if (cert.first_negative_index) {
    cert.status = CertStatus::refuted;
  } else if (cert.first_undecided_index) {
    cert.status = CertStatus::inconclusive;
  }
  return cert;
}

RatioTail ratio_tail(const CoeffSeq& a) {
  const std::size_t N = a.degree();
  for (std::size_t n = 0; n <= N; ++n) {
    const bool positive = a.is_exact() ? a.rational()[n] > 0 : a.real()[n] > 0;
    if (!positive) throw ValidationError("ratio_tail needs positive coefficients");
  }
  RatioTail out;
  out.ratios.reserve(N);
  for (std::size_t n = 0; n < N; ++n) {
    if (a.is_exact()) {
      out.ratios.push_back(Rational(a.rational()[n] / a.rational()[n + 1]).get_d());
    } else {
      out.ratios.push_back(a.real()[n] / a.real()[n + 1]);
    }
  }
  out.tail_estimate = out.ratios.empty() ? 1.0 : out.ratios.back();
  return out;
}

Rational bn_mass_exact(const CoeffSeq& b) {
  const auto& q = b.rational();
  if (q.empty() || q[0] != 0) throw ValidationError("b[0] must equal 0");
  Rational sum(0);
  for (std::size_t n = 1; n < q.size(); ++n) {
    if (q[n] < 0) throw ValidationError("bn_mass: negative coefficient at index " + std::to_string(n));
    sum += q[n];
  }
  return sum;
}

double bn_mass(const CoeffSeq& b) {
  if (b.is_exact()) return bn_mass_exact(b).get_d();
  const auto& x = b.real();
  if (x.empty() || x[0] != 0.0) throw ValidationError("b[0] must equal 0");
  double sum = 0.0;
  for (std::size_t n = 1; n < x.size(); ++n) {
    if (x[n] < -kFloatTolerance) {
      throw ValidationError("bn_mass: negative coefficient at index " + std::to_string(n));
    }
    sum += x[n];
  }
  return sum;
}

CoeffSeq power_law_exact(unsigned alpha, std::size_t N) {
  std::vector<Rational> a;
  a.reserve(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), n + 1, alpha);
    a.emplace_back(mpz_class(1), den);
  }
  return CoeffSeq::exact(std::move(a));
}

CoeffSeq power_law_float(double alpha, std::size_t N) {
  std::vector<double> a;
  a.reserve(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    a.push_back(std::pow(static_cast<double>(n + 1), -alpha));
  }
  return CoeffSeq::floating(std::move(a));
}

EnclosedSeq power_law_enclosure(unsigned p, unsigned q, std::size_t N,
                                unsigned precision_bits) {
  if (q == 0) throw ValidationError("power_law_enclosure: zero denominator");
  const unsigned g = std::gcd(p, q);
  if (g > 1) {
    p /= g;
    q /= g;
  }
  EnclosedSeq out;
  out.terms.reserve(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    mpz_class base_pow;  // (n+1)^p
    mpz_ui_pow_ui(base_pow.get_mpz_t(), n + 1, p);
    mpz_class root;
    if (mpz_root(root.get_mpz_t(), base_pow.get_mpz_t(), q) != 0) {
      Rational v(mpz_class(1), root);
      v.canonicalize();
      out.terms.push_back({v, v});
      continue;
    }
    // x * 2^K = (2^(Kq) / (n+1)^p)^(1/q)
    mpz_class num(1);
    mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(),
                 static_cast<mp_bitcnt_t>(precision_bits) * q);
    mpz_class y_lo, y_hi;
    mpz_fdiv_q(y_lo.get_mpz_t(), num.get_mpz_t(), base_pow.get_mpz_t());
    mpz_cdiv_q(y_hi.get_mpz_t(), num.get_mpz_t(), base_pow.get_mpz_t());
    mpz_class r_lo, r_hi;
    mpz_root(r_lo.get_mpz_t(), y_lo.get_mpz_t(), q);
    if (mpz_root(r_hi.get_mpz_t(), y_hi.get_mpz_t(), q) == 0) r_hi += 1;
    Rational lo(r_lo), hi(r_hi);
    mpq_div_2exp(lo.get_mpq_t(), lo.get_mpq_t(), precision_bits);
    mpq_div_2exp(hi.get_mpq_t(), hi.get_mpq_t(), precision_bits);
    out.terms.push_back({lo, hi});
  }
  return out;
}

EnclosedSeq enclose(const CoeffSeq& exact_seq) {
  EnclosedSeq out;
  for (const auto& q : exact_seq.rational()) out.terms.push_back({q, q});
  return out;
}

void write_csv(std::ostream& out, const CoeffSeq& seq) {
  if (seq.is_exact()) {
    const auto& q = seq.rational();
    for (std::size_t n = 0; n < q.size(); ++n) {
      out << n << ',' << q[n].get_num().get_str() << ','
          << q[n].get_den().get_str() << '\n';
    }
    return;
  }
  char buf[64];
  const auto& x = seq.real();
  for (std::size_t n = 0; n < x.size(); ++n) {
    std::snprintf(buf, sizeof buf, "%.17g", x[n]);
    out << n << ',' << buf << '\n';
  }
}

CoeffSeq read_csv(std::istream& in) {
  std::vector<Rational> exact_vals;
  std::vector<double> float_vals;
  std::optional<Mode> mode;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line.erase(std::remove_if(line.begin(), line.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               line.end());
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    const std::string where = "coefficient CSV line " + std::to_string(line_no);
    if (fields.size() != 2 && fields.size() != 3) {
      throw ValidationError(where + ": expected 2 or 3 fields");
    }
    const Mode m = fields.size() == 3 ? Mode::exact : Mode::floating;
    if (mode && *mode != m) throw ValidationError(where + ": mixed exact and float rows");
    mode = m;
    std::size_t index = 0;
    try {
      std::size_t pos = 0;
      index = std::stoul(fields[0], &pos);
      if (pos != fields[0].size()) throw std::invalid_argument("index");
    } catch (const std::exception&) {
      throw ValidationError(where + ": bad index '" + fields[0] + "'");
    }
    const std::size_t expected = m == Mode::exact ? exact_vals.size() : float_vals.size();
    if (index != expected) {
      throw ValidationError(where + ": index " + std::to_string(index) +
                            " out of sequence (expected " + std::to_string(expected) + ")");
    }
    if (m == Mode::exact) {
      mpz_class num, den;
      if (num.set_str(fields[1], 10) != 0 || den.set_str(fields[2], 10) != 0 || den == 0) {
        throw ValidationError(where + ": bad rational");
      }
      Rational q(num, den);
      q.canonicalize();
      exact_vals.push_back(q);
    } else {
      try {
        std::size_t pos = 0;
        const double v = std::stod(fields[1], &pos);
        if (pos != fields[1].size()) throw std::invalid_argument("value");
        float_vals.push_back(v);
      } catch (const std::exception&) {
        throw ValidationError(where + ": bad value '" + fields[1] + "'");
      }
    }
  }
  if (!mode) throw ValidationError("coefficient CSV is empty");
  return *mode == Mode::exact ? CoeffSeq::exact(std::move(exact_vals))
                              : CoeffSeq::floating(std::move(float_vals));
}

ConjectureProbe conjecture_probe(const CoeffSeq& b, std::size_t n) {
  if (n < 1) throw ValidationError("conjecture_probe needs n >= 1");
  ConjectureProbe probe;
  probe.n = n;
  probe.mass = bn_mass(b);
  const CoeffSeq a = forward_coeffs(b, n);
  if (a.is_exact()) {
    const auto& q = a.rational();
    if (q[n] <= 0) throw ValidationError("conjecture_probe: a[n] vanished");
    probe.ratio_at_n = Rational(q[n - 1] / q[n]).get_d();
  } else {
    const auto& x = a.real();
    if (x[n] <= 0) throw ValidationError("conjecture_probe: a[n] vanished");
    probe.ratio_at_n = x[n - 1] / x[n];
  }
  probe.deviation = std::abs(probe.ratio_at_n - 1.0);
  return probe;
}

}  // namespace nplab::series
