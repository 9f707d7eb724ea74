#include "nplab/polynomial_parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace nplab::kernelspace {

namespace {

using series::Rational;
using Terms = std::map<std::vector<int>, Rational>;

class Parser {
 public:
  Parser(const std::string& text, int d) : s_(text), d_(d) {}

  Polynomial parse() {
    Polynomial p;
    p.d = d_;
    skip_ws();
    if (peek() == '[') {
      ++pos_;
      for (;;) {
        p.components.push_back(parse_sum());
        skip_ws();
        if (peek() == ';') {
          ++pos_;
          continue;
        }
        if (peek() == ']') {
          ++pos_;
          break;
        }
        fail("expected ';' or ']'");
      }
    } else {
      p.components.push_back(parse_sum());
    }
    skip_ws();
    if (pos_ != s_.size()) fail(std::string("unexpected character '") + s_[pos_] + "'");
    return p;
  }

 private:
  const std::string& s_;
  int d_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  Terms parse_sum() {
    Terms out;
    skip_ws();
    int sign = 1;
    if (peek() == '+' || peek() == '-') {
      sign = peek() == '-' ? -1 : 1;
      ++pos_;
    }
    for (;;) {
      auto [exps, c] = parse_term();
      if (sign < 0) c = -c;
      Rational& slot = out[exps];
      slot += c;
      if (slot == 0) out.erase(exps);
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
        continue;
      }
      break;
    }
    return out;
  }

  std::pair<std::vector<int>, Rational> parse_term() {
    std::vector<int> exps(static_cast<std::size_t>(d_), 0);
    Rational c = 1;
    for (;;) {
      skip_ws();
      const char ch = peek();
      if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
        c *= parse_number();
      } else if (ch == 'z') {
        const auto [var, power] = parse_var();
        exps[static_cast<std::size_t>(var)] += power;
      } else if (ch == '\0') {
        fail("unexpected end of input, expected a number or variable");
      } else {
        fail(std::string("unexpected character '") + ch + "', expected a number or variable");
      }
      skip_ws();
      if (peek() == '*') {
        ++pos_;
        continue;
      }
      break;
    }
    c.canonicalize();
    return {exps, c};
  }

  std::string digits() {
    std::string out;
    while (std::isdigit(static_cast<unsigned char>(peek()))) out += s_[pos_++];
    return out;
  }

  Rational parse_number() {
    const std::size_t start = pos_;
    std::string ip = digits();
    std::string fp;
    if (peek() == '.') {
      ++pos_;
      fp = digits();
    }
    if (ip.empty() && fp.empty()) {
      pos_ = start;
      fail("malformed number");
    }
    const mpz_class num(ip + fp, 10);
    mpz_class den = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
    skip_ws();
    if (peek() == '/') {
      ++pos_;
      skip_ws();
      const std::size_t dpos = pos_;
      const std::string dd = digits();
      if (dd.empty()) fail("expected denominator after '/'");
      const mpz_class q(dd, 10);
      if (q == 0) {
        pos_ = dpos;
        fail("zero denominator");
      }
      den *= q;
    }
    Rational r(num, den);
    r.canonicalize();
    return r;
  }

  std::pair<int, int> parse_var() {
    const std::size_t start = pos_;
    ++pos_;  // 'z'
    const std::string idx = digits();
    int var = 0;
    if (idx.empty()) {
      if (d_ != 1) {
        pos_ = start;
        fail("bare 'z' is only allowed when d = 1; use z1..z" + std::to_string(d_));
      }
    } else {
      const long v = std::stol(idx);
      if (v < 1 || v > d_) {
        pos_ = start;
        fail("unknown variable 'z" + idx + "' (d = " + std::to_string(d_) + ")");
      }
      var = static_cast<int>(v - 1);
    }
    int power = 1;
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      skip_ws();
      const std::string pw = digits();
      if (pw.empty()) fail("expected integer exponent after '^'");
      if (pw.size() > 6) fail("exponent too large");
      power = std::stoi(pw);
    }
    return {var, power};
  }
};

std::string term_text(const std::vector<int>& exps, const Rational& c, bool first) {
  std::string out;
  Rational mag = abs(c);
  if (c < 0) out += first ? "-" : " - ";
  else if (!first) out += " + ";
  std::string body;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (exps[i] == 0) continue;
    if (!body.empty()) body += "*";
    body += "z" + std::to_string(i + 1);
    if (exps[i] > 1) body += "^" + std::to_string(exps[i]);
  }
  if (body.empty()) return out + mag.get_str();
  if (mag == 1) return out + body;
  return out + mag.get_str() + "*" + body;
}

std::string component_text(const Terms& terms) {
  if (terms.empty()) return "0";
  std::vector<std::vector<int>> keys;
  for (const auto& [k, c] : terms) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    return graded_lex_less(MultiIndex{a}, MultiIndex{b});
  });
  std::string out;
  for (std::size_t i = 0; i < keys.size(); ++i) out += term_text(keys[i], terms.at(keys[i]), i == 0);
  return out;
}

}  // namespace

int Polynomial::degree() const {
  int deg = -1;
  for (const auto& comp : components) {
    for (const auto& [k, c] : comp) {
      if (c != 0) deg = std::max(deg, MultiIndex{k}.total());
    }
  }
  return deg;
}

Polynomial parse_poly(const std::string& text, int d) {
  if (d < 1) throw ValidationError("parse_poly: d must be positive");
  return Parser(text, d).parse();
}

std::vector<Polynomial> parse_generator_list(const std::string& text, int d) {
  std::vector<Polynomial> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const char ch = i < text.size() ? text[i] : ',';
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if (ch == ',' && depth == 0) {
      const std::string piece = text.substr(start, i - start);
      try {
        out.push_back(parse_poly(piece, d));
      } catch (const ParseError& e) {
        throw ParseError(std::string("generator ") + std::to_string(out.size() + 1) + ": " +
                             e.message(),
                         start + e.position());
      }
      start = i + 1;
    }
  }
  return out;
}

std::string to_text(const Polynomial& p) {
  if (p.components.size() == 1) return component_text(p.components[0]);
  std::string out = "[";
  for (std::size_t i = 0; i < p.components.size(); ++i) {
    if (i) out += "; ";
    out += component_text(p.components[i]);
  }
  return out + "]";
}

PolyFn to_polyfn(const Polynomial& p, const SpacePtr& space) {
  if (p.d != space->d()) throw ValidationError("polynomial dimension does not match the space");
  if (p.fiber_dim() != space->fiber_dim()) {
    throw ValidationError("polynomial has " + std::to_string(p.fiber_dim()) +
                          " components, space fiber dimension is " + std::to_string(space->fiber_dim()));
  }
  if (p.degree() > space->degree()) {
    throw ValidationError("polynomial degree " + std::to_string(p.degree()) +
                          " exceeds truncation " + std::to_string(space->degree()));
  }
  PolyFn out(space);
  for (int j = 0; j < p.fiber_dim(); ++j) {
    for (const auto& [k, c] : p.components[static_cast<std::size_t>(j)]) {
      out.add_to_coeff(*space->index_of(MultiIndex{k}), j, c.get_d());
    }
  }
  return out;
}

std::string to_text(const PolyFn& p) {
  const auto& sp = p.space();
  std::vector<std::string> comps;
  for (int j = 0; j < sp.fiber_dim(); ++j) {
    std::string out;
    for (std::size_t m = 0; m < sp.monomial_count(); ++m) {
      const Complex c = p.coeff(m, j);
      if (c == Complex(0.0)) continue;
      if (c.imag() != 0.0) throw ValidationError("to_text: complex coefficients have no text form");
      const double v = c.real();
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", std::abs(v));
      if (v < 0) out += out.empty() ? "-" : " - ";
      else if (!out.empty()) out += " + ";
      out += buf;
      const auto& k = sp.monomial(m);
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (k[i] == 0) continue;
        out += "*z" + std::to_string(i + 1);
        if (k[i] > 1) out += "^" + std::to_string(k[i]);
      }
    }
    comps.push_back(out.empty() ? "0" : out);
  }
  if (comps.size() == 1) return comps[0];
  std::string out = "[";
  for (std::size_t i = 0; i < comps.size(); ++i) out += (i ? "; " : "") + comps[i];
  return out + "]";
}

}  // namespace nplab::kernelspace
