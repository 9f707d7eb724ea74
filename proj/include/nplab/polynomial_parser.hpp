#pragma once

// Text form of polynomials:
//
//   poly    := ['+'|'-'] term (('+'|'-') term)*
//   term    := factor ('*' factor)*
//   factor  := number | var ['^' integer]
//   number  := digits ['.' digits] ['/' digits]
//   var     := 'z1' .. 'zd'   ('z' is accepted when d = 1)
//
// Whitespace is ignored. A fiber-valued polynomial is written as
// '[p1; p2; ...]'. A generator list separates polynomials with commas.

#include <map>
#include <string>
#include <vector>

#include "nplab/errors.hpp"
#include "nplab/polyfn.hpp"
#include "nplab/series.hpp"

namespace nplab::kernelspace {

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& message, std::size_t position)
      : ValidationError(message + " at position " + std::to_string(position)),
        message_(message),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }
  /// Message without the position suffix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t position_;
};

/// Exact polynomial with rational coefficients; one term map per fiber
/// coordinate.
struct Polynomial {
  int d = 1;
  std::vector<std::map<std::vector<int>, series::Rational>> components;

  int fiber_dim() const { return static_cast<int>(components.size()); }
  int degree() const;
};

Polynomial parse_poly(const std::string& text, int d);
/// Comma separated list; commas inside '[...]' do not split.
std::vector<Polynomial> parse_generator_list(const std::string& text, int d);

/// Canonical text, terms in graded-lex order per component.
std::string to_text(const Polynomial& p);

/// Rounds coefficients to double. The space must hold the degree and have
/// the same fiber dimension.
PolyFn to_polyfn(const Polynomial& p, const SpacePtr& space);

/// Text of a PolyFn with real coefficients, 17 significant digits.
std::string to_text(const PolyFn& p);

}  // namespace nplab::kernelspace
