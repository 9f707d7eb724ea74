#include "nplab/truncated_space.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "nplab/errors.hpp"

namespace nplab::kernelspace {

int MultiIndex::total() const noexcept {
  int s = 0;
  for (int e : exps) s += e;
  return s;
}

double MultiIndex::log_factorial() const {
  double s = 0.0;
  for (int e : exps) s += std::lgamma(static_cast<double>(e) + 1.0);
  return s;
}

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  const int ta = a.total(), tb = b.total();
  if (ta != tb) return ta < tb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return false;
}

std::string to_string(const MultiIndex& k) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
  os << ')';
  return os.str();
}

std::size_t monomial_count(int d, int N) {
  // C(N+d, d), computed incrementally to stay exact.
  std::size_t c = 1;
  for (int i = 1; i <= d; ++i) c = c * static_cast<std::size_t>(N + i) / static_cast<std::size_t>(i);
  return c;
}

TruncatedSpace::TruncatedSpace(KernelSpec spec, int degree, int fiber_dim)
    : spec_(std::move(spec)), degree_(degree), fiber_dim_(fiber_dim) {
  if (degree_ < 0) throw ValidationError("truncation degree must be >= 0");
  if (fiber_dim_ < 1) throw ValidationError("fiber dimension must be >= 1");
  if (auto md = spec_.max_degree(); md && static_cast<int>(*md) < degree_) {
    throw ValidationError("kernel '" + spec_.name() + "' has coefficients only through degree " +
                          std::to_string(*md) + ", need " + std::to_string(degree_));
  }
  const int d = spec_.dim();
  binom_.assign(static_cast<std::size_t>(degree_ + d + 1), {});
  for (std::size_t n = 0; n < binom_.size(); ++n) {
    binom_[n].assign(n + 1, 1);
    for (std::size_t j = 1; j < n; ++j) binom_[n][j] = binom_[n - 1][j - 1] + binom_[n - 1][j];
  }

  a_ = spec_.coeffs(static_cast<std::size_t>(degree_));
  for (int n = 0; n <= degree_; ++n) {
    if (!(a_[static_cast<std::size_t>(n)] > 0.0)) {
      throw ValidationError("kernel coefficient a_" + std::to_string(n) + " must be positive");
    }
  }

  std::vector<int> exps(static_cast<std::size_t>(d), 0);
  std::function<void(int, int)> emit = [&](int var, int remaining) {
    if (var == d - 1) {
      exps[static_cast<std::size_t>(var)] = remaining;
      basis_.push_back(MultiIndex{exps});
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      exps[static_cast<std::size_t>(var)] = e;
      emit(var + 1, remaining - e);
    }
  };
  for (int n = 0; n <= degree_; ++n) {
    degree_begin_.push_back(basis_.size());
    emit(0, n);
  }
  degree_begin_.push_back(basis_.size());

  weight_.reserve(basis_.size());
  for (const auto& k : basis_) {
    const int n = k.total();
    const double lw = k.log_factorial() - std::lgamma(n + 1.0) - std::log(a_[static_cast<std::size_t>(n)]);
    log_weight_.push_back(lw);
    weight_.push_back(std::exp(lw));
    sqrt_weight_.push_back(std::exp(0.5 * lw));
  }
}

std::size_t TruncatedSpace::degree_begin(int n) const {
  if (n < 0 || n > degree_ + 1) throw std::out_of_range("degree out of range");
  return degree_begin_[static_cast<std::size_t>(n)];
}

std::size_t TruncatedSpace::count_with_degree(int n, int vars) const {
  if (vars == 1) return 1;
  return binom_[static_cast<std::size_t>(n + vars - 1)][static_cast<std::size_t>(vars - 1)];
}

std::optional<std::size_t> TruncatedSpace::index_of(const MultiIndex& k) const {
  const int d = spec_.dim();
  if (static_cast<int>(k.size()) != d) return std::nullopt;
  int n = 0;
  for (int e : k.exps) {
    if (e < 0) return std::nullopt;
    n += e;
  }
  if (n > degree_) return std::nullopt;
  std::size_t rank = 0;
  int remaining = n;
  for (int var = 0; var < d - 1; ++var) {
    const int e = k.exps[static_cast<std::size_t>(var)];
    // Monomials with a larger exponent in this slot come first.
    for (int j = e + 1; j <= remaining; ++j) rank += count_with_degree(remaining - j, d - var - 1);
    remaining -= e;
  }
  return degree_begin_[static_cast<std::size_t>(n)] + rank;
}

std::optional<std::size_t> TruncatedSpace::index_of_sum(const MultiIndex& a,
                                                        const MultiIndex& b) const {
  MultiIndex s{a.exps};
  for (std::size_t i = 0; i < s.exps.size(); ++i) s.exps[i] += b.exps[i];
  return index_of(s);
}

Eigen::VectorXcd TruncatedSpace::monomial_values(const Point& z) const {
  const int d = spec_.dim();
  if (z.size() != d) throw ValidationError("point dimension does not match d");
  std::vector<std::vector<Complex>> powers(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    auto& p = powers[static_cast<std::size_t>(i)];
    p.resize(static_cast<std::size_t>(degree_ + 1));
    p[0] = 1.0;
    for (int e = 1; e <= degree_; ++e) p[static_cast<std::size_t>(e)] = p[static_cast<std::size_t>(e - 1)] * z[i];
  }
  Eigen::VectorXcd out(static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t m = 0; m < basis_.size(); ++m) {
    Complex v = 1.0;
    for (int i = 0; i < d; ++i) v *= powers[static_cast<std::size_t>(i)][static_cast<std::size_t>(basis_[m].exps[static_cast<std::size_t>(i)])];
    out[static_cast<Eigen::Index>(m)] = v;
  }
  return out;
}

SpacePtr build_space(const KernelSpec& spec, int N, int fiber_dim) {
  return std::make_shared<const TruncatedSpace>(spec, N, fiber_dim);
}

}  // namespace nplab::kernelspace
