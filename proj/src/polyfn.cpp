#include "nplab/polyfn.hpp"

#include "nplab/errors.hpp"

namespace nplab::kernelspace {

namespace {

Eigen::Index idx(std::size_t monomial, int fiber, int fiber_dim) {
  return static_cast<Eigen::Index>(monomial * static_cast<std::size_t>(fiber_dim) +
                                   static_cast<std::size_t>(fiber));
}

}  // namespace

bool same_kernel(const TruncatedSpace& a, const TruncatedSpace& b) {
  return a.d() == b.d() && a.fiber_dim() == b.fiber_dim() &&
         a.spec().name() == b.spec().name();
}

PolyFn::PolyFn(SpacePtr space) : space_(std::move(space)) {
  if (!space_) throw ValidationError("PolyFn needs a space");
  coeffs_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space_->dim()));
}

PolyFn::PolyFn(SpacePtr space, Eigen::VectorXcd coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (!space_) throw ValidationError("PolyFn needs a space");
  if (coeffs_.size() != static_cast<Eigen::Index>(space_->dim())) {
    throw ValidationError("PolyFn coefficient vector has wrong length");
  }
}

PolyFn PolyFn::from_onb(SpacePtr space, const Eigen::VectorXcd& onb) {
  PolyFn p(std::move(space));
  if (onb.size() != p.coeffs_.size()) throw ValidationError("ONB vector has wrong length");
  const int fd = p.space_->fiber_dim();
  for (std::size_t m = 0; m < p.space_->monomial_count(); ++m) {
    const double s = 1.0 / p.space_->sqrt_weight(m);
    for (int j = 0; j < fd; ++j) p.coeffs_[idx(m, j, fd)] = onb[idx(m, j, fd)] * s;
  }
  return p;
}

PolyFn PolyFn::constant(SpacePtr space, Complex c, int fiber) {
  PolyFn p(std::move(space));
  p.set_coeff(0, fiber, c);
  return p;
}

PolyFn PolyFn::monomial(SpacePtr space, const MultiIndex& k, Complex c, int fiber) {
  PolyFn p(std::move(space));
  const auto i = p.space_->index_of(k);
  if (!i) throw ValidationError("monomial " + to_string(k) + " is outside the truncation");
  p.set_coeff(*i, fiber, c);
  return p;
}

Complex PolyFn::coeff(std::size_t monomial, int fiber) const {
  return coeffs_[idx(monomial, fiber, space_->fiber_dim())];
}

void PolyFn::set_coeff(std::size_t monomial, int fiber, Complex c) {
  if (fiber < 0 || fiber >= space_->fiber_dim()) throw ValidationError("fiber index out of range");
  if (monomial >= space_->monomial_count()) throw ValidationError("monomial index out of range");
  coeffs_[idx(monomial, fiber, space_->fiber_dim())] = c;
}

void PolyFn::add_to_coeff(std::size_t monomial, int fiber, Complex c) {
  set_coeff(monomial, fiber, coeff(monomial, fiber) + c);
}

int PolyFn::degree() const {
  const int fd = space_->fiber_dim();
  for (std::size_t m = space_->monomial_count(); m-- > 0;) {
    for (int j = 0; j < fd; ++j) {
      if (coeffs_[idx(m, j, fd)] != Complex(0.0)) return space_->monomial_degree(m);
    }
  }
  return -1;
}

Eigen::VectorXcd PolyFn::onb() const {
  Eigen::VectorXcd v(coeffs_.size());
  const int fd = space_->fiber_dim();
  for (std::size_t m = 0; m < space_->monomial_count(); ++m) {
    const double s = space_->sqrt_weight(m);
    for (int j = 0; j < fd; ++j) v[idx(m, j, fd)] = coeffs_[idx(m, j, fd)] * s;
  }
  return v;
}

PolyFn PolyFn::homogeneous_part(int n) const {
  PolyFn out(space_);
  if (n < 0 || n > space_->degree()) return out;
  const int fd = space_->fiber_dim();
  const auto lo = static_cast<Eigen::Index>(space_->degree_begin(n) * static_cast<std::size_t>(fd));
  const auto hi = static_cast<Eigen::Index>(space_->degree_begin(n + 1) * static_cast<std::size_t>(fd));
  out.coeffs_.segment(lo, hi - lo) = coeffs_.segment(lo, hi - lo);
  return out;
}

PolyFn PolyFn::embed(const SpacePtr& target) const {
  if (!same_kernel(*space_, *target)) throw ValidationError("embed: incompatible spaces");
  const int deg = degree();
  if (deg > target->degree()) {
    throw ValidationError("embed: degree " + std::to_string(deg) + " exceeds target truncation " +
                          std::to_string(target->degree()));
  }
  PolyFn out(target);
  const int fd = space_->fiber_dim();
  const std::size_t count = deg < 0 ? 0 : space_->degree_begin(deg + 1);
  // Graded-lex order is a prefix order, so low-degree indices agree.
  const auto len = static_cast<Eigen::Index>(count * static_cast<std::size_t>(fd));
  out.coeffs_.head(len) = coeffs_.head(len);
  return out;
}

void PolyFn::require_same_space(const PolyFn& other) const {
  if (space_ != other.space_ &&
      !(same_kernel(*space_, *other.space_) && space_->degree() == other.space_->degree())) {
    throw ValidationError("space mismatch");
  }
}

PolyFn& PolyFn::operator+=(const PolyFn& other) {
  require_same_space(other);
  coeffs_ += other.coeffs_;
  return *this;
}

PolyFn& PolyFn::operator-=(const PolyFn& other) {
  require_same_space(other);
  coeffs_ -= other.coeffs_;
  return *this;
}

PolyFn& PolyFn::operator*=(Complex s) {
  coeffs_ *= s;
  return *this;
}

PolyFn operator+(PolyFn a, const PolyFn& b) { return a += b; }
PolyFn operator-(PolyFn a, const PolyFn& b) { return a -= b; }
PolyFn operator*(Complex s, PolyFn a) { return a *= s; }

Complex poly_inner(const PolyFn& p, const PolyFn& q) {
  const auto& sp = p.space();
  if (!same_kernel(sp, q.space()) || sp.degree() != q.space().degree()) {
    throw ValidationError("poly_inner: space mismatch");
  }
  const int fd = sp.fiber_dim();
  Complex s = 0.0;
  for (std::size_t m = 0; m < sp.monomial_count(); ++m) {
    Complex t = 0.0;
    for (int j = 0; j < fd; ++j) t += p.coeffs()[idx(m, j, fd)] * std::conj(q.coeffs()[idx(m, j, fd)]);
    s += sp.weight(m) * t;
  }
  return s;
}

double poly_norm(const PolyFn& p) { return p.onb().norm(); }

Eigen::VectorXcd point_eval(const PolyFn& p, const Point& lambda) {
  const auto& sp = p.space();
  const Eigen::VectorXcd mono = sp.monomial_values(lambda);
  const int fd = sp.fiber_dim();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(fd);
  for (std::size_t m = 0; m < sp.monomial_count(); ++m) {
    for (int j = 0; j < fd; ++j) out[j] += p.coeffs()[idx(m, j, fd)] * mono[static_cast<Eigen::Index>(m)];
  }
  return out;
}

PolyFn multiply(const PolyFn& phi, const PolyFn& f, const SpacePtr& target) {
  if (phi.space().fiber_dim() != 1) throw ValidationError("multiply: multiplier must be scalar");
  if (phi.space().d() != f.space().d() || f.space().fiber_dim() != target->fiber_dim() ||
      target->d() != f.space().d()) {
    throw ValidationError("multiply: incompatible spaces");
  }
  const int dphi = phi.degree(), df = f.degree();
  PolyFn out(target);
  if (dphi < 0 || df < 0) return out;
  if (dphi + df > target->degree()) {
    throw ValidationError("multiply: product degree " + std::to_string(dphi + df) +
                          " exceeds target truncation " + std::to_string(target->degree()));
  }
  const auto& sp_phi = phi.space();
  const auto& sp_f = f.space();
  const int fd = sp_f.fiber_dim();
  const std::size_t nphi = sp_phi.degree_begin(dphi + 1);
  const std::size_t nf = sp_f.degree_begin(df + 1);
  for (std::size_t i = 0; i < nphi; ++i) {
    const Complex c = phi.coeff(i, 0);
    if (c == Complex(0.0)) continue;
    for (std::size_t j = 0; j < nf; ++j) {
      const auto k = target->index_of_sum(sp_phi.monomial(i), sp_f.monomial(j));
      for (int r = 0; r < fd; ++r) {
        const Complex v = f.coeff(j, r);
        if (v == Complex(0.0)) continue;
        out.add_to_coeff(*k, r, c * v);
      }
    }
  }
  return out;
}

}  // namespace nplab::kernelspace
