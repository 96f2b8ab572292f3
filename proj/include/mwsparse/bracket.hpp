#pragma once

// Certified enclosures [lo, hi] of real quantities. Endpoints are exact
// rationals; anything irrational (roots, real powers) enters through MPFR
// with directed rounding and is converted back exactly.

#include <mpfr.h>

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "mwsparse/dyadic.hpp"

namespace mwsparse {

inline constexpr long kDefaultPrecisionBits = 128;

namespace detail {

/// RAII wrapper over mpfr_t.
class Mpfr {
 public:
  explicit Mpfr(long prec) { mpfr_init2(v_, static_cast<mpfr_prec_t>(prec)); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  ~Mpfr() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

  void set(const ExactRational& q, mpfr_rnd_t rnd) { mpfr_set_q(v_, q.get_mpq_t(), rnd); }

  /// Exact conversion back; MPFR values are dyadic.
  ExactRational to_rational() const {
    if (!mpfr_number_p(v_)) throw std::domain_error("non-finite MPFR value");
    ExactRational r;
    mpfr_get_q(r.get_mpq_t(), v_);
    return r;
  }

 private:
  mpfr_t v_;
};

inline ExactRational round_to(const ExactRational& q, long prec, mpfr_rnd_t rnd) {
  Mpfr m(prec);
  m.set(q, rnd);
  return m.to_rational();
}

}  // namespace detail

/// Closed interval with exact-rational endpoints; the upper endpoint may be +inf.
class Bracket {
 public:
  Bracket() = default;
  explicit Bracket(ExactRational exact) : lo_(exact), hi_(std::move(exact)) {}
  Bracket(ExactRational lo, std::optional<ExactRational> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (hi_ && *hi_ < lo_) throw std::invalid_argument("bracket with lo > hi");
  }

  static Bracket unbounded_above(ExactRational lo) { return Bracket(std::move(lo), std::nullopt); }

  const ExactRational& lo() const { return lo_; }
  const std::optional<ExactRational>& hi() const { return hi_; }
  bool bounded() const { return hi_.has_value(); }
  bool is_exact() const { return hi_ && *hi_ == lo_; }

  std::optional<ExactRational> width() const {
    if (!hi_) return std::nullopt;
    return *hi_ - lo_;
  }

  bool contains(const ExactRational& q) const { return lo_ <= q && (!hi_ || q <= *hi_); }
  bool overlaps(const Bracket& o) const {
    return (!hi_ || o.lo_ <= *hi_) && (!o.hi_ || lo_ <= *o.hi_);
  }

  /// Outward rounding of both endpoints to `prec` significant bits.
  Bracket rounded(long prec) const {
    Bracket r;
    r.lo_ = detail::round_to(lo_, prec, MPFR_RNDD);
    if (hi_) r.hi_ = detail::round_to(*hi_, prec, MPFR_RNDU);
    else r.hi_.reset();
    return r;
  }

  double lo_double() const { return lo_.get_d(); }
  double hi_double() const { return hi_ ? hi_->get_d() : std::numeric_limits<double>::infinity(); }
  double mid_double() const { return hi_ ? (lo_.get_d() + hi_->get_d()) / 2 : hi_double(); }

  friend Bracket operator+(const Bracket& a, const Bracket& b) {
    Bracket r;
    r.lo_ = a.lo_ + b.lo_;
    if (a.hi_ && b.hi_) r.hi_ = *a.hi_ + *b.hi_;
    else r.hi_.reset();
    return r;
  }
  Bracket& operator+=(const Bracket& o) { return *this = *this + o; }

  friend Bracket operator-(const Bracket& a) {
    if (!a.hi_) throw std::domain_error("negating an unbounded bracket");
    return Bracket(-*a.hi_, -a.lo_);
  }

  friend Bracket operator*(const Bracket& a, const ExactRational& s) {
    if (s == 0) return Bracket(ExactRational(0));
    if (s > 0) {
      Bracket r;
      r.lo_ = a.lo_ * s;
      if (a.hi_) r.hi_ = *a.hi_ * s;
      else r.hi_.reset();
      return r;
    }
    return (-a) * ExactRational(-s);
  }
  friend Bracket operator*(const ExactRational& s, const Bracket& a) { return a * s; }

  friend Bracket operator*(const Bracket& a, const Bracket& b) {
    if (a.bounded() && b.bounded()) {
      const std::array<ExactRational, 4> p{a.lo_ * b.lo_, a.lo_ * *b.hi_, *a.hi_ * b.lo_, *a.hi_ * *b.hi_};
      return Bracket(*std::min_element(p.begin(), p.end()), *std::max_element(p.begin(), p.end()));
    }
    if (a.lo_ < 0 || b.lo_ < 0) throw std::domain_error("unbounded product of signed brackets");
    Bracket r;
    r.lo_ = a.lo_ * b.lo_;
    const bool zero_factor = (a.is_exact() && a.lo_ == 0) || (b.is_exact() && b.lo_ == 0);
    if (zero_factor) r.hi_ = ExactRational(0);
    else r.hi_.reset();
    return r;
  }

  /// Division by a bracket bounded away from zero (positive).
  friend Bracket operator/(const Bracket& a, const Bracket& b) {
    if (b.lo_ <= 0) throw std::domain_error("divisor bracket not positive");
    Bracket inv;
    inv.lo_ = b.hi_ ? ExactRational(1 / *b.hi_) : ExactRational(0);
    inv.hi_ = ExactRational(1 / b.lo_);
    return a * inv;
  }

  std::string str() const {
    return "[" + lo_.get_str() + ", " + (hi_ ? hi_->get_str() : std::string("+inf")) + "]";
  }
  friend std::ostream& operator<<(std::ostream& os, const Bracket& b) { return os << b.str(); }

 private:
  ExactRational lo_{0};
  std::optional<ExactRational> hi_{ExactRational(0)};
};

/// Exact q-th root of a non-negative integer when it exists.
inline std::optional<mpz_class> exact_root(const mpz_class& v, unsigned long q) {
  if (v < 0) return std::nullopt;
  mpz_class r;
  if (mpz_root(r.get_mpz_t(), v.get_mpz_t(), q) != 0) return r;
  return std::nullopt;
}

/// base^exponent exactly, when the result is rational.
inline std::optional<ExactRational> exact_power(const ExactRational& base, const ExactRational& exponent) {
  if (base < 0) return std::nullopt;
  if (base == 0) {
    if (exponent > 0) return ExactRational(0);
    return std::nullopt;
  }
  if (!exponent.get_den().fits_ulong_p() || !exponent.get_num().fits_slong_p()) return std::nullopt;
  const unsigned long q = exponent.get_den().get_ui();
  const long p = exponent.get_num().get_si();
  auto rn = exact_root(base.get_num(), q);
  auto rd = exact_root(base.get_den(), q);
  if (!rn || !rd) return std::nullopt;
  ExactRational root(*rn, *rd);
  root.canonicalize();
  const unsigned long ap = static_cast<unsigned long>(p < 0 ? -p : p);
  ExactRational r = pow_rational(root, ap);
  if (p < 0) r = 1 / r;
  return r;
}

/// Enclosure of x^y for x in [lo, hi] (lo >= 0) and rational y. The result is
/// exact when x is exact and x^y is rational.
inline Bracket power(const Bracket& x, const ExactRational& y, long prec = kDefaultPrecisionBits) {
  if (x.lo() < 0) throw std::domain_error("power of a bracket with negative part");
  if (y == 0) return Bracket(ExactRational(1));
  if (x.is_exact()) {
    if (auto e = exact_power(x.lo(), y)) return Bracket(*e);
  }
  if (!x.bounded()) {
    if (y < 0 && x.lo() > 0) return Bracket(ExactRational(0), power(Bracket(x.lo()), y, prec).hi());
    throw std::domain_error("positive power of an unbounded bracket");
  }
  if (y < 0 && x.lo() == 0) {
    throw std::domain_error("negative power of a bracket touching zero");
  }
  // x^y is monotone in each argument separately, so the extremes sit at corners.
  detail::Mpfr ylo(prec), yhi(prec);
  ylo.set(y, MPFR_RNDD);
  yhi.set(y, MPFR_RNDU);
  detail::Mpfr xlo(prec), xhi(prec);
  xlo.set(x.lo(), MPFR_RNDD);
  xhi.set(*x.hi(), MPFR_RNDU);
  detail::Mpfr t(prec);
  std::optional<ExactRational> lo, hi;
  for (mpfr_srcptr xv : {xlo.get(), xhi.get()}) {
    for (mpfr_srcptr yv : {ylo.get(), yhi.get()}) {
      mpfr_pow(t.get(), xv, yv, MPFR_RNDD);
      ExactRational d = t.to_rational();
      if (!lo || d < *lo) lo = d;
      mpfr_pow(t.get(), xv, yv, MPFR_RNDU);
      ExactRational u = t.to_rational();
      if (!hi || u > *hi) hi = u;
    }
  }
  return Bracket(*lo, *hi);
}

inline Bracket power(const ExactRational& x, const ExactRational& y, long prec = kDefaultPrecisionBits) {
  return power(Bracket(x), y, prec);
}

/// Enclosure of log(x) for exact positive x (used only for reporting fits).
inline double log_double(const ExactRational& x) {
  detail::Mpfr m(128);
  m.set(x, MPFR_RNDN);
  mpfr_log(m.get(), m.get(), MPFR_RNDN);
  return mpfr_get_d(m.get(), MPFR_RNDN);
}

/// The symbolic real base^exponent with integer base and rational exponent.
struct SymbolicPower {
  long base = 1;
  ExactRational exponent{0};

  Bracket enclose(long prec = kDefaultPrecisionBits) const {
    return power(ExactRational(base), exponent, prec);
  }

  friend bool operator==(const SymbolicPower& a, const SymbolicPower& b) {
    return a.base == b.base && a.exponent == b.exponent;
  }
  friend bool operator<(const SymbolicPower& a, const SymbolicPower& b) {
    if (a.base != b.base) return a.base < b.base;
    return a.exponent < b.exponent;
  }

  std::string str() const { return std::to_string(base) + "^(" + exponent.get_str() + ")"; }
};

/// Finite sum of rational multiples of symbolic powers. Arithmetic on the
/// rational coefficients stays exact; only enclose() introduces rounding.
class LinearForm {
 public:
  LinearForm() = default;
  explicit LinearForm(const ExactRational& constant) {
    if (constant != 0) terms_[SymbolicPower{}] = constant;
  }
  LinearForm(SymbolicPower factor, const ExactRational& coefficient) {
    if (coefficient != 0) terms_[std::move(factor)] = coefficient;
  }

  const std::map<SymbolicPower, ExactRational>& terms() const { return terms_; }

  ExactRational coefficient(const SymbolicPower& f) const {
    auto it = terms_.find(f);
    return it == terms_.end() ? ExactRational(0) : it->second;
  }

  bool is_zero() const { return terms_.empty(); }

  LinearForm& operator+=(const LinearForm& o) {
    for (const auto& [f, c] : o.terms_) {
      ExactRational& slot = terms_[f];
      slot += c;
      if (slot == 0) terms_.erase(f);
    }
    return *this;
  }
  friend LinearForm operator+(LinearForm a, const LinearForm& b) { return a += b; }

  friend LinearForm operator*(LinearForm a, const ExactRational& s) {
    if (s == 0) return LinearForm();
    for (auto& [f, c] : a.terms_) c *= s;
    return a;
  }
  friend LinearForm operator*(const ExactRational& s, LinearForm a) { return std::move(a) * s; }

  Bracket enclose(long prec = kDefaultPrecisionBits) const {
    Bracket sum(ExactRational(0));
    for (const auto& [f, c] : terms_) sum += f.enclose(prec) * c;
    return sum;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [f, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += c.get_str();
      if (!(f == SymbolicPower{})) s += "*" + f.str();
    }
    return s;
  }

 private:
  std::map<SymbolicPower, ExactRational> terms_;
};

}  // namespace mwsparse
