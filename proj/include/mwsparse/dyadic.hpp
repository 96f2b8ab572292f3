#pragma once

// Exact dyadic geometry: dyadic rationals, points, and grid-aligned
// half-open cubes [c, c + 2^{-level})^n.

#include <gmpxx.h>

#include <algorithm>
#include <compare>
#include <cstddef>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mwsparse {

using ExactRational = mpq_class;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MisalignedTranslation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// 2^e as an exact rational, any sign of e.
inline ExactRational pow2(long e) {
  ExactRational r(1);
  if (e >= 0) {
    mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(), static_cast<mp_bitcnt_t>(e));
  } else {
    mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  }
  return r;
}

inline mpz_class pow2_int(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
  return r;
}

inline ExactRational pow_rational(const ExactRational& base, unsigned long exponent) {
  ExactRational r;
  mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  r.canonicalize();
  return r;
}

inline ExactRational make_rational(long p, long q) {
  if (q == 0) throw std::invalid_argument("zero denominator");
  ExactRational r(p, q);
  r.canonicalize();
  return r;
}

/// Parses "p/q", "p", or a finite decimal such as "0.75".
inline ExactRational parse_rational(std::string_view text) {
  std::string s(text);
  auto trim = [](std::string& t) {
    auto b = t.find_first_not_of(" \t");
    auto e = t.find_last_not_of(" \t");
    t = (b == std::string::npos) ? std::string() : t.substr(b, e - b + 1);
  };
  trim(s);
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  ExactRational r;
  if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    const auto decimals = s.size() - dot - 1;
    mpz_class num;
    if (digits.empty() || digits == "-" || num.set_str(digits, 10) != 0) {
      throw std::invalid_argument("bad decimal literal: " + s);
    }
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, decimals);
    r = ExactRational(num, den);
  } else if (r.set_str(s, 10) != 0 || r.get_den() == 0) {
    throw std::invalid_argument("bad rational literal: " + s);
  }
  r.canonicalize();
  return r;
}

inline std::string to_string(const ExactRational& q) { return q.get_str(); }

/// numerator / 2^scale, canonical: scale == 0 or numerator odd.
class DyadicRational {
 public:
  DyadicRational() = default;
  DyadicRational(long value) : num_(value) {}  // NOLINT(google-explicit-constructor)
  DyadicRational(mpz_class numerator, long scale) : num_(std::move(numerator)), scale_(scale) {
    if (scale_ < 0) {
      mpz_mul_2exp(num_.get_mpz_t(), num_.get_mpz_t(), static_cast<mp_bitcnt_t>(-scale_));
      scale_ = 0;
    }
    normalize();
  }

  static DyadicRational from_rational(const ExactRational& q) {
    const mpz_class& den = q.get_den();
    if (mpz_popcount(den.get_mpz_t()) != 1) {
      throw std::invalid_argument("not a dyadic rational: " + q.get_str());
    }
    return DyadicRational(q.get_num(), static_cast<long>(mpz_scan1(den.get_mpz_t(), 0)));
  }

  static DyadicRational parse(std::string_view text) { return from_rational(parse_rational(text)); }

  const mpz_class& numerator() const { return num_; }
  long scale() const { return scale_; }

  ExactRational to_rational() const {
    ExactRational r(num_);
    mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), static_cast<mp_bitcnt_t>(scale_));
    r.canonicalize();
    return r;
  }

  double to_double() const { return to_rational().get_d(); }

  /// floor(x * 2^shift), exact.
  mpz_class floor_scaled(long shift) const {
    mpz_class r;
    const long net = shift - scale_;
    if (net >= 0) {
      mpz_mul_2exp(r.get_mpz_t(), num_.get_mpz_t(), static_cast<mp_bitcnt_t>(net));
    } else {
      mpz_fdiv_q_2exp(r.get_mpz_t(), num_.get_mpz_t(), static_cast<mp_bitcnt_t>(-net));
    }
    return r;
  }

  /// True iff x is an integer multiple of 2^{-level}.
  bool aligned_to(long level) const {
    if (num_ == 0) return true;
    if (level >= 0) return scale_ <= level;
    return scale_ == 0 && mpz_scan1(num_.get_mpz_t(), 0) >= static_cast<mp_bitcnt_t>(-level);
  }

  DyadicRational mul_pow2(long t) const { return DyadicRational(num_, scale_ - t); }

  friend DyadicRational operator+(const DyadicRational& a, const DyadicRational& b) {
    const long s = std::max(a.scale_, b.scale_);
    mpz_class an, bn;
    mpz_mul_2exp(an.get_mpz_t(), a.num_.get_mpz_t(), static_cast<mp_bitcnt_t>(s - a.scale_));
    mpz_mul_2exp(bn.get_mpz_t(), b.num_.get_mpz_t(), static_cast<mp_bitcnt_t>(s - b.scale_));
    return DyadicRational(an + bn, s);
  }
  friend DyadicRational operator-(const DyadicRational& a) { return DyadicRational(-a.num_, a.scale_); }
  friend DyadicRational operator-(const DyadicRational& a, const DyadicRational& b) { return a + (-b); }

  friend bool operator==(const DyadicRational& a, const DyadicRational& b) {
    return a.scale_ == b.scale_ && a.num_ == b.num_;
  }
  friend std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b) {
    const int c = cmp(a.to_rational(), b.to_rational());
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  std::string str() const { return to_rational().get_str(); }
  friend std::ostream& operator<<(std::ostream& os, const DyadicRational& d) { return os << d.str(); }

 private:
  void normalize() {
    if (num_ == 0) {
      scale_ = 0;
      return;
    }
    const auto tz = static_cast<long>(mpz_scan1(num_.get_mpz_t(), 0));
    const long drop = std::min(tz, scale_);
    if (drop > 0) {
      mpz_fdiv_q_2exp(num_.get_mpz_t(), num_.get_mpz_t(), static_cast<mp_bitcnt_t>(drop));
      scale_ -= drop;
    }
  }

  mpz_class num_{0};
  long scale_ = 0;
};

class Point {
 public:
  Point() = default;
  explicit Point(std::vector<DyadicRational> coords) : coords_(std::move(coords)) {}
  Point(std::initializer_list<DyadicRational> coords) : coords_(coords) {}

  static Point uniform(int n, const DyadicRational& value) {
    return Point(std::vector<DyadicRational>(static_cast<std::size_t>(n), value));
  }

  int dim() const { return static_cast<int>(coords_.size()); }
  const DyadicRational& operator[](std::size_t i) const { return coords_[i]; }
  DyadicRational& operator[](std::size_t i) { return coords_[i]; }
  const std::vector<DyadicRational>& coords() const { return coords_; }

  /// Largest canonical scale among the coordinates.
  long scale() const {
    long s = 0;
    for (const auto& c : coords_) s = std::max(s, c.scale());
    return s;
  }

  friend Point operator+(const Point& a, const Point& b) {
    check_dims(a, b);
    Point r = a;
    for (std::size_t i = 0; i < r.coords_.size(); ++i) r.coords_[i] = a.coords_[i] + b.coords_[i];
    return r;
  }
  friend Point operator-(const Point& a, const Point& b) {
    check_dims(a, b);
    Point r = a;
    for (std::size_t i = 0; i < r.coords_.size(); ++i) r.coords_[i] = a.coords_[i] - b.coords_[i];
    return r;
  }
  friend bool operator==(const Point&, const Point&) = default;

  std::string str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < coords_.size(); ++i) os << (i ? "," : "") << coords_[i];
    os << ')';
    return os.str();
  }
  friend std::ostream& operator<<(std::ostream& os, const Point& p) { return os << p.str(); }

  static void check_dims(const Point& a, const Point& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("point dimensions differ");
  }

 private:
  std::vector<DyadicRational> coords_;
};

/// Half-open cube prod_i [index_i * 2^{-level}, (index_i + 1) * 2^{-level}).
/// The level may be negative (side lengths 2, 4, ...).
class DyadicCube {
 public:
  DyadicCube() = default;

  DyadicCube(const Point& corner, long level) : level_(level) {
    index_.reserve(static_cast<std::size_t>(corner.dim()));
    for (const auto& c : corner.coords()) {
      if (!c.aligned_to(level)) {
        throw std::invalid_argument("corner " + corner.str() + " not aligned to level " +
                                    std::to_string(level));
      }
      index_.push_back(c.floor_scaled(level));
    }
  }

  static DyadicCube from_index(std::vector<mpz_class> index, long level) {
    DyadicCube c;
    c.index_ = std::move(index);
    c.level_ = level;
    return c;
  }

  /// [0, 2^{-level})^n
  static DyadicCube origin(int n, long level) {
    return from_index(std::vector<mpz_class>(static_cast<std::size_t>(n), mpz_class(0)), level);
  }

  /// The level-`level` cube containing x.
  static DyadicCube containing(const Point& x, long level) {
    std::vector<mpz_class> idx;
    idx.reserve(static_cast<std::size_t>(x.dim()));
    for (const auto& c : x.coords()) idx.push_back(c.floor_scaled(level));
    return from_index(std::move(idx), level);
  }

  int dim() const { return static_cast<int>(index_.size()); }
  long level() const { return level_; }
  const std::vector<mpz_class>& index() const { return index_; }

  Point corner() const {
    std::vector<DyadicRational> c;
    c.reserve(index_.size());
    for (const auto& a : index_) c.emplace_back(a, level_);
    return Point(std::move(c));
  }

  DyadicRational side() const { return DyadicRational(mpz_class(1), level_); }
  ExactRational volume() const { return pow2(-level_ * dim()); }

  bool contains(const Point& x) const {
    if (x.dim() != dim()) throw DimensionMismatch("cube/point dimensions differ");
    for (std::size_t i = 0; i < index_.size(); ++i) {
      if (x[i].floor_scaled(level_) != index_[i]) return false;
    }
    return true;
  }

  /// Ancestor (or self) at a coarser-or-equal level.
  DyadicCube ancestor(long level) const {
    if (level > level_) throw std::invalid_argument("ancestor level finer than cube");
    std::vector<mpz_class> idx(index_.size());
    for (std::size_t i = 0; i < index_.size(); ++i) {
      mpz_fdiv_q_2exp(idx[i].get_mpz_t(), index_[i].get_mpz_t(),
                      static_cast<mp_bitcnt_t>(level_ - level));
    }
    return from_index(std::move(idx), level);
  }

  bool contains(const DyadicCube& other) const {
    if (other.dim() != dim()) throw DimensionMismatch("cube dimensions differ");
    if (other.level_ < level_) return false;
    return other.ancestor(level_).index_ == index_;
  }

  /// Dyadic cubes are either nested or disjoint.
  bool intersects(const DyadicCube& other) const { return contains(other) || other.contains(*this); }

  std::vector<DyadicCube> subdivide(long t) const {
    if (t < 1) throw std::invalid_argument("subdivision factor must be >= 1");
    const mpz_class per_axis = pow2_int(static_cast<unsigned long>(t));
    const auto count_per_axis = per_axis.get_ui();
    std::vector<DyadicCube> out;
    std::vector<unsigned long> digit(index_.size(), 0);
    std::vector<mpz_class> base(index_.size());
    for (std::size_t i = 0; i < index_.size(); ++i) base[i] = index_[i] * per_axis;
    while (true) {
      std::vector<mpz_class> idx(index_.size());
      for (std::size_t i = 0; i < index_.size(); ++i) idx[i] = base[i] + digit[i];
      out.push_back(from_index(std::move(idx), level_ + t));
      std::size_t axis = 0;
      while (axis < digit.size() && ++digit[axis] == count_per_axis) digit[axis++] = 0;
      if (axis == digit.size()) break;
    }
    return out;
  }

  /// The 3^n same-level cells whose union is the dilate 3Q.
  std::vector<DyadicCube> neighbors3() const {
    std::vector<DyadicCube> out;
    std::vector<int> offset(index_.size(), -1);
    while (true) {
      std::vector<mpz_class> idx(index_.size());
      for (std::size_t i = 0; i < index_.size(); ++i) idx[i] = index_[i] + offset[i];
      out.push_back(from_index(std::move(idx), level_));
      std::size_t axis = 0;
      while (axis < offset.size() && ++offset[axis] == 2) offset[axis++] = -1;
      if (axis == offset.size()) break;
    }
    return out;
  }

  DyadicCube translate(const Point& v) const {
    if (v.dim() != dim()) throw DimensionMismatch("translation dimension differs");
    std::vector<mpz_class> idx(index_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (!v[i].aligned_to(level_)) {
        throw MisalignedTranslation("translation " + v.str() + " not aligned to level " +
                                    std::to_string(level_));
      }
      idx[i] += v[i].floor_scaled(level_);
    }
    return from_index(std::move(idx), level_);
  }

  /// Translation by arbitrary rationals; fails unless each component is dyadic and aligned.
  DyadicCube translate(const std::vector<ExactRational>& v) const {
    std::vector<DyadicRational> d;
    d.reserve(v.size());
    for (const auto& q : v) {
      try {
        d.push_back(DyadicRational::from_rational(q));
      } catch (const std::invalid_argument&) {
        throw MisalignedTranslation("translation component " + q.get_str() + " is not dyadic");
      }
    }
    return translate(Point(std::move(d)));
  }

  /// Shift by an integer vector (always aligned for level >= 0).
  DyadicCube shifted(const std::vector<mpz_class>& integer_offset) const {
    std::vector<mpz_class> idx(index_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (level_ >= 0) {
        mpz_class s;
        mpz_mul_2exp(s.get_mpz_t(), integer_offset[i].get_mpz_t(), static_cast<mp_bitcnt_t>(level_));
        idx[i] += s;
      } else {
        mpz_class s, rem;
        mpz_fdiv_r_2exp(rem.get_mpz_t(), integer_offset[i].get_mpz_t(), static_cast<mp_bitcnt_t>(-level_));
        if (rem != 0) throw MisalignedTranslation("integer shift not aligned to coarse cube");
        mpz_fdiv_q_2exp(s.get_mpz_t(), integer_offset[i].get_mpz_t(), static_cast<mp_bitcnt_t>(-level_));
        idx[i] += s;
      }
    }
    return from_index(std::move(idx), level_);
  }

  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;

  std::string str() const {
    std::ostringstream os;
    const Point c = corner();
    const DyadicRational s = side();
    for (int i = 0; i < dim(); ++i) {
      if (i) os << " x ";
      os << '[' << c[static_cast<std::size_t>(i)] << ',' << (c[static_cast<std::size_t>(i)] + s) << ')';
    }
    return os.str();
  }
  friend std::ostream& operator<<(std::ostream& os, const DyadicCube& c) { return os << c.str(); }

 private:
  long level_ = 0;
  std::vector<mpz_class> index_;
};

inline bool cube_contains_point(const DyadicCube& c, const Point& x) { return c.contains(x); }

}  // namespace mwsparse
