#pragma once

// Measures queried on dyadic cubes: w_k, chain restrictions of w_k, the
// aggregate weight w, and finite simple functions. Every type answers
// exact profile(c) queries (mass plus density when constant on c).

#include <concepts>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mwsparse/fractal.hpp"

namespace mwsparse {

template <class M>
concept CubeMeasure = requires(const M& m, const DyadicCube& c) {
  { m.dim() } -> std::convertible_to<int>;
  m.measure(c);
};

/// Rational measures that also report where they are constant.
template <class M>
concept ProfiledMeasure = CubeMeasure<M> && requires(const M& m, const DyadicCube& c) {
  { m.profile(c) } -> std::same_as<CubeProfile>;
  { m.total_mass() } -> std::convertible_to<ExactRational>;
};

inline CubeProfile operator+(const CubeProfile& a, const CubeProfile& b) {
  CubeProfile r{a.mass + b.mass, std::nullopt};
  if (a.density && b.density) r.density = *a.density + *b.density;
  return r;
}

inline CubeProfile operator*(const ExactRational& s, const CubeProfile& p) {
  CubeProfile r{s * p.mass, std::nullopt};
  if (p.density) r.density = s * *p.density;
  return r;
}

/// Integer vector (s, ..., s).
inline std::vector<mpz_class> diagonal(int n, const mpz_class& s) {
  return std::vector<mpz_class>(static_cast<std::size_t>(n), s);
}

inline std::vector<mpz_class> negated(std::vector<mpz_class> v) {
  for (auto& x : v) x = -x;
  return v;
}

/// Profile of a measure living in the unit block [shift, shift + 1)^n, given
/// the profile function of its unshifted copy on [0,1)^n.
template <class Fn>
CubeProfile profile_in_block(const DyadicCube& c, const std::vector<mpz_class>& shift, Fn&& unshifted) {
  const int n = c.dim();
  if (c.level() <= 0) {
    const DyadicCube block = DyadicCube::from_index(shift, 0);
    if (!c.contains(block)) return CubeProfile{ExactRational(0), ExactRational(0)};
    CubeProfile whole = unshifted(DyadicCube::origin(n, 0));
    if (whole.mass == 0) return CubeProfile{ExactRational(0), ExactRational(0)};
    if (c == block) return whole;
    return CubeProfile{whole.mass, std::nullopt};
  }
  return unshifted(c.shifted(negated(shift)));
}

struct WkMeasure {
  FractalSpec spec;

  int dim() const { return spec.n(); }
  CubeProfile profile(const DyadicCube& c) const { return wk_profile(spec, c); }
  ExactRational measure(const DyadicCube& c) const { return profile(c).mass; }
  ExactRational total_mass() const { return ExactRational(1); }
};

/// w_k restricted to the chain union_{m >= first} Q_1^m; first = 3 gives Gamma(k).
struct ChainMeasure {
  FractalSpec spec;
  long first = 3;

  int dim() const { return spec.n(); }
  CubeProfile profile(const DyadicCube& c) const { return chain_profile(spec, first, c); }
  ExactRational measure(const DyadicCube& c) const { return profile(c).mass; }
  ExactRational total_mass() const {
    const mpz_class b = spec.branch_count();
    ExactRational t = spec.cell_mass(first) * ExactRational(b + 1, b);
    t.canonicalize();
    return t;
  }
};

/// Translate of a measure supported in [0,1)^n by an integer vector.
template <ProfiledMeasure M>
struct Shifted {
  M base;
  std::vector<mpz_class> shift;

  int dim() const { return base.dim(); }
  CubeProfile profile(const DyadicCube& c) const {
    return profile_in_block(c, shift, [this](const DyadicCube& u) { return base.profile(u); });
  }
  ExactRational measure(const DyadicCube& c) const { return profile(c).mass; }
  ExactRational total_mass() const { return base.total_mass(); }
};

/// Parameters of the aggregate weight w = sum_{k=3}^{k_max} A_k w_k(. - 2^k) 1_Gamma(k)(. - 2^k)
/// and of the extremal function built on it.
class AggregateSpec {
 public:
  AggregateSpec(int n, int k_max, ExactRational p, ExactRational epsilon, long m_cut = 8,
                long precision_bits = kPrecisionDefault)
      : n_(n), k_max_(k_max), p_(std::move(p)), eps_(std::move(epsilon)), m_cut_(m_cut),
        precision_bits_(precision_bits) {
    if (n_ < 1) throw std::invalid_argument("dimension n must be >= 1");
    if (k_max_ < 3) throw std::invalid_argument("k_max must be >= 3");
    if (p_ <= 1) throw std::invalid_argument("p must exceed 1");
    const ExactRational inv_dual = (p_ - 1) / p_;
    if (!(inv_dual < eps_ && eps_ < 1)) {
      throw std::invalid_argument("epsilon must lie in (1/p', 1) = (" + inv_dual.get_str() + ", 1)");
    }
    if (m_cut_ < 3) throw std::invalid_argument("M_cut must be >= 3");
    if (precision_bits_ < 64) throw std::invalid_argument("precision_bits must be >= 64");
  }

  static constexpr long kPrecisionDefault = 128;

  int n() const { return n_; }
  int k_max() const { return k_max_; }
  const ExactRational& p() const { return p_; }
  const ExactRational& epsilon() const { return eps_; }
  long m_cut() const { return m_cut_; }
  long precision_bits() const { return precision_bits_; }

  /// p' = p / (p - 1)
  ExactRational dual_exponent() const { return p_ / (p_ - 1); }

  FractalSpec block_spec(int k) const {
    if (k < 3 || k > k_max_) throw std::out_of_range("block index outside [3, k_max]");
    return FractalSpec(n_, k);
  }

  std::vector<mpz_class> block_shift(int k) const { return diagonal(n_, pow2_int(static_cast<unsigned long>(k))); }

  DyadicCube block_cube(int k) const { return DyadicCube::from_index(block_shift(k), 0); }

  /// Block k whose unit cube [2^k, 2^k + 1)^n contains c, if any (c.level() > 0).
  std::optional<int> block_of(const DyadicCube& c) const {
    if (c.level() < 0) return std::nullopt;
    const DyadicCube unit = c.ancestor(0);
    const mpz_class& first = unit.index().front();
    if (first <= 0 || mpz_popcount(first.get_mpz_t()) != 1) return std::nullopt;
    const auto k = static_cast<int>(mpz_scan1(first.get_mpz_t(), 0));
    if (k < 3 || k > k_max_) return std::nullopt;
    for (const auto& a : unit.index()) {
      if (a != first) return std::nullopt;
    }
    return k;
  }

  /// Block k whose unit cube contains x, if any.
  std::optional<int> block_of(const Point& x) const { return block_of(DyadicCube::containing(x, 0)); }

 private:
  int n_;
  int k_max_;
  ExactRational p_;
  ExactRational eps_;
  long m_cut_;
  long precision_bits_;
};

struct AggregateMeasure {
  AggregateSpec agg;

  int dim() const { return agg.n(); }

  CubeProfile profile(const DyadicCube& c) const {
    if (c.dim() != agg.n()) throw DimensionMismatch("cube dimension differs from aggregate");
    if (c.level() <= 0) {
      CubeProfile total{ExactRational(0), ExactRational(0)};
      for (int k = 3; k <= agg.k_max(); ++k) total = total + block_profile(k, c);
      return total;
    }
    if (auto k = agg.block_of(c)) return block_profile(*k, c);
    return CubeProfile{ExactRational(0), ExactRational(0)};
  }

  ExactRational measure(const DyadicCube& c) const { return profile(c).mass; }
  ExactRational total_mass() const { return ExactRational(agg.k_max() - 2); }

  /// Pointwise density of w, when x lies in a chain cube of some block.
  std::optional<ExactRational> density_at(const Point& x) const {
    auto k = agg.block_of(x);
    if (!k) return std::nullopt;
    const FractalSpec spec = agg.block_spec(*k);
    const Point local = x - Point::uniform(agg.n(), DyadicRational(pow2_int(static_cast<unsigned long>(*k)), 0));
    const DensityVerdict v = wk_density(spec, local, std::max<long>(3, local.scale() / spec.k() + 2));
    if (v.kind != DensityVerdict::Kind::Density || v.generation < 3) return std::nullopt;
    if (!q1_cube(spec, v.generation).contains(local)) return std::nullopt;
    return a_k(spec) * v.value;
  }

 private:
  CubeProfile block_profile(int k, const DyadicCube& c) const {
    const FractalSpec spec = agg.block_spec(k);
    const ExactRational a = a_k(spec);
    return a * profile_in_block(c, agg.block_shift(k), [&](const DyadicCube& u) { return chain_profile(spec, 3, u); });
  }
};

/// Frozen-chain tail of a simple function: density coefficient * r^m on
/// shift + Q_1^m for every m >= first.
struct ChainTail {
  FractalSpec spec;
  std::vector<mpz_class> shift;
  ExactRational coefficient;
  long first = 3;

  CubeProfile profile(const DyadicCube& c) const {
    return coefficient *
           profile_in_block(c, shift, [this](const DyadicCube& u) { return chain_profile(spec, first, u); });
  }

  ExactRational mass() const { return coefficient * ChainMeasure{spec, first}.total_mass(); }
};

struct Piece {
  DyadicCube cube;
  ExactRational density;
};

/// Finite sum of densities on pairwise disjoint dyadic cubes, plus optional
/// geometric chain tails. Densities may be signed.
class SimpleFunction {
 public:
  explicit SimpleFunction(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("dimension n must be >= 1");
  }

  int dim() const { return n_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::vector<ChainTail>& tails() const { return tails_; }

  SimpleFunction& add_piece(DyadicCube cube, ExactRational density) {
    if (cube.dim() != n_) throw DimensionMismatch("piece dimension differs");
    for (const auto& p : pieces_) {
      if (p.cube.intersects(cube)) throw std::invalid_argument("overlapping piece " + cube.str());
    }
    for (const auto& t : tails_) {
      if (t.profile(cube).mass != 0 || tail_covers(t, cube)) {
        throw std::invalid_argument("piece " + cube.str() + " overlaps a chain tail");
      }
    }
    if (density != 0) pieces_.push_back({std::move(cube), std::move(density)});
    return *this;
  }

  SimpleFunction& add_tail(ChainTail tail) {
    if (tail.spec.n() != n_ || tail.shift.size() != static_cast<std::size_t>(n_)) {
      throw DimensionMismatch("tail dimension differs");
    }
    for (const auto& p : pieces_) {
      if (tail.profile(p.cube).mass != 0 || tail_covers(tail, p.cube)) {
        throw std::invalid_argument("chain tail overlaps piece " + p.cube.str());
      }
    }
    for (const auto& t : tails_) {
      if (t.shift == tail.shift) throw std::invalid_argument("two chain tails in one block");
    }
    if (tail.coefficient != 0) tails_.push_back(std::move(tail));
    return *this;
  }

  CubeProfile profile(const DyadicCube& c) const {
    CubeProfile total{ExactRational(0), ExactRational(0)};
    for (const auto& p : pieces_) {
      if (p.cube.contains(c)) {
        total = total + CubeProfile{p.density * c.volume(), p.density};
      } else if (c.contains(p.cube)) {
        total = total + CubeProfile{p.density * p.cube.volume(), std::nullopt};
      }
    }
    for (const auto& t : tails_) total = total + t.profile(c);
    return total;
  }

  ExactRational measure(const DyadicCube& c) const { return profile(c).mass; }

  ExactRational integral() const {
    ExactRational s(0);
    for (const auto& p : pieces_) s += p.density * p.cube.volume();
    for (const auto& t : tails_) s += t.mass();
    return s;
  }

  ExactRational total_mass() const {
    ExactRational s(0);
    for (const auto& p : pieces_) s += abs(p.density) * p.cube.volume();
    for (const auto& t : tails_) s += abs(t.coefficient) * ChainMeasure{t.spec, t.first}.total_mass();
    return s;
  }

  bool nonnegative() const {
    for (const auto& p : pieces_) {
      if (p.density < 0) return false;
    }
    for (const auto& t : tails_) {
      if (t.coefficient < 0) return false;
    }
    return true;
  }

  /// Density at x if x lies in a piece or a tail cube; zero elsewhere.
  ExactRational value_at(const Point& x) const {
    for (const auto& p : pieces_) {
      if (p.cube.contains(x)) return p.density;
    }
    for (const auto& t : tails_) {
      const DyadicCube block = DyadicCube::from_index(t.shift, 0);
      if (!block.contains(x)) continue;
      Point local = x;
      for (std::size_t i = 0; i < t.shift.size(); ++i) local[i] = x[i] - DyadicRational(t.shift[i], 0);
      const DensityVerdict v = wk_density(t.spec, local, std::max<long>(t.first, local.scale() / t.spec.k() + 2));
      if (v.kind == DensityVerdict::Kind::Density && v.generation >= t.first &&
          q1_cube(t.spec, v.generation).contains(local)) {
        return t.coefficient * v.value;
      }
    }
    return ExactRational(0);
  }

 private:
  static bool tail_covers(const ChainTail& t, const DyadicCube& c) {
    // c strictly inside some tail cube shows up as positive profile mass;
    // c containing the whole tail shows up the same way. Anything else is disjoint.
    return t.profile(c).mass != 0;
  }

  int n_;
  std::vector<Piece> pieces_;
  std::vector<ChainTail> tails_;
};

/// Runtime dispatch over the measure kinds the operators accept.
class MeasureHandle {
 public:
  using Variant = std::variant<WkMeasure, ChainMeasure, AggregateMeasure, SimpleFunction>;

  MeasureHandle(Variant v) : v_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  int dim() const {
    return std::visit([](const auto& m) { return m.dim(); }, v_);
  }
  CubeProfile profile(const DyadicCube& c) const {
    return std::visit([&](const auto& m) { return m.profile(c); }, v_);
  }
  ExactRational measure(const DyadicCube& c) const { return profile(c).mass; }
  ExactRational total_mass() const {
    return std::visit([](const auto& m) { return ExactRational(m.total_mass()); }, v_);
  }

  const Variant& get() const { return v_; }

 private:
  Variant v_;
};

}  // namespace mwsparse
