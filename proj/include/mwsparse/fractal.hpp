#pragma once

// The self-similar dyadic weight w_k on [0,1)^n, realized as an exact
// measure oracle on dyadic cubes.
//
// Structure: the unit cube is the generation-0 active cell. An active cell of
// generation m (side 2^{-km}) splits at level k(m+1) into
//   - B = 2^{(k-1)n} active children filling the lower half [v, v + side/2)^n,
//   - one frozen child at v + side/2 (same side as the children),
//   - void everywhere else.
// Each child carries 1/(B+1) of the parent's mass, so a generation-m cell has
// mass (B+1)^{-m} and a frozen generation-m cell has density r^m with
// r = 2^{kn}/(B+1).

#include <algorithm>
#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mwsparse/dyadic.hpp"

namespace mwsparse {

class FractalSpec {
 public:
  FractalSpec(int n, int k) : n_(n), k_(k) {
    if (n < 1) throw std::invalid_argument("dimension n must be >= 1");
    if (k < 3) throw std::invalid_argument("k must be >= 3 (got " + std::to_string(k) + ")");
  }

  int n() const { return n_; }
  int k() const { return k_; }

  /// B = 2^{(k-1)n}
  mpz_class branch_count() const { return pow2_int(static_cast<unsigned long>((k_ - 1) * n_)); }

  /// r = 2^{kn} / (B + 1)
  ExactRational density_ratio() const {
    ExactRational r(pow2_int(static_cast<unsigned long>(k_ * n_)), branch_count() + 1);
    r.canonicalize();
    return r;
  }

  /// Mass of any generation-m cell, active or frozen: (B+1)^{-m}.
  ExactRational cell_mass(long m) const {
    ExactRational base(1, branch_count() + 1);
    return pow_rational(base, static_cast<unsigned long>(m));
  }

  ExactRational frozen_density(long m) const {
    return pow_rational(density_ratio(), static_cast<unsigned long>(m));
  }

  /// Structural level of generation-m cells.
  long generation_level(long m) const { return static_cast<long>(k_) * m; }

  friend bool operator==(const FractalSpec&, const FractalSpec&) = default;

 private:
  int n_;
  int k_;
};

/// Q_1^m: the frozen generation-m cell nearest the origin, corner 2^{-k(m-1)-1}.
inline DyadicCube q1_cube(const FractalSpec& spec, long m) {
  if (m < 1) throw std::invalid_argument("q1_cube requires m >= 1");
  const mpz_class idx = pow2_int(static_cast<unsigned long>(spec.k() - 1));
  return DyadicCube::from_index(std::vector<mpz_class>(static_cast<std::size_t>(spec.n()), idx),
                                spec.generation_level(m));
}

/// w_k(Gamma(k)) where Gamma(k) is the union of Q_1^m over m >= 3:
/// sum_{m>=3} (B+1)^{-m} = 1/(B (B+1)^2).
inline ExactRational gamma_mass(const FractalSpec& spec) {
  const mpz_class b = spec.branch_count();
  ExactRational r(1, b * (b + 1) * (b + 1));
  r.canonicalize();
  return r;
}

/// A_k = B (B+1)^2, the normalizer with A_k * w_k(Gamma(k)) = 1.
inline ExactRational a_k(const FractalSpec& spec) {
  const mpz_class b = spec.branch_count();
  return ExactRational(b * (b + 1) * (b + 1));
}

/// Measure of a cube together with whether w_k is constant on it.
struct CubeProfile {
  ExactRational mass;
  std::optional<ExactRational> density;  ///< set iff the weight is a.e. constant on the cube
};

namespace detail {

inline bool all_equal(const std::vector<mpz_class>& v, const mpz_class& value) {
  for (const auto& x : v) {
    if (x != value) return false;
  }
  return true;
}

inline bool all_below(const std::vector<mpz_class>& v, const mpz_class& bound) {
  for (const auto& x : v) {
    if (x < 0 || x >= bound) return false;
  }
  return true;
}

inline CubeProfile zero_profile() { return CubeProfile{ExactRational(0), ExactRational(0)}; }

}  // namespace detail

/// Exact w_k profile of an arbitrary dyadic cube. Descends at most
/// ceil(level / k) + 1 generations.
inline CubeProfile wk_profile(const FractalSpec& spec, const DyadicCube& c) {
  if (c.dim() != spec.n()) throw DimensionMismatch("cube dimension differs from spec");
  const long e = c.level();
  const auto& a = c.index();
  if (e <= 0) {
    // c is at least as large as the unit cube: contains it or misses it.
    const bool holds_root = DyadicCube::origin(spec.n(), e) == c;
    return holds_root ? CubeProfile{ExactRational(1), std::nullopt} : detail::zero_profile();
  }
  if (!detail::all_below(a, pow2_int(static_cast<unsigned long>(e)))) return detail::zero_profile();

  const int k = spec.k();
  const mpz_class half = pow2_int(static_cast<unsigned long>(k - 1));
  const unsigned long children_per_axis = 1UL << k;
  std::vector<mpz_class> active(a.size(), mpz_class(0));  // index of the enclosing active cell
  for (long m = 0;; ++m) {
    const long child_level = spec.generation_level(m + 1);
    if (e <= child_level) {
      // c is a union of generation-(m+1) cells.
      const long t = child_level - e;
      const mpz_class span = pow2_int(static_cast<unsigned long>(t));
      mpz_class active_count = 1;
      bool holds_frozen = true;
      for (std::size_t i = 0; i < a.size(); ++i) {
        mpz_class lo;
        mpz_mul_2exp(lo.get_mpz_t(), a[i].get_mpz_t(), static_cast<mp_bitcnt_t>(t));
        lo -= active[i] * children_per_axis;
        const mpz_class hi = lo + span;
        const mpz_class overlap =
            std::max(mpz_class(0), mpz_class(std::min(hi, half) - std::max(lo, mpz_class(0))));
        active_count *= overlap;
        holds_frozen = holds_frozen && lo <= half && half < hi;
      }
      const mpz_class cells = active_count + (holds_frozen ? 1 : 0);
      if (cells == 0) return detail::zero_profile();
      if (t == 0 && active_count == 0) {
        const ExactRational d = spec.frozen_density(m + 1);
        return CubeProfile{spec.cell_mass(m + 1), d};
      }
      return CubeProfile{spec.cell_mass(m + 1) * ExactRational(cells), std::nullopt};
    }
    std::vector<mpz_class> rel(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      mpz_fdiv_q_2exp(rel[i].get_mpz_t(), a[i].get_mpz_t(), static_cast<mp_bitcnt_t>(e - child_level));
      rel[i] -= active[i] * children_per_axis;
    }
    if (detail::all_below(rel, half)) {
      for (std::size_t i = 0; i < a.size(); ++i) active[i] = active[i] * children_per_axis + rel[i];
      continue;
    }
    if (detail::all_equal(rel, half)) {
      const ExactRational d = spec.frozen_density(m + 1);
      return CubeProfile{d * c.volume(), d};
    }
    return detail::zero_profile();
  }
}

inline ExactRational wk_measure(const FractalSpec& spec, const DyadicCube& c) { return wk_profile(spec, c).mass; }

/// Pointwise classification of w_k at x.
struct DensityVerdict {
  enum class Kind { Density, NotInSupport, Undetermined };
  Kind kind = Kind::Undetermined;
  ExactRational value{0};  ///< r^m when kind == Density
  long generation = 0;     ///< m when kind == Density; last active generation otherwise

  static DensityVerdict density(ExactRational v, long m) { return {Kind::Density, std::move(v), m}; }
  static DensityVerdict outside(long m = 0) { return {Kind::NotInSupport, ExactRational(0), m}; }
  static DensityVerdict undetermined(long m) { return {Kind::Undetermined, ExactRational(0), m}; }
};

inline DensityVerdict wk_density(const FractalSpec& spec, const Point& x, long depth_cap) {
  if (depth_cap < 1) throw std::invalid_argument("depth_cap must be >= 1");
  if (x.dim() != spec.n()) throw DimensionMismatch("point dimension differs from spec");
  if (!DyadicCube::origin(spec.n(), 0).contains(x)) return DensityVerdict::outside();
  const int k = spec.k();
  const mpz_class half = pow2_int(static_cast<unsigned long>(k - 1));
  const unsigned long children_per_axis = 1UL << k;
  std::vector<mpz_class> active(static_cast<std::size_t>(spec.n()), mpz_class(0));
  for (long m = 0; m < depth_cap; ++m) {
    const long child_level = spec.generation_level(m + 1);
    std::vector<mpz_class> rel(active.size());
    for (std::size_t i = 0; i < rel.size(); ++i) {
      rel[i] = x[i].floor_scaled(child_level) - active[i] * children_per_axis;
    }
    if (detail::all_below(rel, half)) {
      for (std::size_t i = 0; i < rel.size(); ++i) active[i] = active[i] * children_per_axis + rel[i];
      continue;
    }
    if (detail::all_equal(rel, half)) return DensityVerdict::density(spec.frozen_density(m + 1), m + 1);
    return DensityVerdict::outside(m);
  }
  return DensityVerdict::undetermined(depth_cap);
}

/// Profile of the chain restriction w_k * 1_{union_{m >= first} Q_1^m}.
/// Finitely many chain cubes are examined individually; once the remaining
/// chain lies inside [0, 2^{-level})^n the rest is a closed-form geometric tail.
inline CubeProfile chain_profile(const FractalSpec& spec, long first, const DyadicCube& c) {
  if (c.dim() != spec.n()) throw DimensionMismatch("cube dimension differs from spec");
  if (first < 1) throw std::invalid_argument("chain must start at generation >= 1");
  const long e = c.level();
  const auto& a = c.index();
  const int k = spec.k();
  const mpz_class q_index = pow2_int(static_cast<unsigned long>(k - 1));
  const mpz_class b = spec.branch_count();
  ExactRational total(0);
  bool partial = false;  // true once c has been seen to hold a chain cube
  for (long m = first;; ++m) {
    const long qlevel = spec.generation_level(m);
    if (e <= qlevel) {
      if (e <= static_cast<long>(k) * (m - 1)) {
        // Q_1^m and every later chain cube lie in [0, 2^{-e})^n.
        if (detail::all_equal(a, mpz_class(0))) {
          ExactRational tail = spec.cell_mass(m) * ExactRational(b + 1, b);
          tail.canonicalize();
          total += tail;
          partial = true;
        }
        break;
      }
      mpz_class anc;
      mpz_fdiv_q_2exp(anc.get_mpz_t(), q_index.get_mpz_t(), static_cast<mp_bitcnt_t>(qlevel - e));
      if (detail::all_equal(a, anc)) {
        if (qlevel == e) return CubeProfile{spec.cell_mass(m), spec.frozen_density(m)};
        total += spec.cell_mass(m);
        partial = true;
      }
    } else {
      bool inside = true;
      for (const auto& ai : a) {
        mpz_class anc;
        mpz_fdiv_q_2exp(anc.get_mpz_t(), ai.get_mpz_t(), static_cast<mp_bitcnt_t>(e - qlevel));
        if (anc != q_index) {
          inside = false;
          break;
        }
      }
      if (inside) {
        const ExactRational d = spec.frozen_density(m);
        return CubeProfile{d * c.volume(), d};
      }
    }
  }
  if (!partial) return detail::zero_profile();
  return CubeProfile{total, std::nullopt};
}

inline ExactRational chain_measure(const FractalSpec& spec, long first, const DyadicCube& c) {
  return chain_profile(spec, first, c).mass;
}

inline ExactRational gamma_restricted_measure(const FractalSpec& spec, const DyadicCube& c) {
  return chain_measure(spec, 3, c);
}

/// A frozen structural cell.
struct FrozenCell {
  DyadicCube cube;
  long generation = 0;
};

class EnumerationLimitExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Every frozen cell of generation <= max_generation. Throws when the count
/// (sum of B^{m-1}) would exceed `limit`.
inline std::vector<FrozenCell> enumerate_frozen(const FractalSpec& spec, long max_generation, std::size_t limit) {
  const mpz_class b = spec.branch_count();
  mpz_class count = 0, layer = 1;
  for (long m = 1; m <= max_generation; ++m) {
    count += layer;
    layer *= b;
  }
  if (count > limit) {
    throw EnumerationLimitExceeded("frozen cell count " + count.get_str() + " exceeds limit " +
                                   std::to_string(limit));
  }
  const int k = spec.k();
  const std::size_t n = static_cast<std::size_t>(spec.n());
  const unsigned long half = 1UL << (k - 1);
  const unsigned long per_axis = 1UL << k;
  std::vector<FrozenCell> out;
  std::vector<std::vector<mpz_class>> actives{std::vector<mpz_class>(n, mpz_class(0))};
  for (long m = 1; m <= max_generation; ++m) {
    std::vector<std::vector<mpz_class>> next;
    for (const auto& p : actives) {
      std::vector<mpz_class> frozen(n);
      for (std::size_t i = 0; i < n; ++i) frozen[i] = p[i] * per_axis + half;
      out.push_back({DyadicCube::from_index(std::move(frozen), spec.generation_level(m)), m});
      if (m == max_generation) continue;
      std::vector<unsigned long> digit(n, 0);
      while (true) {
        std::vector<mpz_class> child(n);
        for (std::size_t i = 0; i < n; ++i) child[i] = p[i] * per_axis + digit[i];
        next.push_back(std::move(child));
        std::size_t axis = 0;
        while (axis < n && ++digit[axis] == half) digit[axis++] = 0;
        if (axis == n) break;
      }
    }
    actives = std::move(next);
  }
  return out;
}

/// A uniformly random frozen cell of generation m (random active path).
template <class Rng>
FrozenCell random_frozen_cell(const FractalSpec& spec, long m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("generation must be >= 1");
  const int k = spec.k();
  const std::size_t n = static_cast<std::size_t>(spec.n());
  const unsigned long half = 1UL << (k - 1);
  const unsigned long per_axis = 1UL << k;
  std::uniform_int_distribution<unsigned long> digit(0, half - 1);
  std::vector<mpz_class> idx(n, mpz_class(0));
  for (long g = 1; g < m; ++g) {
    for (std::size_t i = 0; i < n; ++i) idx[i] = idx[i] * per_axis + digit(rng);
  }
  for (std::size_t i = 0; i < n; ++i) idx[i] = idx[i] * per_axis + half;
  return {DyadicCube::from_index(std::move(idx), spec.generation_level(m)), m};
}

/// A random dyadic point of c using `extra_bits` bits below the cube's level.
template <class Rng>
Point random_point_in(const DyadicCube& c, long extra_bits, Rng& rng) {
  std::vector<DyadicRational> coords;
  const long level = c.level() + extra_bits;
  const unsigned long span = 1UL << extra_bits;
  std::uniform_int_distribution<unsigned long> offset(0, span - 1);
  for (const auto& a : c.index()) {
    mpz_class v;
    mpz_mul_2exp(v.get_mpz_t(), a.get_mpz_t(), static_cast<mp_bitcnt_t>(extra_bits));
    v += offset(rng);
    coords.emplace_back(v, level);
  }
  return Point(std::move(coords));
}

}  // namespace mwsparse
