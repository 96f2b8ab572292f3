#pragma once

// The extremal function f = sum_k k^{-eps} A_k w_k(. - 2^k), optionally
// restricted to the chains Gamma(k). Cube integrals are linear forms in the
// symbolic factors k^{-eps} with exact rational coefficients.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mwsparse/bracket.hpp"
#include "mwsparse/measure.hpp"

namespace mwsparse {

/// A simple function scaled by one symbolic factor.
struct FactoredBlock {
  int k = 0;
  SymbolicPower factor;
  SimpleFunction function;
  bool truncated = false;  ///< true when generations above M_cut were dropped
};

class ExtremalFunction {
 public:
  ExtremalFunction(AggregateSpec agg, bool restricted) : agg_(std::move(agg)), restricted_(restricted) {}

  const AggregateSpec& spec() const { return agg_; }
  bool restricted() const { return restricted_; }
  int dim() const { return agg_.n(); }

  /// k^{-eps}
  SymbolicPower factor(int k) const { return SymbolicPower{k, -agg_.epsilon()}; }

  LinearForm measure(const DyadicCube& c) const {
    LinearForm total;
    if (c.level() > 0) {
      if (auto k = agg_.block_of(c)) total += block_measure(*k, c);
      return total;
    }
    for (int k = 3; k <= agg_.k_max(); ++k) total += block_measure(k, c);
    return total;
  }

  /// Rational part of the density of f at x (the coefficient of k^{-eps}).
  std::optional<std::pair<SymbolicPower, ExactRational>> density_at(const Point& x) const {
    auto k = agg_.block_of(x);
    if (!k) return std::nullopt;
    const FractalSpec spec = agg_.block_spec(*k);
    const Point local = x - Point::uniform(agg_.n(), DyadicRational(pow2_int(static_cast<unsigned long>(*k)), 0));
    const DensityVerdict v = wk_density(spec, local, std::max<long>(3, local.scale() / spec.k() + 2));
    if (v.kind != DensityVerdict::Kind::Density) return std::nullopt;
    if (restricted_ && (v.generation < 3 || !q1_cube(spec, v.generation).contains(local))) return std::nullopt;
    return std::make_pair(factor(*k), a_k(spec) * v.value);
  }

  Bracket density_bracket(const Point& x) const {
    auto d = density_at(x);
    if (!d) return Bracket(ExactRational(0));
    return LinearForm(d->first, d->second).enclose(agg_.precision_bits());
  }

  /// Finite representation per block. Restricted: chain cubes m = 3..M_cut
  /// plus an exact geometric tail. Full: every frozen cell up to M_cut
  /// (enumeration bounded by `limit`), marked truncated.
  std::vector<FactoredBlock> materialize(long m_cut, std::size_t limit = 1 << 16) const {
    std::vector<FactoredBlock> out;
    for (int k = 3; k <= agg_.k_max(); ++k) {
      const FractalSpec spec = agg_.block_spec(k);
      const ExactRational a = a_k(spec);
      const auto shift = agg_.block_shift(k);
      SimpleFunction g(agg_.n());
      if (restricted_) {
        for (long m = 3; m <= m_cut; ++m) {
          g.add_piece(q1_cube(spec, m).shifted(shift), a * spec.frozen_density(m));
        }
        g.add_tail(ChainTail{spec, shift, a, m_cut + 1});
        out.push_back({k, factor(k), std::move(g), false});
      } else {
        for (const auto& cell : enumerate_frozen(spec, m_cut, limit)) {
          g.add_piece(cell.cube.shifted(shift), a * spec.frozen_density(cell.generation));
        }
        out.push_back({k, factor(k), std::move(g), true});
      }
    }
    return out;
  }

 private:
  LinearForm block_measure(int k, const DyadicCube& c) const {
    const FractalSpec spec = agg_.block_spec(k);
    const CubeProfile p = profile_in_block(c, agg_.block_shift(k), [&](const DyadicCube& u) {
      return restricted_ ? chain_profile(spec, 3, u) : wk_profile(spec, u);
    });
    return LinearForm(factor(k), a_k(spec) * p.mass);
  }

  AggregateSpec agg_;
  bool restricted_;
};

inline ExtremalFunction build_f(const AggregateSpec& agg, bool restricted) { return ExtremalFunction(agg, restricted); }

}  // namespace mwsparse
