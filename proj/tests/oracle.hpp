#pragma once

// Independent oracles used only by the tests. They rebuild w_k from its
// definition with plain rational interval geometry and share no code with the
// library's descent-based measure queries.

#include <gmpxx.h>

#include <optional>
#include <vector>

namespace oracle {

struct Box {
  std::vector<mpq_class> lo;
  mpq_class side;
};

inline mpq_class overlap_1d(const mpq_class& a0, const mpq_class& a1, const mpq_class& b0, const mpq_class& b1) {
  const mpq_class lo = a0 > b0 ? a0 : b0;
  const mpq_class hi = a1 < b1 ? a1 : b1;
  return hi > lo ? mpq_class(hi - lo) : mpq_class(0);
}

inline mpq_class overlap(const Box& a, const Box& b) {
  mpq_class v = 1;
  for (std::size_t i = 0; i < a.lo.size(); ++i) v *= overlap_1d(a.lo[i], a.lo[i] + a.side, b.lo[i], b.lo[i] + b.side);
  return v;
}

inline bool inside(const Box& inner, const Box& outer) {
  for (std::size_t i = 0; i < inner.lo.size(); ++i) {
    if (inner.lo[i] < outer.lo[i] || inner.lo[i] + inner.side > outer.lo[i] + outer.side) return false;
  }
  return true;
}

/// w_k unrolled to generation G: frozen boxes with their densities and the
/// generation-G active boxes with their masses.
class UnrolledWeight {
 public:
  UnrolledWeight(int n, int k, int generations) : n_(n) {
    const long branch = 1L << ((k - 1) * n);
    mpq_class cell_mass = 1;
    mpq_class side = 1;
    std::vector<Box> active{Box{std::vector<mpq_class>(n, mpq_class(0)), mpq_class(1)}};
    for (int m = 1; m <= generations; ++m) {
      cell_mass /= (branch + 1);
      const mpq_class child = side / (1L << k);
      const mpq_class half = side / 2;
      const mpq_class density = cell_mass / pow_side(child, n);
      std::vector<Box> next;
      for (const auto& p : active) {
        Box frozen{p.lo, child};
        for (auto& c : frozen.lo) c += half;
        frozen_.push_back({frozen, density});
        // lower half of each axis, split into 2^{k-1} children per axis
        std::vector<long> digit(n, 0);
        const long per_half = 1L << (k - 1);
        while (true) {
          Box b{p.lo, child};
          for (int i = 0; i < n; ++i) b.lo[i] += child * digit[i];
          next.push_back(b);
          int axis = 0;
          while (axis < n && ++digit[axis] == per_half) digit[axis++] = 0;
          if (axis == n) break;
        }
      }
      active = std::move(next);
      side = child;
    }
    active_ = std::move(active);
    active_mass_ = cell_mass;
  }

  /// Mass of box c, or nullopt when c cuts an unresolved active box.
  std::optional<mpq_class> measure(const Box& c) const {
    mpq_class total = 0;
    for (const auto& [box, density] : frozen_) total += density * overlap(box, c);
    for (const auto& a : active_) {
      const mpq_class ov = overlap(a, c);
      if (ov == 0) continue;
      if (!inside(a, c)) return std::nullopt;
      total += active_mass_;
    }
    return total;
  }

  /// Density at x when x lies in a frozen box.
  std::optional<mpq_class> density(const std::vector<mpq_class>& x) const {
    for (const auto& [box, d] : frozen_) {
      bool in = true;
      for (int i = 0; i < n_; ++i) in &= box.lo[i] <= x[i] && x[i] < box.lo[i] + box.side;
      if (in) return d;
    }
    return std::nullopt;
  }

  const std::vector<std::pair<Box, mpq_class>>& frozen() const { return frozen_; }

 private:
  static mpq_class pow_side(const mpq_class& s, int n) {
    mpq_class v = 1;
    for (int i = 0; i < n; ++i) v *= s;
    return v;
  }

  int n_;
  std::vector<std::pair<Box, mpq_class>> frozen_;
  std::vector<Box> active_;
  mpq_class active_mass_;
};

/// sum over N of 2^{Nn} mu([0,2^{-N})^n) while x stays inside the tower cube.
template <class Measure>
std::optional<mpq_class> tower_sum_at_origin(int n, const std::vector<mpq_class>& x, Measure&& mu, int max_level) {
  mpq_class total = 0;
  mpq_class side = 1;
  for (int level = 0; level <= max_level; ++level) {
    bool in = true;
    for (const auto& c : x) in &= c >= 0 && c < side;
    if (!in) return total;
    const auto m = mu(Box{std::vector<mpq_class>(n, mpq_class(0)), side});
    if (!m) return std::nullopt;
    mpq_class scale = 1;
    for (int i = 0; i < n; ++i) scale /= side;
    total += *m * scale;
    side /= 2;
  }
  return std::nullopt;  // tower deeper than max_level
}

}  // namespace oracle
