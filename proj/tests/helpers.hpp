#pragma once

#include <random>
#include <vector>

#include "mwsparse/mwsparse.hpp"
#include "oracle.hpp"

namespace testing_support {

inline oracle::Box to_box(const mwsparse::DyadicCube& c) {
  oracle::Box b;
  const mwsparse::Point corner = c.corner();
  for (const auto& x : corner.coords()) b.lo.push_back(x.to_rational());
  b.side = c.side().to_rational();
  return b;
}

inline std::vector<mpq_class> to_rationals(const mwsparse::Point& x) {
  std::vector<mpq_class> out;
  for (const auto& c : x.coords()) out.push_back(c.to_rational());
  return out;
}

/// Random dyadic cube inside [0,1)^n at a level in [lo, hi].
template <class Rng>
mwsparse::DyadicCube random_unit_cube(int n, long lo, long hi, Rng& rng) {
  std::uniform_int_distribution<long> level(lo, hi);
  const long l = level(rng);
  std::uniform_int_distribution<long> idx(0, (1L << l) - 1);
  std::vector<mpz_class> index;
  for (int i = 0; i < n; ++i) index.emplace_back(idx(rng));
  return mwsparse::DyadicCube::from_index(std::move(index), l);
}

}  // namespace testing_support
