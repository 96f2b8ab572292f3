#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"

using namespace mwsparse;
using testing_support::to_rationals;

namespace {

Point pt1(const char* s) { return Point{DyadicRational::parse(s)}; }

/// Truncated <T_S f, g> from box overlaps: sum over tower cubes of avg_Q f * g(Q).
double truncated_pairing(const TowerFamily& fam, const SimpleFunction& f, const SimpleFunction& g, long levels) {
  auto mass = [](const SimpleFunction& h, const oracle::Box& q) {
    mpq_class s = 0;
    for (const auto& p : h.pieces()) s += p.density * oracle::overlap(testing_support::to_box(p.cube), q);
    return s;
  };
  mpq_class total = 0;
  for (const auto& corner : fam.corners()) {
    for (long level = 0; level <= levels; ++level) {
      const oracle::Box q = testing_support::to_box(fam.cube(corner, level));
      mpq_class vol = 1;
      for (int i = 0; i < fam.dim(); ++i) vol *= q.side;
      total += mass(f, q) / vol * mass(g, q);
    }
  }
  return total.get_d();
}

}  // namespace

TEST(SparseOperator, CanonicalValue) {
  const FractalSpec spec(1, 3);
  const Point x = offset_point(q1_cube(spec, 3), 1);
  EXPECT_EQ(sparse_apply(TowerFamily(1, 1), WkMeasure{spec}, x), ExactRational(337, 25));
  EXPECT_EQ(sparse_apply_wk_closed(spec, 3), ExactRational(337, 25));
}

TEST(SparseOperator, TowerSumMatchesOracle) {
  for (int n = 1; n <= 2; ++n) {
    for (int k = 3; k <= (n == 1 ? 5 : 3); ++k) {
      const FractalSpec spec(n, k);
      const long g = n == 1 ? 4 : 3;
      const oracle::UnrolledWeight w(n, k, static_cast<int>(g));
      for (long m = 1; m <= g; ++m) {
        const Point x = offset_point(q1_cube(spec, m), 2);
        const auto expected = oracle::tower_sum_at_origin(
            n, to_rationals(x), [&](const oracle::Box& b) { return w.measure(b); }, static_cast<int>(k * g));
        ASSERT_TRUE(expected.has_value()) << "n=" << n << " k=" << k << " m=" << m;
        EXPECT_EQ(sparse_apply(TowerFamily(n, 1), WkMeasure{spec}, x), *expected);
      }
    }
  }
}

TEST(SparseOperator, ClosedFormGrid) {
  for (int n = 1; n <= 3; ++n) {
    for (int k = 3; k <= 6; ++k) {
      const FractalSpec spec(n, k);
      const ExactRational r = spec.density_ratio();
      for (long m = 1; m <= 8; ++m) {
        ExactRational series(1);
        for (long i = 1; i < m; ++i) series += k * pow_rational(r, i);
        const Point x = offset_point(q1_cube(spec, m), 1);
        EXPECT_EQ(sparse_apply(TowerFamily(n, 1), WkMeasure{spec}, x), series) << n << " " << k << " " << m;
        EXPECT_EQ(sparse_apply_wk_closed(spec, m), series);
      }
    }
  }
}

TEST(SparseOperator, TowerDepthAndCorners) {
  const TowerFamily fam(1, 4);
  const auto hits = towers_containing(fam, pt1("33/64"));
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].n_max, 0);
  EXPECT_EQ(towers_containing(fam, pt1("1/64"))[0].n_max, 5);
  EXPECT_EQ(towers_containing(fam, pt1("65/8"))[0].corner, std::vector<mpz_class>{8});
  EXPECT_EQ(towers_containing(fam, pt1("5/2"))[0].n_max, 0);
  EXPECT_TRUE(towers_containing(fam, pt1("3")).empty());
  EXPECT_TRUE(towers_containing(fam, pt1("-1/2")).empty());
  EXPECT_THROW(towers_containing(fam, pt1("0")), CornerPointError);
  EXPECT_THROW(towers_containing(fam, pt1("16")), CornerPointError);
  EXPECT_NO_THROW(towers_containing(fam, pt1("32")));  // beyond k_max
}

TEST(SparseOperator, CarlesonRatio) {
  EXPECT_EQ(carleson_ratio(TowerFamily(1, 3), DyadicCube::origin(1, 4)), ExactRational(2));
  EXPECT_EQ(carleson_ratio(TowerFamily(2, 3), DyadicCube::origin(2, 0)), ExactRational(4, 3));
  EXPECT_THROW(carleson_ratio(TowerFamily(1, 3), DyadicCube(pt1("1/2"), 1)), std::invalid_argument);
  // Direct sum for a tower cube: sum_{N >= 0} 2^{-Nn} over |Q|.
  for (int n = 1; n <= 3; ++n) {
    ExactRational partial(0);
    for (long level = 0; level < 60; ++level) partial += pow2(-level * n);
    const ExactRational ratio = carleson_ratio(TowerFamily(n, 1), DyadicCube::origin(n, 0));
    EXPECT_LT(partial, ratio);
    EXPECT_LT(ratio - partial, pow2(-50));
  }
}

TEST(SparseOperator, Linearity) {
  std::mt19937_64 rng(31);
  const TowerFamily fam(1, 3);
  for (int t = 0; t < 30; ++t) {
    const SimpleFunction f = random_simple_function(fam, rng);
    SimpleFunction twice(1);
    for (const auto& p : f.pieces()) twice.add_piece(p.cube, p.density * 2);
    std::uniform_int_distribution<long> num(1, 127);
    const long v = num(rng);
    if (v % 32 == 0) continue;
    const Point x{DyadicRational(mpz_class(v), 5)};
    EXPECT_EQ(sparse_apply(fam, twice, x), 2 * sparse_apply(fam, f, x));
  }
}

TEST(MaximalBracket, CanonicalPoint) {
  const FractalSpec spec(1, 3);
  const MaximalBracket b = maximal_bracket(WkMeasure{spec}, pt1("33/64"));
  ASSERT_TRUE(b.value.bounded());
  EXPECT_EQ(b.value.lo(), ExactRational(8, 5));
  EXPECT_EQ(*b.value.hi(), ExactRational(48, 5));
}

TEST(MaximalBracket, UniformDensity) {
  SimpleFunction f(1);
  f.add_piece(DyadicCube::origin(1, -3), 5);
  const MaximalBracket b = maximal_bracket(f, pt1("49/32"));
  EXPECT_EQ(b.value.lo(), ExactRational(5));
  EXPECT_TRUE(b.value.contains(ExactRational(5)));
  SimpleFunction two(2);
  two.add_piece(DyadicCube::origin(2, -2), 3);
  EXPECT_EQ(maximal_bracket(two, Point{DyadicRational::parse("5/4"), DyadicRational::parse("7/8")}).value.lo(),
            ExactRational(3));
}

TEST(MaximalBracket, EveryAverageBelowUpperEnd) {
  std::mt19937_64 rng(77);
  for (int n = 1; n <= 2; ++n) {
    const FractalSpec spec(n, 3);
    const WkMeasure mu{spec};
    for (int t = 0; t < 25; ++t) {
      const DyadicCube cell = random_frozen_cell(spec, 1 + t % 3, rng).cube;
      const Point x = random_point_in(cell, t % 4, rng);
      const MaximalBracket b = maximal_bracket(mu, x);
      ASSERT_TRUE(b.value.bounded()) << x.str();
      ExactRational largest(0);
      for (long j = -4; j <= cell.level() + 12; ++j) {
        const DyadicCube q = DyadicCube::containing(x, j);
        const ExactRational avg = mu.measure(q) / q.volume();
        EXPECT_LE(avg, *b.value.hi()) << x.str() << " level " << j;
        ExactRational dil(0);
        for (const auto& c : q.neighbors3()) dil += mu.measure(c);
        dil /= pow_rational(ExactRational(3), static_cast<unsigned long>(n)) * q.volume();
        largest = std::max(largest, std::max(avg, dil));
        EXPECT_LE(dil, *b.value.hi());
      }
      EXPECT_LE(b.value.lo(), *b.value.hi());
      EXPECT_LE(largest, b.value.lo()) << x.str();
    }
  }
}

TEST(BilinearForm, CanonicalPair) {
  const TowerFamily fam(1, 3);
  SimpleFunction f(1), g(1);
  f.add_piece(DyadicCube::origin(1, 0), 1);
  g.add_piece(DyadicCube::origin(1, 1), 1);
  const Bracket fg = bilinear_form(fam, f, g);
  ASSERT_TRUE(fg.is_exact());
  EXPECT_EQ(fg.lo(), ExactRational(3, 2));
  EXPECT_EQ(bilinear_form(fam, g, f).lo(), ExactRational(3, 2));
  EXPECT_EQ(pairing_by_annuli(fam, f, g), ExactRational(3, 2));
  EXPECT_NEAR(truncated_pairing(fam, f, g, 80), 1.5, 1e-12);
}

TEST(BilinearForm, SymmetricAndMatchesOracle) {
  std::mt19937_64 rng(12);
  for (int n = 1; n <= 2; ++n) {
    const TowerFamily fam(n, 3);
    for (int t = 0; t < 25; ++t) {
      const SimpleFunction f = random_simple_function(fam, rng);
      const SimpleFunction g = random_simple_function(fam, rng);
      const Bracket fg = bilinear_form(fam, f, g);
      ASSERT_TRUE(fg.is_exact());
      EXPECT_EQ(fg.lo(), bilinear_form(fam, g, f).lo());
      EXPECT_EQ(fg.lo(), pairing_by_annuli(fam, f, g));
      const double oracle_value = truncated_pairing(fam, f, g, 90);
      EXPECT_NEAR(fg.lo_double(), oracle_value, 1e-9 * (1 + std::abs(oracle_value)));
    }
  }
}

TEST(BilinearForm, ChainTailsAgreeWithTruncation) {
  // f restricted to one chain with its exact tail against the same chain cut at m <= 20.
  const FractalSpec spec(1, 3);
  const TowerFamily fam(1, 3);
  const std::vector<mpz_class> shift{8};
  SimpleFunction with_tail(1), cut(1);
  with_tail.add_tail(ChainTail{spec, shift, 1, 3});
  for (long m = 3; m <= 20; ++m) cut.add_piece(q1_cube(spec, m).shifted(shift), spec.frozen_density(m));
  SimpleFunction g(1);
  g.add_piece(DyadicCube::from_index({mpz_class(8)}, 0), 1);
  const Bracket exact = bilinear_form(fam, with_tail, g);
  ASSERT_TRUE(exact.is_exact());
  const ExactRational approx = pairing_by_annuli(fam, cut, g);
  EXPECT_LE(approx, exact.lo());
  EXPECT_LT(exact.lo() - approx, ExactRational(1, 1000000));
  EXPECT_THROW(pairing_by_annuli(fam, with_tail, g), std::invalid_argument);
}
