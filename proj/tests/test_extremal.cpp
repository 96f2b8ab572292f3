#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace mwsparse;

namespace {

AggregateSpec default_agg(int n = 1, int k_max = 6) { return AggregateSpec(n, k_max, 2, ExactRational(3, 4)); }

}  // namespace

TEST(AggregateSpec, Validation) {
  EXPECT_THROW(AggregateSpec(1, 2, 2, ExactRational(3, 4)), std::invalid_argument);
  EXPECT_THROW(AggregateSpec(1, 6, 1, ExactRational(3, 4)), std::invalid_argument);
  EXPECT_THROW(AggregateSpec(1, 6, 2, ExactRational(1, 2)), std::invalid_argument);  // 1/p' = 1/2
  EXPECT_THROW(AggregateSpec(1, 6, 2, ExactRational(1)), std::invalid_argument);
  EXPECT_THROW(AggregateSpec(1, 6, 2, ExactRational(3, 4), 2), std::invalid_argument);
  EXPECT_EQ(default_agg().dual_exponent(), ExactRational(2));
  EXPECT_EQ(AggregateSpec(1, 6, 3, ExactRational(3, 4)).dual_exponent(), ExactRational(3, 2));
}

TEST(AggregateMeasure, BlocksCarryUnitMass) {
  for (int n = 1; n <= 2; ++n) {
    const AggregateSpec agg = default_agg(n, 6);
    const AggregateMeasure w{agg};
    for (int k = 3; k <= 6; ++k) EXPECT_EQ(w.measure(agg.block_cube(k)), ExactRational(1));
    EXPECT_EQ(w.measure(DyadicCube::origin(n, 0)), ExactRational(0));
    EXPECT_EQ(w.measure(DyadicCube::origin(n, -7)), ExactRational(4));  // [0,128)^n holds blocks 3..6
    EXPECT_EQ(w.total_mass(), ExactRational(4));
  }
  const AggregateSpec agg = default_agg();
  EXPECT_EQ(*agg.block_of(Point{DyadicRational::parse("33/4")}), 3);
  EXPECT_FALSE(agg.block_of(Point{DyadicRational::parse("10")}).has_value());
}

TEST(ExtremalFunction, BlockIntegrals) {
  const AggregateSpec agg = default_agg(1, 5);
  for (bool restricted : {false, true}) {
    const ExtremalFunction f = build_f(agg, restricted);
    for (int k = 3; k <= 5; ++k) {
      const LinearForm mass = f.measure(agg.block_cube(k));
      ASSERT_EQ(mass.terms().size(), 1u);
      // full block: A_k w_k([0,1)^n) = A_k; restricted: A_k w_k(Gamma(k)) = 1
      const ExactRational expected = restricted ? ExactRational(1) : a_k(agg.block_spec(k));
      EXPECT_EQ(mass.coefficient(SymbolicPower{k, ExactRational(-3, 4)}), expected);
    }
    EXPECT_EQ(f.measure(DyadicCube::origin(1, -6)).terms().size(), 3u);
  }
}

TEST(ExtremalFunction, RestrictedIsDominatedByFull) {
  const AggregateSpec agg = default_agg(1, 4);
  const ExtremalFunction full = build_f(agg, false), restricted = build_f(agg, true);
  std::mt19937_64 rng(5);
  for (int k = 3; k <= 4; ++k) {
    const FractalSpec spec = agg.block_spec(k);
    for (int t = 0; t < 50; ++t) {
      const DyadicCube local = t % 2 ? testing_support::random_unit_cube(1, 0, 20, rng)
                                     : random_frozen_cell(spec, 1 + t % 6, rng).cube;
      const DyadicCube q = local.shifted(agg.block_shift(k));
      const ExactRational a = full.measure(q).coefficient(full.factor(k));
      const ExactRational b = restricted.measure(q).coefficient(restricted.factor(k));
      EXPECT_LE(b, a) << q.str();
      EXPECT_EQ(a, a_k(spec) * wk_measure(spec, local));
    }
  }
}

TEST(ExtremalFunction, DensityOnChainAndOffChain) {
  const AggregateSpec agg = default_agg(1, 4);
  const FractalSpec spec = agg.block_spec(3);
  const Point on_chain = block_point(agg, 3, offset_point(q1_cube(spec, 4), 2));
  const Point off_chain = block_point(agg, 3, offset_point(q1_cube(spec, 1), 2));
  const auto d = build_f(agg, false).density_at(on_chain);
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->second, a_k(spec) * spec.frozen_density(4));
  EXPECT_TRUE(build_f(agg, true).density_at(on_chain).has_value());
  EXPECT_TRUE(build_f(agg, false).density_at(off_chain).has_value());
  EXPECT_FALSE(build_f(agg, true).density_at(off_chain).has_value());
  // 100 * 8/5 * 3^{-3/4}
  const Bracket b = build_f(agg, false).density_bracket(block_point(agg, 3, offset_point(q1_cube(spec, 1), 2)));
  EXPECT_NEAR(b.lo_double(), 160 * std::pow(3.0, -0.75), 1e-12);
}

TEST(ExtremalFunction, MaterializedFormsMatchMeasure) {
  const AggregateSpec agg(1, 4, 2, ExactRational(3, 4), 6);
  const auto restricted = build_f(agg, true).materialize(6);
  ASSERT_EQ(restricted.size(), 2u);
  for (const auto& block : restricted) {
    EXPECT_FALSE(block.truncated);
    EXPECT_EQ(block.function.integral(), ExactRational(1));
    EXPECT_EQ(block.function.pieces().size(), 4u);  // m = 3..6
  }
  const auto full = build_f(agg, false).materialize(4);
  for (const auto& block : full) {
    EXPECT_TRUE(block.truncated);
    const FractalSpec spec = agg.block_spec(block.k);
    ExactRational frozen(0);
    for (long m = 1; m <= 4; ++m) {
      frozen += ExactRational(pow_rational(ExactRational(spec.branch_count()), m - 1)) *
                pow_rational(ExactRational(1, spec.branch_count() + 1), m);
    }
    EXPECT_EQ(block.function.integral(), a_k(spec) * frozen);
  }
  EXPECT_THROW(build_f(AggregateSpec(2, 5, 2, ExactRational(3, 4)), false).materialize(6, 1000),
               EnumerationLimitExceeded);
}
