#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace mwsparse;

TEST(DyadicRational, ParsesFractionsDecimalsAndIntegers) {
  EXPECT_EQ(DyadicRational::parse("3/8").to_rational(), ExactRational(3, 8));
  EXPECT_EQ(DyadicRational::parse("0.75").to_rational(), ExactRational(3, 4));
  EXPECT_EQ(DyadicRational::parse("-5").to_rational(), ExactRational(-5));
  EXPECT_EQ(DyadicRational::parse("6/16").scale(), 3);
  EXPECT_THROW(DyadicRational::parse("1/3"), std::invalid_argument);
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
  EXPECT_THROW(parse_rational(""), std::invalid_argument);
}

TEST(DyadicRational, CanonicalFormAndOrder) {
  const DyadicRational a(mpz_class(4), 3);  // 4/8
  EXPECT_EQ(a.scale(), 1);
  EXPECT_EQ(a, DyadicRational(mpz_class(1), 1));
  EXPECT_LT(DyadicRational::parse("1/4"), DyadicRational::parse("1/2"));
  EXPECT_EQ((a + DyadicRational::parse("1/8")).to_rational(), ExactRational(5, 8));
  EXPECT_EQ(DyadicRational(mpz_class(3), -2).to_rational(), ExactRational(12));
}

TEST(DyadicRational, FloorScaledMatchesRationalFloor) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> num(-4000, 4000), scale(0, 12), shift(-6, 16);
  for (int t = 0; t < 500; ++t) {
    const DyadicRational x(mpz_class(num(rng)), scale(rng));
    const long s = shift(rng);
    const ExactRational scaled = x.to_rational() * pow2(s);
    mpz_class expected;
    mpz_fdiv_q(expected.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
    EXPECT_EQ(x.floor_scaled(s), expected) << x << " shift " << s;
  }
}

TEST(DyadicRational, AlignmentIncludingCoarseLevels) {
  EXPECT_TRUE(DyadicRational::parse("3/8").aligned_to(3));
  EXPECT_FALSE(DyadicRational::parse("3/8").aligned_to(2));
  EXPECT_TRUE(DyadicRational(8).aligned_to(-3));
  EXPECT_FALSE(DyadicRational(12).aligned_to(-3));
  EXPECT_TRUE(DyadicRational(0).aligned_to(-40));
}

TEST(DyadicCube, CornerAndContainment) {
  const DyadicCube q(Point{DyadicRational::parse("1/2")}, 3);
  EXPECT_EQ(q.str(), "[1/2,5/8)");
  EXPECT_TRUE(q.contains(Point{DyadicRational::parse("33/64")}));
  EXPECT_FALSE(q.contains(Point{DyadicRational::parse("5/8")}));  // half-open
  EXPECT_THROW(DyadicCube(Point{DyadicRational::parse("1/16")}, 3), std::invalid_argument);
  EXPECT_EQ(DyadicCube::containing(Point{DyadicRational::parse("33/64")}, 3), q);
  EXPECT_EQ(q.volume(), ExactRational(1, 8));
}

TEST(DyadicCube, MismatchedDimensionsThrow) {
  const DyadicCube q = DyadicCube::origin(2, 1);
  EXPECT_THROW((void)q.contains(Point{DyadicRational(0)}), DimensionMismatch);
  EXPECT_THROW((void)q.contains(DyadicCube::origin(1, 2)), DimensionMismatch);
}

TEST(DyadicCube, SubdivisionPartitionsTheParent) {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 3; ++n) {
    for (int t = 0; t < 20; ++t) {
      const DyadicCube q = testing_support::random_unit_cube(n, 0, 6, rng);
      const long split = 1 + t % 3;
      const auto kids = q.subdivide(split);
      ASSERT_EQ(kids.size(), std::size_t(1) << (split * n));
      ExactRational vol(0);
      for (std::size_t i = 0; i < kids.size(); ++i) {
        EXPECT_TRUE(q.contains(kids[i]));
        EXPECT_EQ(kids[i].ancestor(q.level()), q);
        vol += kids[i].volume();
        for (std::size_t j = i + 1; j < kids.size(); ++j) EXPECT_FALSE(kids[i].intersects(kids[j]));
      }
      EXPECT_EQ(vol, q.volume());
    }
  }
}

TEST(DyadicCube, NeighborsFormTheDilate) {
  const DyadicCube q = DyadicCube::from_index({mpz_class(5), mpz_class(2)}, 3);
  const auto cells = q.neighbors3();
  ASSERT_EQ(cells.size(), 9u);
  ExactRational vol(0);
  for (const auto& c : cells) vol += c.volume();
  EXPECT_EQ(vol, 9 * q.volume());
  EXPECT_NE(std::find(cells.begin(), cells.end(), q), cells.end());
}

TEST(DyadicCube, TranslationRules) {
  const DyadicCube q(Point{DyadicRational::parse("1/4")}, 2);
  EXPECT_EQ(q.translate(Point{DyadicRational(8)}).str(), "[33/4,17/2)");
  EXPECT_THROW(q.translate(Point{DyadicRational::parse("1/8")}), MisalignedTranslation);
  EXPECT_THROW(q.translate(std::vector<ExactRational>{ExactRational(1, 3)}), MisalignedTranslation);
  EXPECT_EQ(q.translate(std::vector<ExactRational>{ExactRational(3, 4)}).str(), "[1,5/4)");
  const DyadicCube coarse = DyadicCube::from_index({mpz_class(1)}, -3);  // [8,16)
  EXPECT_EQ(coarse.shifted({mpz_class(8)}).str(), "[16,24)");
  EXPECT_THROW(coarse.shifted({mpz_class(4)}), MisalignedTranslation);
}

TEST(DyadicCube, AncestorChainIsNested) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const DyadicCube q = testing_support::random_unit_cube(2, 0, 20, rng);
    for (long l = q.level(); l >= -3; --l) {
      const DyadicCube a = q.ancestor(l);
      EXPECT_TRUE(a.contains(q));
      EXPECT_TRUE(a.contains(q.corner()));
    }
  }
}
