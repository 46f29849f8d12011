#include <gtest/gtest.h>

#include <random>

#include "polylab/liouville.hpp"

using namespace polylab;
using boost::multiprecision::abs;
using boost::multiprecision::pow;

namespace {

Real uniform(std::mt19937_64& rng, double lo, double hi) {
  return Real(std::uniform_real_distribution<double>(lo, hi)(rng));
}

LiouvilleSpec example_spec() {
  return {Real(1), Real("0.3"), Real("0.7"), Real("0.6"), {{1, 2}, {2, 1}}, {10, 100, 1000, 1000, 1000}};
}

}  // namespace

TEST(Rational, ParseAndAdmissibility) {
  EXPECT_EQ(Rational::parse("3/2").num, 3);
  EXPECT_EQ(Rational::parse("3/2").den, 2);
  EXPECT_EQ(Rational::parse("2").den, 1);
  EXPECT_THROW(Rational::parse("x/2"), Error);
  EXPECT_THROW(Rational::parse("1/0"), Error);
  EXPECT_TRUE(admissible_q({1, 2}));
  EXPECT_TRUE(admissible_q({2, 1}));
  EXPECT_FALSE(admissible_q({1, 1}));
  EXPECT_FALSE(admissible_q({5, 2}));
  EXPECT_FALSE(admissible_q({1, 3}));
}

TEST(Window, Frozen) {
  WorkingPrecision wp(256);
  LiouvilleSpec s{Real(1), Real(0), Real(1), Real("0.5"), {{1, 2}}, {1}};
  Interval w = q_window(s, 3, 2, {1, 2});
  EXPECT_TRUE(approx_equal(w.lo, Real(2) / 3 + Real("0.03125") / 3, working_tol()));
  EXPECT_TRUE(approx_equal(w.hi, Real(2) / 3 + Real("0.0625") / 3, working_tol()));
  EXPECT_THROW(q_window(s, 3, 2, {1, 1}), Error);
  EXPECT_THROW(q_window(s, 0, 2, {1, 2}), Error);
}

TEST(WindowProperty, OrientedWithExpectedWidth) {
  WorkingPrecision wp(256);
  std::mt19937_64 rng(53);
  const Rational qs[] = {{1, 2}, {2, 3}, {3, 4}, {4, 3}, {3, 2}, {2, 1}};
  for (int i = 0; i < 300; ++i) {
    LiouvilleSpec s{uniform(rng, 0.1, 3), uniform(rng, -1, 1), uniform(rng, -2, 2), uniform(rng, 0.1, 0.9), {}, {}};
    const Rational& q = qs[rng() % 6];
    long n = 1 + static_cast<long>(rng() % 60), m = static_cast<long>(rng() % 100);
    Interval w = q_window(s, n, m, q);
    EXPECT_LT(w.lo, w.hi);
    Real qv = q.value();
    Real expect = abs(qv - qv * qv) * abs(s.Xi) * pow(s.lambda, n) / (s.gamma * n);
    EXPECT_TRUE(approx_equal(w.width(), expect, working_tol() * 1024));
  }
}

TEST(Construct, DepthOneVerifies) {
  WorkingPrecision wp(512);
  Construction c = construct_A(example_spec(), 1);
  ASSERT_EQ(c.witnesses.size(), 1u);
  EXPECT_GT(c.witnesses[0].n, 10);
  EXPECT_TRUE(verify(c.A, example_spec(), c.witnesses).ok);
}

TEST(Construct, ExampleDepthTwoVerifies) {
  WorkingPrecision wp(1024);
  Construction c = construct_A(example_spec(), 2);
  ASSERT_EQ(c.witnesses.size(), 2u);
  EXPECT_GT(c.witnesses[0].n, 10);
  EXPECT_GT(c.witnesses[1].n, 100);
  EXPECT_TRUE(verify(c.A, example_spec(), c.witnesses).ok);
}

TEST(Construct, ExampleDepthThreeNeedsAstronomicalPrecision) {
  WorkingPrecision wp(1024);
  try {
    construct_A(example_spec(), 3);
    FAIL();
  } catch (const PrecisionError& e) {
    EXPECT_GT(e.required_bits(), 1e15);
  }
}

TEST(Construct, UpFrontPrecisionEstimate) {
  WorkingPrecision wp(256);
  try {
    construct_A(example_spec(), 3);
    FAIL();
  } catch (const PrecisionError& e) {
    EXPECT_GT(e.required_bits(), 256);
  }
}

TEST(Construct, SeedsGiveDifferentVerifiedValues) {
  WorkingPrecision wp(1024);
  LiouvilleSpec s = example_spec();
  Construction a = construct_A(s, 2, {1, 4});
  Construction b = construct_A(s, 2, {2, 4});
  Construction c = construct_A(s, 2, {3, 4});
  EXPECT_TRUE(verify(a.A, s, a.witnesses).ok);
  EXPECT_TRUE(verify(b.A, s, b.witnesses).ok);
  EXPECT_TRUE(verify(c.A, s, c.witnesses).ok);
  EXPECT_TRUE(a.A != b.A || a.A != c.A);
  Construction a2 = construct_A(s, 2, {1, 4});
  EXPECT_EQ(a.A, a2.A);
}

TEST(Verify, PerturbationFailsAtDeepestWitness) {
  WorkingPrecision wp(1024);
  LiouvilleSpec s = example_spec();
  Construction c = construct_A(s, 2);
  Real shift = 2 * c.witnesses.back().window.width();
  VerifyResult r = verify(c.A + shift, s, c.witnesses);
  EXPECT_FALSE(r.ok);
  ASSERT_TRUE(r.first_failure);
  EXPECT_EQ(*r.first_failure, 1u);
  EXPECT_EQ(r.checks[0].membership, Membership::inside);
}

TEST(Verify, RationalCentreIsBoundary) {
  WorkingPrecision wp(512);
  LiouvilleSpec s = example_spec();
  Construction c = construct_A(s, 1);
  const Witness& w = c.witnesses[0];
  Real centre = (Real(w.m) * s.gamma + s.u) / (s.gamma * w.n);
  VerifyResult r = verify(centre, s, c.witnesses);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.checks[0].membership, Membership::boundary);
}

TEST(Verify, InsufficientPrecisionIsAnError) {
  Construction c;
  LiouvilleSpec s = example_spec();
  {
    WorkingPrecision wp(1024);
    c = construct_A(s, 2);
  }
  WorkingPrecision low(128);
  EXPECT_THROW(verify(c.A, s, c.witnesses), PrecisionError);
}

TEST(ConstructProperty, NestedHalvingAndVerifiedToDepthSix) {
  WorkingPrecision wp(512);
  std::mt19937_64 rng(59);
  const Rational qs[] = {{1, 2}, {2, 3}, {3, 2}, {2, 1}};
  for (int trial = 0; trial < 10; ++trial) {
    LiouvilleSpec s{uniform(rng, 0.5, 2), Real(0), uniform(rng, 0.2, 1.5), uniform(rng, 0.93, 0.99),
                    {qs[rng() % 4], qs[rng() % 4]}, {2, 4, 8, 16, 32, 64}};
    std::size_t depth = 1 + trial % 6;
    Construction c = construct_A(s, depth, {static_cast<std::uint64_t>(trial), 3});
    ASSERT_EQ(c.witnesses.size(), depth);
    for (std::size_t k = 1; k < c.intervals.size(); ++k) {
      EXPECT_TRUE(c.intervals[k - 1].contains_strictly(c.intervals[k]));
      EXPECT_LE(c.intervals[k].width(), c.intervals[k - 1].width() / 2);
    }
    for (const auto& w : c.witnesses) {
      EXPECT_GT(w.n, w.threshold);
      Real qv = w.q.value();
      EXPECT_TRUE(rational_approximation_bound(c.A, s, w, qv > 1 ? Real(qv * qv) : qv));
    }
    EXPECT_TRUE(verify(c.A, s, c.witnesses).ok);
  }
}
