#include <gtest/gtest.h>

#include <random>

#include "polylab/numerics.hpp"

using namespace polylab;
using boost::multiprecision::abs;
using boost::multiprecision::exp;
using boost::multiprecision::log;

namespace {

Real uniform(std::mt19937_64& rng, double lo, double hi) {
  return Real(std::uniform_real_distribution<double>(lo, hi)(rng));
}

}  // namespace

TEST(Precision, RejectsLowBits) {
  EXPECT_THROW(Precision(32), Error);
  EXPECT_THROW(WorkingPrecision(10), Error);
}

TEST(Precision, GuardRestores) {
  WorkingPrecision outer(256);
  {
    WorkingPrecision inner(1024);
    EXPECT_EQ(working_bits(), 1024u);
    EXPECT_GE(Real(1).precision(), 300);
  }
  EXPECT_EQ(working_bits(), 256u);
  EXPECT_EQ(working_tol(), ldexp(Real(1), -128));
}

TEST(Charts, NegLogAddFrozen) {
  WorkingPrecision wp(256);
  LogValue r = neg_log_add({Real(0)}, {log(Real(10))});
  Real expect("-0.09531017980432486004395212328076509222061");
  EXPECT_LT(abs(r.y - expect), Real("1e-38"));
}

TEST(Charts, NegLogAddZeroIsIdentity) {
  WorkingPrecision wp(256);
  LogValue a{Real("3.25")};
  EXPECT_EQ(neg_log_add(a, LogValue::zero()).y, a.y);
  EXPECT_EQ(neg_log_add(LogValue::zero(), a).y, a.y);
  EXPECT_TRUE(neg_log_add(LogValue::zero(), LogValue::zero()).is_zero());
}

TEST(Charts, NegLogAddFarApartShortCircuits) {
  WorkingPrecision wp(256);
  LogValue big{exp(Real(30))};
  LogValue r = neg_log_add({Real(1)}, big);
  EXPECT_EQ(r.y, Real(1));
}

TEST(Charts, DoubleLogRoundTrip) {
  WorkingPrecision wp(256);
  LogValue y{exp(Real(30))};
  DoubleLogValue z = to_double_log(y);
  EXPECT_LT(abs(z.z - 30), working_tol());
  EXPECT_LT(abs(from_double_log(z).y - y.y) / y.y, working_tol());
  EXPECT_THROW(to_double_log({Real(0)}), Error);
  EXPECT_THROW(to_double_log({Real(-1)}), Error);
}

TEST(Charts, ExtremeEpsIsRepresentable) {
  WorkingPrecision wp(256);
  DoubleLogValue z{Real(30)};
  Real eps = z.eps();
  EXPECT_GT(eps, 0);
  EXPECT_LT(abs(-log(eps) - exp(Real(30))) / exp(Real(30)), working_tol());
}

TEST(Charts, UnperturbedSentinel) {
  DoubleLogValue u = DoubleLogValue::unperturbed();
  EXPECT_TRUE(u.is_unperturbed());
  EXPECT_EQ(u.eps(), 0);
  EXPECT_THROW(DoubleLogValue::from_eps(Real(0)), Error);
}

TEST(Decimal, ParsesAndRejects) {
  WorkingPrecision wp(256);
  EXPECT_EQ(real_from_string("0.5"), Real(1) / 2);
  EXPECT_THROW(real_from_string("half"), Error);
}

TEST(NegLogAddProperty, CommutativeAssociativeMonotone) {
  WorkingPrecision wp(256);
  std::mt19937_64 rng(7);
  const Real tol = working_tol();
  for (int i = 0; i < 500; ++i) {
    LogValue a{uniform(rng, -20, 40)}, b{uniform(rng, -20, 40)}, c{uniform(rng, -20, 40)};
    EXPECT_EQ(neg_log_add(a, b).y, neg_log_add(b, a).y);
    Real l = neg_log_add(neg_log_add(a, b), c).y;
    Real r = neg_log_add(a, neg_log_add(b, c)).y;
    EXPECT_TRUE(approx_equal(l, r, tol));
    LogValue s = neg_log_add(a, b);
    EXPECT_LE(s.y, a.y < b.y ? a.y : b.y);
    LogValue a2{a.y + uniform(rng, 0.01, 5)};
    EXPECT_GE(neg_log_add(a2, b).y, s.y);
  }
}

TEST(NegLogAddProperty, MatchesDirectSum) {
  WorkingPrecision wp(256);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    Real ya = uniform(rng, 0, 30), yb = uniform(rng, 0, 30);
    Real direct = -log(exp(-ya) + exp(-yb));
    EXPECT_TRUE(approx_equal(neg_log_add({ya}, {yb}).y, direct, working_tol()));
  }
}
