#include <gtest/gtest.h>

#include <random>

#include "polylab/connections.hpp"

using namespace polylab;
using boost::multiprecision::abs;
using boost::multiprecision::exp;
using boost::multiprecision::log;
using boost::multiprecision::pow;

namespace {

Real uniform(std::mt19937_64& rng, double lo, double hi) {
  return Real(std::uniform_real_distribution<double>(lo, hi)(rng));
}

ConnectionProblem model_problem() { return {PerturbedPowerFamily(Real(2), Real("0.6")), Real("0.1")}; }

}  // namespace

TEST(Coefficients, Frozen) {
  WorkingPrecision wp(256);
  EXPECT_LT(abs(beta(Real(2), Real("0.6"), Real("0.1")) - Real("1.395118574079335610922920153682389372412")),
            Real("1e-38"));
  EXPECT_LT(abs(theta(Real(2), Real("0.6"), Real("0.1")) - Real("-0.4294110059853578194206184051812983701015")),
            Real("1e-38"));
}

TEST(Coefficients, DomainErrors) {
  WorkingPrecision wp(256);
  try {
    beta(Real("0.01"), Real("0.5"), Real("0.5"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
  }
  EXPECT_THROW(beta(Real(2), Real(1), Real("0.1")), Error);
}

TEST(CoefficientsProperty, ThetaFormsAgree) {
  WorkingPrecision wp(256);
  std::mt19937_64 rng(19);
  for (int i = 0; i < 300; ++i) {
    Real C = uniform(rng, 0.3, 6), L = uniform(rng, 0.05, 0.95), B = uniform(rng, 0.01, 0.9);
    Real c = log(C) / (1 - L);
    if (!(c - log(B) > 0)) continue;
    EXPECT_TRUE(approx_equal(theta(C, L, B), theta_from_mark(C, L, B), working_tol()));
  }
}

TEST(Solver, FirstConnectionFrozen) {
  WorkingPrecision wp(256);
  ConnectionProblem p(PerturbedPowerFamily(Real(1), Real("0.5")), Real("0.25"));
  ConnectionRoot r = solve_connection(p, 1);
  Real expect("0.04289321881345247559915563789515096071516");
  EXPECT_LT(abs(r.z.eps() - expect), Real("1e-36"));
}

TEST(Solver, FifteenthConnectionFrozen) {
  WorkingPrecision wp(256);
  ConnectionRoot r = solve_connection(model_problem(), 15);
  EXPECT_LT(abs(r.z.z - Real("9.057301007576894553828545362038990407893")), Real("1e-36"));
  EXPECT_LE(r.bracket_width, working_tol());
}

TEST(Solver, GeneralFamilyFrozen) {
  WorkingPrecision wp(256);
  ConnectionProblem p(PerturbedPowerFamily(Real(2), Real("0.6"), Real("0.05"),
                                           Correction::linear(Real("0.1"), Real("0.2"))),
                      Real("0.1"), Real("0.3"));
  ConnectionRoot r = solve_connection(p, 8);
  EXPECT_LT(abs(r.z.z - Real("5.474484972741196564989083458270631072422")), Real("1e-36"));
}

TEST(Solver, DeepIndexStaysInDoubleLogChart) {
  WorkingPrecision wp(256);
  ConnectionRoot r = solve_connection(model_problem(), 200);
  AsymptoticModel m = model_for(model_problem());
  EXPECT_LT(abs(r.z.z - m.predict(200)), Real("1e-30"));
}

TEST(Solver, SequenceIncreases) {
  WorkingPrecision wp(256);
  ConnectionSequence s = generate_sequence(model_problem(), 0, 20);
  ASSERT_EQ(s.entries.size(), 21u);
  for (std::size_t i = 1; i < s.entries.size(); ++i) EXPECT_GT(s.entries[i].z.z, s.entries[i - 1].z.z);
}

TEST(Asymptotics, NormalizedResidualMatchesSecondOrder) {
  WorkingPrecision wp(256);
  ConnectionProblem p = model_problem();
  AsymptoticModel m = model_for(p);
  ResidualReport rep = residual_analysis(as_pairs(generate_sequence(p, 5, 25)), m);
  EXPECT_TRUE(rep.consistent) << rep.reason;
  for (const auto& row : rep.rows) {
    Real lead = -m.theta * m.theta * pow(m.Lambda, row.n) / 2;
    EXPECT_LT(abs(row.normalized_residual / lead - 1), Real("0.2")) << row.n;
  }
}

TEST(Asymptotics, ConstantOffsetIsInconsistent) {
  WorkingPrecision wp(256);
  ConnectionProblem p = model_problem();
  AsymptoticModel m = model_for(p);
  auto seq = as_pairs(generate_sequence(p, 5, 20));
  for (auto& e : seq) e.second += Real("1e-6");
  EXPECT_FALSE(residual_analysis(seq, m).consistent);
}

TEST(Asymptotics, ShortSequenceRejected) {
  WorkingPrecision wp(256);
  std::vector<std::pair<long, Real>> seq;
  for (long n = 0; n < 5; ++n) seq.emplace_back(n, Real(n));
  EXPECT_THROW(residual_analysis(seq, {Real("0.5"), Real(1), Real(0)}), Error);
  EXPECT_THROW(recover_parameters(seq), Error);
}

TEST(RecoveryProperty, ExactSyntheticSequences) {
  WorkingPrecision wp(256);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    AsymptoticModel m{uniform(rng, 0.2, 0.9), uniform(rng, -2, 3), uniform(rng, -1, 1)};
    std::vector<std::pair<long, Real>> seq;
    for (long n = 0; n < 30; ++n) seq.emplace_back(n, m.predict(n));
    RecoveredModel r = recover_parameters(seq);
    ASSERT_TRUE(r.theta_estimated) << r.note;
    EXPECT_LT(abs(r.model.Lambda - m.Lambda), Real("1e-6"));
    EXPECT_LT(abs(r.model.beta - m.beta), Real("1e-6"));
    EXPECT_LT(abs(r.model.theta - m.theta), Real("1e-6"));
  }
}

TEST(Recovery, ThetaZeroFlagged) {
  WorkingPrecision wp(256);
  AsymptoticModel m{Real("0.4"), Real("1.5"), Real(0)};
  std::vector<std::pair<long, Real>> seq;
  for (long n = 0; n < 20; ++n) seq.emplace_back(n, m.predict(n));
  RecoveredModel r = recover_parameters(seq);
  EXPECT_TRUE(r.theta_zero);
  EXPECT_LT(abs(r.model.Lambda - m.Lambda), Real("1e-30"));
  EXPECT_LT(abs(r.model.beta - m.beta), Real("1e-30"));
}

TEST(Recovery, NoisyResidualsAreFitFailure) {
  WorkingPrecision wp(256);
  std::mt19937_64 rng(29);
  std::vector<std::pair<long, Real>> seq;
  for (long n = 0; n < 20; ++n) seq.emplace_back(n, Real(n) + uniform(rng, -1e-3, 1e-3));
  RecoveredModel r = recover_parameters(seq);
  EXPECT_FALSE(r.theta_estimated);
}

TEST(Recovery, FromSolverSequence) {
  WorkingPrecision wp(256);
  RecoveredModel r = recover_parameters(as_pairs(generate_sequence(model_problem(), 10, 40)));
  ASSERT_TRUE(r.theta_estimated);
  EXPECT_LT(abs(r.model.Lambda - Real("0.6")), Real("1e-3"));
}

TEST(Straddle, ModelCaseStrictForSmallIndices) {
  WorkingPrecision wp(256);
  ConnectionProblem p = model_problem();
  for (long n = 5; n <= 12; ++n) {
    StraddleRow row = straddle_check(p, solve_connection(p, n));
    EXPECT_TRUE(row.strict) << n;
    EXPECT_GT(row.normalized_margin, Real("1e-20")) << n;
    EXPECT_LT(row.identity_gap, Real("1e-30")) << n;
  }
}

TEST(Straddle, GeneralFamilyStrict) {
  WorkingPrecision wp(256);
  ConnectionProblem p(PerturbedPowerFamily(Real(2), Real("0.6"), Real("0.05"),
                                           Correction::linear(Real("0.1"), Real("0.2"))),
                      Real("0.1"), Real("0.3"));
  for (long n = 3; n <= 10; ++n) {
    StraddleRow row = straddle_check(p, solve_connection(p, n));
    EXPECT_TRUE(row.strict) << n;
  }
}
