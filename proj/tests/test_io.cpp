#include <gtest/gtest.h>

#include <sstream>

#include "polylab/io.hpp"
#include "polylab/selftest.hpp"

using namespace polylab;
using io::json;

TEST(Io, FamilyFromStringsAndNumbers) {
  WorkingPrecision wp(256);
  json j = json::parse(R"({"lambda": "0.5", "mu": 5, "C1": "2", "C2": 3, "B1": "0.1", "B2": "0.2"})");
  HeartFamily f = io::family_from_json(j);
  EXPECT_EQ(f.lambda, Real("0.5"));
  EXPECT_EQ(f.mu, Real(5));
  EXPECT_EQ(f.B1, Real("0.1"));
}

TEST(Io, DecimalStringsKeepPrecision) {
  WorkingPrecision wp(512);
  json j = json::parse(R"({"C": "2", "Lambda0": "0.6000000000000000000000000000000000000001", "B0": "0.1"})");
  ConnectionProblem p = io::model_from_json(j);
  EXPECT_GT(p.family.Lambda0, Real("0.6"));
}

TEST(Io, SchemaViolations) {
  WorkingPrecision wp(256);
  auto kind = [](const char* text, bool model) {
    try {
      json j = json::parse(text);
      if (model) io::model_from_json(j);
      else io::family_from_json(j);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::budget;
  };
  EXPECT_EQ(kind(R"({"lambda": "1", "mu": 5, "C1": 2, "C2": 3, "B1": 0.1, "B2": 0.2})", false), ErrorKind::schema);
  EXPECT_EQ(kind(R"({"lambda": "x", "mu": 5, "C1": 2, "C2": 3, "B1": 0.1, "B2": 0.2})", false), ErrorKind::schema);
  EXPECT_EQ(kind(R"({"lambda": 0.5, "mu": 5, "C1": 2, "C2": 3, "B1": 0.1})", false), ErrorKind::schema);
  EXPECT_EQ(kind(R"({"lambda": 0.5, "mu": 5, "C1": 2, "C2": 3, "B1": 0.1, "B2": 0.2, "x": 1})", false),
            ErrorKind::schema);
  EXPECT_EQ(kind(R"({"C": 2, "Lambda0": 0.6, "B0": 0.1, "psi": "cubic"})", true), ErrorKind::schema);
}

TEST(Io, LinearPsi) {
  WorkingPrecision wp(256);
  json j = json::parse(R"({"C": 2, "Lambda0": "0.6", "B0": "0.1", "psi": {"type": "linear", "a": "0.1", "b": "0.2"}})");
  ConnectionProblem p = io::model_from_json(j);
  EXPECT_FALSE(p.family.is_model_case());
}

TEST(Io, LiouvilleSpec) {
  WorkingPrecision wp(256);
  json j = json::parse(R"({"gamma": 1, "u": "0.3", "Xi": "0.7", "lambda": "0.6", "q_list": ["1/2", 2],
                           "N_schedule": [10, 100], "start": ["1", "2"]})");
  LiouvilleSpec s = io::liouville_from_json(j);
  ASSERT_EQ(s.q_list.size(), 2u);
  EXPECT_EQ(s.q_list[1].num, 2);
  EXPECT_EQ(s.N_schedule[1], 100);
  j["q_list"] = {"1"};
  EXPECT_THROW(io::liouville_from_json(j), Error);
}

TEST(Io, WitnessRoundTrip) {
  WorkingPrecision wp(512);
  LiouvilleSpec s{Real(1), Real("0.3"), Real("0.7"), Real("0.6"), {{1, 2}, {2, 1}}, {10}};
  Construction c = construct_A(s, 1);
  json w = json::array();
  for (const auto& x : c.witnesses) w.push_back(io::to_json(x));
  std::vector<Witness> back = io::witnesses_from_json(json::parse(w.dump()));
  Real A = real_from_string(io::num(c.A));
  EXPECT_TRUE(verify(A, s, back).ok);
}

TEST(Io, CsvShape) {
  WorkingPrecision wp(256);
  io::RunConfig cfg;
  cfg.command = "sparkle";
  cfg.terms = 20;
  ConnectionProblem p = io::model_from_json(json::parse(R"({"C": 2, "Lambda0": "0.6", "B0": "0.1"})"));
  std::ostringstream os;
  io::write_sequence_csv(os, cfg, p, "model");
  std::istringstream in(os.str());
  std::string line;
  int rows = 0, comments = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line[0] == '#') ++comments;
    else if (!header) {
      EXPECT_EQ(line, "n,z_n,predicted,residual,normalized_residual");
      header = true;
    } else {
      ++rows;
    }
  }
  EXPECT_EQ(rows, 21);
  EXPECT_GE(comments, 2);
  EXPECT_NE(os.str().find("\"bits\":256"), std::string::npos);
}

TEST(Io, ReportsAreDeterministic) {
  auto render = [] {
    WorkingPrecision wp(256);
    HeartFamily f{Real("0.5"), Real(5), Real(2), Real(3), Real("0.1"), Real("0.2")};
    return io::to_json(invariants(f)).dump() + io::to_json(compare(f, re_mark(f, 1, 1))).dump();
  };
  EXPECT_EQ(render(), render());
}

TEST(Selftest, FilterSelectsModule) {
  WorkingPrecision wp(256);
  auto rs = selftest::run("numerics", 0);
  ASSERT_FALSE(rs.empty());
  for (const auto& r : rs) {
    EXPECT_EQ(r.module, "numerics");
    EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
  }
}
