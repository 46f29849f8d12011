// polylab: batch front end for the invariant library.
//
// Exit codes: 0 ok, 2 schema/precondition, 3 domain, 4 solver, 5 precision,
// 10 inequivalent.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "polylab/io.hpp"
#include "polylab/selftest.hpp"

using namespace polylab;
using io::json;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::schema:
    case ErrorKind::precondition:
    case ErrorKind::range:
      return 2;
    case ErrorKind::domain:
    case ErrorKind::ambiguity:
    case ErrorKind::tie:
    case ErrorKind::insufficient_data:
    case ErrorKind::reconstruction:
      return 3;
    case ErrorKind::bracket:
    case ErrorKind::model_violation:
    case ErrorKind::budget:
      return 4;
    case ErrorKind::precision:
      return 5;
  }
  return 1;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::schema, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::schema, path + ": " + e.what());
  }
}

class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {}

  std::ostream& stream() { return buf_; }

  void flush() {
    if (path_.empty()) {
      std::cout << buf_.str();
      return;
    }
    std::ofstream out(path_);
    if (!out) fail(ErrorKind::schema, "cannot write " + path_);
    out << buf_.str();
  }

 private:
  std::string path_;
  std::ostringstream buf_;
};

void emit(const std::string& out_path, const json& j) {
  Output o(out_path);
  o.stream() << j.dump(2) << "\n";
  o.flush();
}

unsigned default_bits() {
  if (const char* env = std::getenv("POLYLAB_BITS")) {
    try {
      return static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      fail(ErrorKind::schema, "POLYLAB_BITS is not an integer");
    }
  }
  return 256;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"invariants of unfoldings of a two-saddle polycycle"};
  app.require_subcommand(1);
  app.fallthrough();

  io::RunConfig cfg;
  unsigned bits = 0;
  long depth = 0;
  std::string out_path;
  std::vector<std::string> q_grid;
  app.add_option("--bits", bits, "mantissa bits (default POLYLAB_BITS or 256)");
  app.add_option("--terms", cfg.terms, "number of terms N")->check(CLI::NonNegativeNumber);
  app.add_option("--tol", cfg.tol, "comparison tolerance (default 2^-(bits/2))");
  app.add_option("--max-shift", cfg.max_shift, "largest |s| considered")->check(CLI::PositiveNumber);
  app.add_option("--depth", depth, "scan depth or construction depth");
  app.add_option("--seed", cfg.seed, "seed for tie-breaking and sampling");
  app.add_option("--filter", cfg.filter, "selftest module");
  app.add_option("--q-grid", q_grid, "q values reported for good pairs");
  app.add_option("--out", out_path, "output file (default stdout)");

  std::string family_path, second_path;
  auto* inv = app.add_subcommand("invariants", "invariants of a family");
  inv->add_option("family", family_path)->required();

  auto* sparkle = app.add_subcommand("sparkle", "saddle-connection sequence as CSV");
  sparkle->add_option("input", family_path, "model or family JSON")->required();
  sparkle->add_option("--polycycle", cfg.polycycle, "loop of a family: 1 or 2")->check(CLI::Range(1, 2));

  auto* cmp = app.add_subcommand("compare", "obstruction search between two families");
  cmp->add_option("first", family_path)->required();
  cmp->add_option("second", second_path)->required();
  cmp->add_option("--source", cfg.source, "model or solver")->check(CLI::IsMember({"model", "solver"}));

  auto* liou = app.add_subcommand("liouville", "nested-window construction of A");
  liou->add_option("spec", family_path)->required();

  auto* ver = app.add_subcommand("verify", "re-check a liouville output");
  ver->add_option("spec", family_path)->required();
  ver->add_option("construction", second_path)->required();

  std::string lambda_tilde = "0.55";
  long n_min = 10;
  auto* partner = app.add_subcommand("partner", "family pair with equal A, tau and different base");
  partner->add_option("family", family_path)->required();
  partner->add_option("--lambda", lambda_tilde, "partner lambda");
  partner->add_option("--n-min", n_min, "smallest good-pair index");

  auto* self = app.add_subcommand("selftest", "identity suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    cfg.bits = bits ? bits : default_bits();
    if (cfg.bits < 64) fail(ErrorKind::precondition, "bits must be at least 64");
    if (!q_grid.empty()) {
      cfg.q_grid.clear();
      for (const auto& q : q_grid) cfg.q_grid.push_back(Rational::parse(q));
    }
    WorkingPrecision wp(cfg.bits);

    if (*inv) {
      cfg.command = "invariants";
      HeartFamily f = io::family_from_json(read_json(family_path));
      json j;
      j["config"] = io::to_json(cfg);
      j["family"] = io::to_json(f);
      j["invariants"] = io::to_json(invariants(f));
      emit(out_path, j);
      return 0;
    }

    if (*sparkle) {
      cfg.command = "sparkle";
      if (cfg.terms < 0) fail(ErrorKind::precondition, "terms must be nonnegative");
      json in = read_json(family_path);
      std::string label;
      std::optional<ConnectionProblem> p;
      if (io::is_family_json(in)) {
        HeartFamily f = io::family_from_json(in);
        int j = cfg.polycycle;
        label = "family loop " + std::to_string(j);
        if (!(f.B(j) > 0 && f.B(j) < 1)) fail(ErrorKind::domain, "inadmissible B");
        p.emplace(PerturbedPowerFamily(f.C(j), f.nu(j)), f.B(j));
      } else {
        label = "model";
        p.emplace(io::model_from_json(in));
      }
      Output o(out_path);
      io::write_sequence_csv(o.stream(), cfg, *p, label);
      o.flush();
      return 0;
    }

    if (*cmp) {
      cfg.command = "compare";
      cfg.depth = depth ? depth : 10000;
      HeartFamily f1 = io::family_from_json(read_json(family_path));
      HeartFamily f2 = io::family_from_json(read_json(second_path));
      CompareConfig cc;
      cc.depth = cfg.depth;
      cc.max_shift = cfg.max_shift;
      if (!cfg.tol.empty()) cc.tol = cfg.tolerance();
      cc.q_grid = cfg.q_grid;
      cc.source = cfg.source == "solver" ? SequenceSource::solver : SequenceSource::model;
      ObstructionReport r = compare(f1, f2, cc);
      json j;
      j["config"] = io::to_json(cfg);
      j["report"] = io::to_json(r);
      emit(out_path, j);
      return r.verdict == Verdict::inequivalent ? 10 : 0;
    }

    if (*liou) {
      cfg.command = "liouville";
      cfg.depth = depth ? depth : 1;
      if (cfg.depth < 1) fail(ErrorKind::precondition, "depth must be positive");
      LiouvilleSpec s = io::liouville_from_json(read_json(family_path));
      Construction c = construct_A(s, static_cast<std::size_t>(cfg.depth), {cfg.seed});
      VerifyResult v = verify(c.A, s, c.witnesses);
      json w = json::array();
      for (const auto& x : c.witnesses) w.push_back(io::to_json(x));
      json j;
      j["config"] = io::to_json(cfg);
      j["precision_bits"] = cfg.bits;
      j["A"] = io::num(c.A);
      j["witnesses"] = w;
      j["verified"] = v.ok;
      emit(out_path, j);
      return v.ok ? 0 : 3;
    }

    if (*ver) {
      cfg.command = "verify";
      json c = read_json(second_path);
      unsigned need = c.value("precision_bits", cfg.bits);
      WorkingPrecision inner(std::max(need, cfg.bits));
      LiouvilleSpec s = io::liouville_from_json(read_json(family_path));
      Real A = io::read_real(c, "A");
      VerifyResult v = verify(A, s, io::witnesses_from_json(c.at("witnesses")));
      json checks = json::array();
      for (const auto& k : v.checks) checks.push_back(to_string(k.membership));
      json j;
      j["config"] = io::to_json(cfg);
      j["ok"] = v.ok;
      j["checks"] = checks;
      j["first_failure"] = v.first_failure ? json(*v.first_failure) : json(nullptr);
      emit(out_path, j);
      return v.ok ? 0 : 3;
    }

    if (*partner) {
      cfg.command = "partner";
      HeartFamily f = io::family_from_json(read_json(family_path));
      EngineeredPair e = engineer_mismatched_partner(f, real_from_string(lambda_tilde), n_min);
      json j;
      j["config"] = io::to_json(cfg);
      j["first"] = io::to_json(e.first);
      j["second"] = io::to_json(e.second);
      j["n0"] = e.n0;
      emit(out_path, j);
      return 0;
    }

    if (*self) {
      cfg.command = "selftest";
      if (!cfg.filter.empty()) {
        auto mods = selftest::modules();
        if (std::find(mods.begin(), mods.end(), cfg.filter) == mods.end())
          fail(ErrorKind::schema, "unknown selftest module '" + cfg.filter + "'");
      }
      std::vector<selftest::Result> rs = selftest::run(cfg.filter, cfg.seed);
      bool ok = true;
      json checks = json::array();
      for (const auto& r : rs) {
        ok = ok && r.passed;
        json c{{"module", r.module}, {"name", r.name}, {"passed", r.passed}};
        if (!r.detail.empty()) c["detail"] = r.detail;
        checks.push_back(c);
      }
      json j;
      j["config"] = io::to_json(cfg);
      j["passed"] = ok;
      j["checks"] = checks;
      emit(out_path, j);
      for (const auto& r : rs)
        if (!r.passed) std::cerr << "polylab: FAILED " << r.module << "/" << r.name << ": " << r.detail << "\n";
      return ok ? 0 : 1;
    }
  } catch (const PrecisionError& e) {
    std::cerr << "polylab: " << e.what() << "\n";
    std::cerr << "polylab: required_bits=" << std::llround(std::min(e.required_bits(), 1e18)) << "\n";
    return 5;
  } catch (const Error& e) {
    std::cerr << "polylab: " << e.what() << "\n";
    if (e.kind() == ErrorKind::domain) std::cerr << "polylab: hint: re-mark the family (shift B along the orbit)\n";
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "polylab: schema: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
