#pragma once

// Identity checks run by `polylab selftest`.  Each check draws its own
// samples from a seeded generator and runs at the caller's working precision.

#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "polylab/heart.hpp"

namespace polylab::selftest {

struct Outcome {
  bool passed = true;
  std::string detail;
};

struct Check {
  std::string module;
  std::string name;
  std::function<Outcome(std::mt19937_64&)> run;
};

struct Result {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline Real uniform(std::mt19937_64& rng, double lo, double hi) {
  return Real(std::uniform_real_distribution<double>(lo, hi)(rng));
}

inline Outcome failed(const std::string& what) { return {false, what}; }

template <class T>
std::string show(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline HeartFamily random_family(std::mt19937_64& rng) {
  for (;;) {
    Real lam = uniform(rng, 0.2, 0.9);
    Real mu = uniform(rng, 1.1, 4) / (lam * lam);
    HeartFamily f{lam, mu, uniform(rng, 0.5, 4), uniform(rng, 0.5, 4), uniform(rng, 0.01, 0.5),
                  uniform(rng, 0.01, 0.5)};
    try {
      if (invariants(f).generic) return f;
    } catch (const Error&) {
    }
  }
}

}  // namespace detail

inline std::vector<Check> registry() {
  using boost::multiprecision::abs;
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  using boost::multiprecision::pow;
  using boost::multiprecision::sqrt;
  using detail::failed;
  using detail::show;
  using detail::uniform;
  std::vector<Check> out;

  out.push_back({"numerics", "neg_log_add_matches_direct", [](std::mt19937_64& rng) {
                   for (int i = 0; i < 50; ++i) {
                     Real a = uniform(rng, -5, 40), b = uniform(rng, -5, 40);
                     Real direct = -log(exp(-a) + exp(-b));
                     Real got = neg_log_add({a}, {b}).y;
                     if (!approx_equal(got, direct, working_tol()))
                       return failed("a=" + show(a) + " b=" + show(b));
                   }
                   return Outcome{};
                 }});
  out.push_back({"numerics", "double_log_round_trip", [](std::mt19937_64& rng) {
                   for (int i = 0; i < 50; ++i) {
                     LogValue v{exp(uniform(rng, -3, 5))};
                     if (!approx_equal(from_double_log(to_double_log(v)).y, v.y, working_tol()))
                       return failed("y=" + show(v.y));
                   }
                   return Outcome{};
                 }});

  out.push_back({"monodromy", "closed_iterate_matches_composition", [](std::mt19937_64& rng) {
                   for (int t = 0; t < 20; ++t) {
                     PowerMap m(uniform(rng, 0.2, 5), uniform(rng, 0.1, 0.95));
                     LogValue y{uniform(rng, 0.5, 50)}, it = y;
                     for (long n = 1; n <= 50; ++n) {
                       it = apply_log(m, it);
                       if (!approx_equal(closed_iterate(m, y, n).y, it.y, working_tol()))
                         return failed("n=" + std::to_string(n));
                     }
                   }
                   return Outcome{};
                 }});
  out.push_back({"monodromy", "family_monotone_in_x", [](std::mt19937_64& rng) {
                   for (int t = 0; t < 100; ++t) {
                     PerturbedPowerFamily fam(uniform(rng, 0.5, 3), uniform(rng, 0.2, 0.9), Real(0),
                                              Correction::linear(uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2)));
                     DoubleLogValue z{uniform(rng, 0, 40)};
                     Real y1 = uniform(rng, 0.1, 60), y2 = y1 + uniform(rng, 0.01, 10);
                     if (apply_family_log(fam, z, {y1}).y > apply_family_log(fam, z, {y2}).y)
                       return failed("y1=" + show(y1));
                   }
                   return Outcome{};
                 }});
  out.push_back({"monodromy", "sandwich_model_case", [](std::mt19937_64&) {
                   PerturbedPowerFamily fam(Real(2), Real("0.6"));
                   SandwichGrid grid;
                   grid.eps = log_spaced_eps(Real("1e-9"), Real("1e-3"), 7);
                   grid.points = 48;
                   grid.x_hi = Real("0.1");
                   SandwichReport r = sandwich_check(fam, SandwichBounds(Real(2), Real("0.1")), grid);
                   if (!r.passed) return failed(std::to_string(r.violations) + " violations");
                   if (!(r.k_ratio < 10)) return failed("k ratio " + show(r.k_ratio));
                   return Outcome{};
                 }});

  out.push_back({"connections", "residuals_second_order", [](std::mt19937_64&) {
                   ConnectionProblem p(PerturbedPowerFamily(Real(2), Real("0.6")), Real("0.1"));
                   ResidualReport r = residual_analysis(as_pairs(generate_sequence(p, 5, 25)), model_for(p));
                   if (!r.consistent) return failed("normalized residuals do not settle");
                   return Outcome{};
                 }});
  out.push_back({"connections", "straddle_strict", [](std::mt19937_64&) {
                   ConnectionProblem p(PerturbedPowerFamily(Real(2), Real("0.6")), Real("0.1"));
                   for (long n = 5; n <= 10; ++n) {
                     StraddleRow row = straddle_check(p, solve_connection(p, n));
                     if (!row.strict) return failed("n=" + std::to_string(n));
                   }
                   return Outcome{};
                 }});
  out.push_back({"connections", "recover_synthetic", [](std::mt19937_64& rng) {
                   for (int t = 0; t < 10; ++t) {
                     AsymptoticModel m{uniform(rng, 0.2, 0.9), uniform(rng, -2, 3), uniform(rng, -1, 1)};
                     std::vector<std::pair<long, Real>> seq;
                     for (long n = 0; n < 30; ++n) seq.emplace_back(n, m.predict(n));
                     RecoveredModel r = recover_parameters(seq);
                     if (!r.theta_estimated || abs(r.model.theta - m.theta) > Real("1e-6"))
                       return failed("Lambda=" + show(m.Lambda));
                   }
                   return Outcome{};
                 }});

  out.push_back({"progressions", "shift_recovered", [](std::mt19937_64& rng) {
                   for (int t = 0; t < 30; ++t) {
                     Real A = sqrt(uniform(rng, 2, 50)) + uniform(rng, 0, 1) / 1000;
                     PairInvariants a{A, uniform(rng, -3, 3)};
                     long s = static_cast<long>(rng() % 21) - 10, p = static_cast<long>(rng() % 21) - 10;
                     EquivalenceResult r = equivalent_pairs(a, {A, a.tau - A * s - p});
                     if (!r.shift || r.shift->s != s || r.shift->p != p)
                       return failed("s=" + std::to_string(s) + " p=" + std::to_string(p));
                   }
                   return Outcome{};
                 }});
  out.push_back({"progressions", "words_agree_under_shift", [](std::mt19937_64& rng) {
                   for (int t = 0; t < 10; ++t) {
                     Real A = sqrt(uniform(rng, 0.2, 20)), tau = uniform(rng, -2, 2);
                     long s = static_cast<long>(rng() % 11) - 5, p = static_cast<long>(rng() % 11) - 5;
                     ArithmeticProgression y{Real(1), Real(0)};
                     Word w1 = interleaving_word(ArithmeticProgression{A, tau}, y, 2000);
                     Word w2 = interleaving_word(ArithmeticProgression{A, tau - A * s - p}, y, 2000);
                     if (!words_equivalent_up_to_shift(w1, w2, {s, p}).equivalent)
                       return failed("A=" + show(A));
                   }
                   return Outcome{};
                 }});
  out.push_back({"progressions", "reconstruction_brackets", [](std::mt19937_64& rng) {
                   for (int t = 0; t < 5; ++t) {
                     Real A = sqrt(uniform(rng, 0.3, 12)), tau = uniform(rng, -1, 1);
                     Reconstruction r = reconstruct_invariants(
                         interleaving_word(ArithmeticProgression{A, tau}, ArithmeticProgression{Real(1), Real(0)}, 3000));
                     if (!(r.A_lo < A && A < r.A_hi && r.tau_lo < tau && tau < r.tau_hi))
                       return failed("A=" + show(A));
                   }
                   return Outcome{};
                 }});

  out.push_back({"heart", "beta_gap_identity", [](std::mt19937_64& rng) {
                   for (int t = 0; t < 50; ++t) {
                     InvariantReport r = invariants(detail::random_family(rng));
                     if (!approx_equal(log(abs(r.Xi)) - log(abs(r.Theta)), r.beta2 - r.beta1, working_tol() * 16))
                       return failed("A=" + show(r.A));
                   }
                   return Outcome{};
                 }});
  out.push_back({"heart", "relative_scale_identity", [](std::mt19937_64& rng) {
                   for (int t = 0; t < 50; ++t) {
                     HeartFamily f = detail::random_family(rng);
                     InvariantReport r = invariants(f);
                     ScaleCoefficients sc = scale_coefficients(f);
                     if (!approx_equal(relative_scale_from_progressions(sc.xi, sc.psi, r.nu2, r.tau_prog), r.Xi,
                                       working_tol() * 16))
                       return failed("A=" + show(r.A));
                   }
                   return Outcome{};
                 }});
  out.push_back({"heart", "re_mark_covariance", [](std::mt19937_64& rng) {
                   for (int t = 0; t < 20; ++t) {
                     HeartFamily f = detail::random_family(rng);
                     InvariantReport r = invariants(f);
                     for (long k = -3; k <= 3; ++k) {
                       HeartFamily g;
                       try {
                         g = re_mark(f, 1, k);
                       } catch (const Error& e) {
                         if (e.kind() == ErrorKind::range) continue;
                         throw;
                       }
                       InvariantReport s = invariants(g);
                       const Real tol = working_tol() * 64;
                       if (!approx_equal(s.tau_prog, r.tau_prog - Real(k) * r.A, tol) ||
                           !approx_equal(s.Xi, r.Xi * pow(r.nu1, -k), tol))
                         return failed("k=" + std::to_string(k));
                     }
                   }
                   return Outcome{};
                 }});

  out.push_back({"liouville", "window_width", [](std::mt19937_64& rng) {
                   const Rational qs[] = {{1, 2}, {2, 3}, {3, 2}, {2, 1}};
                   for (int t = 0; t < 100; ++t) {
                     LiouvilleSpec s{uniform(rng, 0.1, 3), uniform(rng, -1, 1), uniform(rng, -2, 2),
                                     uniform(rng, 0.1, 0.9), {}, {}};
                     const Rational& q = qs[rng() % 4];
                     long n = 1 + static_cast<long>(rng() % 40), m = static_cast<long>(rng() % 100);
                     Interval w = q_window(s, n, m, q);
                     Real qv = q.value();
                     Real expect = abs(qv - qv * qv) * abs(s.Xi) * pow(s.lambda, n) / (s.gamma * n);
                     if (!(w.lo < w.hi) || !approx_equal(w.width(), expect, working_tol() * 1024))
                       return failed("n=" + std::to_string(n));
                   }
                   return Outcome{};
                 }});
  out.push_back({"liouville", "construct_and_verify", [](std::mt19937_64& rng) {
                   LiouvilleSpec s{Real(1), Real(0), Real("0.7"), Real("0.95"), {{1, 2}, {2, 1}}, {2, 4, 8, 16}};
                   Construction c = construct_A(s, 4, {rng(), 3});
                   VerifyResult v = verify(c.A, s, c.witnesses);
                   if (!v.ok) return failed("witness " + std::to_string(*v.first_failure));
                   return Outcome{};
                 }});
  return out;
}

/// Runs every check whose module equals `filter` (all when empty).
inline std::vector<Result> run(const std::string& filter, std::uint64_t seed) {
  std::vector<Result> out;
  for (const Check& c : registry()) {
    if (!filter.empty() && c.module != filter) continue;
    std::mt19937_64 rng(seed);
    Result r{c.module, c.name, false, ""};
    try {
      Outcome o = c.run(rng);
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<std::string> modules() {
  return {"numerics", "monodromy", "connections", "progressions", "heart", "liouville"};
}

}  // namespace polylab::selftest
