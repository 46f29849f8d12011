#pragma once

// Invariants of two-saddle heart families and the comparison pipeline
// (density, offset, good-pair windows, word order).

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polylab/connections.hpp"
#include "polylab/liouville.hpp"
#include "polylab/progressions.hpp"

namespace polylab {

struct HeartFamily {
  Real lambda;
  Real mu;
  Real C1, C2;
  Real B1, B2;

  void validate() const {
    if (!(lambda > 0 && lambda < 1)) fail(ErrorKind::precondition, "lambda must lie in (0,1)");
    if (!(lambda * lambda * mu > 1)) fail(ErrorKind::precondition, "lambda^2 mu must exceed 1");
    if (!(C1 > 0) || !(C2 > 0)) fail(ErrorKind::precondition, "C1, C2 must be positive");
    if (!(B1 > 0 && B1 < 1) || !(B2 > 0 && B2 < 1)) fail(ErrorKind::precondition, "B1, B2 must lie in (0,1)");
  }

  Real nu1() const { return lambda; }
  Real nu2() const { return 1 / (lambda * lambda * mu); }
  Real alpha() const { return -boost::multiprecision::log(nu1()); }
  Real gamma() const { return boost::multiprecision::log(lambda * lambda * mu); }
  Real C(int j) const { return j == 1 ? C1 : C2; }
  Real B(int j) const { return j == 1 ? B1 : B2; }
  Real nu(int j) const { return j == 1 ? nu1() : nu2(); }
  /// ln C_j / (1 - nu_j)
  Real c(int j) const { return boost::multiprecision::log(C(j)) / (1 - nu(j)); }
};

struct LatticeResidue {
  Real residue;  // x - s ln nu2 - k ln nu1 with the smallest |.| found
  long s = 0;
  long k = 0;
};

struct InvariantReport {
  Real A, nu1, nu2, alpha, gamma;
  Real beta1, beta2;
  Real tau;       // (beta2 - beta1)/gamma
  Real tau_prog;  // progression offset (beta1 - beta2)/gamma = -tau
  Real Xi, Theta;
  bool generic = true;  // Xi != 0 beyond working tolerance
  std::optional<Real> lnXi_mod_lnNu2, lnXi_mod_lnNu1;
  std::optional<LatticeResidue> lnXi_mod_lattice;
  Real identity_gap;  // (ln|Xi| - ln|Theta|) - (beta2 - beta1); 0 when not generic
};

/// Representative of x modulo |L| in [0, |L|).
inline Real reduce_mod(const Real& x, const Real& L) {
  using boost::multiprecision::abs;
  using boost::multiprecision::floor;
  Real m = abs(L);
  return x - m * floor(x / m);
}

/// Smallest |x - s a - k b| over |s|, |k| <= bound.  The lattice is dense for
/// irrational a/b, so the result depends on the bound.
inline LatticeResidue reduce_lattice(const Real& x, const Real& a, const Real& b, long bound) {
  using boost::multiprecision::abs;
  using boost::multiprecision::round;
  LatticeResidue best{x, 0, 0};
  for (long k = -bound; k <= bound; ++k) {
    Real rest = x - b * k;
    Real sr = round(rest / a);
    long s = sr.convert_to<long>();
    if (s < -bound) s = -bound;
    if (s > bound) s = bound;
    Real r = rest - a * s;
    if (abs(r) < abs(best.residue)) best = {r, s, k};
  }
  return best;
}

inline InvariantReport invariants(const HeartFamily& f, long lattice_bound = 64) {
  using boost::multiprecision::abs;
  using boost::multiprecision::log;
  f.validate();
  InvariantReport r;
  r.nu1 = f.nu1();
  r.nu2 = f.nu2();
  r.alpha = f.alpha();
  r.gamma = f.gamma();
  r.A = r.alpha / r.gamma;
  try {
    r.beta1 = beta(f.C1, r.nu1, f.B1);
    r.beta2 = beta(f.C2, r.nu2, f.B2);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::domain)
      fail(ErrorKind::domain, std::string(e.what()) + "; re-mark B_j by an iterate of its monodromy");
    throw;
  }
  r.tau_prog = (r.beta1 - r.beta2) / r.gamma;
  r.tau = -r.tau_prog;
  const Real c1 = f.c(1), c2 = f.c(2);
  r.Xi = (c2 - c1) / (c1 - log(f.B1));
  r.Theta = (c1 - c2) / (c2 - log(f.B2));
  // c1 = c2 to working tolerance counts as Xi = 0: decimal input cannot hit it exactly
  r.generic = !approx_equal(c1, c2, working_tol());
  r.identity_gap = 0;
  if (r.generic) {
    Real lx = log(abs(r.Xi));
    r.identity_gap = (lx - log(abs(r.Theta))) - (r.beta2 - r.beta1);
    r.lnXi_mod_lnNu2 = reduce_mod(lx, log(r.nu2));
    r.lnXi_mod_lnNu1 = reduce_mod(lx, log(r.nu1));
    r.lnXi_mod_lattice = reduce_lattice(lx, log(r.nu2), log(r.nu1), lattice_bound);
  }
  return r;
}

struct HeartProgressions {
  PerturbedProgression i;  // step alpha, base nu1
  PerturbedProgression e;  // step gamma, base nu2
};

/// Model connection sequences; coefficients are the expansion coefficients
/// theta_j of each polycycle's own asymptotics.
inline HeartProgressions progression_model(const HeartFamily& f) {
  InvariantReport r = invariants(f);
  HeartProgressions p;
  p.i = {r.alpha, r.beta1, theta(f.C1, r.nu1, f.B1), r.nu1, {}};
  p.e = {r.gamma, r.beta2, theta(f.C2, r.nu2, f.B2), r.nu2, {}};
  return p;
}

/// Scale coefficients in the sign convention where psi nu2^tau_prog - xi = Xi.
struct ScaleCoefficients {
  Real xi;
  Real psi;
};

inline ScaleCoefficients scale_coefficients(const HeartFamily& f) {
  HeartProgressions p = progression_model(f);
  return {-p.i.coeff, -p.e.coeff};
}

/// B_j replaced by its k-th image under x -> C_j x^nu_j.
inline HeartFamily re_mark(const HeartFamily& f, int j, long k) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  if (j != 1 && j != 2) fail(ErrorKind::precondition, "polycycle index must be 1 or 2");
  f.validate();
  PowerMap m(f.C(j), f.nu(j));
  Real b = exp(-closed_iterate(m, LogValue::from_x(f.B(j)), k).y);
  if (!(b > 0 && b < 1)) fail(ErrorKind::range, "re-marked B leaves (0,1)");
  HeartFamily g = f;
  (j == 1 ? g.B1 : g.B2) = b;
  try {
    beta(g.C(j), g.nu(j), b);
  } catch (const Error&) {
    fail(ErrorKind::range, "re-marked B is not admissible");
  }
  return g;
}

enum class SequenceSource { model, solver };

struct CompareConfig {
  long depth = 10000;      // good pairs scanned for n <= depth
  std::size_t word_letters = 0;  // 0: same as depth
  long max_shift = 64;
  std::optional<Real> tol;
  std::vector<Rational> q_grid{{1, 2}, {2, 3}, {3, 4}, {4, 3}, {3, 2}, {2, 1}};
  SequenceSource source = SequenceSource::model;
  long solver_terms = 40;  // solver replaces the model for n <= solver_terms
};

struct GoodPairWitness {
  long n = 0, m = 0;
  Real D;       // A n + tau_prog - m
  Real w1, w2;  // order flips at D = w_j in each family
  bool first_i_before_e = false;
  std::vector<Rational> q_hits;  // grid windows of the first family containing A
};

enum class Verdict { possibly_equivalent, inequivalent };

struct ObstructionReport {
  Verdict verdict = Verdict::possibly_equivalent;
  std::string reason;  // density | offset | good-pair | word-order
  std::optional<ShiftPair> shift;
  std::optional<GoodPairWitness> good_pair;
  std::optional<OrderWitness> word_witness;
  // margins
  Real density_gap;
  Real offset_residual;
  Real base_gap;  // nu1 - nu1~
  Real Xi_ratio;  // Xi~ / Xi
  std::optional<Real> lnXi_gap_mod_lnNu2;
  std::optional<Real> lnXi_gap_mod_lnNu1;
  long good_pairs = 0;
  std::size_t word_overlap = 0;
};

namespace detail {

inline PerturbedProgression with_solver_remainder(PerturbedProgression p, const Real& C, const Real& nu,
                                                  const Real& B, long terms) {
  ConnectionProblem prob(PerturbedPowerFamily(C, nu), B);
  auto table = std::make_shared<std::vector<Real>>();
  PerturbedProgression model = p;
  for (long n = 0; n <= terms; ++n) table->push_back(solve_connection(prob, n).z.z - model.value(n));
  p.remainder = [table](long n) -> Real {
    if (n >= 0 && n < static_cast<long>(table->size())) return (*table)[static_cast<std::size_t>(n)];
    return 0;
  };
  return p;
}

inline HeartProgressions sequences_for(const HeartFamily& f, const CompareConfig& cfg) {
  HeartProgressions p = progression_model(f);
  if (cfg.source == SequenceSource::solver) {
    p.i = with_solver_remainder(p.i, f.C1, f.nu1(), f.B1, cfg.solver_terms);
    p.e = with_solver_remainder(p.e, f.C2, f.nu2(), f.B2, cfg.solver_terms);
  }
  return p;
}

}  // namespace detail

/// Obstruction search between two families; never proves equivalence.
inline ObstructionReport compare(const HeartFamily& f1, const HeartFamily& f2, const CompareConfig& cfg = {}) {
  using boost::multiprecision::abs;
  using boost::multiprecision::log;
  using boost::multiprecision::round;
  const Real tol = cfg.tol ? *cfg.tol : working_tol();
  InvariantReport r1 = invariants(f1), r2 = invariants(f2);
  ObstructionReport out;
  out.base_gap = r1.nu1 - r2.nu1;
  out.Xi_ratio = r1.generic ? Real(r2.Xi / r1.Xi) : infinity();
  if (r1.generic && r2.generic) {
    Real gap = log(abs(r2.Xi)) - log(abs(r1.Xi));
    out.lnXi_gap_mod_lnNu2 = reduce_mod(gap, log(r1.nu2));
    out.lnXi_gap_mod_lnNu1 = reduce_mod(gap, log(r1.nu1));
  }

  // (a), (b)
  EquivalenceSearch es;
  es.max_shift = cfg.max_shift;
  es.tol = tol;
  EquivalenceResult eq = equivalent_pairs({r1.A, r1.tau_prog}, {r2.A, r2.tau_prog}, es);
  out.density_gap = eq.density_gap;
  out.offset_residual = eq.best_residual;
  if (!(eq.density_gap < tol)) {
    out.verdict = Verdict::inequivalent;
    out.reason = "density";
    return out;
  }
  if (!eq.shift) {
    out.verdict = Verdict::inequivalent;
    out.reason = "offset";
    return out;
  }
  const ShiftPair sh = *eq.shift;
  out.shift = sh;

  HeartProgressions p1 = detail::sequences_for(f1, cfg), p2 = detail::sequences_for(f2, cfg);

  // (c) good pairs |A n + tau_prog - m| < 1/n
  LiouvilleSpec window_spec{r1.gamma, r1.beta2 - r1.beta1, r1.generic ? r1.Xi : Real(1), r1.nu1, cfg.q_grid, {1}};
  for (long n = 1; n <= cfg.depth; ++n) {
    Real t = r1.A * n + r1.tau_prog;
    Real mr = round(t);
    Real D = t - mr;
    if (!(abs(D) * n < 1)) continue;
    long m = mr.convert_to<long>();
    if (m < 1 || n + sh.s < 0 || m - sh.p < 0) continue;
    ++out.good_pairs;
    Real w1 = (p1.e.perturbation(m) - p1.i.perturbation(n)) / r1.gamma;
    Real w2 = (p2.e.perturbation(m - sh.p) - p2.i.perturbation(n + sh.s)) / r2.gamma;
    bool before1 = D < w1, before2 = D < w2;
    if (before1 != before2) {
      GoodPairWitness w{n, m, D, w1, w2, before1, {}};
      if (r1.generic)
        for (const auto& q : cfg.q_grid)
          if (q_window(window_spec, n, m, q).contains_strictly(r1.A)) w.q_hits.push_back(q);
      out.good_pair = w;
      break;
    }
  }

  // (d) word order on truncated words
  const std::size_t letters = cfg.word_letters ? cfg.word_letters : static_cast<std::size_t>(cfg.depth);
  Word w1 = interleaving_word(p1.i, p1.e, letters, 1, 1, tol);
  Word w2 = interleaving_word(p2.i, p2.e, letters, 1, 1, tol);
  WordComparison wc = words_equivalent_up_to_shift(w1, w2, sh);
  out.word_overlap = wc.overlap;
  if (wc.witness) out.word_witness = wc.witness;

  if (out.good_pair || out.word_witness) {
    out.verdict = Verdict::inequivalent;
    out.reason = out.good_pair ? "good-pair" : "word-order";
  }
  return out;
}

/// A partner family with nu1~ = lambda_tilde and the same A and tau, tuned so
/// that the first good pair n0 >= n_min lies strictly between the two
/// order-flip points.  Returns (adjusted f, partner, n0); the adjustment moves
/// A by less than 2/n0^2 through mu alone.
struct EngineeredPair {
  HeartFamily first;
  HeartFamily second;
  long n0 = 0;
};

inline EngineeredPair engineer_mismatched_partner(const HeartFamily& f, const Real& lambda_tilde, long n_min) {
  using boost::multiprecision::abs;
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  using boost::multiprecision::round;
  f.validate();
  if (n_min < 8) fail(ErrorKind::precondition, "n_min must be at least 8");
  if (!(lambda_tilde > 0 && lambda_tilde < 1) || lambda_tilde == f.lambda)
    fail(ErrorKind::precondition, "partner lambda must differ and lie in (0,1)");

  long n0 = n_min;
  {
    InvariantReport r = invariants(f);
    for (;; ++n0) {
      if (n0 > 1000 * n_min) fail(ErrorKind::budget, "no good pair found");
      Real t = r.A * n0 + r.tau_prog;
      if (abs(t - round(t)) * n0 < Real(1) / 2) break;
    }
  }

  auto with_A = [](const HeartFamily& base, const Real& lam, const Real& A) {
    HeartFamily g = base;
    g.lambda = lam;
    g.mu = exp(-log(lam) / A) / (lam * lam);
    return g;
  };
  // partner: same C1, C2, B1; B2 chosen so tau matches
  auto partner_of = [&](const HeartFamily& g, const Real& A) {
    HeartFamily h = with_A(g, lambda_tilde, A);
    InvariantReport rg = invariants(g);
    Real b1 = beta(h.C1, h.nu1(), h.B1);
    Real b2 = b1 - h.gamma() * rg.tau_prog;
    h.B2 = exp(h.c(2) - exp(b2));
    h.validate();
    return h;
  };
  auto mismatch = [&](const Real& A) {
    HeartFamily g = with_A(f, f.lambda, A);
    HeartFamily h = partner_of(g, A);
    InvariantReport rg = invariants(g), rh = invariants(h);
    HeartProgressions pg = progression_model(g), ph = progression_model(h);
    Real t = rg.A * n0 + rg.tau_prog;
    Real m = round(t);
    long mi = m.convert_to<long>();
    Real D = t - m;
    Real w1 = (pg.e.perturbation(mi) - pg.i.perturbation(n0)) / rg.gamma;
    Real w2 = (ph.e.perturbation(mi) - ph.i.perturbation(n0)) / rh.gamma;
    return std::make_pair(Real(D - (w1 + w2) / 2), mi);
  };

  const Real A0 = invariants(f).A;
  Real lo = A0 - Real(2) / (n0 * n0), hi = A0 + Real(2) / (n0 * n0);
  auto [g_lo, m_lo] = mismatch(lo);
  auto [g_hi, m_hi] = mismatch(hi);
  if (m_lo != m_hi || !(g_lo < 0 && g_hi > 0))
    fail(ErrorKind::precondition, "order-flip points not bracketed near n0 = " + std::to_string(n0));
  for (int it = 0; it < 4 * static_cast<int>(working_bits()); ++it) {
    Real mid = (lo + hi) / 2;
    if (mid == lo || mid == hi) break;
    if (mismatch(mid).first < 0)
      lo = mid;
    else
      hi = mid;
  }
  Real A = (lo + hi) / 2;
  HeartFamily g = with_A(f, f.lambda, A);
  return {g, partner_of(g, A), n0};
}

}  // namespace polylab
